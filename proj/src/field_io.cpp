#include "voxmill/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace voxmill {

static_assert(std::endian::native == std::endian::little,
              "VOXFIELD I/O assumes a little-endian host");

void write_field(const ScalarField& f, const std::string& path, const std::string& dtype) {
  if (dtype != "f64" && dtype != "u8")
    throw ParamError("write_field: dtype must be f64 or u8");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_field: cannot open " + path);

  const GridSpec& g = f.spec();
  std::ostringstream header;
  header.precision(17);
  header << "VOXFIELD v1 " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << ' '
         << g.spacing[0] << ' ' << g.spacing[1] << ' ' << g.spacing[2] << ' '
         << g.origin[0] << ' ' << g.origin[1] << ' ' << g.origin[2] << ' ' << dtype
         << '\n';
  out << header.str();

  if (dtype == "f64") {
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.size() * sizeof(double)));
  } else {
    std::vector<std::uint8_t> bytes(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      double v = f[i];
      if (v != 0.0 && v != 1.0)
        throw ParamError("write_field: u8 dtype requires a binary field");
      bytes[i] = v != 0.0 ? 1 : 0;
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw IoError("write_field: short write to " + path);
}

ScalarField read_field(const std::string& path, const GridSpec* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_field: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw HeaderError("read_field: missing header in " + path);

  std::istringstream hs(line);
  std::string magic, version, dtype;
  GridSpec g;
  hs >> magic >> version >> g.dims[0] >> g.dims[1] >> g.dims[2] >> g.spacing[0] >>
      g.spacing[1] >> g.spacing[2] >> g.origin[0] >> g.origin[1] >> g.origin[2] >> dtype;
  if (!hs || magic != "VOXFIELD" || version != "v1" || (dtype != "f64" && dtype != "u8"))
    throw HeaderError("read_field: malformed header in " + path);
  try {
    g.validate();
  } catch (const ParamError& e) {
    throw HeaderError(std::string("read_field: invalid grid in header: ") + e.what());
  }
  if (expected && g != *expected)
    throw DimensionError("read_field: grid in " + path + " does not match expected grid");

  std::size_t n = g.cell_count();
  std::vector<double> values(n);
  if (dtype == "f64") {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != n * sizeof(double))
      throw TruncationError("read_field: truncated payload in " + path);
  } else {
    std::vector<std::uint8_t> bytes(n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      throw TruncationError("read_field: truncated payload in " + path);
    for (std::size_t i = 0; i < n; ++i) values[i] = bytes[i] ? 1.0 : 0.0;
  }
  return ScalarField(g, std::move(values));
}

void write_vtk(const ScalarField& f, const std::string& path, const std::string& name) {
  std::ofstream out(path);
  if (!out) throw IoError("write_vtk: cannot open " + path);
  const GridSpec& g = f.spec();
  out.precision(9);
  out << "# vtk DataFile Version 3.0\n"
      << name << "\nASCII\nDATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << '\n'
      << "ORIGIN " << g.origin[0] << ' ' << g.origin[1] << ' ' << g.origin[2] << '\n'
      << "SPACING " << g.spacing[0] << ' ' << g.spacing[1] << ' ' << g.spacing[2] << '\n'
      << "POINT_DATA " << f.size() << "\nSCALARS " << name << " double 1\n"
      << "LOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < f.size(); ++i) out << f[i] << '\n';
  if (!out) throw IoError("write_vtk: short write to " + path);
}

}  // namespace voxmill
