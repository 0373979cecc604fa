#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "voxmill/errors.hpp"

namespace voxmill {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

/// Rigid rotation, stored as a unit quaternion. 2D mode rotations are
/// z-axis rotations; `angle2d()` recovers the wrapped angle.
class Orientation {
 public:
  Orientation() = default;

  static Orientation identity() { return Orientation(); }

  static Orientation from_angle_2d(double theta) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    theta = std::fmod(theta, two_pi);
    if (theta < 0) theta += two_pi;
    Orientation o;
    o.w_ = std::cos(theta / 2);
    o.z_ = std::sin(theta / 2);
    return o;
  }

  static Orientation from_axis_angle(Vec3 axis, double angle) {
    double n = axis.norm();
    if (n == 0.0) throw ParamError("orientation axis must be nonzero");
    double s = std::sin(angle / 2) / n;
    Orientation o;
    o.w_ = std::cos(angle / 2);
    o.x_ = axis.x * s;
    o.y_ = axis.y * s;
    o.z_ = axis.z * s;
    return o;
  }

  static Orientation from_quat(double w, double x, double y, double z) {
    double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (n == 0.0) throw ParamError("orientation quaternion must be nonzero");
    Orientation o;
    o.w_ = w / n;
    o.x_ = x / n;
    o.y_ = y / n;
    o.z_ = z / n;
    return o;
  }

  int id() const { return id_; }
  void set_id(int id) { id_ = id; }

  std::array<double, 4> quat() const { return {w_, x_, y_, z_}; }

  /// Row-major 3x3 rotation matrix.
  std::array<double, 9> matrix() const {
    double w = w_, x = x_, y = y_, z = z_;
    return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
            2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
            2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
  }

  Vec3 apply(const Vec3& v) const {
    auto m = matrix();
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Vec3 apply_inverse(const Vec3& v) const {
    auto m = matrix();  // orthogonal: inverse = transpose
    return {m[0] * v.x + m[3] * v.y + m[6] * v.z,
            m[1] * v.x + m[4] * v.y + m[7] * v.z,
            m[2] * v.x + m[5] * v.y + m[8] * v.z};
  }

  bool is_identity(double eps = 1e-12) const {
    return std::abs(std::abs(w_) - 1.0) <= eps && std::abs(x_) <= eps &&
           std::abs(y_) <= eps && std::abs(z_) <= eps;
  }

  /// True if the rotation maps the z axis to itself (safe for nz = 1 fields).
  bool is_planar(double eps = 1e-12) const {
    return std::abs(x_) <= eps && std::abs(y_) <= eps;
  }

  double angle_2d() const {
    constexpr double two_pi = 6.283185307179586476925286766559;
    double a = 2.0 * std::atan2(z_, w_);
    a = std::fmod(a, two_pi);
    if (a < 0) a += two_pi;
    return a;
  }

 private:
  double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
  int id_ = 0;
};

using OrientationSet = std::vector<Orientation>;

/// Assigns consecutive ids; used when building a tool's orientation list.
inline OrientationSet make_orientation_set(std::vector<Orientation> list) {
  for (size_t i = 0; i < list.size(); ++i) list[i].set_id(static_cast<int>(i));
  return list;
}

}  // namespace voxmill
