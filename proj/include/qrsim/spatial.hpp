#pragma once

// Small 3-D algebra layer shared by every module. Vectors and matrices are
// fixed-size Eigen types; rotations are a strong type so that only
// orthonormal matrices travel under that name.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace qrsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Proper rotation matrix whose columns are the unit axes of a body frame
/// expressed in the world frame.
class Rotation
{
public:
  Rotation() : m_(Mat3::Identity()) {}

  static Rotation identity() { return Rotation{}; }

  const Mat3& matrix() const { return m_; }
  Vec3 axis(int i) const { return m_.col(i); }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& other) const { return Rotation{m_ * other.m_}; }

private:
  explicit Rotation(const Mat3& m) : m_(m) {}

  friend Rotation rot_z(double angle);
  friend Rotation orthonormalize(const Mat3& m);

  Mat3 m_;
};

/// Cross-product matrix: skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

/// Rotation about the world z axis.
Rotation rot_z(double angle);

/// max |RᵀR − I| over all entries.
double orthonormality_defect(const Mat3& m);

/// Nearest rotation in the Frobenius sense (orthogonal polar factor).
///
/// Computed with the Newton iteration X ← (X + X⁻ᵀ)/2, which converges
/// quadratically to the polar factor and treats all columns alike. Throws
/// std::domain_error when the input is more than 1e-2 away from
/// orthonormal or is a reflection: either means the integrator diverged.
Rotation orthonormalize(const Mat3& m);

/// Wraps an angle into (−π, π].
double wrap_angle(double angle);

/// Planar heading atan2(R10, R00) in (−π, π]. Throws std::domain_error if the
/// third column is further than 1e-3 from +z.
double angle_about_z(const Mat3& r);

/// Continues an unwrapped angle sequence with a new principal value.
double unwrap_angle(double previous_unwrapped, double wrapped);

} // namespace qrsim
