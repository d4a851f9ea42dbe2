#include "qrsim/spatial.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace qrsim {

Mat3 skew(const Vec3& v)
{
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Rotation rot_z(double angle)
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 m;
  m << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return Rotation{m};
}

double orthonormality_defect(const Mat3& m)
{
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Rotation orthonormalize(const Mat3& m)
{
  if (!m.allFinite()) {
    throw std::domain_error("orthonormalize: non-finite matrix");
  }
  const double defect = orthonormality_defect(m);
  if (defect > 1e-2) {
    throw std::domain_error("orthonormalize: matrix is " + std::to_string(defect) +
                            " from orthonormal (limit 1e-2)");
  }
  if (m.determinant() <= 0.0) {
    throw std::domain_error("orthonormalize: matrix is not a proper rotation");
  }

  Mat3 x = m;
  for (int iter = 0; iter < 30; ++iter) {
    const Mat3 next = 0.5 * (x + x.inverse().transpose());
    const double step = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (step < 1e-15) {
      break;
    }
  }
  return Rotation{x};
}

double wrap_angle(double angle)
{
  constexpr double pi = std::numbers::pi;
  double a = std::remainder(angle, 2.0 * pi);
  if (a <= -pi) {
    a += 2.0 * pi;
  }
  return a;
}

double angle_about_z(const Mat3& r)
{
  const Vec3 z = r.col(2);
  if ((z - Vec3::UnitZ()).cwiseAbs().maxCoeff() > 1e-3) {
    throw std::domain_error("angle_about_z: orientation is not planar about z");
  }
  return wrap_angle(std::atan2(r(1, 0), r(0, 0)));
}

double unwrap_angle(double previous_unwrapped, double wrapped)
{
  return previous_unwrapped + wrap_angle(wrapped - previous_unwrapped);
}

} // namespace qrsim
