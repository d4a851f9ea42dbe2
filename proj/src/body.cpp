#include "qrsim/body.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace qrsim {

RigidBody::RigidBody(BodyId id, std::string name, double mass, const Mat3& inertia_body,
                     std::vector<Attachment> attachments)
  : id_(id), name_(std::move(name)), mass_(mass), inertia_(inertia_body),
    attachments_(std::move(attachments))
{
  if (static_cast<int>(id_) < 1) {
    throw std::invalid_argument("RigidBody '" + name_ + "': id must be >= 1");
  }
  if (!(mass_ > 0.0) || !std::isfinite(mass_)) {
    throw std::invalid_argument("RigidBody '" + name_ + "': mass must be positive");
  }
  if (!inertia_.allFinite() || (inertia_ - inertia_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("RigidBody '" + name_ + "': inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia_, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("RigidBody '" + name_ + "': inertia must be positive-definite");
  }
  for (std::size_t i = 0; i < attachments_.size(); ++i) {
    if (!attachments_[i].offset.allFinite()) {
      throw std::invalid_argument("RigidBody '" + name_ + "': non-finite attachment offset");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (attachments_[i].label == attachments_[j].label) {
        throw std::invalid_argument("RigidBody '" + name_ + "': duplicate attachment '" +
                                    attachments_[i].label + "'");
      }
    }
  }
}

const Vec3& RigidBody::attachment(std::string_view label) const
{
  for (const auto& a : attachments_) {
    if (a.label == label) {
      return a.offset;
    }
  }
  throw std::out_of_range("RigidBody '" + name_ + "' has no attachment '" + std::string(label) +
                          "'");
}

Mat3 box_inertia(double mass, double lx, double ly, double lz)
{
  if (!(mass > 0.0 && lx > 0.0 && ly > 0.0 && lz > 0.0)) {
    throw std::invalid_argument("box_inertia: mass and edge lengths must be positive");
  }
  const double k = mass / 12.0;
  return Vec3(k * (ly * ly + lz * lz), k * (lx * lx + lz * lz), k * (lx * lx + ly * ly))
      .asDiagonal();
}

Mat3 world_inertia(const Mat3& R, const Mat3& inertia_body)
{
  return R * inertia_body * R.transpose();
}

Vec3 omega_from_state(const BodyState& state, const Mat3& inertia_body)
{
  const Mat3 iw = world_inertia(state.R, inertia_body);
  Mat3 inv;
  bool invertible = false;
  iw.computeInverseWithCheck(inv, invertible, 0.0);
  if (!invertible || !inv.allFinite()) {
    throw std::domain_error("omega_from_state: world inertia is singular");
  }
  const double cond = iw.cwiseAbs().colwise().sum().maxCoeff() *
                      inv.cwiseAbs().colwise().sum().maxCoeff();
  if (cond > 1e12) {
    throw std::domain_error("omega_from_state: world inertia condition estimate " +
                            std::to_string(cond) + " exceeds 1e12");
  }
  return inv * state.L;
}

Vec3 point_position(const BodyState& state, const Vec3& offset)
{
  return state.r_com + state.R * offset;
}

Vec3 point_velocity(const BodyState& state, double mass, const Mat3& inertia_body,
                    const Vec3& offset)
{
  const Vec3 omega = omega_from_state(state, inertia_body);
  return state.p / mass + omega.cross(state.R * offset);
}

} // namespace qrsim
