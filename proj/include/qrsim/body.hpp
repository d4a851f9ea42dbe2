#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qrsim/spatial.hpp"

namespace qrsim {

/// Link number. Moving links are numbered from 1; 0 is the fixed frame.
enum class BodyId : int {};

inline constexpr BodyId kGround{0};

constexpr int index_of(BodyId id) { return static_cast<int>(id) - 1; }
constexpr BodyId body_id(int n) { return static_cast<BodyId>(n); }

struct Attachment
{
  std::string label;
  Vec3 offset; // body frame, from the centre of mass
};

/// Constant inertial description of one rigid link. Body frames are centred
/// on the centre of mass with x along the link's long dimension.
class RigidBody
{
public:
  RigidBody(BodyId id, std::string name, double mass, const Mat3& inertia_body,
            std::vector<Attachment> attachments = {});

  BodyId id() const { return id_; }
  const std::string& name() const { return name_; }
  double mass() const { return mass_; }
  const Mat3& inertia_body() const { return inertia_; }
  const std::vector<Attachment>& attachments() const { return attachments_; }

  /// Offset of a labelled point; throws std::out_of_range if absent.
  const Vec3& attachment(std::string_view label) const;

private:
  BodyId id_;
  std::string name_;
  double mass_;
  Mat3 inertia_;
  std::vector<Attachment> attachments_;
};

/// Dynamic state of a link. R is the integrated orientation; between
/// renormalizations it may carry round-off drift away from SO(3).
struct BodyState
{
  Vec3 r_com = Vec3::Zero(); // world position of the centre of mass, m
  Mat3 R = Mat3::Identity(); // body -> world
  Vec3 p = Vec3::Zero();     // translational momentum, kg·m/s
  Vec3 L = Vec3::Zero();     // angular momentum about the COM, world frame, kg·m²/s
};

/// Uniform cuboid with edge lengths lx, ly, lz about its centroid.
Mat3 box_inertia(double mass, double lx, double ly, double lz);

/// R · I_body · Rᵀ
Mat3 world_inertia(const Mat3& R, const Mat3& inertia_body);

/// ω = (R I_b Rᵀ)⁻¹ L. Throws std::domain_error when the world inertia has a
/// 1-norm condition estimate above 1e12.
Vec3 omega_from_state(const BodyState& state, const Mat3& inertia_body);

Vec3 point_position(const BodyState& state, const Vec3& offset);

Vec3 point_velocity(const BodyState& state, double mass, const Mat3& inertia_body,
                    const Vec3& offset);

inline Vec3 point_velocity(const RigidBody& body, const BodyState& state, const Vec3& offset)
{
  return point_velocity(state, body.mass(), body.inertia_body(), offset);
}

} // namespace qrsim
