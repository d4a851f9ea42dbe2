#pragma once

// The crank-rocker quick-return mechanism: five links, seven translational
// couplings, one rotational lock and the crank drive.
//
// Layout (defaults): crank pivot O1 at the origin, rocker pivot O3 at
// (0, -d), output-slider guide along y = slider_line_y. Every body frame has
// its x axis along the link's long dimension and z out of plane.
//
//   link 1  crank          O1 at -r/2 x, crank pin A1 at +r/2 x
//   link 2  slider block   COM at the crank pin, slides along the rocker
//   link 3  rocker arm     O3 at -l3/2 x, tip A33 at +l3/2 x
//   link 4  connecting rod A33 end at -l4/2 x, C5 end at +l4/2 x
//   link 5  output slider  driven at its COM, slides along world x

#include <span>
#include <string>
#include <vector>

#include "qrsim/mechanism.hpp"

namespace qrsim {

struct LinkParams
{
  double mass = 0.0; // kg
  double lx = 0.0;   // m
  double ly = 0.0;
  double lz = 0.0;
};

struct QrmLinks
{
  LinkParams crank{0.5, 0.2, 0.01, 0.01};
  LinkParams slider{0.1, 0.01, 0.01, 0.01};
  LinkParams rocker{0.7, 0.7, 0.01, 0.01};
  LinkParams rod{0.3, 0.4, 0.01, 0.01};
  LinkParams slider2{0.1, 0.01, 0.01, 0.01};
};

struct SpringDamper
{
  double stiffness = 0.0;
  double damping = 0.0;
};

struct QrmCouplings
{
  SpringDamper k01{1e5, 20.0};  // crank - ground at O1
  SpringDamper k12{1e5, 20.0};  // crank - slider block at A
  SpringDamper k3c{1e5, 20.0};  // slider block along rocker
  SpringDamper k23r{100.0, 0.5}; // slider block - rocker rotation lock
  SpringDamper k03{1e5, 20.0};  // rocker - ground at O3
  SpringDamper k34{1e5, 20.0};  // rocker tip - rod at A33
  SpringDamper k45{1e5, 20.0};  // rod - output slider at C5
  SpringDamper k5c{1e5, 20.0};  // output slider along the guide
};

struct DriveParams
{
  double rate = 5.0;        // rad/s
  double stiffness = 100.0; // K_C, N·m/rad
  double damping = 100.0;   // R_C, N·m·s/rad
};

struct QrmGeometry
{
  double crank_radius = 0.2;
  double rocker_length = 0.7;
  double rod_length = 0.4;
  double pivot_distance = 0.4;
  double slider_line_y = 0.3;
  double initial_crank_angle = 1.5708;

  /// Throws std::invalid_argument quoting the violated inequality.
  void validate() const;
};

struct QrmParameters
{
  QrmLinks links;
  QrmCouplings couplings;
  DriveParams drive;
  QrmGeometry geometry;
  Vec3 gravity = Vec3::Zero();
  bool sliding_friction = false; // damp the free axis of both slides
};

/// Coupling names, in assembly order.
namespace coupling_names {
inline constexpr const char* kO1 = "O1";
inline constexpr const char* kA = "A";
inline constexpr const char* kSlide3 = "slide_3C";
inline constexpr const char* kO3 = "O3";
inline constexpr const char* kA33 = "A33";
inline constexpr const char* kC5 = "C5";
inline constexpr const char* kSlide5 = "slide_5C";
inline constexpr const char* kLock23 = "lock_23r";
} // namespace coupling_names

struct QuickReturnModel
{
  Mechanism mechanism;
  SystemState initial;
};

/// Assembled exactly at the initial crank angle: every coupling deflection
/// is zero and all links are at rest.
QuickReturnModel build_quick_return(const QrmParameters& params);

struct KinematicPose
{
  double psi = 0.0;    // rocker direction from O3, rad
  Vec3 tip = Vec3::Zero();
  double slider_x = 0.0;
};

/// Rigid-link position analysis at crank angle theta.
KinematicPose kinematic_oracle(double theta, const QrmGeometry& geom);

/// (π + 2α)/(π − 2α) with sin α = r/d.
double theoretical_time_ratio(double crank_radius, double pivot_distance);

struct StrokeReport
{
  double forward_duration = 0.0; // s, the longer stroke
  double return_duration = 0.0;  // s
  double time_ratio = 0.0;
  double stroke_length = 0.0;    // m
  std::vector<double> reversal_times;
};

/// Reversal detection on a sampled reciprocating signal, using samples with
/// t >= cutoff. Extrema are found from sign changes of the forward
/// difference with a hysteresis of 1% of the window range, then refined by
/// a parabola through the neighbouring samples. Durations are averaged over
/// all complete strokes of each direction. Throws std::invalid_argument if
/// fewer than three reversals are found.
StrokeReport stroke_analysis(std::span<const double> t, std::span<const double> x,
                             double cutoff);

} // namespace qrsim
