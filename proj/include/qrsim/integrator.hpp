#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qrsim/mechanism.hpp"

namespace qrsim {

/// Flat storage order: per body (id order) r_com(3), R(9, row-major), p(3),
/// L(3); then every rotational-coupling theta(3); then the drive error(1).
struct FlatState
{
  double t = 0.0;
  std::vector<double> values;
};

struct StateShape
{
  std::size_t bodies = 0;
  std::size_t rotational = 0;

  std::size_t flat_size() const { return 18 * bodies + 3 * rotational + 1; }
};

StateShape shape_of(const Mechanism& m);

FlatState flatten(const SystemState& s);

/// Throws std::invalid_argument on a length mismatch.
SystemState unflatten(const FlatState& f, StateShape shape);

struct SimConfig
{
  double dt = 5e-6;            // s
  double t_end = 10.0;         // s
  int record_stride = 200;     // steps per logged row
  int renormalize_stride = 1;  // steps between orthonormalizations

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// round(t_end / dt)
  std::int64_t step_count() const;
};

/// Linear stability of one RK4 step around a state. The derivative is
/// linearized by central differences, and every eigenvalue λ must satisfy
/// |P(λ·dt)| <= max(1, |exp(λ·dt)|) where P is the RK4 amplification
/// polynomial, so modes that are stable in continuous time stay stable.
struct StabilityReport
{
  double dt = 0.0;
  double max_excess = 0.0;                      // worst |P| - max(1, |exp|)
  std::complex<double> limiting_eigenvalue{};   // eigenvalue attaining it
  double spectral_radius = 0.0;                 // max |λ|, 1/s
  bool stable = false;
};

StabilityReport linear_stability(const Mechanism& m, const SystemState& s, double dt);

/// Largest dt the linearization admits, found by bisection on
/// `linear_stability`.
double max_stable_dt(const Mechanism& m, const SystemState& s);

/// Classical four-stage Runge-Kutta over `derivative`, with reusable stage
/// storage. Orientations are carried as raw 3x3 matrices through the stages
/// and projected back onto SO(3) after the step when `renormalize` is set.
class Rk4Stepper
{
public:
  explicit Rk4Stepper(const Mechanism& m);

  void step(SystemState& s, double dt, bool renormalize = true);

  /// Evaluation of the derivative at the last state passed to step(), taken
  /// at its first stage.
  const Evaluation& first_stage() const { return k_[0]; }

private:
  const Mechanism& m_;
  Evaluation k_[4];
  SystemState stage_;
};

SystemState rk4_step(const Mechanism& m, const SystemState& s, double dt, bool renormalize = true);

/// Failure during `simulate`, carrying the simulated time of the failing step.
class SimulationError : public std::runtime_error
{
public:
  SimulationError(double t, const std::string& what);
  double time() const { return t_; }

private:
  double t_;
};

struct TimeSeries
{
  std::vector<ProbeRecord> rows;
};

/// Called for every logged row with the state, its evaluation and the row.
using Observer = std::function<void(const SystemState&, const Evaluation&, const ProbeRecord&)>;

/// Fixed-step run from s0 over round(t_end/dt) steps. Rows are logged at
/// step 0, every record_stride steps and at the final step. Rows are only
/// collected when the mechanism has a probe layout; the observer is called
/// either way. Throws std::invalid_argument for a bad config or a step size
/// that fails `linear_stability` at s0, and SimulationError if a step fails.
TimeSeries simulate(const Mechanism& m, const SystemState& s0, const SimConfig& cfg,
                    const Observer& observer = {});

} // namespace qrsim
