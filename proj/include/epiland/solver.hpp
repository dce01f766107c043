#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "epiland/diagnostics.hpp"
#include "epiland/discretization.hpp"
#include "epiland/landscape.hpp"
#include "epiland/noise.hpp"
#include "epiland/rng.hpp"

namespace epiland {

/// Additive drift hook: fills per-node (fu, fv) for the state at time t.
using Forcing =
    std::function<void(double t, const FieldState& state, std::span<double> fu, std::span<double> fv)>;

/// Constant-in-space pull strength * (target - spatial mean).
Forcing pull_toward(Point target, double strength, std::shared_ptr<const Discretization> disc);

/// Starting fields: one constant point, or explicit per-node profiles.
struct InitialCondition {
  Point constant;
  std::vector<double> u;
  std::vector<double> v;

  static InitialCondition at(Point p) { return {p, {}, {}}; }
  static InitialCondition profile(std::vector<double> u, std::vector<double> v) {
    return {{}, std::move(u), std::move(v)};
  }
  FieldState materialize(const Discretization& disc) const;
};

struct SimConfig {
  std::shared_ptr<const MollifiedLandscape> landscape;
  std::shared_ptr<const NoiseModel> noise;
  std::shared_ptr<const Discretization> disc;
  double sigma = 0.0;
  double t_end = 1.0;
  std::size_t record_stride = 1;
  InitialCondition initial;
  Forcing forcing;            ///< optional
  bool keep_states = false;   ///< store full snapshots in the trajectory
  std::size_t residual_check_interval = 100;  ///< 0 disables the implicit-solve spot check
};

/// Throws ConfigError for inconsistent configurations; returns warnings
/// (currently: explicit drift step dt * 2 * max(a) above 0.5).
std::vector<std::string> validate(const SimConfig& cfg);

/// Number of time steps to reach t_end.
std::size_t step_count(const SimConfig& cfg);

/// One semi-implicit Euler-Maruyama step, in place:
///   u <- (I + dt d1 A)^{-1} [u + (f(u, v) + e_u) dt + sigma dW1]
/// and the v analogue. Throws DomainEscape if a node leaves the landscape.
class Stepper {
 public:
  explicit Stepper(const SimConfig& cfg);

  void step(FieldState& state, const NoiseIncrement& inc);
  /// Largest residual |(I + r A) x - b|_inf seen at the spot checks.
  double max_residual() const noexcept { return max_residual_; }
  std::size_t residual_checks() const noexcept { return checks_; }

 private:
  const SimConfig* cfg_;
  std::vector<double> fu_, fv_, bu_, bv_, tmp_;
  std::size_t steps_ = 0;
  double max_residual_ = 0.0;
  std::size_t checks_ = 0;
};

FieldState em_step(const FieldState& state, const SimConfig& cfg, const NoiseIncrement& inc);

/// A running trajectory: state, rng stream and scratch buffers.
class Simulation {
 public:
  Simulation(const SimConfig& cfg, Rng rng);

  /// Advances one step with a fresh increment. Throws SimulationAbort.
  void step();
  const FieldState& state() const noexcept { return state_; }
  std::size_t steps_taken() const noexcept { return n_; }
  const Stepper& stepper() const noexcept { return stepper_; }

 private:
  const SimConfig* cfg_;
  Rng rng_;
  IncrementSampler sampler_;
  Stepper stepper_;
  NoiseIncrement inc_;
  FieldState state_;
  std::size_t n_ = 0;
};

/// Integrates to t_end, recording every record_stride steps (plus the initial
/// state) with the L2 averages, spatial means and basin labels.
Trajectory simulate(const SimConfig& cfg, Rng rng);

/// n independent trajectories; trajectory i uses stream i of `seed`, so the
/// result does not depend on `jobs`.
std::vector<Trajectory> simulate_ensemble(const SimConfig& cfg, std::size_t n, std::uint64_t seed,
                                          std::size_t jobs = 1);
/// Appends the observables of `state` to `traj`.
void record(Trajectory& traj, const FieldState& state, const SimConfig& cfg);

}  // namespace epiland
