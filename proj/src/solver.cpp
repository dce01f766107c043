#include "epiland/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "epiland/errors.hpp"
#include "epiland/parallel.hpp"

namespace epiland {

Forcing pull_toward(Point target, double strength, std::shared_ptr<const Discretization> disc) {
  return [target, strength, disc = std::move(disc)](double, const FieldState& s,
                                                     std::span<double> fu, std::span<double> fv) {
    const Point m = spatial_mean(s, *disc);
    std::fill(fu.begin(), fu.end(), strength * (target.u - m.u));
    std::fill(fv.begin(), fv.end(), strength * (target.v - m.v));
  };
}

FieldState InitialCondition::materialize(const Discretization& disc) const {
  FieldState s;
  const std::size_t n = disc.nodes();
  if (u.empty() && v.empty()) {
    s.u.assign(n, constant.u);
    s.v.assign(n, constant.v);
  } else {
    if (u.size() != n || v.size() != n) {
      throw ConfigError("initial profile has " + std::to_string(u.size()) + "/" +
                        std::to_string(v.size()) + " entries, grid has " + std::to_string(n));
    }
    s.u = u;
    s.v = v;
  }
  return s;
}

std::vector<std::string> validate(const SimConfig& cfg) {
  if (!cfg.landscape || !cfg.noise || !cfg.disc) throw ConfigError("simulation is missing a component");
  if (!(cfg.sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
  if (!(cfg.t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
  if (cfg.record_stride < 1) throw ConfigError("record_stride must be at least 1");
  if (cfg.noise->size() != cfg.disc->nodes()) {
    throw ConfigError("noise grid has " + std::to_string(cfg.noise->size()) + " points, solver grid " +
                      std::to_string(cfg.disc->nodes()));
  }
  (void)cfg.initial.materialize(*cfg.disc);

  std::vector<std::string> warnings;
  const double explicit_factor = cfg.disc->dt() * 2.0 * cfg.landscape->source().max_weight();
  if (explicit_factor > 0.5) {
    std::ostringstream msg;
    msg << "dt * 2 * max(weight) = " << explicit_factor << " exceeds 0.5; explicit drift may be unstable";
    warnings.push_back(msg.str());
  }
  return warnings;
}

std::size_t step_count(const SimConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.t_end / cfg.disc->dt()));
}

Stepper::Stepper(const SimConfig& cfg) : cfg_(&cfg) {
  const std::size_t n = cfg.disc->nodes();
  fu_.assign(n, 0.0);
  fv_.assign(n, 0.0);
  bu_.resize(n);
  bv_.resize(n);
  tmp_.resize(n);
}

void Stepper::step(FieldState& s, const NoiseIncrement& inc) {
  const SimConfig& cfg = *cfg_;
  const Discretization& disc = *cfg.disc;
  const MollifiedLandscape& land = *cfg.landscape;
  const std::size_t n = disc.nodes();
  const double dt = disc.dt();
  const double sigma = cfg.sigma;

  if (cfg.forcing) cfg.forcing(s.t, s, fu_, fv_);

  for (std::size_t j = 0; j < n; ++j) {
    Point f;
    if (!land.try_drift({s.u[j], s.v[j]}, f)) throw DomainEscape(s.t, j);
    bu_[j] = s.u[j] + (f.u + fu_[j]) * dt + sigma * inc.dw1[j];
    bv_[j] = s.v[j] + (f.v + fv_[j]) * dt + sigma * inc.dw2[j];
  }

  const bool check = cfg.residual_check_interval > 0 && steps_ % cfg.residual_check_interval == 0;
  std::copy(bu_.begin(), bu_.end(), s.u.begin());
  std::copy(bv_.begin(), bv_.end(), s.v.begin());
  disc.implicit_u().solve(s.u);
  disc.implicit_v().solve(s.v);
  if (check) {
    for (auto [op, x, b] : {std::tuple{&disc.implicit_u(), &s.u, &bu_},
                            std::tuple{&disc.implicit_v(), &s.v, &bv_}}) {
      op->apply(*x, tmp_);
      for (std::size_t j = 0; j < n; ++j) {
        max_residual_ = std::max(max_residual_, std::abs(tmp_[j] - (*b)[j]));
      }
    }
    ++checks_;
  }
  s.t += dt;
  ++steps_;
}

FieldState em_step(const FieldState& state, const SimConfig& cfg, const NoiseIncrement& inc) {
  if (std::abs(inc.dt - cfg.disc->dt()) > 1e-15 * cfg.disc->dt()) {
    throw PreconditionError("noise increment dt does not match the solver dt");
  }
  if (state.u.size() != cfg.disc->nodes() || state.v.size() != cfg.disc->nodes()) {
    throw PreconditionError("state length does not match the discretization");
  }
  FieldState next = state;
  Stepper stepper(cfg);
  stepper.step(next, inc);
  return next;
}

Simulation::Simulation(const SimConfig& cfg, Rng rng)
    : cfg_(&cfg),
      rng_(std::move(rng)),
      sampler_(cfg.noise),
      stepper_(cfg),
      state_(cfg.initial.materialize(*cfg.disc)) {
  inc_.dw1.assign(cfg.disc->nodes(), 0.0);
  inc_.dw2.assign(cfg.disc->nodes(), 0.0);
  inc_.dt = cfg.disc->dt();
}

void Simulation::step() {
  const double dt = cfg_->disc->dt();
  // sigma = 0 runs skip sampling; the increment stays zero.
  if (cfg_->sigma != 0.0) sampler_.sample(dt, rng_, inc_);
  stepper_.step(state_, inc_);
  ++n_;
  state_.t = static_cast<double>(n_) * dt;
  double acc = 0.0;
  for (std::size_t j = 0; j < state_.u.size(); ++j) acc += state_.u[j] + state_.v[j];
  if (!std::isfinite(acc)) throw NumericalAbort(n_);
}

void record(Trajectory& traj, const FieldState& state, const SimConfig& cfg) {
  traj.times.push_back(state.t);
  traj.avg_series.push_back(l2_average(state, *cfg.disc));
  const Point m = spatial_mean(state, *cfg.disc);
  traj.mean_series.push_back(m);
  traj.basin_series.push_back(cfg.landscape->source().classify(m));
  if (cfg.keep_states) traj.states.push_back(state);
}

Trajectory simulate(const SimConfig& cfg, Rng rng) {
  (void)validate(cfg);
  Simulation sim(cfg, std::move(rng));
  Trajectory traj;
  const std::size_t steps = step_count(cfg);
  const std::size_t records = steps / cfg.record_stride + 1;
  traj.times.reserve(records);
  traj.avg_series.reserve(records);
  traj.mean_series.reserve(records);
  traj.basin_series.reserve(records);
  record(traj, sim.state(), cfg);
  for (std::size_t n = 1; n <= steps; ++n) {
    sim.step();
    if (n % cfg.record_stride == 0) record(traj, sim.state(), cfg);
  }
  return traj;
}

std::vector<Trajectory> simulate_ensemble(const SimConfig& cfg, std::size_t n, std::uint64_t seed,
                                          std::size_t jobs) {
  if (n == 0) throw ConfigError("ensemble size must be at least 1");
  (void)validate(cfg);
  std::vector<Trajectory> out(n);
  parallel_for(n, jobs, [&](std::size_t i) { out[i] = simulate(cfg, make_stream(seed, i)); });
  return out;
}

}  // namespace epiland
