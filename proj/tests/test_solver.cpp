#include <cmath>
#include <limits>
#include <numeric>

#include "epiland/errors.hpp"
#include "helpers.hpp"

using namespace testing;

namespace {

double dist2(const FieldState& s, Point c) {
  double acc = 0.0;
  for (std::size_t j = 0; j < s.u.size(); ++j) {
    acc += (s.u[j] - c.u) * (s.u[j] - c.u) + (s.v[j] - c.v) * (s.v[j] - c.v);
  }
  return acc;
}

NoiseIncrement zero_increment(std::size_t n, double dt) { return {std::vector<double>(n), std::vector<double>(n), dt}; }

// Classical RK4 on p' = drift(p), used as the time-continuous reference.
Point rk4(const MollifiedLandscape& land, Point p, double t, double h) {
  const auto add = [](Point a, Point b, double s) { return Point{a.u + s * b.u, a.v + s * b.v}; };
  for (double s = 0.0; s < t - 1e-12; s += h) {
    const Point k1 = land.drift(p);
    const Point k2 = land.drift(add(p, k1, h / 2));
    const Point k3 = land.drift(add(p, k2, h / 2));
    const Point k4 = land.drift(add(p, k3, h));
    p.u += h / 6 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u);
    p.v += h / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
  }
  return p;
}

}  // namespace

TEST_CASE("no diffusion, no noise, at a center: state is unchanged") {
  const auto land = smooth(build_landscape({{{0.5, 0.5}, 1.0}}), 0.02, Bounds{0, 1, 0, 1});
  const auto disc = make_disc(16, 0.01, Boundary::neumann, 0.0, 0.0);
  const auto cfg = make_config(land, disc, 0.0, 1.0, {0.5, 0.5});
  const auto traj = simulate(cfg, make_stream(0, 0));
  for (const auto& p : traj.mean_series) {
    CHECK(std::abs(p.u - 0.5) < 1e-12);
    CHECK(std::abs(p.v - 0.5) < 1e-12);
  }
}

TEST_CASE("single well without noise contracts to the center") {
  const Point c{0.5, 0.5};
  const auto land = smooth(build_landscape({{c, 1.0}}), 0.02, Bounds{0, 1, 0, 1});
  const auto disc = make_disc(16, 0.01);
  auto cfg = make_config(land, disc, 0.0, 50.0, {0.6, 0.45});
  Simulation sim(cfg, make_stream(0, 0));
  double prev = dist2(sim.state(), c);
  bool strictly = true;
  // Strict decrease holds until the distance reaches the interpolation floor.
  for (int k = 0; k < 5000; ++k) {
    sim.step();
    const double d = dist2(sim.state(), c);
    if (prev > 1e-20 && !(d < prev)) strictly = false;
    prev = d;
  }
  CHECK(strictly);
  for (std::size_t j = 0; j < sim.state().u.size(); ++j) {
    CHECK(std::abs(sim.state().u[j] - c.u) < land->grad_tol() * 0.01);
    CHECK(std::abs(sim.state().v[j] - c.v) < land->grad_tol() * 0.01);
  }
}

TEST_CASE("flat landscape: a heat step does not increase the norm and keeps constants") {
  const auto land = flat_landscape();
  for (auto bc : {Boundary::neumann, Boundary::periodic}) {
    const auto disc = make_disc(32, 0.001, bc);
    const auto cfg = make_config(land, disc, 0.0, 1.0, {0, 0});
    const std::size_t n = disc->nodes();
    FieldState s;
    s.u.resize(n);
    s.v.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      s.u[j] = std::sin(6.0 * j) + 0.3 * j / double(n);
      s.v[j] = std::cos(2.0 * j);
    }
    const auto inc = zero_increment(n, disc->dt());
    for (int k = 0; k < 50; ++k) {
      const auto next = em_step(s, cfg, inc);
      CHECK(std::inner_product(next.u.begin(), next.u.end(), next.u.begin(), 0.0) <=
            std::inner_product(s.u.begin(), s.u.end(), s.u.begin(), 0.0));
      s = next;
    }
    FieldState c{0.0, std::vector<double>(n, 1.25), std::vector<double>(n, -3.5)};
    const auto next = em_step(c, cfg, inc);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs(next.u[j] - 1.25) < 1e-12);
      CHECK(std::abs(next.v[j] + 3.5) < 1e-12);
    }
  }
}

TEST_CASE("constant profiles follow the ODE with first-order error") {
  const auto land = smooth(two_wells(0.5, 1.0, 2.0), 0.02, Bounds{-0.5, 1.0, -0.75, 0.75});
  const Point start{0.2, 0.15};
  double err[2] = {0.0, 0.0};
  const double dts[2] = {1e-2, 5e-3};
  for (int r = 0; r < 2; ++r) {
    const auto disc = make_disc(8, dts[r], Boundary::neumann, 1.0, 1.0);
    const auto cfg = make_config(land, disc, 0.0, 10.0, start);
    const auto traj = simulate(cfg, make_stream(0, 0));
    Point ref = start;
    for (std::size_t i = 1; i < traj.size(); ++i) {
      ref = rk4(*land, ref, dts[r], dts[r] / 20);
      const Point m = traj.mean_series[i];
      err[r] = std::max(err[r], std::hypot(m.u - ref.u, m.v - ref.v));
    }
  }
  const double ratio = err[0] / err[1];
  CHECK(err[1] > 0.0);
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.6);
}

TEST_CASE("implicit solve residual stays at round-off") {
  const auto land = smooth(two_wells(), 0.02, Bounds{-0.4, 0.6, -0.5, 0.5});
  const auto disc = make_disc(64, 0.001, Boundary::neumann, 1.0, 0.5);
  auto cfg = make_config(land, disc, 0.05, 1.0, {0, 0}, false);
  cfg.residual_check_interval = 1;
  Simulation sim(cfg, make_stream(1, 0));
  for (int k = 0; k < 1000; ++k) sim.step();
  CHECK(sim.stepper().residual_checks() == 1000);
  CHECK(sim.stepper().max_residual() < 1e-10);
}

TEST_CASE("pure noise: variance sigma^2 n dt C_jj") {
  const auto land = flat_landscape();
  const auto disc = make_disc(8, 0.01, Boundary::neumann, 0.0, 0.0);
  const double sigma = 0.3;
  const auto cfg = make_config(land, disc, sigma, 0.1, {0, 0}, false, 0.2);
  const std::size_t runs = 2000;
  const std::size_t n = disc->nodes();
  std::vector<double> s2(n, 0.0);
  for (std::size_t r = 0; r < runs; ++r) {
    Simulation sim(cfg, make_stream(2, r));
    for (int k = 0; k < 10; ++k) sim.step();
    for (std::size_t j = 0; j < n; ++j) s2[j] += sim.state().u[j] * sim.state().u[j] / double(runs);
  }
  const double expected = sigma * sigma * 10 * 0.01;
  for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(s2[j] - expected) < 4.0 * expected * std::sqrt(2.0 / runs));
}

TEST_CASE("recording") {
  const auto land = smooth(two_wells(), 0.02, Bounds{-0.4, 0.6, -0.5, 0.5});
  const auto disc = make_disc(16, 0.005);
  auto cfg = make_config(land, disc, 0.05, 0.0, {0, 0});
  CHECK(simulate(cfg, make_stream(0, 0)).size() == 1);
  cfg.t_end = 1.0;
  cfg.record_stride = 10;
  cfg.keep_states = true;
  const auto traj = simulate(cfg, make_stream(0, 0));
  CHECK(traj.size() == 21);
  CHECK(traj.states.size() == 21);
  CHECK(traj.end_time() == doctest::Approx(1.0));
  CHECK(traj.times[1] == doctest::Approx(0.05));
}

TEST_CASE("same seed, same trajectory; ensembles do not depend on jobs") {
  const auto land = smooth(two_wells(), 0.02, Bounds{-0.4, 0.6, -0.5, 0.5});
  const auto disc = make_disc(16, 0.005);
  const auto cfg = make_config(land, disc, 0.08, 2.0, {0, 0}, false);
  const auto a = simulate(cfg, make_stream(9, 0));
  const auto b = simulate(cfg, make_stream(9, 0));
  CHECK(a.times == b.times);
  CHECK(a.basin_series == b.basin_series);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.avg_series[i].u == b.avg_series[i].u);
    CHECK(a.avg_series[i].v == b.avg_series[i].v);
  }
  const auto e1 = simulate_ensemble(cfg, 5, 9, 1);
  const auto e4 = simulate_ensemble(cfg, 5, 9, 4);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t k = 0; k < e1[i].size(); ++k) CHECK(e1[i].avg_series[k].u == e4[i].avg_series[k].u);
  }
  CHECK(e1[0].avg_series.back().u == a.avg_series.back().u);
  CHECK(e1[1].avg_series.back().u != a.avg_series.back().u);
  CHECK_THROWS_AS(simulate_ensemble(cfg, 0, 9), ConfigError);
}

TEST_CASE("without noise the basin never changes") {
  const auto land = smooth(two_wells(), 0.02, Bounds{-0.4, 0.6, -0.5, 0.5});
  const auto disc = make_disc(16, 0.005);
  const auto cfg = make_config(land, disc, 0.0, 5.0, {0.2, 0.0});
  const auto traj = simulate(cfg, make_stream(0, 0));
  for (auto b : traj.basin_series) CHECK(b == 1);
}

TEST_CASE("pull forcing moves the mean toward the target") {
  const auto land = flat_landscape();
  const auto disc = make_disc(16, 0.01);
  auto cfg = make_config(land, disc, 0.0, 5.0, {0, 0});
  cfg.forcing = pull_toward({1.0, -1.0}, 2.0, disc);
  const auto traj = simulate(cfg, make_stream(0, 0));
  CHECK(traj.mean_series.back().u == doctest::Approx(1.0 - std::pow(1 - 0.02, 500)).epsilon(1e-9));
  CHECK(traj.mean_series.back().v == doctest::Approx(-traj.mean_series.back().u).epsilon(1e-12));
}

TEST_CASE("aborts") {
  const auto land = smooth(build_landscape({{{0.5, 0.5}, 1.0}}), 0.02, Bounds{0, 1, 0, 1});
  const auto disc = make_disc(16, 0.005);
  SUBCASE("leaving the bounds") {
    const auto cfg = make_config(land, disc, 0.0, 1.0, {1.5, 0.5});
    CHECK_THROWS_AS(simulate(cfg, make_stream(0, 0)), DomainEscape);
  }
  SUBCASE("non-finite state") {
    const auto cfg = make_config(land, disc, std::numeric_limits<double>::infinity(), 1.0, {0.5, 0.5});
    CHECK_THROWS_AS(simulate(cfg, make_stream(0, 0)), NumericalAbort);
  }
}

TEST_CASE("em_step and validate preconditions") {
  const auto land = smooth(build_landscape({{{0.5, 0.5}, 40.0}}), 0.02, Bounds{0, 1, 0, 1});
  const auto disc = make_disc(16, 0.01);
  auto cfg = make_config(land, disc, 0.1, 1.0, {0.5, 0.5});
  FieldState s = cfg.initial.materialize(*disc);
  CHECK_THROWS_AS(em_step(s, cfg, zero_increment(disc->nodes(), 0.02)), PreconditionError);
  FieldState short_state{0.0, {0.5}, {0.5}};
  CHECK_THROWS_AS(em_step(short_state, cfg, zero_increment(disc->nodes(), 0.01)), PreconditionError);

  CHECK(validate(cfg).size() == 1);  // dt * 2 * 40 = 0.8
  cfg.sigma = -1.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.sigma = 0.1;
  cfg.noise = std::make_shared<const NoiseModel>(NoiseModel::white(5, 0.1));
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = make_config(land, disc, 0.1, 1.0, {0.5, 0.5});
  cfg.initial = InitialCondition::profile({0.5}, {0.5});
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}
