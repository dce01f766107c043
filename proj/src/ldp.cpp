#include "epiland/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "epiland/errors.hpp"
#include "epiland/parallel.hpp"

namespace epiland {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double nodal_derivative(const std::vector<double>& x, std::size_t i, const Discretization& disc) {
  const std::size_t n = x.size();
  const double h = disc.h();
  if (disc.bc() == Boundary::periodic) return (x[(i + 1) % n] - x[(i + n - 1) % n]) / (2.0 * h);
  if (i == 0) return (x[1] - x[0]) / h;
  if (i == n - 1) return (x[n - 1] - x[n - 2]) / h;
  return (x[i + 1] - x[i - 1]) / (2.0 * h);
}

// Ridge between two wells: the set where both quadratics are equal.
struct Ridge {
  bool straight = false;
  Point origin;     // a point on the line, or the circle center
  Point direction;  // unit tangent of the line
  double radius = 0.0;

  Point at(double s) const {
    if (straight) return {origin.u + s * direction.u, origin.v + s * direction.v};
    return {origin.u + radius * std::cos(s), origin.v + radius * std::sin(s)};
  }
  // Parameter of a point assumed to be on the ridge.
  double param(Point p) const {
    if (straight) return (p.u - origin.u) * direction.u + (p.v - origin.v) * direction.v;
    return std::atan2(p.v - origin.v, p.u - origin.u);
  }
  // Parameter change per unit arc length.
  double per_length() const { return straight ? 1.0 : 1.0 / radius; }
};

Ridge make_ridge(const Well& a, const Well& b) {
  Ridge r;
  const double du = b.center.u - a.center.u;
  const double dv = b.center.v - a.center.v;
  if (std::abs(a.weight - b.weight) <= 1e-14 * std::max(a.weight, b.weight)) {
    r.straight = true;
    r.origin = {0.5 * (a.center.u + b.center.u), 0.5 * (a.center.v + b.center.v)};
    const double len = std::hypot(du, dv);
    r.direction = {-dv / len, du / len};
    return r;
  }
  // (a_k - a_j)|z|^2 - 2 z.(a_k c_k - a_j c_j) + a_k|c_k|^2 - a_j|c_j|^2 = 0.
  const double diff = a.weight - b.weight;
  r.origin = {(a.weight * a.center.u - b.weight * b.center.u) / diff,
              (a.weight * a.center.v - b.weight * b.center.v) / diff};
  const double ck2 = a.center.u * a.center.u + a.center.v * a.center.v;
  const double cj2 = b.center.u * b.center.u + b.center.v * b.center.v;
  const double o2 = r.origin.u * r.origin.u + r.origin.v * r.origin.v;
  r.radius = std::sqrt(std::max(0.0, o2 - (a.weight * ck2 - b.weight * cj2) / diff));
  return r;
}

// True if both branches are the smallest at p (up to roundoff).
bool on_shared_ridge(const RawLandscape& raw, std::size_t k, std::size_t j, Point p) {
  const double fk = raw.branch(k, p);
  const double fj = raw.branch(j, p);
  const double level = std::max(fk, fj);
  const double tol = 1e-9 * std::max(1.0, level);
  for (std::size_t m = 0; m < raw.size(); ++m) {
    if (m != k && m != j && raw.branch(m, p) < level - tol) return false;
  }
  return true;
}

struct Crossing {
  Point p;
  double f = kInf;
};

// Scans every grid edge whose endpoints classify as {k, j} and returns the
// ridge crossing with the lowest mollified potential.
Crossing scan_ridge(const MollifiedLandscape& land, std::size_t k, std::size_t j) {
  const RawLandscape& raw = land.source();
  const std::size_t m = land.resolution();
  std::vector<std::size_t> cls(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) cls[a * m + b] = raw.classify(land.node(a, b));
  }
  Crossing best;
  auto visit = [&](std::size_t a0, std::size_t b0, std::size_t a1, std::size_t b1) {
    const std::size_t c0 = cls[a0 * m + b0], c1 = cls[a1 * m + b1];
    if (!((c0 == k && c1 == j) || (c0 == j && c1 == k))) return;
    Point lo = land.node(a0, b0), hi = land.node(a1, b1);
    // g = F_k - F_j changes sign along the edge.
    auto g = [&](Point p) { return raw.branch(k, p) - raw.branch(j, p); };
    if (g(lo) > 0.0) std::swap(lo, hi);
    for (int it = 0; it < 60; ++it) {
      const Point mid{0.5 * (lo.u + hi.u), 0.5 * (lo.v + hi.v)};
      (g(mid) <= 0.0 ? lo : hi) = mid;
    }
    const Point p{0.5 * (lo.u + hi.u), 0.5 * (lo.v + hi.v)};
    if (!on_shared_ridge(raw, k, j, p)) return;
    const double f = land.potential(p);
    if (f < best.f) best = {p, f};
  };
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (a + 1 < m) visit(a, b, a + 1, b);
      if (b + 1 < m) visit(a, b, a, b + 1);
    }
  }
  return best;
}

template <class F>
double golden_section(F&& f, double lo, double hi, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double quasi_potential(const FieldState& profile, const MollifiedLandscape& land,
                       const Discretization& disc) {
  const auto& w = disc.quadrature_weights();
  if (profile.u.size() != w.size() || profile.v.size() != w.size()) {
    throw PreconditionError("profile length does not match the discretization");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double du = nodal_derivative(profile.u, i, disc);
    const double dv = nodal_derivative(profile.v, i, disc);
    const double gradient = 0.5 * (disc.d1() * du * du + disc.d2() * dv * dv);
    total += w[i] * (gradient + land.potential({profile.u[i], profile.v[i]}));
  }
  return total;
}

QuasiPotentialReport barrier(const MollifiedLandscape& land, std::size_t from, std::size_t to,
                             double domain_length) {
  const RawLandscape& raw = land.source();
  if (from >= raw.size() || to >= raw.size() || from == to) {
    throw PreconditionError("barrier needs two distinct well indices");
  }
  Crossing best = scan_ridge(land, from, to);
  if (!std::isfinite(best.f)) {
    throw PreconditionError("wells " + std::to_string(from) + " and " + std::to_string(to) +
                            " are not adjacent on the landscape grid");
  }

  const Ridge ridge = make_ridge(raw.wells()[from], raw.wells()[to]);
  const double cell = land.cell();
  auto objective = [&](double s) {
    const Point p = ridge.at(s);
    if (!land.bounds().contains(p) || !on_shared_ridge(raw, from, to, p)) return kInf;
    return land.potential(p);
  };
  const double s0 = ridge.param(best.p);
  const double half = 2.0 * cell * ridge.per_length();
  const double s = golden_section(objective, s0 - half, s0 + half, 1e-3 * cell * ridge.per_length());
  const double fs = objective(s);
  if (fs < best.f) best = {ridge.at(s), fs};

  QuasiPotentialReport rep;
  rep.from_well = from;
  rep.to_well = to;
  for (const auto& w : raw.wells()) rep.U_min_per_well.push_back(domain_length * land.potential(w.center));
  rep.saddle_point = best.p;
  rep.saddle_value = domain_length * best.f;
  rep.barrier = rep.saddle_value - rep.U_min_per_well[from];
  return rep;
}

std::vector<std::pair<std::size_t, std::size_t>> adjacent_pairs(const MollifiedLandscape& land) {
  const RawLandscape& raw = land.source();
  const std::size_t m = land.resolution();
  std::vector<std::size_t> cls(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) cls[a * m + b] = raw.classify(land.node(a, b));
  }
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  auto add = [&](std::size_t c0, std::size_t c1) {
    if (c0 != c1) pairs.emplace(std::min(c0, c1), std::max(c0, c1));
  };
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (a + 1 < m) add(cls[a * m + b], cls[(a + 1) * m + b]);
      if (b + 1 < m) add(cls[a * m + b], cls[a * m + b + 1]);
    }
  }
  return {pairs.begin(), pairs.end()};
}

QuasiPotentialReport lowest_barrier(const MollifiedLandscape& land, std::size_t well,
                                    double domain_length) {
  std::optional<QuasiPotentialReport> best;
  for (auto [k, j] : adjacent_pairs(land)) {
    if (k != well && j != well) continue;
    auto rep = barrier(land, well, k == well ? j : k, domain_length);
    if (!best || rep.barrier < best->barrier) best = std::move(rep);
  }
  if (!best) throw PreconditionError("well " + std::to_string(well) + " has no adjacent basin");
  return *best;
}

double action_functional(const Trajectory& path, const MollifiedLandscape& land,
                         const Discretization& disc) {
  if (path.states.size() < 2) throw PreconditionError("action functional needs at least two stored states");
  const std::size_t n = disc.nodes();
  const auto& w = disc.quadrature_weights();
  const double tau = path.states[1].t - path.states[0].t;
  if (!(tau > 0.0)) throw PreconditionError("path records must be strictly increasing in time");
  std::vector<double> lap_u(n), lap_v(n);
  double total = 0.0;
  for (std::size_t r = 0; r + 1 < path.states.size(); ++r) {
    const FieldState& a = path.states[r];
    const FieldState& b = path.states[r + 1];
    if (std::abs((b.t - a.t) - tau) > 1e-9 * tau) {
      throw PreconditionError("path is not recorded at a uniform stride");
    }
    disc.apply_laplacian(b.u, lap_u);
    disc.apply_laplacian(b.v, lap_v);
    for (std::size_t j = 0; j < n; ++j) {
      const Point f = land.drift({a.u[j], a.v[j]});
      const double ru = (b.u[j] - a.u[j]) / tau + disc.d1() * lap_u[j] - f.u;
      const double rv = (b.v[j] - a.v[j]) / tau + disc.d2() * lap_v[j] - f.v;
      total += 0.5 * w[j] * (ru * ru + rv * rv) * tau;
    }
  }
  return total;
}

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

ExitStudy exit_rate_fit(const ExitStudyInputs& in) {
  if (in.sigmas.size() < 3) throw ConfigError("exit study needs at least three sigma values");
  for (double s : in.sigmas) {
    if (!(s > 0.0)) throw ConfigError("exit study sigmas must be positive");
  }
  if (in.n_traj < 20) throw ConfigError("exit study needs at least 20 trajectories per sigma");
  (void)validate(in.base);

  const MollifiedLandscape& land = *in.base.landscape;
  const RawLandscape& raw = land.source();
  const double length = in.base.disc->domain_length();
  if (in.start_well >= raw.size()) throw ConfigError("study.start_well is out of range");
  const Point center = raw.wells()[in.start_well].center;

  ExitStudy out;
  out.sigmas = in.sigmas;
  std::sort(out.sigmas.begin(), out.sigmas.end(), std::greater<>());
  if (std::adjacent_find(out.sigmas.begin(), out.sigmas.end()) != out.sigmas.end()) {
    throw ConfigError("exit study sigmas must be distinct");
  }
  const std::vector<double>& sigmas = out.sigmas;
  if (in.exit_radius) {
    const double r = *in.exit_radius;
    if (!(r > 0.0)) throw ConfigError("study.exit_radius must be positive");
    double fmin = kInf;
    Point arg;
    constexpr int samples = 3600;
    for (int i = 0; i < samples; ++i) {
      const double th = 2.0 * M_PI * i / samples;
      const Point p{center.u + r * std::cos(th), center.v + r * std::sin(th)};
      const double f = land.potential(p);
      if (f < fmin) {
        fmin = f;
        arg = p;
      }
    }
    out.barrier = length * (fmin - land.potential(center));
    out.saddle_point = arg;
  } else if (raw.size() == 1) {
    out.barrier = kInf;
    out.saddle_point = {kNaN, kNaN};
  } else {
    const auto rep = lowest_barrier(land, in.start_well, length);
    out.barrier = rep.barrier;
    out.saddle_point = rep.saddle_point;
  }
  out.predicted_slope = 2.0 * out.barrier;

  const std::size_t ns = sigmas.size();
  const std::size_t total = ns * in.n_traj;
  std::vector<double> tau(total, kInf);
  const std::size_t stride = in.base.record_stride;
  const std::size_t max_steps =
      static_cast<std::size_t>(std::llround(in.t_max / in.base.disc->dt()));

  parallel_for(total, in.jobs, [&](std::size_t task) {
    SimConfig cfg = in.base;
    cfg.sigma = sigmas[task / in.n_traj];
    cfg.initial = InitialCondition::at(center);
    cfg.keep_states = false;
    Simulation sim(cfg, make_stream(in.seed, task));
    ExitDetector detector(0, in.dwell);
    for (std::size_t n = 1; n <= max_steps; ++n) {
      sim.step();
      if (n % stride != 0) continue;
      const Point m = spatial_mean(sim.state(), *cfg.disc);
      std::size_t outside;
      if (in.exit_radius) {
        outside = std::hypot(m.u - center.u, m.v - center.v) > *in.exit_radius ? 1 : 0;
      } else {
        outside = raw.classify(m) == in.start_well ? 0 : 1;
      }
      if (auto ev = detector.push(sim.state().t, outside)) {
        tau[task] = ev->t_exit;
        return;
      }
    }
  });

  std::vector<double> xs, ys;
  for (std::size_t s = 0; s < ns; ++s) {
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t t = 0; t < in.n_traj; ++t) {
      const double v = tau[s * in.n_traj + t];
      if (std::isfinite(v)) {
        sum += v;
        ++hits;
      }
    }
    out.exits.push_back(hits);
    out.censoring.push_back(1.0 - static_cast<double>(hits) / static_cast<double>(in.n_traj));
    // Censored runs only raise the censoring fraction; they never enter the mean.
    out.mean_exit.push_back(hits > 0 ? sum / static_cast<double>(hits) : kNaN);
    if (out.censoring.back() > 0.1) out.reliable = false;
    if (hits > 0 && out.mean_exit.back() > 0.0) {
      xs.push_back(1.0 / (sigmas[s] * sigmas[s]));
      ys.push_back(std::log(out.mean_exit.back()));
    }
  }
  if (xs.size() >= 2) {
    std::tie(out.fitted_slope, out.fit_intercept) = linear_fit(xs, ys);
  } else {
    out.fitted_slope = out.fit_intercept = std::numeric_limits<double>::quiet_NaN();
    out.reliable = false;
  }
  return out;
}

}  // namespace epiland
