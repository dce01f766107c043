#include "epiland/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "epiland/errors.hpp"

namespace epiland {

RawLandscape::RawLandscape(std::vector<Well> wells, std::vector<std::string> labels)
    : wells_(std::move(wells)), labels_(std::move(labels)) {}

double RawLandscape::branch(std::size_t k, Point p) const {
  const Well& w = wells_[k];
  const double du = p.u - w.center.u;
  const double dv = p.v - w.center.v;
  return w.weight * (du * du + dv * dv);
}

double RawLandscape::operator()(Point p) const {
  double best = branch(0, p);
  for (std::size_t k = 1; k < wells_.size(); ++k) best = std::min(best, branch(k, p));
  return best;
}

std::size_t RawLandscape::classify(Point p) const {
  std::size_t best_k = 0;
  double best = branch(0, p);
  for (std::size_t k = 1; k < wells_.size(); ++k) {
    const double f = branch(k, p);
    if (f < best) {
      best = f;
      best_k = k;
    }
  }
  return best_k;
}

double RawLandscape::max_weight() const noexcept {
  double a = 0.0;
  for (const auto& w : wells_) a = std::max(a, w.weight);
  return a;
}

RawLandscape build_landscape(std::vector<Well> wells, std::vector<std::string> labels) {
  if (wells.empty()) throw ConfigError("landscape needs at least one well");
  if (labels.empty()) {
    for (std::size_t k = 0; k < wells.size(); ++k) labels.push_back("well" + std::to_string(k));
  }
  if (labels.size() != wells.size()) {
    throw ConfigError("landscape has " + std::to_string(wells.size()) + " wells but " +
                      std::to_string(labels.size()) + " labels");
  }
  for (std::size_t k = 0; k < wells.size(); ++k) {
    const Well& w = wells[k];
    if (!(w.weight > 0.0) || !std::isfinite(w.weight)) {
      throw ConfigError("well " + std::to_string(k) + " has non-positive weight");
    }
    if (!std::isfinite(w.center.u) || !std::isfinite(w.center.v)) {
      throw ConfigError("well " + std::to_string(k) + " has a non-finite center");
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (wells[j].center == w.center) {
        throw ConfigError("wells " + std::to_string(j) + " and " + std::to_string(k) +
                          " share the same center");
      }
    }
  }
  return RawLandscape(std::move(wells), std::move(labels));
}

double Bounds::diagonal() const noexcept { return std::hypot(u_max - u_min, v_max - v_min); }

Bounds default_bounds(const RawLandscape& raw) {
  double u_lo = raw.wells()[0].center.u, u_hi = u_lo;
  double v_lo = raw.wells()[0].center.v, v_hi = v_lo;
  for (const auto& w : raw.wells()) {
    u_lo = std::min(u_lo, w.center.u);
    u_hi = std::max(u_hi, w.center.u);
    v_lo = std::min(v_lo, w.center.v);
    v_hi = std::max(v_hi, w.center.v);
  }
  // A degenerate (collinear) box borrows the extent of the other axis; a
  // single well gets a unit box.
  double extent = std::max(u_hi - u_lo, v_hi - v_lo);
  if (extent == 0.0) extent = 1.0 / 1.5;
  const double half_u = 1.5 * std::max(u_hi - u_lo, 0.5 * extent);
  const double half_v = 1.5 * std::max(v_hi - v_lo, 0.5 * extent);
  const double cu = 0.5 * (u_lo + u_hi);
  const double cv = 0.5 * (v_lo + v_hi);
  return {cu - half_u, cu + half_u, cv - half_v, cv + half_v};
}

double default_filter_width(const Bounds& bounds) { return 0.02 * bounds.diagonal(); }

namespace {

std::vector<double> gaussian_kernel(double sigma_cells) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma_cells));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  for (std::ptrdiff_t r = -radius; r <= radius; ++r) {
    const double x = static_cast<double>(r) / sigma_cells;
    k[static_cast<std::size_t>(r + radius)] = std::exp(-0.5 * x * x);
  }
  const double total = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& w : k) w /= total;
  return k;
}

// Convolves along one axis of an m x m row-major array with replicate padding.
void convolve_axis(std::vector<double>& data, std::size_t m, bool along_i,
                   const std::vector<double>& kernel) {
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto last = static_cast<std::ptrdiff_t>(m) - 1;
  std::vector<double> line(m), out(m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) line[b] = along_i ? data[b * m + a] : data[a * m + b];
    for (std::ptrdiff_t b = 0; b <= last; ++b) {
      double acc = 0.0;
      for (std::ptrdiff_t r = -radius; r <= radius; ++r) {
        const std::ptrdiff_t idx = std::clamp(b + r, std::ptrdiff_t{0}, last);
        acc += kernel[static_cast<std::size_t>(r + radius)] * line[static_cast<std::size_t>(idx)];
      }
      out[static_cast<std::size_t>(b)] = acc;
    }
    for (std::size_t b = 0; b < m; ++b) {
      (along_i ? data[b * m + a] : data[a * m + b]) = out[b];
    }
  }
}

}  // namespace

MollifiedLandscape mollify(const RawLandscape& raw, double filter_width, const GridSpec& spec) {
  if (!(filter_width > 0.0)) throw ConfigError("filter_width must be positive");
  if (spec.resolution < 64) throw ConfigError("landscape resolution must be at least 64");
  const Bounds& b = spec.bounds;
  if (!(b.u_max > b.u_min) || !(b.v_max > b.v_min)) throw ConfigError("landscape bounds are empty");

  const double margin = 3.0 * filter_width;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const Point c = raw.wells()[k].center;
    if (c.u - b.u_min < margin || b.u_max - c.u < margin || c.v - b.v_min < margin ||
        b.v_max - c.v < margin) {
      std::ostringstream msg;
      msg << "landscape bounds leave less than 3*filter_width (" << margin
          << ") of margin around well " << k;
      throw ConfigError(msg.str());
    }
  }

  MollifiedLandscape out(raw);
  const std::size_t m = spec.resolution;
  out.bounds_ = b;
  out.m_ = m;
  out.du_ = (b.u_max - b.u_min) / static_cast<double>(m - 1);
  out.dv_ = (b.v_max - b.v_min) / static_cast<double>(m - 1);
  out.filter_width_ = filter_width;
  if (filter_width < std::max(out.du_, out.dv_)) {
    out.warnings_.push_back("filter_width is smaller than one grid cell; smoothing is negligible");
  }

  out.grid_.resize(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) out.grid_[i * m + j] = raw(out.node(i, j));
  }
  convolve_axis(out.grid_, m, true, gaussian_kernel(filter_width / out.du_));
  convolve_axis(out.grid_, m, false, gaussian_kernel(filter_width / out.dv_));

  out.compute_gradients();
  return out;
}

void MollifiedLandscape::compute_gradients() {
  const std::size_t m = m_;
  grad_.resize(2 * m * m);
  const auto& g = grid_;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double gu, gv;
      if (i == 0) {
        gu = (g[m + j] - g[j]) / du_;
      } else if (i == m - 1) {
        gu = (g[i * m + j] - g[(i - 1) * m + j]) / du_;
      } else {
        gu = (g[(i + 1) * m + j] - g[(i - 1) * m + j]) / (2.0 * du_);
      }
      if (j == 0) {
        gv = (g[i * m + 1] - g[i * m]) / dv_;
      } else if (j == m - 1) {
        gv = (g[i * m + j] - g[i * m + j - 1]) / dv_;
      } else {
        gv = (g[i * m + j + 1] - g[i * m + j - 1]) / (2.0 * dv_);
      }
      grad_[2 * (i * m + j)] = gu;
      grad_[2 * (i * m + j) + 1] = gv;
    }
  }
}

MollifiedLandscape from_grid(const RawLandscape& raw, const Bounds& bounds, std::size_t resolution,
                             std::vector<double> values) {
  if (resolution < 2 || values.size() != resolution * resolution) {
    throw ConfigError("grid values must form a resolution x resolution array, resolution >= 2");
  }
  if (!(bounds.u_max > bounds.u_min) || !(bounds.v_max > bounds.v_min)) {
    throw ConfigError("landscape bounds are empty");
  }
  MollifiedLandscape out(raw);
  out.bounds_ = bounds;
  out.m_ = resolution;
  out.du_ = (bounds.u_max - bounds.u_min) / static_cast<double>(resolution - 1);
  out.dv_ = (bounds.v_max - bounds.v_min) / static_cast<double>(resolution - 1);
  out.grid_ = std::move(values);
  out.compute_gradients();
  return out;
}

Point MollifiedLandscape::node(std::size_t i, std::size_t j) const noexcept {
  return {bounds_.u_min + static_cast<double>(i) * du_, bounds_.v_min + static_cast<double>(j) * dv_};
}

double MollifiedLandscape::cell() const noexcept { return std::max(du_, dv_); }

double MollifiedLandscape::grad_tol() const noexcept { return 10.0 * cell() * source_.max_weight(); }

bool MollifiedLandscape::locate(Point p, std::size_t& i, std::size_t& j, double& s,
                                double& t) const noexcept {
  if (!bounds_.contains(p)) return false;  // also rejects NaN
  const double x = (p.u - bounds_.u_min) / du_;
  const double y = (p.v - bounds_.v_min) / dv_;
  i = std::min(static_cast<std::size_t>(x), m_ - 2);
  j = std::min(static_cast<std::size_t>(y), m_ - 2);
  s = x - static_cast<double>(i);
  t = y - static_cast<double>(j);
  return true;
}

double MollifiedLandscape::potential(Point p) const {
  std::size_t i, j;
  double s, t;
  if (!locate(p, i, j, s, t)) throw DomainError("potential queried outside the landscape bounds");
  const double f00 = value(i, j), f10 = value(i + 1, j), f01 = value(i, j + 1),
               f11 = value(i + 1, j + 1);
  return (1 - s) * ((1 - t) * f00 + t * f01) + s * ((1 - t) * f10 + t * f11);
}

bool MollifiedLandscape::try_drift(Point p, Point& out) const noexcept {
  std::size_t i, j;
  double s, t;
  if (!locate(p, i, j, s, t)) return false;
  const double* g00 = &grad_[2 * (i * m_ + j)];
  const double* g01 = g00 + 2;
  const double* g10 = g00 + 2 * m_;
  const double* g11 = g10 + 2;
  const double w00 = (1 - s) * (1 - t), w01 = (1 - s) * t, w10 = s * (1 - t), w11 = s * t;
  out.u = -(w00 * g00[0] + w01 * g01[0] + w10 * g10[0] + w11 * g11[0]);
  out.v = -(w00 * g00[1] + w01 * g01[1] + w10 * g10[1] + w11 * g11[1]);
  return true;
}

Point MollifiedLandscape::drift(Point p) const {
  Point out;
  if (!try_drift(p, out)) throw DomainError("drift queried outside the landscape bounds");
  return out;
}

double MollifiedLandscape::max_center_gradient() const {
  double worst = 0.0;
  for (const auto& w : source_.wells()) {
    const Point d = drift(w.center);
    worst = std::max(worst, std::hypot(d.u, d.v));
  }
  return worst;
}

std::vector<double> hessian_dets(const RawLandscape& raw) {
  std::vector<double> out;
  out.reserve(raw.size());
  for (const auto& w : raw.wells()) out.push_back(4.0 * w.weight * w.weight);
  return out;
}

LimitMeasure limit_measure(const RawLandscape& raw) {
  const auto dets = hessian_dets(raw);
  double total = 0.0;
  for (double d : dets) total += 1.0 / d;
  LimitMeasure nu;
  nu.weights.reserve(dets.size());
  for (double d : dets) nu.weights.push_back((1.0 / d) / total);
  return nu;
}

std::vector<double> weights_from_counts(std::span<const double> counts, WeightRule rule) {
  std::vector<double> a;
  a.reserve(counts.size());
  for (double c : counts) {
    if (!(c > 0.0)) throw ConfigError("basin counts must be positive");
    a.push_back(rule == WeightRule::reciprocal ? 1.0 / c : 1.0 / (2.0 * std::sqrt(c)));
  }
  return a;
}

}  // namespace epiland
