#include "epiland/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epiland/errors.hpp"

namespace epiland {

Point l2_average(const FieldState& state, const Discretization& disc) {
  const auto& w = disc.quadrature_weights();
  double su = 0.0, sv = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    su += w[i] * state.u[i] * state.u[i];
    sv += w[i] * state.v[i] * state.v[i];
  }
  const double inv_len = 1.0 / disc.domain_length();
  return {std::sqrt(su * inv_len), std::sqrt(sv * inv_len)};
}

Point spatial_mean(const FieldState& state, const Discretization& disc) {
  const auto& w = disc.quadrature_weights();
  double su = 0.0, sv = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    su += w[i] * state.u[i];
    sv += w[i] * state.v[i];
  }
  const double inv_len = 1.0 / disc.domain_length();
  return {su * inv_len, sv * inv_len};
}

std::vector<std::size_t> classify_series(const Trajectory& traj, const RawLandscape& raw) {
  std::vector<std::size_t> out;
  out.reserve(traj.mean_series.size());
  for (const Point& p : traj.mean_series) out.push_back(raw.classify(p));
  return out;
}

std::optional<TransitionEvent> ExitDetector::push(double t, std::size_t classification) {
  if (classification == basin_) {
    run_ = 0;
    return std::nullopt;
  }
  if (run_ == 0) {
    run_start_ = t;
    run_target_ = classification;
  }
  if (++run_ >= dwell_) return TransitionEvent{run_start_, basin_, run_target_, true};
  return std::nullopt;
}

std::optional<TransitionEvent> first_exit(std::span<const double> times,
                                          std::span<const std::size_t> series, std::size_t basin,
                                          std::size_t dwell) {
  if (series.empty() || series.front() != basin) {
    throw PreconditionError("trajectory does not start in basin " + std::to_string(basin));
  }
  ExitDetector detector(basin, dwell);
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (auto ev = detector.push(times[i], series[i])) return ev;
  }
  return std::nullopt;
}

std::optional<TransitionEvent> first_exit(const Trajectory& traj, std::size_t basin,
                                          std::size_t dwell) {
  return first_exit(traj.times, traj.basin_series, basin, dwell);
}

OccupationReport occupation(const Trajectory& traj, double horizon, std::size_t n_basins) {
  if (!traj.times.empty() && horizon > traj.end_time() * (1.0 + 1e-12)) {
    throw PreconditionError("occupation horizon exceeds the trajectory end time");
  }
  OccupationReport rep;
  rep.horizon = horizon;
  rep.fractions.assign(n_basins, 0.0);
  std::size_t counted = 0;
  for (std::size_t i = 0; i < traj.size() && traj.times[i] <= horizon; ++i) {
    rep.fractions.at(traj.basin_series[i]) += 1.0;
    ++counted;
  }
  if (counted > 0) {
    for (double& f : rep.fractions) f /= static_cast<double>(counted);
  }
  return rep;
}

std::vector<std::size_t> transition_sequence(std::span<const std::size_t> series, std::size_t dwell) {
  std::vector<std::size_t> seq;
  if (series.empty()) return seq;
  seq.push_back(series.front());
  std::size_t i = 0;
  while (i < series.size()) {
    std::size_t j = i;
    while (j < series.size() && series[j] == series[i]) ++j;
    if (j - i >= dwell && series[i] != seq.back()) seq.push_back(series[i]);
    i = j;
  }
  return seq;
}

std::vector<std::size_t> transition_sequence(const Trajectory& traj, std::size_t dwell) {
  return transition_sequence(traj.basin_series, dwell);
}

namespace {

ChannelStats channel_stats(std::span<const Trajectory> ensemble, double burn_in, std::size_t bins,
                           double Point::*channel) {
  ChannelStats st;
  double sum = 0.0;
  std::size_t n = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::vector<double> traj_means;
  for (const auto& tr : ensemble) {
    double ts = 0.0;
    std::size_t tn = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (tr.times[i] <= burn_in) continue;
      const double x = tr.avg_series[i].*channel;
      sum += x;
      ts += x;
      ++n;
      ++tn;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    if (tn > 0) traj_means.push_back(ts / static_cast<double>(tn));
  }
  st.mean = sum / static_cast<double>(n);

  double ss = 0.0;
  for (const auto& tr : ensemble) {
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (tr.times[i] <= burn_in) continue;
      const double d = tr.avg_series[i].*channel - st.mean;
      ss += d * d;
    }
  }
  st.stddev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

  if (traj_means.size() > 1) {
    double m = 0.0;
    for (double x : traj_means) m += x;
    m /= static_cast<double>(traj_means.size());
    double v = 0.0;
    for (double x : traj_means) v += (x - m) * (x - m);
    v /= static_cast<double>(traj_means.size() - 1);
    st.standard_error = std::sqrt(v / static_cast<double>(traj_means.size()));
  } else {
    st.standard_error = st.stddev / std::sqrt(static_cast<double>(n));
  }

  bins = std::max<std::size_t>(bins, 1);
  if (!(hi > lo)) bins = 1;
  st.counts.assign(bins, 0);
  st.bin_edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) st.bin_edges[b] = lo + width * static_cast<double>(b);
  st.bin_edges.back() = hi;
  for (const auto& tr : ensemble) {
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (tr.times[i] <= burn_in) continue;
      const double x = tr.avg_series[i].*channel;
      std::size_t b = width > 0.0 ? static_cast<std::size_t>((x - lo) / width) : 0;
      st.counts[std::min(b, bins - 1)] += 1;
    }
  }
  return st;
}

}  // namespace

HistogramReport stationary_histogram(std::span<const Trajectory> ensemble, double burn_in,
                                     std::size_t bins) {
  std::size_t n = 0;
  for (const auto& tr : ensemble) {
    for (double t : tr.times) n += t > burn_in ? 1 : 0;
  }
  if (n == 0) throw PreconditionError("no samples after the burn-in time");
  HistogramReport rep;
  rep.samples = n;
  rep.trajectories = ensemble.size();
  rep.u = channel_stats(ensemble, burn_in, bins, &Point::u);
  rep.v = channel_stats(ensemble, burn_in, bins, &Point::v);
  return rep;
}

}  // namespace epiland
