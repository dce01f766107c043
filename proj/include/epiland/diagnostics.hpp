#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "epiland/discretization.hpp"
#include "epiland/landscape.hpp"

namespace epiland {

/// Recorded path of one simulation: snapshot times, the per-record
/// observables, and (optionally) the full field snapshots.
struct Trajectory {
  std::vector<double> times;
  std::vector<FieldState> states;  ///< empty unless snapshots were kept
  std::vector<Point> avg_series;   ///< (Avg u, Avg v), root-mean-square over the domain
  std::vector<Point> mean_series;  ///< spatial means, used for classification
  std::vector<std::size_t> basin_series;

  std::size_t size() const noexcept { return times.size(); }
  double end_time() const { return times.empty() ? 0.0 : times.back(); }
};

/// (Avg u, Avg v): sqrt((1/|O|) * trapezoid(|u|^2)) for each channel.
Point l2_average(const FieldState& state, const Discretization& disc);
/// Trapezoidal spatial mean of each channel.
Point spatial_mean(const FieldState& state, const Discretization& disc);

/// Basin of the spatial-mean point at every record. Requires mean_series.
std::vector<std::size_t> classify_series(const Trajectory& traj, const RawLandscape& raw);

struct TransitionEvent {
  double t_exit = 0.0;
  std::size_t from_basin = 0;
  std::size_t to_basin = 0;
  bool dwell_confirmed = false;
};

/// Earliest record at which the series leaves `basin` and stays out of it for
/// `dwell` consecutive records (the leaving record included). Throws
/// PreconditionError if the series does not start in `basin`.
std::optional<TransitionEvent> first_exit(std::span<const double> times,
                                          std::span<const std::size_t> series, std::size_t basin,
                                          std::size_t dwell);
std::optional<TransitionEvent> first_exit(const Trajectory& traj, std::size_t basin,
                                          std::size_t dwell);

/// Incremental form of first_exit for simulations that stop at the exit.
class ExitDetector {
 public:
  ExitDetector(std::size_t basin, std::size_t dwell) : basin_(basin), dwell_(dwell == 0 ? 1 : dwell) {}
  /// Feeds one record; returns the confirmed exit once it happens.
  std::optional<TransitionEvent> push(double t, std::size_t classification);
  /// True while an excursion outside the basin is waiting for confirmation.
  bool pending() const noexcept { return run_ > 0; }

 private:
  std::size_t basin_;
  std::size_t dwell_;
  std::size_t run_ = 0;
  double run_start_ = 0.0;
  std::size_t run_target_ = 0;
};

struct OccupationReport {
  std::vector<double> fractions;
  double horizon = 0.0;
};

/// Fraction of records with t <= horizon spent in each basin.
OccupationReport occupation(const Trajectory& traj, double horizon, std::size_t n_basins);

/// Basins visited in time order. A basin enters the sequence once a run of it
/// lasts `dwell` records (the starting basin always counts); repeated entries
/// are collapsed.
std::vector<std::size_t> transition_sequence(std::span<const std::size_t> series, std::size_t dwell);
std::vector<std::size_t> transition_sequence(const Trajectory& traj, std::size_t dwell);

struct ChannelStats {
  double mean = 0.0;
  double stddev = 0.0;
  /// Standard error of the pooled mean, from the spread of per-trajectory means.
  double standard_error = 0.0;
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;
};

struct HistogramReport {
  ChannelStats u;
  ChannelStats v;
  std::size_t samples = 0;
  std::size_t trajectories = 0;
};

/// Pooled (Avg u, Avg v) samples with t > burn_in over an ensemble. Throws
/// PreconditionError if no sample falls after the burn-in.
HistogramReport stationary_histogram(std::span<const Trajectory> ensemble, double burn_in,
                                     std::size_t bins = 50);

}  // namespace epiland
