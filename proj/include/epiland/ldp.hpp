#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "epiland/diagnostics.hpp"
#include "epiland/discretization.hpp"
#include "epiland/landscape.hpp"
#include "epiland/solver.hpp"

namespace epiland {

/// U(phi) = int [ 1/2 sum_k d_k (phi_k')^2 + F(phi) ] dx with the mollified F.
/// Nodal derivatives are centered (one-sided at Neumann ends) and the integral
/// uses the grid's trapezoid weights. Throws DomainError outside the bounds.
double quasi_potential(const FieldState& profile, const MollifiedLandscape& land,
                       const Discretization& disc);

struct QuasiPotentialReport {
  std::size_t from_well = 0;
  std::size_t to_well = 0;
  std::vector<double> U_min_per_well;  ///< |O| * F(center_k), constant profiles
  double saddle_value = 0.0;           ///< |O| * F at the saddle
  double barrier = 0.0;                ///< saddle_value - U(from)
  Point saddle_point;
};

/// Lowest mollified F on the raw ridge separating wells `from` and `to`,
/// restricted to constant-in-space profiles. The ridge is scanned across every
/// grid edge whose endpoints classify as from/to, then refined by a
/// golden-section search along the analytic ridge curve. Throws
/// PreconditionError if the two basins share no boundary on the grid.
QuasiPotentialReport barrier(const MollifiedLandscape& land, std::size_t from, std::size_t to,
                             double domain_length = 1.0);

/// Pairs (k, j), k < j, whose basins touch on the landscape grid.
std::vector<std::pair<std::size_t, std::size_t>> adjacent_pairs(const MollifiedLandscape& land);

/// Lowest barrier out of `well` over all adjacent wells.
QuasiPotentialReport lowest_barrier(const MollifiedLandscape& land, std::size_t well,
                                    double domain_length = 1.0);

/// Discrete S(phi) = 1/2 sum_n sum_j w_j |(phi_{n+1} - phi_n)/dt_rec + d A phi_{n+1}
/// - f(phi_n)|^2 dt_rec over both channels, with the Laplacian taken at the
/// new record and the drift at the old one (the stepping splitting).
/// Requires stored states; throws PreconditionError for fewer than 2 records.
double action_functional(const Trajectory& path, const MollifiedLandscape& land,
                         const Discretization& disc);

struct ExitStudyInputs {
  SimConfig base;              ///< sigma and t_end are overridden per run
  std::vector<double> sigmas;  ///< at least 3, distinct; reported in decreasing order
  std::size_t n_traj = 20;
  double t_max = 1000.0;       ///< censoring horizon
  std::size_t start_well = 0;
  std::size_t dwell = 10;
  /// When set, exit means the spatial mean leaving this ball around the
  /// starting center instead of leaving the basin.
  std::optional<double> exit_radius;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

struct ExitStudy {
  std::vector<double> sigmas;
  std::vector<double> mean_exit;  ///< mean over uncensored runs; NaN if all are censored
  std::vector<double> censoring;  ///< fraction of runs without an exit by t_max
  std::vector<std::size_t> exits;
  double fitted_slope = 0.0;      ///< slope of ln(mean tau) against 1 / sigma^2
  double fit_intercept = 0.0;
  double predicted_slope = 0.0;   ///< 2 * barrier
  double barrier = 0.0;
  Point saddle_point;
  bool reliable = true;           ///< false if any censoring fraction exceeds 10%
};

ExitStudy exit_rate_fit(const ExitStudyInputs& in);

/// Least-squares slope and intercept of y against x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace epiland
