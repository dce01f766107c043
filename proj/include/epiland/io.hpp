#pragma once

#include <filesystem>
#include <string>

#include "epiland/diagnostics.hpp"
#include "epiland/discretization.hpp"
#include "epiland/landscape.hpp"

namespace epiland {

/// Shortest decimal that round-trips to the same double, with '.' as the
/// separator whatever the locale.
std::string format_double(double x);

/// `u,v,F,dFdu,dFdv`, one row per grid node, i (along u) outermost.
void write_landscape_csv(const std::filesystem::path& path, const MollifiedLandscape& land);
/// `t,node,x,u,v` for every stored snapshot.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const Discretization& disc);
/// `t,avg_u,avg_v,basin`.
void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj);
/// `channel,bin_lo,bin_hi,count` for the u then v histograms.
void write_histogram_csv(const std::filesystem::path& path, const HistogramReport& hist);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace epiland
