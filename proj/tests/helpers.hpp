#pragma once

#include <doctest.h>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "epiland/discretization.hpp"
#include "epiland/landscape.hpp"
#include "epiland/noise.hpp"
#include "epiland/solver.hpp"

namespace testing {

using namespace epiland;

inline std::filesystem::path source_dir() { return EPILAND_SOURCE_DIR; }
inline std::filesystem::path config_path(const std::string& name) {
  return source_dir() / "configs" / name;
}

inline RawLandscape two_wells(double gap = 0.2, double a0 = 1.0, double a1 = 1.0) {
  return build_landscape({{{0.0, 0.0}, a0}, {{gap, 0.0}, a1}});
}

inline std::shared_ptr<const MollifiedLandscape> smooth(const RawLandscape& raw, double width,
                                                        Bounds b, std::size_t m = 256) {
  return std::make_shared<const MollifiedLandscape>(mollify(raw, width, GridSpec{b, m}));
}

/// F = 0 on [-10, 10]^2; the raw source is a placeholder single well.
inline std::shared_ptr<const MollifiedLandscape> flat_landscape() {
  const std::size_t m = 64;
  return std::make_shared<const MollifiedLandscape>(
      from_grid(build_landscape({{{0.0, 0.0}, 1.0}}), Bounds{-10, 10, -10, 10}, m,
                std::vector<double>(m * m, 0.0)));
}

inline SimConfig make_config(std::shared_ptr<const MollifiedLandscape> land,
                             std::shared_ptr<const Discretization> disc, double sigma,
                             double t_end, Point start, bool white = true, double l = 0.1) {
  SimConfig cfg;
  cfg.landscape = std::move(land);
  if (white) {
    cfg.noise = std::make_shared<const NoiseModel>(NoiseModel::white(disc->nodes(), disc->h()));
  } else {
    const auto x = disc->node_positions();
    cfg.noise = std::make_shared<const NoiseModel>(NoiseModel::qwiener(l, x));
  }
  cfg.disc = std::move(disc);
  cfg.sigma = sigma;
  cfg.t_end = t_end;
  cfg.record_stride = 1;
  cfg.initial = InitialCondition::at(start);
  return cfg;
}

inline std::shared_ptr<const Discretization> make_disc(std::size_t J, double dt,
                                                       Boundary bc = Boundary::neumann,
                                                       double d1 = 1.0, double d2 = 1.0) {
  return std::make_shared<const Discretization>(Discretization::build(J, bc, d1, d2, dt));
}

}  // namespace testing
