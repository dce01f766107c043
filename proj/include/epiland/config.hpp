#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "epiland/discretization.hpp"
#include "epiland/landscape.hpp"
#include "epiland/noise.hpp"
#include "epiland/solver.hpp"

namespace epiland {

/// One value of the configuration text: number, boolean, string or array.
struct ConfigValue {
  enum class Kind { number, boolean, string, array };
  Kind kind = Kind::number;
  double number = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<ConfigValue> items;
  int line = 0;  ///< 0 for values set programmatically
};

/// Flat table of dotted keys read from a TOML-style file:
///
///     seed = 7
///     [landscape]
///     wells = [[0.2, 0.2], [0.8, 0.2]]   # arrays may span lines
///     labels = ["a", "b"]
///
/// Parse errors throw ConfigError naming the line.
class ConfigTable {
 public:
  static ConfigTable parse(std::string_view text, std::string source = "<string>");
  static ConfigTable load(const std::filesystem::path& path);

  /// Applies `key=value`; the value uses the file syntax, bare words are strings.
  void set_override(std::string_view assignment);
  void set(const std::string& key, ConfigValue value) { values_[key] = std::move(value); }

  const ConfigValue* find(const std::string& key) const;
  const std::map<std::string, ConfigValue>& values() const noexcept { return values_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::string source_;
  std::map<std::string, ConfigValue> values_;
};

/// Fully resolved configuration with every default expanded.
struct Settings {
  std::uint64_t seed = 1;

  struct Landscape {
    std::vector<Point> centers;
    std::vector<double> weights;
    std::vector<std::string> labels;
    double filter_width = 0.0;  ///< 0 selects 2% of the bounds diagonal
    std::size_t resolution = 256;
    std::optional<Bounds> bounds;
  } landscape;

  struct Noise {
    NoiseMode mode = NoiseMode::qwiener;
    double l = 0.1;
    double clip_tol = 1e-10;
  } noise;

  struct Solver {
    std::size_t J = 64;
    Boundary bc = Boundary::neumann;
    double d1 = 1.0;
    double d2 = 1.0;
    double dt = 1e-3;
    double domain_length = 1.0;
  } solver;

  struct Run {
    double sigma = 0.014;
    double t_end = 100.0;
    std::size_t record_stride = 10;
    std::optional<Point> initial;  ///< constant initial point; else the center of initial_well
    std::size_t initial_well = 0;
    std::size_t dwell = 10;
    double burn_in = 10.0;
    std::size_t histogram_bins = 50;
    std::size_t n = 1;  ///< ensemble size
    std::string forcing = "none";  ///< none | pull
    std::size_t forcing_target = 0;
    double forcing_strength = 0.0;
  } run;

  struct Study {
    std::vector<double> sigmas;
    std::size_t n_per_sigma = 20;
    double t_max = 1000.0;
    std::size_t start_well = 0;
    double exit_radius = 0.0;  ///< 0 means "leave the basin"
  } study;
};

/// Validates keys and types and expands defaults. Missing `landscape.wells`
/// (or both `landscape.weights` and `landscape.counts`) throws ConfigError.
Settings resolve(const ConfigTable& table);

/// Resolved configuration in the file syntax (round-trips through resolve).
std::string to_config_text(const Settings& s);
nlohmann::json to_json(const Settings& s);

/// Immutable model objects built from the settings, shared by all trajectories.
struct Model {
  Settings settings;
  std::shared_ptr<const MollifiedLandscape> landscape;
  std::shared_ptr<const NoiseModel> noise;
  std::shared_ptr<const Discretization> disc;
  std::vector<std::string> warnings;

  /// Simulation template for the run section.
  SimConfig sim_config() const;
  Point initial_point() const;
};

Model build_model(const Settings& settings);

/// Model pieces that only need the landscape section.
std::shared_ptr<const MollifiedLandscape> build_mollified(const Settings& settings);

}  // namespace epiland
