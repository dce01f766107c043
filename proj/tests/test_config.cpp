#include <doctest.h>

#include <string>

#include "epiland/config.hpp"
#include "epiland/errors.hpp"

using namespace epiland;

namespace {

const char* kMinimal = R"(
seed = 7
[landscape]
wells = [[0.0, 0.0], [0.2, 0.0]]
weights = [1.0, 1.0]
)";

std::string error_of(const std::string& text) {
  try {
    (void)resolve(ConfigTable::parse(text, "test.toml"));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parser: values, sections, comments, multiline arrays") {
  const auto t = ConfigTable::parse(R"(
# leading comment
top = 1_000          # trailing comment
flag = true
name = "a \"quoted\" word"
[section]
list = [
  1, 2.5, -3e-2,   # inside an array
]
nested = [[1, 2], [3, 4]]
dotted.key = "x"
)");
  CHECK(t.find("top")->number == 1000.0);
  CHECK(t.find("flag")->boolean);
  CHECK(t.find("name")->text == "a \"quoted\" word");
  const auto* list = t.find("section.list");
  REQUIRE(list);
  CHECK(list->items.size() == 3);
  CHECK(list->items[2].number == -3e-2);
  CHECK(list->line == 7);
  CHECK(t.find("section.nested")->items[1].items[0].number == 3.0);
  CHECK(t.find("section.dotted.key")->text == "x");
  CHECK(t.find("missing") == nullptr);
}

TEST_CASE("parser errors name the line") {
  auto msg = [](const char* text) {
    try {
      (void)ConfigTable::parse(text, "bad.toml");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg("a = 1\nb = [1, 2\n") .find("bad.toml:") == 0);
  CHECK(msg("a = 1\nb = @\n").find("bad.toml:2:") == 0);
  CHECK(msg("a = 1\na = 2\n").find("duplicate key 'a'") != std::string::npos);
  CHECK(msg("a = \"open\n").find("unterminated string") != std::string::npos);
  CHECK(msg("a = 1 2\n").find("bad.toml:1:") == 0);
  CHECK(msg("= 1\n").find("expected a key") != std::string::npos);
}

TEST_CASE("resolve expands defaults") {
  const auto s = resolve(ConfigTable::parse(kMinimal));
  CHECK(s.seed == 7);
  CHECK(s.landscape.centers.size() == 2);
  CHECK(s.noise.mode == NoiseMode::qwiener);
  CHECK(s.solver.J == 64);
  CHECK(s.solver.bc == Boundary::neumann);
  CHECK(s.run.dwell == 10);
  REQUIRE(s.landscape.bounds);
  CHECK(s.landscape.bounds->u_min == doctest::Approx(-0.2));
  CHECK(s.landscape.filter_width == doctest::Approx(default_filter_width(*s.landscape.bounds)));
  CHECK(s.study.exit_radius == 0.0);
}

TEST_CASE("resolve errors") {
  CHECK(error_of("[landscape]\nweights = [1.0]\n").find("missing required key 'landscape.wells'") !=
        std::string::npos);
  CHECK(error_of("[landscape]\nwells = [[0, 0]]\n").find("landscape.weights") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "typo = 3\n").find("unknown key 'landscape.typo' (line 6)") !=
        std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "[solver]\nJ = 2.5\n").find("solver.J") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "[noise]\nmode = \"pink\"\n").find("noise.mode") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "[run]\ninitial_well = 2\n").find("out of range") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "[run]\nforcing = \"push\"\n").find("run.forcing") != std::string::npos);
  CHECK(error_of("seed = -1\n[landscape]\nwells = [[0, 0]]\nweights = [1]\n").find("seed") != std::string::npos);
  CHECK(error_of("[landscape]\nwells = [[0, 0]]\nweights = [1, 2]\n").find("one entry per well") !=
        std::string::npos);
  CHECK(error_of("[landscape]\nwells = [[0, 0, 1]]\nweights = [1]\n").find("[u, v] pairs") != std::string::npos);
  CHECK_THROWS_AS(ConfigTable::load("/nonexistent/file.toml"), ConfigError);
}

TEST_CASE("weights from counts") {
  const auto s = resolve(ConfigTable::parse(
      "[landscape]\nwells = [[0, 0], [1, 0]]\ncounts = [4, 16]\nweight_rule = \"inverse_sqrt\"\n"));
  CHECK(s.landscape.weights[0] == doctest::Approx(0.25));
  CHECK(s.landscape.weights[1] == doctest::Approx(0.125));
  const auto r = resolve(ConfigTable::parse("[landscape]\nwells = [[0, 0], [1, 0]]\ncounts = [4, 16]\n"));
  CHECK(r.landscape.weights[1] == doctest::Approx(1.0 / 16));
  CHECK(error_of("[landscape]\nwells = [[0, 0]]\nweights = [1]\ncounts = [2]\n").find("not both") !=
        std::string::npos);
}

TEST_CASE("overrides") {
  auto t = ConfigTable::parse(kMinimal);
  t.set_override("run.sigma=0.02");
  t.set_override("noise.mode=white");
  t.set_override("landscape.weights=[2.0, 3.0]");
  const auto s = resolve(t);
  CHECK(s.run.sigma == 0.02);
  CHECK(s.noise.mode == NoiseMode::white);
  CHECK(s.landscape.weights[1] == 3.0);
  CHECK_THROWS_AS(t.set_override("no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(t.set_override("=3"), ConfigError);
  t.set_override("run.bogus=1");
  CHECK_THROWS_WITH_AS(resolve(t), "unknown key 'run.bogus'", ConfigError);
}

TEST_CASE("resolved text round-trips") {
  for (const char* file : {"default.toml", "exit1.toml", "exit_study.toml", "single_well.toml"}) {
    const auto s = resolve(ConfigTable::load(std::string(EPILAND_SOURCE_DIR) + "/configs/" + file));
    const std::string text = to_config_text(s);
    const auto again = resolve(ConfigTable::parse(text));
    CHECK(to_config_text(again) == text);
    CHECK(to_json(again) == to_json(s));
  }
}

TEST_CASE("shipped configs build") {
  for (const char* file : {"default.toml", "dist_scaling.toml", "exit1.toml", "exit2.toml", "exit_study.toml",
                           "ergodic_two_well.toml", "single_well.toml"}) {
    CAPTURE(file);
    const auto m = build_model(resolve(ConfigTable::load(std::string(EPILAND_SOURCE_DIR) + "/configs/" + file)));
    CHECK(m.warnings.empty());
    CHECK(m.landscape->source().classify(m.initial_point()) == m.settings.run.initial_well);
    CHECK_NOTHROW(validate(m.sim_config()));
  }
}

TEST_CASE("model defaults: bounds and filter width") {
  const auto m = build_model(resolve(ConfigTable::parse(kMinimal)));
  const Bounds b = m.landscape->bounds();
  CHECK(b.u_min == doctest::Approx(-0.2));
  CHECK(b.u_max == doctest::Approx(0.4));
  CHECK(m.landscape->filter_width() == doctest::Approx(default_filter_width(b)));
  CHECK(m.noise->mode() == NoiseMode::qwiener);
  CHECK(m.disc->nodes() == 63);
}
