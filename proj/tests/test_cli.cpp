#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "epiland/commands.hpp"
#include "epiland/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = epiland::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
struct Scratch {
  fs::path dir;
  Scratch() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("epiland-cli-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string file(const std::string& name, const std::string& text) const {
    epiland::write_text(dir / name, text);
    return (dir / name).string();
  }
  std::string sub(const std::string& name) const { return (dir / name).string(); }
};

json read_json(const fs::path& p) { return json::parse(epiland::read_text(p)); }

const char* kSmall = R"(
seed = 4
[landscape]
wells = [[0.0, 0.0], [0.2, 0.0]]
weights = [1.0, 1.0]
labels = ["left", "right"]
filter_width = 0.02
resolution = 96
bounds = [-0.4, 0.6, -0.5, 0.5]
[noise]
mode = "white"
[solver]
J = 8
dt = 0.01
[run]
sigma = 0.08
t_end = 4
record_stride = 2
dwell = 3
burn_in = 1
n = 6
[study]
sigmas = [0.08, 0.1, 0.12]
n_per_sigma = 20
t_max = 5
)";

std::string with_wells(const std::string& wells, const std::string& weights) {
  return "[landscape]\nwells = " + wells + "\nweights = " + weights +
         "\nfilter_width = 0.02\nresolution = 96\n";
}

}  // namespace

TEST_CASE("usage errors exit with 2, help with 0") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"fly"}).code == 2);
  CHECK(cli({"run"}).code == 2);  // --config is required
  CHECK(cli({"run", "--help"}).code == 0);
  CHECK(cli({"run", "--config", "/does/not/exist.toml"}).code == 2);
}

TEST_CASE("missing wells: exit 2 naming the key") {
  Scratch s;
  const auto cfg = s.file("c.toml", "[landscape]\nweights = [1.0]\n");
  const auto r = cli({"run", "--config", cfg, "--out", s.sub("o")});
  CHECK(r.code == 2);
  CHECK(r.err.find("landscape.wells") != std::string::npos);
  CHECK_FALSE(fs::exists(s.dir / "o" / "summary.json"));
}

TEST_CASE("run without noise stays in the starting basin") {
  Scratch s;
  const auto cfg = s.file("c.toml", kSmall);
  const auto r = cli({"run", "--config", cfg, "--sigma", "0", "--t-end", "1", "--out", s.sub("o")});
  REQUIRE(r.code == 0);
  const auto sum = read_json(s.dir / "o" / "summary.json");
  CHECK(sum["final_basin"] == sum["initial_basin"]);
  CHECK(sum["final_time"].get<double>() == doctest::Approx(1.0));
  const auto man = read_json(s.dir / "o" / "manifest.json");
  CHECK(man["command"] == "run");
  CHECK(man["config"]["run"]["sigma"].get<double>() == 0.0);
  for (const char* f : {"trajectory.csv", "diagnostics.csv", "summary.json"}) {
    CHECK(man["outputs"][f].get<std::string>() == epiland::sha256_file(s.dir / "o" / f));
  }
}

TEST_CASE("reruns are byte-identical; --seed changes the output") {
  Scratch s;
  const auto cfg = s.file("c.toml", kSmall);
  REQUIRE(cli({"run", "--config", cfg, "--out", s.sub("a")}).code == 0);
  REQUIRE(cli({"run", "--config", cfg, "--out", s.sub("b")}).code == 0);
  REQUIRE(cli({"run", "--config", cfg, "--seed", "5", "--out", s.sub("c")}).code == 0);
  const auto a = read_json(s.dir / "a" / "manifest.json")["outputs"];
  CHECK(a == read_json(s.dir / "b" / "manifest.json")["outputs"]);
  CHECK(a["diagnostics.csv"] != read_json(s.dir / "c" / "manifest.json")["outputs"]["diagnostics.csv"]);

  REQUIRE(cli({"ensemble", "--config", cfg, "--jobs", "1", "--out", s.sub("e1")}).code == 0);
  REQUIRE(cli({"ensemble", "--config", cfg, "--jobs", "3", "--out", s.sub("e3")}).code == 0);
  CHECK(read_json(s.dir / "e1" / "manifest.json")["outputs"] ==
        read_json(s.dir / "e3" / "manifest.json")["outputs"]);
}

TEST_CASE("precedence: file, then --set, then flags") {
  Scratch s;
  const auto cfg = s.file("c.toml", kSmall);
  auto r = cli({"run", "--config", cfg, "--set", "run.sigma=0.5", "--print-config"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("sigma = 0.5") != std::string::npos);
  r = cli({"run", "--config", cfg, "--set", "run.sigma=0.5", "--sigma", "0.25", "--print-config"});
  CHECK(r.out.find("sigma = 0.25") != std::string::npos);
  CHECK(cli({"run", "--config", cfg, "--set", "run.nope=1"}).code == 2);
  CHECK(cli({"run", "--config", cfg, "--set", "solver.J=2"}).code == 2);
}

TEST_CASE("ensemble of one reproduces run") {
  Scratch s;
  const auto cfg = s.file("c.toml", kSmall);
  REQUIRE(cli({"run", "--config", cfg, "--out", s.sub("r")}).code == 0);
  REQUIRE(cli({"ensemble", "--config", cfg, "--n", "1", "--keep-diagnostics", "--out", s.sub("e")}).code == 0);
  CHECK(epiland::read_text(s.dir / "r" / "diagnostics.csv") ==
        epiland::read_text(s.dir / "e" / "diagnostics" / "0.csv"));
}

TEST_CASE("ensemble outputs are consistent") {
  Scratch s;
  const auto cfg = s.file("c.toml", kSmall);
  const auto r = cli({"ensemble", "--config", cfg, "--out", s.sub("e")});
  REQUIRE(r.code == 0);
  const auto tr = read_json(s.dir / "e" / "transitions.json");
  std::size_t total = 0;
  for (const auto& [k, v] : tr["counts"].items()) total += v.get<std::size_t>();
  CHECK(total == 6);
  CHECK(tr["sequences"].size() == 6);
  const auto occ = read_json(s.dir / "e" / "occupation.json");
  const auto pooled = occ["pooled"].get<std::vector<double>>();
  CHECK(std::accumulate(pooled.begin(), pooled.end(), 0.0) == doctest::Approx(1.0));
  CHECK(occ["labels"] == json({"left", "right"}));
  const auto sum = read_json(s.dir / "e" / "summary.json");
  CHECK(sum["avg_u"]["stddev"].get<double>() > 0.0);
  CHECK(epiland::read_text(s.dir / "e" / "histogram.csv").rfind("channel,bin_lo,bin_hi,count\n", 0) == 0);
  CHECK(cli({"ensemble", "--config", cfg, "--n", "0", "--out", s.sub("z")}).code == 2);
}

TEST_CASE("exit-study") {
  Scratch s;
  const auto cfg = s.file("c.toml", kSmall);
  SUBCASE("empty or short sigma lists are config errors") {
    CHECK(cli({"exit-study", "--config", cfg, "--sigmas", "", "--out", s.sub("x")}).code == 2);
    CHECK(cli({"exit-study", "--config", cfg, "--sigmas", "0.1,0.2", "--out", s.sub("x")}).code == 2);
    CHECK(cli({"exit-study", "--config", cfg, "--sigmas", "0.1,abc,0.3", "--out", s.sub("x")}).code == 2);
    CHECK(cli({"exit-study", "--config", cfg, "--n", "5", "--out", s.sub("x")}).code == 2);
  }
  SUBCASE("heavy censoring still succeeds, with a warning and nulls") {
    const auto r = cli({"exit-study", "--config", cfg, "--sigmas", "0.01,0.012,0.015", "--out", s.sub("x")});
    CHECK(r.code == 0);
    CHECK(r.err.find("censoring") != std::string::npos);
    const auto rep = read_json(s.dir / "x" / "exit_study.json");
    CHECK(rep["reliable"] == false);
    CHECK(rep["mean_exit"][0].is_null());
    CHECK(rep["censoring"][0].get<double>() == 1.0);
    CHECK(rep["sigmas"][0].get<double>() == 0.015);
  }
  SUBCASE("report fields") {
    REQUIRE(cli({"exit-study", "--config", cfg, "--jobs", "4", "--out", s.sub("x")}).code == 0);
    const auto rep = read_json(s.dir / "x" / "exit_study.json");
    for (const char* key : {"sigmas", "mean_exit", "censoring", "fitted_slope", "predicted_slope", "saddle_point"}) {
      CHECK(rep.contains(key));
    }
    CHECK(rep["predicted_slope"].get<double>() == doctest::Approx(2 * rep["barrier"].get<double>()));
  }
}

TEST_CASE("landscape command") {
  Scratch s;
  SUBCASE("equal weights give a uniform limit measure") {
    const auto cfg = s.file("c.toml", with_wells("[[0, 0], [0.3, 0], [0, 0.3], [0.3, 0.3]]", "[1, 1, 1, 1]"));
    REQUIRE(cli({"landscape", "--config", cfg, "--out", s.sub("l")}).code == 0);
    const auto lm = read_json(s.dir / "l" / "limit_measure.json");
    for (const auto& w : lm["nu0"]) CHECK(w.get<double>() == doctest::Approx(0.25));
  }
  SUBCASE("weights (1, 1, 2, 2)") {
    const auto cfg = s.file("c.toml", with_wells("[[0, 0], [0.3, 0], [0, 0.3], [0.3, 0.3]]", "[1, 1, 2, 2]"));
    REQUIRE(cli({"landscape", "--config", cfg, "--out", s.sub("l")}).code == 0);
    const auto lm = read_json(s.dir / "l" / "limit_measure.json");
    const std::vector<double> expected{0.4, 0.4, 0.1, 0.1};
    for (std::size_t k = 0; k < 4; ++k) CHECK(lm["nu0"][k].get<double>() == doctest::Approx(expected[k]));
    CHECK(lm["hessian_dets"][2].get<double>() == doctest::Approx(16.0));
    // Each adjacent pair appears in both directions with one saddle value.
    const auto& b = lm["barriers"];
    CHECK(b.size() % 2 == 0);
    for (std::size_t i = 0; i < b.size(); i += 2) {
      CHECK(b[i]["from"] == b[i + 1]["to"]);
      CHECK(b[i]["saddle_value"].get<double>() == doctest::Approx(b[i + 1]["saddle_value"].get<double>()).epsilon(1e-9).scale(0));
    }
    const std::string csv = epiland::read_text(s.dir / "l" / "landscape.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 96 * 96 + 1);
  }
}

TEST_CASE("simulation aborts exit with 3") {
  Scratch s;
  const auto cfg = s.file("c.toml", kSmall);
  const auto r = cli({"run", "--config", cfg, "--set", "run.initial=[5.0, 5.0]", "--out", s.sub("o")});
  CHECK(r.code == 3);
  CHECK(r.err.find("left the landscape bounds") != std::string::npos);
}

TEST_CASE("--print-config shows every resolved default and round-trips") {
  Scratch s;
  const auto cfg = s.file("min.toml", with_wells("[[0.0, 0.0], [0.2, 0.0]]", "[1.0, 1.0]"));
  const auto first = cli({"run", "--config", cfg, "--print-config"});
  REQUIRE(first.code == 0);
  const std::string text = "\n" + first.out;
  for (const char* key : {"seed", "filter_width", "bounds", "resolution", "mode", "l", "dt", "J", "bc",
                          "sigma", "t_end", "dwell", "burn_in"}) {
    CHECK_MESSAGE(text.find(std::string("\n") + key + " = ") != std::string::npos, key);
  }
  CHECK(text.find("filter_width = 0\n") == std::string::npos);
  const auto again = cli({"run", "--config", s.file("resolved.toml", first.out), "--print-config"});
  REQUIRE(again.code == 0);
  CHECK(again.out == first.out);
}
