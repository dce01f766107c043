#include "epiland/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "epiland/errors.hpp"
#include "epiland/io.hpp"

namespace epiland {
namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::string& source) : s_(text), source_(source) {}

  std::map<std::string, ConfigValue> run() {
    std::map<std::string, ConfigValue> out;
    std::string section;
    while (true) {
      skip_blank(true);
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        const std::string name = read_key();
        skip_blank(false);
        expect(']');
        section = name;
        end_of_statement();
        continue;
      }
      const int key_line = line_;
      const std::string key = read_key();
      skip_blank(false);
      expect('=');
      skip_blank(false);
      ConfigValue v = value();
      v.line = key_line;
      end_of_statement();
      const std::string full = section.empty() ? key : section + "." + key;
      if (!out.emplace(full, std::move(v)).second) fail("duplicate key '" + full + "'");
    }
    return out;
  }

  ConfigValue value() {
    if (eof()) fail("missing value");
    ConfigValue v;
    v.line = line_;
    const char c = peek();
    if (c == '[') {
      ++pos_;
      v.kind = ConfigValue::Kind::array;
      while (true) {
        skip_blank(true);
        if (peek() == ']') {
          ++pos_;
          break;
        }
        v.items.push_back(value());
        skip_blank(true);
        if (peek() == ',') {
          ++pos_;
        } else if (peek() == ']') {
          ++pos_;
          break;
        } else {
          fail("expected ',' or ']' in array");
        }
      }
      return v;
    }
    if (c == '"') {
      ++pos_;
      v.kind = ConfigValue::Kind::string;
      while (!eof() && peek() != '"') {
        if (peek() == '\n') fail("unterminated string");
        if (peek() == '\\' && pos_ + 1 < s_.size()) ++pos_;
        v.text += s_[pos_++];
      }
      expect('"');
      return v;
    }
    std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' ||
                      peek() == '-' || peek() == '+' || peek() == '_')) {
      ++pos_;
    }
    const std::string_view tok = s_.substr(start, pos_ - start);
    if (tok == "true" || tok == "false") {
      v.kind = ConfigValue::Kind::boolean;
      v.boolean = tok == "true";
      return v;
    }
    std::string clean;
    for (char ch : tok) {
      if (ch != '_') clean += ch;
    }
    const char* first = clean.data();
    if (!clean.empty() && clean.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, clean.data() + clean.size(), v.number);
    if (clean.empty() || ec != std::errc{} || ptr != clean.data() + clean.size()) {
      fail("cannot parse value '" + std::string(tok) + "'");
    }
    v.kind = ConfigValue::Kind::number;
    return v;
  }

  bool eof() const { return pos_ >= s_.size(); }
  void skip_blank(bool newlines) {
    while (!eof()) {
      const char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') ++pos_;
      } else if (c == '\n' && newlines) {
        ++line_;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

 private:
  char peek() const { return s_[pos_]; }

  std::string read_key() {
    skip_blank(false);
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '.' || peek() == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void end_of_statement() {
    skip_blank(false);
    if (eof()) return;
    if (peek() != '\n') fail("unexpected text after value");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + what);
  }

  std::string_view s_;
  const std::string& source_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::string where(const ConfigValue& v, const std::string& key) {
  return v.line > 0 ? "'" + key + "' (line " + std::to_string(v.line) + ")" : "'" + key + "'";
}

class Reader {
 public:
  explicit Reader(const ConfigTable& t) : t_(t) {}

  const ConfigValue* get(const std::string& key) {
    used_.insert(key);
    return t_.find(key);
  }

  double number(const std::string& key, double fallback) {
    const ConfigValue* v = get(key);
    if (!v) return fallback;
    return as_number(*v, key);
  }
  std::size_t count(const std::string& key, std::size_t fallback) {
    const ConfigValue* v = get(key);
    if (!v) return fallback;
    const double x = as_number(*v, key);
    if (x < 0 || x != std::floor(x) || x > 9.0e15) {
      throw ConfigError("key " + where(*v, key) + " must be a non-negative integer");
    }
    return static_cast<std::size_t>(x);
  }
  std::string text(const std::string& key, const std::string& fallback) {
    const ConfigValue* v = get(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::string) throw ConfigError("key " + where(*v, key) + " must be a string");
    return v->text;
  }
  std::vector<double> numbers(const std::string& key) {
    const ConfigValue* v = get(key);
    if (!v) return {};
    return as_numbers(*v, key);
  }
  std::vector<std::string> texts(const std::string& key) {
    const ConfigValue* v = get(key);
    if (!v) return {};
    if (v->kind != ConfigValue::Kind::array) throw ConfigError("key " + where(*v, key) + " must be an array");
    std::vector<std::string> out;
    for (const auto& item : v->items) {
      if (item.kind != ConfigValue::Kind::string) {
        throw ConfigError("key " + where(*v, key) + " must hold strings");
      }
      out.push_back(item.text);
    }
    return out;
  }
  std::vector<Point> points(const std::string& key) {
    const ConfigValue* v = get(key);
    if (!v) return {};
    if (v->kind != ConfigValue::Kind::array) throw ConfigError("key " + where(*v, key) + " must be an array");
    std::vector<Point> out;
    for (const auto& item : v->items) {
      const auto xy = as_numbers(item, key);
      if (xy.size() != 2) throw ConfigError("key " + where(*v, key) + " must hold [u, v] pairs");
      out.push_back({xy[0], xy[1]});
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, v] : t_.values()) {
      if (!used_.count(key)) throw ConfigError("unknown key " + where(v, key));
    }
  }

 private:
  static double as_number(const ConfigValue& v, const std::string& key) {
    if (v.kind != ConfigValue::Kind::number) throw ConfigError("key " + where(v, key) + " must be a number");
    return v.number;
  }
  static std::vector<double> as_numbers(const ConfigValue& v, const std::string& key) {
    if (v.kind != ConfigValue::Kind::array) throw ConfigError("key " + where(v, key) + " must be an array");
    std::vector<double> out;
    for (const auto& item : v.items) out.push_back(as_number(item, key));
    return out;
  }

  const ConfigTable& t_;
  std::set<std::string> used_;
};

NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "qwiener") return NoiseMode::qwiener;
  if (s == "white") return NoiseMode::white;
  throw ConfigError("noise.mode must be 'qwiener' or 'white', got '" + s + "'");
}

}  // namespace

ConfigTable ConfigTable::parse(std::string_view text, std::string source) {
  ConfigTable t;
  t.source_ = std::move(source);
  Parser p(text, t.source_);
  t.values_ = p.run();
  return t;
}

ConfigTable ConfigTable::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse(text, path.string());
}

void ConfigTable::set_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string rhs(assignment.substr(eq + 1));
  ConfigValue v;
  try {
    Parser p(rhs, "override");
    v = p.value();
    p.skip_blank(false);
    if (!p.eof()) throw ConfigError("trailing text");
  } catch (const ConfigError&) {
    v = ConfigValue{};
    v.kind = ConfigValue::Kind::string;
    v.text = rhs;
  }
  v.line = 0;
  values_[key] = std::move(v);
}

const ConfigValue* ConfigTable::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

Settings resolve(const ConfigTable& table) {
  Reader r(table);
  Settings s;
  const double seed = r.number("seed", 1.0);
  if (seed < 0 || seed != std::floor(seed)) throw ConfigError("seed must be a non-negative integer");
  s.seed = static_cast<std::uint64_t>(seed);

  auto& L = s.landscape;
  L.centers = r.points("landscape.wells");
  if (L.centers.empty()) throw ConfigError("missing required key 'landscape.wells'");
  L.weights = r.numbers("landscape.weights");
  const auto counts = r.numbers("landscape.counts");
  const std::string rule = r.text("landscape.weight_rule", "reciprocal");
  if (L.weights.empty()) {
    if (counts.empty()) {
      throw ConfigError("missing required key 'landscape.weights' (or 'landscape.counts')");
    }
    if (rule != "reciprocal" && rule != "inverse_sqrt") {
      throw ConfigError("landscape.weight_rule must be 'reciprocal' or 'inverse_sqrt'");
    }
    L.weights = weights_from_counts(counts, rule == "reciprocal" ? WeightRule::reciprocal
                                                                  : WeightRule::inverse_sqrt);
  } else if (!counts.empty()) {
    throw ConfigError("give either 'landscape.weights' or 'landscape.counts', not both");
  }
  if (L.weights.size() != L.centers.size()) {
    throw ConfigError("'landscape.weights' must have one entry per well");
  }
  L.labels = r.texts("landscape.labels");
  L.filter_width = r.number("landscape.filter_width", 0.0);
  L.resolution = r.count("landscape.resolution", L.resolution);
  const auto b = r.numbers("landscape.bounds");
  if (!b.empty()) {
    if (b.size() != 4) throw ConfigError("'landscape.bounds' must be [u_min, u_max, v_min, v_max]");
    L.bounds = Bounds{b[0], b[1], b[2], b[3]};
  }
  // Derived landscape defaults are materialized here so printed configs show them.
  if (!L.bounds) {
    std::vector<Well> wells;
    for (std::size_t k = 0; k < L.centers.size(); ++k) wells.push_back({L.centers[k], L.weights[k]});
    L.bounds = default_bounds(build_landscape(std::move(wells), L.labels));
  }
  if (L.filter_width <= 0.0) L.filter_width = default_filter_width(*L.bounds);

  s.noise.mode = parse_noise_mode(r.text("noise.mode", "qwiener"));
  s.noise.l = r.number("noise.l", s.noise.l);
  s.noise.clip_tol = r.number("noise.clip_tol", s.noise.clip_tol);

  s.solver.J = r.count("solver.J", s.solver.J);
  s.solver.bc = parse_boundary(r.text("solver.bc", "neumann"));
  s.solver.d1 = r.number("solver.d1", s.solver.d1);
  s.solver.d2 = r.number("solver.d2", s.solver.d2);
  s.solver.dt = r.number("solver.dt", s.solver.dt);
  s.solver.domain_length = r.number("solver.domain_length", s.solver.domain_length);

  auto& R = s.run;
  R.sigma = r.number("run.sigma", R.sigma);
  R.t_end = r.number("run.t_end", R.t_end);
  R.record_stride = r.count("run.record_stride", R.record_stride);
  const auto init = r.numbers("run.initial");
  if (!init.empty()) {
    if (init.size() != 2) throw ConfigError("'run.initial' must be [u, v]");
    R.initial = Point{init[0], init[1]};
  }
  R.initial_well = r.count("run.initial_well", R.initial_well);
  R.dwell = r.count("run.dwell", R.dwell);
  R.burn_in = r.number("run.burn_in", R.burn_in);
  R.histogram_bins = r.count("run.histogram_bins", R.histogram_bins);
  R.n = r.count("run.n", R.n);
  R.forcing = r.text("run.forcing", R.forcing);
  if (R.forcing != "none" && R.forcing != "pull") throw ConfigError("run.forcing must be 'none' or 'pull'");
  R.forcing_target = r.count("run.forcing_target", R.forcing_target);
  R.forcing_strength = r.number("run.forcing_strength", R.forcing_strength);

  auto& S = s.study;
  S.sigmas = r.numbers("study.sigmas");
  S.n_per_sigma = r.count("study.n_per_sigma", S.n_per_sigma);
  S.t_max = r.number("study.t_max", S.t_max);
  S.start_well = r.count("study.start_well", S.start_well);
  S.exit_radius = r.number("study.exit_radius", S.exit_radius);

  r.reject_unknown();

  if (R.initial_well >= L.centers.size()) throw ConfigError("run.initial_well is out of range");
  if (R.forcing_target >= L.centers.size()) throw ConfigError("run.forcing_target is out of range");
  if (S.start_well >= L.centers.size()) throw ConfigError("study.start_well is out of range");
  return s;
}

namespace {

std::string num(double x) { return format_double(x); }

std::string num_list(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + num(xs[i]);
  return out + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_config_text(const Settings& s) {
  std::ostringstream o;
  o << "seed = " << s.seed << "\n\n[landscape]\nwells = [";
  for (std::size_t i = 0; i < s.landscape.centers.size(); ++i) {
    o << (i ? ", " : "") << "[" << num(s.landscape.centers[i].u) << ", " << num(s.landscape.centers[i].v)
      << "]";
  }
  o << "]\nweights = " << num_list(s.landscape.weights) << "\n";
  if (!s.landscape.labels.empty()) {
    o << "labels = [";
    for (std::size_t i = 0; i < s.landscape.labels.size(); ++i) {
      o << (i ? ", " : "") << quoted(s.landscape.labels[i]);
    }
    o << "]\n";
  }
  o << "filter_width = " << num(s.landscape.filter_width) << "\n";
  o << "resolution = " << s.landscape.resolution << "\n";
  if (s.landscape.bounds) {
    const Bounds& b = *s.landscape.bounds;
    o << "bounds = " << num_list({b.u_min, b.u_max, b.v_min, b.v_max}) << "\n";
  }
  o << "\n[noise]\nmode = \"" << (s.noise.mode == NoiseMode::qwiener ? "qwiener" : "white") << "\"\n";
  o << "l = " << num(s.noise.l) << "\nclip_tol = " << num(s.noise.clip_tol) << "\n";
  o << "\n[solver]\nJ = " << s.solver.J << "\nbc = \"" << to_string(s.solver.bc) << "\"\n";
  o << "d1 = " << num(s.solver.d1) << "\nd2 = " << num(s.solver.d2) << "\ndt = " << num(s.solver.dt)
    << "\ndomain_length = " << num(s.solver.domain_length) << "\n";
  const auto& R = s.run;
  o << "\n[run]\nsigma = " << num(R.sigma) << "\nt_end = " << num(R.t_end)
    << "\nrecord_stride = " << R.record_stride << "\n";
  if (R.initial) o << "initial = " << num_list({R.initial->u, R.initial->v}) << "\n";
  o << "initial_well = " << R.initial_well << "\ndwell = " << R.dwell << "\nburn_in = " << num(R.burn_in)
    << "\nhistogram_bins = " << R.histogram_bins << "\nn = " << R.n << "\nforcing = " << quoted(R.forcing)
    << "\nforcing_target = " << R.forcing_target << "\nforcing_strength = " << num(R.forcing_strength)
    << "\n";
  const auto& S = s.study;
  o << "\n[study]\nsigmas = " << num_list(S.sigmas) << "\nn_per_sigma = " << S.n_per_sigma
    << "\nt_max = " << num(S.t_max) << "\nstart_well = " << S.start_well
    << "\nexit_radius = " << num(S.exit_radius) << "\n";
  return o.str();
}

nlohmann::json to_json(const Settings& s) {
  using nlohmann::json;
  json wells = json::array();
  for (const auto& c : s.landscape.centers) wells.push_back({c.u, c.v});
  json land = {{"wells", wells},
               {"weights", s.landscape.weights},
               {"labels", s.landscape.labels},
               {"filter_width", s.landscape.filter_width},
               {"resolution", s.landscape.resolution}};
  if (s.landscape.bounds) {
    const Bounds& b = *s.landscape.bounds;
    land["bounds"] = {b.u_min, b.u_max, b.v_min, b.v_max};
  }
  json run = {{"sigma", s.run.sigma},
              {"t_end", s.run.t_end},
              {"record_stride", s.run.record_stride},
              {"initial_well", s.run.initial_well},
              {"dwell", s.run.dwell},
              {"burn_in", s.run.burn_in},
              {"histogram_bins", s.run.histogram_bins},
              {"n", s.run.n},
              {"forcing", s.run.forcing},
              {"forcing_target", s.run.forcing_target},
              {"forcing_strength", s.run.forcing_strength}};
  if (s.run.initial) run["initial"] = {s.run.initial->u, s.run.initial->v};
  return {{"seed", s.seed},
          {"landscape", land},
          {"noise",
           {{"mode", s.noise.mode == NoiseMode::qwiener ? "qwiener" : "white"},
            {"l", s.noise.l},
            {"clip_tol", s.noise.clip_tol}}},
          {"solver",
           {{"J", s.solver.J},
            {"bc", std::string(to_string(s.solver.bc))},
            {"d1", s.solver.d1},
            {"d2", s.solver.d2},
            {"dt", s.solver.dt},
            {"domain_length", s.solver.domain_length}}},
          {"run", run},
          {"study",
           {{"sigmas", s.study.sigmas},
            {"n_per_sigma", s.study.n_per_sigma},
            {"t_max", s.study.t_max},
            {"start_well", s.study.start_well},
            {"exit_radius", s.study.exit_radius}}}};
}

std::shared_ptr<const MollifiedLandscape> build_mollified(const Settings& settings) {
  const auto& L = settings.landscape;
  std::vector<Well> wells;
  for (std::size_t k = 0; k < L.centers.size(); ++k) wells.push_back({L.centers[k], L.weights[k]});
  RawLandscape raw = build_landscape(std::move(wells), L.labels);
  GridSpec grid;
  grid.bounds = L.bounds ? *L.bounds : default_bounds(raw);
  grid.resolution = L.resolution;
  const double width = L.filter_width > 0.0 ? L.filter_width : default_filter_width(grid.bounds);
  return std::make_shared<const MollifiedLandscape>(mollify(raw, width, grid));
}

Model build_model(const Settings& settings) {
  Model m;
  m.settings = settings;
  m.landscape = build_mollified(settings);
  const auto& S = settings.solver;
  m.disc = std::make_shared<const Discretization>(
      Discretization::build(S.J, S.bc, S.d1, S.d2, S.dt, S.domain_length));
  if (settings.noise.mode == NoiseMode::white) {
    m.noise = std::make_shared<const NoiseModel>(NoiseModel::white(m.disc->nodes(), m.disc->h()));
  } else {
    const auto x = m.disc->node_positions();
    m.noise = std::make_shared<const NoiseModel>(
        NoiseModel::qwiener(settings.noise.l, x, settings.noise.clip_tol));
  }
  m.warnings = m.landscape->warnings();
  const auto more = validate(m.sim_config());
  m.warnings.insert(m.warnings.end(), more.begin(), more.end());
  return m;
}

Point Model::initial_point() const {
  if (settings.run.initial) return *settings.run.initial;
  return landscape->source().wells()[settings.run.initial_well].center;
}

SimConfig Model::sim_config() const {
  SimConfig cfg;
  cfg.landscape = landscape;
  cfg.noise = noise;
  cfg.disc = disc;
  cfg.sigma = settings.run.sigma;
  cfg.t_end = settings.run.t_end;
  cfg.record_stride = settings.run.record_stride;
  cfg.initial = InitialCondition::at(initial_point());
  if (settings.run.forcing == "pull" && settings.run.forcing_strength != 0.0) {
    cfg.forcing = pull_toward(landscape->source().wells()[settings.run.forcing_target].center,
                              settings.run.forcing_strength, disc);
  }
  return cfg;
}

}  // namespace epiland
