#include "quartic/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "quartic/errors.hpp"

namespace quartic {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  return x;
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class T>
Field text(const std::string& key, T ExperimentConfig::*m) {
  return {key, [m](const ExperimentConfig& c) { return c.*m; },
          [m](ExperimentConfig& c, const std::string& v) { c.*m = v; }};
}

Field real(const std::string& key, double ExperimentConfig::*m) {
  return {key, [m](const ExperimentConfig& c) { return fmt(c.*m); },
          [m, key](ExperimentConfig& c, const std::string& v) { c.*m = to_double(key, v); }};
}

Field integer(const std::string& key, int ExperimentConfig::*m) {
  return {key, [m](const ExperimentConfig& c) { return std::to_string(c.*m); },
          [m, key](ExperimentConfig& c, const std::string& v) { c.*m = static_cast<int>(to_int(key, v)); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      text("experiment.name", &ExperimentConfig::experiment),
      text("potential.profile", &ExperimentConfig::profile),
      real("potential.coupling", &ExperimentConfig::coupling),
      real("potential.parameter", &ExperimentConfig::parameter),
      real("potential.beta", &ExperimentConfig::beta),
      integer("grid.count", &ExperimentConfig::grid_count),
      real("grid.r_max", &ExperimentConfig::grid_r_max),
      integer("grid.ell_max", &ExperimentConfig::ell_max),
      real("window.lo", &ExperimentConfig::window_lo),
      real("window.hi", &ExperimentConfig::window_hi),
      integer("window.samples", &ExperimentConfig::window_samples),
      text("window.variable", &ExperimentConfig::window_variable),
      real("tol.quadrature", &ExperimentConfig::tol),
      real("tol.classify", &ExperimentConfig::classify_tol),
      text("geometry.set", &ExperimentConfig::geometry_set),
      real("geometry.r_max", &ExperimentConfig::geometry_r_max),
      integer("geometry.count", &ExperimentConfig::geometry_count),
      text("propagator.subtract", &ExperimentConfig::subtract),
      text("propagator.f_window", &ExperimentConfig::f_window),
      real("propagator.eta_end", &ExperimentConfig::eta_end),
      text("resolvent.sign", &ExperimentConfig::sign),
      real("resolvent.s", &ExperimentConfig::s),
      real("resolvent.s_prime", &ExperimentConfig::s_prime),
      integer("resolvent.derivative", &ExperimentConfig::derivative),
      text("expansion.kind", &ExperimentConfig::expansion_kind),
      real("expansion.r", &ExperimentConfig::expansion_r),
      integer("tune.ell", &ExperimentConfig::tune_ell),
      real("tune.c_lo", &ExperimentConfig::tune_lo),
      real("tune.c_hi", &ExperimentConfig::tune_hi),
      text("assert.verdict", &ExperimentConfig::expect_verdict),
      text("output.dir", &ExperimentConfig::output_dir),
      text("output.stem", &ExperimentConfig::output_stem),
      {"run.seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
       [](ExperimentConfig& c, const std::string& v) {
         const long long x = to_int("run.seed", v);
         if (x < 0) throw ConfigError("key 'run.seed': must be >= 0");
         c.seed = static_cast<std::uint64_t>(x);
       }},
  };
  return f;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"classify",         "free-decay",      "perturbed-decay",
                                                 "resolvent-bounds", "expansion-check", "resonance-tune"};
  return names;
}

ExperimentConfig parse_config(const std::string& text_in) {
  ExperimentConfig c;
  std::istringstream in(text_in);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    bool known = false;
    for (const Field& f : fields()) {
      if (f.key == key) {
        f.set(c, value);
        known = true;
        break;
      }
    }
    if (!known && key.rfind("assert.", 0) == 0) {
      // assert.<fit>.center / assert.<fit>.band
      const auto dot = key.rfind('.');
      const std::string fit = key.substr(7, dot - 7);
      const std::string what = key.substr(dot + 1);
      if (!fit.empty() && dot > 7 && (what == "center" || what == "band")) {
        (what == "center" ? c.fit_assertions[fit].center : c.fit_assertions[fit].band) = to_double(key, value);
        known = true;
      }
    }
    if (!known) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(c) + "\n";
  for (const auto& [name, a] : c.fit_assertions) {
    out += "assert." + name + ".center = " + fmt(a.center) + "\n";
    out += "assert." + name + ".band = " + fmt(a.band) + "\n";
  }
  return out;
}

void validate_config(const ExperimentConfig& c) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    throw ConfigError("unknown experiment '" + c.experiment + "'");
  if (!(c.window_lo > 0.0) || !(c.window_hi > c.window_lo))
    throw ConfigError("window: endpoints must be positive and ordered");
  if (c.window_samples < 1) throw ConfigError("window: need at least one sample");
  if (c.window_variable != "t" && c.window_variable != "lambda" && c.window_variable != "eta")
    throw ConfigError("window.variable must be t, lambda or eta");
  if (c.grid_count < 8) throw ConfigError("grid.count must be >= 8");
  if (c.ell_max < 0) throw ConfigError("grid.ell_max must be >= 0");
  if (c.subtract != "none" && c.subtract != "auto") throw ConfigError("propagator.subtract must be none or auto");
  if (c.f_window != "cutoff" && c.f_window != "full") throw ConfigError("propagator.f_window must be cutoff or full");
  if (c.sign != "plus" && c.sign != "minus") throw ConfigError("resolvent.sign must be plus or minus");
  if (c.geometry_set != "default" && c.geometry_set != "random")
    throw ConfigError("geometry.set must be default or random");
  if (c.expansion_kind != "inverse" && c.expansion_kind != "free")
    throw ConfigError("expansion.kind must be inverse or free");
  for (const auto& [name, a] : c.fit_assertions)
    if (!(a.band > 0.0)) throw ConfigError("assert." + name + ".band must be positive");
}

}  // namespace quartic
