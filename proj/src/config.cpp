#include "rotsol/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace rotsol {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "pi") return std::numbers::pi;
  if (t == "2pi") return 2.0 * std::numbers::pi;
  double out = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(out)) {
    throw InputError("config: " + key + " expects a number, got '" + v + "'");
  }
  return out;
}

long parse_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  long out = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw InputError("config: " + key + " expects an integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("config: " + key + " expects true or false, got '" + v + "'");
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, value).second) throw InputError("config: duplicate key " + key);
  }
  return out;
}

RunConfig parse_run_config(const std::string& text, bool require_rotation) {
  const auto kv = parse_key_values(text);
  static const std::set<std::string> known = {
      "system.name",      "system.n",          "system.ell",         "system.mu",         "system.r",
      "system.lattice",   "system.terms",      "energy.M",           "energy.surface",    "rotation.k",        "solver.delta",
      "solver.that",      "solver.sign_sweep", "solver.d_cut",       "solver.nt",         "solver.tol_fp",
      "solver.tol_crit",  "starts.directions", "starts.q_per_dim",   "starts.perturbation", "classify.tol",
      "rng.seed",         "output.dir"};
  for (const auto& [key, value] : kv) {
    if (!known.count(key)) throw InputError("config: unknown key " + key);
  }
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  RunConfig cfg;
  if (auto v = get("system.name")) cfg.system.name = *v;
  if (auto v = get("system.n")) cfg.system.n = static_cast<int>(parse_int("system.n", *v));
  if (auto v = get("system.ell")) cfg.system.ell = static_cast<int>(parse_int("system.ell", *v));
  if (auto v = get("system.mu")) cfg.system.mu = parse_double("system.mu", *v);
  if (auto v = get("system.r")) cfg.system.r = parse_double("system.r", *v);
  if (auto v = get("system.lattice")) {
    const auto parts = split(*v, ',');
    cfg.system.lattice.resize(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) cfg.system.lattice[i] = parse_double("system.lattice", parts[i]);
  }
  if (auto v = get("system.terms")) {
    // "a: m1, m2; a: m1, m2"
    for (const auto& term : split(*v, ';')) {
      if (term.empty()) continue;
      const auto colon = term.find(':');
      if (colon == std::string::npos) throw InputError("config: system.terms entries look like 'amplitude: m1, m2'");
      CosineTerm t;
      t.amplitude = parse_double("system.terms", term.substr(0, colon));
      for (const auto& f : split(term.substr(colon + 1), ',')) t.frequency.push_back(parse_double("system.terms", f));
      cfg.system.terms.push_back(t);
    }
  }
  const auto M = get("energy.M");
  if (!M) throw InputError("config: energy.M is required");
  cfg.M = parse_double("energy.M", *M);
  if (auto v = get("energy.surface")) {
    if (*v == "growth") cfg.surface = SurfaceRule::growth;
    else if (*v == "star_shaped") cfg.surface = SurfaceRule::star_shaped;
    else throw InputError("config: energy.surface must be growth or star_shaped");
  }
  if (auto v = get("rotation.k")) {
    const auto parts = split(*v, ',');
    cfg.k.resize(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) cfg.k[i] = static_cast<int>(parse_int("rotation.k", parts[i]));
  }
  if (require_rotation && (cfg.k.size() == 0 || cfg.k.isZero())) throw InputError("config: rotation.k must be nonzero");
  if (auto v = get("solver.delta")) cfg.delta = parse_double("solver.delta", *v);
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) throw InputError("config: solver.delta must lie in (0, 1]");
  if (auto v = get("solver.that"); v && *v != "auto") {
    cfg.that_mode = ThatMode::explicit_values;
    for (const auto& part : split(*v, ',')) {
      const double t = parse_double("solver.that", part);
      if (t == 0.0) throw InputError("config: solver.that values must be nonzero");
      cfg.that_values.push_back(t);
    }
    if (cfg.that_values.empty()) throw InputError("config: solver.that is empty");
  }
  if (auto v = get("solver.sign_sweep")) cfg.sign_sweep = parse_bool("solver.sign_sweep", *v);
  if (auto v = get("solver.d_cut")) cfg.d_cut_override = static_cast<int>(parse_int("solver.d_cut", *v));
  if (auto v = get("solver.nt")) cfg.nt_override = static_cast<int>(parse_int("solver.nt", *v));
  if (cfg.d_cut_override < 0 || cfg.nt_override < 0) throw InputError("config: solver.d_cut and solver.nt must be >= 0");
  if (auto v = get("solver.tol_fp")) cfg.tol_fp = parse_double("solver.tol_fp", *v);
  if (auto v = get("solver.tol_crit")) cfg.tol_crit = parse_double("solver.tol_crit", *v);
  if (auto v = get("classify.tol")) cfg.distinct_tol = parse_double("classify.tol", *v);
  if (!(cfg.tol_fp > 0.0 && cfg.tol_crit > 0.0 && cfg.distinct_tol >= 0.0)) {
    throw InputError("config: tolerances must be positive");
  }
  if (auto v = get("starts.directions")) cfg.start_directions = static_cast<int>(parse_int("starts.directions", *v));
  if (auto v = get("starts.q_per_dim")) cfg.start_q_per_dim = static_cast<int>(parse_int("starts.q_per_dim", *v));
  if (auto v = get("starts.perturbation")) cfg.start_perturbation = parse_double("starts.perturbation", *v);
  if (cfg.start_directions < 0 || cfg.start_q_per_dim < 1 || cfg.start_perturbation < 0.0) {
    throw InputError("config: invalid start counts");
  }
  if (auto v = get("rng.seed")) {
    const std::string t = trim(*v);
    std::uint64_t s = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), s);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw InputError("config: rng.seed expects a u64");
    cfg.seed = s;
  }
  if (auto v = get("output.dir")) cfg.out_dir = *v;
  return cfg;
}

RunConfig load_run_config(const std::string& path, bool require_rotation) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), require_rotation);
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("system.name", system.name);
  out.emplace_back("energy.M", fmt(M));
  out.emplace_back("energy.surface", to_string(surface));
  std::string ks;
  for (int i = 0; i < k.size(); ++i) ks += (i ? "," : "") + std::to_string(k[i]);
  out.emplace_back("rotation.k", ks);
  out.emplace_back("solver.delta", fmt(delta));
  std::string th = "auto";
  if (that_mode == ThatMode::explicit_values) {
    th.clear();
    for (std::size_t i = 0; i < that_values.size(); ++i) th += (i ? "," : "") + fmt(that_values[i]);
  }
  out.emplace_back("solver.that", th);
  out.emplace_back("solver.sign_sweep", sign_sweep ? "true" : "false");
  out.emplace_back("solver.d_cut", std::to_string(d_cut_override));
  out.emplace_back("solver.nt", std::to_string(nt_override));
  out.emplace_back("solver.tol_fp", fmt(tol_fp));
  out.emplace_back("solver.tol_crit", fmt(tol_crit));
  out.emplace_back("starts.directions", std::to_string(start_directions));
  out.emplace_back("starts.q_per_dim", std::to_string(start_q_per_dim));
  out.emplace_back("starts.perturbation", fmt(start_perturbation));
  out.emplace_back("classify.tol", fmt(distinct_tol));
  out.emplace_back("rng.seed", std::to_string(seed));
  return out;
}

}  // namespace rotsol
