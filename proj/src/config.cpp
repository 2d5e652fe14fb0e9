#include "nss/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace nss {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Entry {
  std::string value;
  int line = 0;
};

// Raw parse result: fully qualified key ("section.key") -> value and line.
struct RawConfig {
  std::string origin;
  std::map<std::string, Entry> entries;

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  }
  [[noreturn]] void fail_key(const std::string& key,
                             const std::string& msg) const {
    auto it = entries.find(key);
    const int line = it == entries.end() ? 0 : it->second.line;
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  }

  bool has(const std::string& key) const { return entries.count(key) > 0; }

  double get_double(const std::string& key, double dflt) const {
    auto it = entries.find(key);
    if (it == entries.end()) return dflt;
    const std::string& v = it->second.value;
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE)
      fail(it->second.line, key + " = '" + v + "' is not a number");
    return x;
  }

  long get_int(const std::string& key, long dflt) const {
    auto it = entries.find(key);
    if (it == entries.end()) return dflt;
    const std::string& v = it->second.value;
    errno = 0;
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE)
      fail(it->second.line, key + " = '" + v + "' is not an integer");
    return x;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
    auto it = entries.find(key);
    if (it == entries.end()) return dflt;
    const std::string& v = it->second.value;
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE ||
        v[0] == '-')
      fail(it->second.line, key + " = '" + v + "' is not a nonnegative integer");
    return x;
  }

  bool get_bool(const std::string& key, bool dflt) const {
    auto it = entries.find(key);
    if (it == entries.end()) return dflt;
    const std::string& v = it->second.value;
    if (v == "true") return true;
    if (v == "false") return false;
    fail(it->second.line, key + " = '" + v + "' is not 'true' or 'false'");
  }

  std::string get_string(const std::string& key,
                         const std::string& dflt) const {
    auto it = entries.find(key);
    return it == entries.end() ? dflt : it->second.value;
  }
};

const std::map<std::string, std::vector<std::string>> kKnownKeys = {
    {"grid", {"dim", "x_lo", "x_hi", "nx", "y_lo", "y_hi", "ny"}},
    {"physics", {"a", "gamma", "mu", "lambda", "beta", "delta", "h"}},
    {"potential", {"kind", "domain", "g", "k", "center", "scale", "file"}},
    {"initial",
     {"kind", "rho0", "eta0", "mass_rho", "mass_eta", "amplitude", "seed",
      "mollify", "file"}},
    {"run", {"t_end", "sample_every", "out_dir"}},
    {"tolerances",
     {"picard_tol", "picard_max", "linear_tol", "energy_slack_rel",
      "asym_dist_rel", "asym_kinetic_abs"}},
    {"sweep", {"deltas"}},
};

RawConfig tokenize(const std::string& text, const std::string& origin) {
  RawConfig raw;
  raw.origin = origin;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        raw.fail(lineno, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (kKnownKeys.find(section) == kKnownKeys.end())
        raw.fail(lineno, "unknown section [" + section + "]");
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      raw.fail(lineno, "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      raw.fail(lineno, "key '" + key + "' appears outside any [section]");
    if (key.empty()) raw.fail(lineno, "empty key name");

    const auto& known = kKnownKeys.at(section);
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok)
      raw.fail(lineno, "unknown key '" + key + "' in section [" + section + "]");

    const std::string full = section + "." + key;
    auto it = raw.entries.find(full);
    if (it != raw.entries.end())
      raw.fail(lineno, "duplicate key " + full + " (first set at line " +
                           std::to_string(it->second.line) + ")");
    raw.entries[full] = Entry{value, lineno};
  }
  return raw;
}

PotentialKind parse_pot_kind(const RawConfig& raw) {
  const std::string v = raw.get_string("potential.kind", "linear");
  if (v == "linear") return PotentialKind::linear;
  if (v == "quadratic") return PotentialKind::quadratic;
  if (v == "double_well") return PotentialKind::double_well;
  if (v == "tabulated") return PotentialKind::tabulated;
  raw.fail_key("potential.kind",
               "potential.kind = '" + v +
                   "' is not one of linear|quadratic|double_well|tabulated");
}

InitialKind parse_init_kind(const RawConfig& raw) {
  const std::string v = raw.get_string("initial.kind", "uniform");
  if (v == "uniform") return InitialKind::uniform;
  if (v == "equilibrium") return InitialKind::equilibrium;
  if (v == "perturbed_equilibrium") return InitialKind::perturbed_equilibrium;
  if (v == "tabulated") return InitialKind::tabulated;
  raw.fail_key(
      "initial.kind",
      "initial.kind = '" + v +
          "' is not one of uniform|equilibrium|perturbed_equilibrium|tabulated");
}

std::vector<double> parse_deltas(const RawConfig& raw) {
  std::vector<double> out;
  if (!raw.has("sweep.deltas")) return out;
  const auto& ent = raw.entries.at("sweep.deltas");
  std::istringstream is(ent.value);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE)
      raw.fail(ent.line, "sweep.deltas entry '" + tok + "' is not a number");
    out.push_back(x);
  }
  if (out.empty()) raw.fail(ent.line, "sweep.deltas is empty");
  for (size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0)
      raw.fail(ent.line, "sweep.deltas entries must be >= 0");
    if (i > 0 && !(out[i] < out[i - 1]))
      raw.fail(ent.line, "sweep.deltas must be strictly decreasing");
  }
  return out;
}

// Re-attributes a PhysParams::validate message to the config key and line.
[[noreturn]] void rethrow_physics(const RawConfig& raw,
                                  const std::string& what) {
  std::string key;
  const std::string prefix = "PhysParams: ";
  if (what.rfind(prefix, 0) == 0) {
    const size_t sp = what.find(' ', prefix.size());
    key = what.substr(prefix.size(), sp - prefix.size());
  }
  const std::string full = "physics." + key;
  const std::string msg = full + what.substr(prefix.size() + key.size());
  if (!key.empty() && raw.has(full)) raw.fail_key(full, msg);
  throw ConfigError(raw.origin + ": " + msg);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  const RawConfig raw = tokenize(text, origin);
  RunConfig c;

  c.grid.dim = static_cast<int>(raw.get_int("grid.dim", 1));
  if (c.grid.dim != 1 && c.grid.dim != 2)
    raw.fail_key("grid.dim", "grid.dim = " + std::to_string(c.grid.dim) +
                                 " violates dim in {1, 2}");
  c.grid.x_lo = raw.get_double("grid.x_lo", 0.0);
  c.grid.x_hi = raw.get_double("grid.x_hi", 1.0);
  c.grid.nx = static_cast<int>(raw.get_int("grid.nx", 0));
  c.grid.y_lo = raw.get_double("grid.y_lo", 0.0);
  c.grid.y_hi = raw.get_double("grid.y_hi", 1.0);
  c.grid.ny = static_cast<int>(raw.get_int("grid.ny", 0));
  if (c.grid.nx < 4)
    raw.fail_key("grid.nx", "grid.nx = " + std::to_string(c.grid.nx) +
                                " violates nx >= 4");
  if (!(c.grid.x_hi > c.grid.x_lo))
    raw.fail_key("grid.x_hi", "grid.x_hi must exceed grid.x_lo");
  if (c.grid.dim == 2) {
    if (c.grid.ny < 4)
      raw.fail_key("grid.ny", "grid.ny = " + std::to_string(c.grid.ny) +
                                  " violates ny >= 4 when grid.dim = 2");
    if (!(c.grid.y_hi > c.grid.y_lo))
      raw.fail_key("grid.y_hi", "grid.y_hi must exceed grid.y_lo");
  } else if (raw.has("grid.ny")) {
    raw.fail_key("grid.ny", "grid.ny is set but grid.dim = 1");
  }

  c.params.a = raw.get_double("physics.a", c.params.a);
  c.params.gamma = raw.get_double("physics.gamma", c.params.gamma);
  c.params.mu = raw.get_double("physics.mu", c.params.mu);
  c.params.lambda = raw.get_double("physics.lambda", c.params.lambda);
  c.params.beta = raw.get_double("physics.beta", c.params.beta);
  c.params.delta = raw.get_double("physics.delta", c.params.delta);
  c.params.h = raw.get_double("physics.h", c.params.h);
  try {
    c.params.validate();
  } catch (const std::invalid_argument& e) {
    rethrow_physics(raw, e.what());
  }

  c.potential.kind = parse_pot_kind(raw);
  const std::string dom = raw.get_string("potential.domain", "bounded");
  if (dom == "bounded")
    c.potential.bounded = true;
  else if (dom == "truncated_unbounded")
    c.potential.bounded = false;
  else
    raw.fail_key("potential.domain",
                 "potential.domain = '" + dom +
                     "' is not 'bounded' or 'truncated_unbounded'");
  c.potential.g = raw.get_double("potential.g", c.potential.g);
  c.potential.k = raw.get_double("potential.k", c.potential.k);
  c.potential.center = raw.get_double("potential.center", c.potential.center);
  c.potential.scale = raw.get_double("potential.scale", c.potential.scale);
  c.potential.file = raw.get_string("potential.file", "");
  if (c.potential.kind == PotentialKind::tabulated && c.potential.file.empty())
    raw.fail_key("potential.kind",
                 "potential.kind = tabulated requires potential.file");
  // Truncated-unbounded domains with beta <= 0 parse fine; the confinement
  // validator is the component that rejects them, with its own exit code.

  c.initial.kind = parse_init_kind(raw);
  c.initial.rho0 = raw.get_double("initial.rho0", c.initial.rho0);
  c.initial.eta0 = raw.get_double("initial.eta0", c.initial.eta0);
  c.initial.mass_rho = raw.get_double("initial.mass_rho", 0.0);
  c.initial.mass_eta = raw.get_double("initial.mass_eta", 0.0);
  c.initial.amplitude = raw.get_double("initial.amplitude", 0.0);
  c.initial.seed = raw.get_u64("initial.seed", 0);
  c.initial.seed_set = raw.has("initial.seed");
  c.initial.mollify = raw.get_bool("initial.mollify", false);
  c.initial.file = raw.get_string("initial.file", "");
  switch (c.initial.kind) {
    case InitialKind::uniform:
      if (c.initial.rho0 < 0.0)
        raw.fail_key("initial.rho0", "initial.rho0 must be >= 0");
      if (c.initial.eta0 < 0.0)
        raw.fail_key("initial.eta0", "initial.eta0 must be >= 0");
      break;
    case InitialKind::equilibrium:
    case InitialKind::perturbed_equilibrium:
      if (!(c.initial.mass_rho > 0.0))
        raw.fail_key("initial.mass_rho",
                     "initial.mass_rho must be positive for equilibrium "
                     "initial data");
      if (c.initial.mass_eta < 0.0)
        raw.fail_key("initial.mass_eta", "initial.mass_eta must be >= 0");
      if (c.initial.kind == InitialKind::perturbed_equilibrium &&
          !(c.initial.amplitude > 0.0 && c.initial.amplitude <= 0.5))
        raw.fail_key("initial.amplitude",
                     "initial.amplitude = " + fmt17(c.initial.amplitude) +
                         " violates 0 < amplitude <= 0.5");
      break;
    case InitialKind::tabulated:
      if (c.initial.file.empty())
        raw.fail_key("initial.kind",
                     "initial.kind = tabulated requires initial.file");
      break;
  }

  c.run.t_end = raw.get_double("run.t_end", c.run.t_end);
  c.run.sample_every =
      static_cast<int>(raw.get_int("run.sample_every", c.run.sample_every));
  c.run.out_dir = raw.get_string("run.out_dir", c.run.out_dir);
  if (!(c.run.t_end > 0.0))
    raw.fail_key("run.t_end", "run.t_end must be positive");
  if (c.run.sample_every < 0)
    raw.fail_key("run.sample_every", "run.sample_every must be >= 0");
  if (c.run.out_dir.empty())
    raw.fail_key("run.out_dir", "run.out_dir must not be empty");

  c.tol.picard_tol = raw.get_double("tolerances.picard_tol", c.tol.picard_tol);
  c.tol.picard_max = static_cast<int>(
      raw.get_int("tolerances.picard_max", c.tol.picard_max));
  c.tol.linear_tol = raw.get_double("tolerances.linear_tol", c.tol.linear_tol);
  c.tol.energy_slack_rel =
      raw.get_double("tolerances.energy_slack_rel", c.tol.energy_slack_rel);
  c.tol.asym_dist_rel =
      raw.get_double("tolerances.asym_dist_rel", c.tol.asym_dist_rel);
  c.tol.asym_kinetic_abs =
      raw.get_double("tolerances.asym_kinetic_abs", c.tol.asym_kinetic_abs);
  if (!(c.tol.picard_tol > 0.0))
    raw.fail_key("tolerances.picard_tol", "tolerances.picard_tol must be positive");
  if (c.tol.picard_max < 1)
    raw.fail_key("tolerances.picard_max", "tolerances.picard_max must be >= 1");
  if (!(c.tol.linear_tol > 0.0))
    raw.fail_key("tolerances.linear_tol", "tolerances.linear_tol must be positive");
  if (c.tol.energy_slack_rel < 0.0)
    raw.fail_key("tolerances.energy_slack_rel",
                 "tolerances.energy_slack_rel must be >= 0");
  if (!(c.tol.asym_dist_rel > 0.0))
    raw.fail_key("tolerances.asym_dist_rel",
                 "tolerances.asym_dist_rel must be positive");
  if (!(c.tol.asym_kinetic_abs > 0.0))
    raw.fail_key("tolerances.asym_kinetic_abs",
                 "tolerances.asym_kinetic_abs must be positive");

  c.delta_schedule = parse_deltas(raw);
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string echo_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[grid]\n";
  os << "dim = " << c.grid.dim << "\n";
  os << "x_lo = " << fmt17(c.grid.x_lo) << "\n";
  os << "x_hi = " << fmt17(c.grid.x_hi) << "\n";
  os << "nx = " << c.grid.nx << "\n";
  if (c.grid.dim == 2) {
    os << "y_lo = " << fmt17(c.grid.y_lo) << "\n";
    os << "y_hi = " << fmt17(c.grid.y_hi) << "\n";
    os << "ny = " << c.grid.ny << "\n";
  }

  os << "\n[physics]\n";
  os << "a = " << fmt17(c.params.a) << "\n";
  os << "gamma = " << fmt17(c.params.gamma) << "\n";
  os << "mu = " << fmt17(c.params.mu) << "\n";
  os << "lambda = " << fmt17(c.params.lambda) << "\n";
  os << "beta = " << fmt17(c.params.beta) << "\n";
  os << "delta = " << fmt17(c.params.delta) << "\n";
  os << "h = " << fmt17(c.params.h) << "\n";

  os << "\n[potential]\n";
  os << "kind = ";
  switch (c.potential.kind) {
    case PotentialKind::linear: os << "linear"; break;
    case PotentialKind::quadratic: os << "quadratic"; break;
    case PotentialKind::double_well: os << "double_well"; break;
    case PotentialKind::tabulated: os << "tabulated"; break;
  }
  os << "\n";
  os << "domain = " << (c.potential.bounded ? "bounded" : "truncated_unbounded")
     << "\n";
  os << "g = " << fmt17(c.potential.g) << "\n";
  os << "k = " << fmt17(c.potential.k) << "\n";
  os << "center = " << fmt17(c.potential.center) << "\n";
  os << "scale = " << fmt17(c.potential.scale) << "\n";
  if (!c.potential.file.empty()) os << "file = " << c.potential.file << "\n";

  os << "\n[initial]\n";
  os << "kind = ";
  switch (c.initial.kind) {
    case InitialKind::uniform: os << "uniform"; break;
    case InitialKind::equilibrium: os << "equilibrium"; break;
    case InitialKind::perturbed_equilibrium: os << "perturbed_equilibrium"; break;
    case InitialKind::tabulated: os << "tabulated"; break;
  }
  os << "\n";
  os << "rho0 = " << fmt17(c.initial.rho0) << "\n";
  os << "eta0 = " << fmt17(c.initial.eta0) << "\n";
  os << "mass_rho = " << fmt17(c.initial.mass_rho) << "\n";
  os << "mass_eta = " << fmt17(c.initial.mass_eta) << "\n";
  os << "amplitude = " << fmt17(c.initial.amplitude) << "\n";
  if (c.initial.seed_set) os << "seed = " << c.initial.seed << "\n";
  os << "mollify = " << (c.initial.mollify ? "true" : "false") << "\n";
  if (!c.initial.file.empty()) os << "file = " << c.initial.file << "\n";

  os << "\n[run]\n";
  os << "t_end = " << fmt17(c.run.t_end) << "\n";
  os << "sample_every = " << c.run.sample_every << "\n";
  os << "out_dir = " << c.run.out_dir << "\n";

  os << "\n[tolerances]\n";
  os << "picard_tol = " << fmt17(c.tol.picard_tol) << "\n";
  os << "picard_max = " << c.tol.picard_max << "\n";
  os << "linear_tol = " << fmt17(c.tol.linear_tol) << "\n";
  os << "energy_slack_rel = " << fmt17(c.tol.energy_slack_rel) << "\n";
  os << "asym_dist_rel = " << fmt17(c.tol.asym_dist_rel) << "\n";
  os << "asym_kinetic_abs = " << fmt17(c.tol.asym_kinetic_abs) << "\n";

  if (!c.delta_schedule.empty()) {
    os << "\n[sweep]\n";
    os << "deltas = ";
    for (size_t i = 0; i < c.delta_schedule.size(); ++i) {
      if (i) os << ", ";
      os << fmt17(c.delta_schedule[i]);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace nss
