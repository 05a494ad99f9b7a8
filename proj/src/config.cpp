#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "hsys/harness.hpp"

namespace hsys {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  is.imbue(std::locale::classic());
  double v = 0.0;
  if (!(is >> v) || !(is >> std::ws).eof())
    throw Error(ErrorKind::Config, "key '" + key + "': expected a number, got '" + text + "'");
  return v;
}

long to_long(const std::string& key, const std::string& text) {
  long v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorKind::Config, "key '" + key + "': expected an integer, got '" + text + "'");
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.push_back(to_double(key, t));
  }
  if (out.empty()) throw Error(ErrorKind::Config, "key '" + key + "': empty list");
  return out;
}

const std::set<std::string>& known_commands() {
  static const std::set<std::string> c{"constants", "validate", "solve-ground", "solve-mp", "sweep", "regime"};
  return c;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "N",     "lambda1",  "lambda2",  "s1",        "s2",         "s3",       "alpha",       "beta",  "nu",
      "nu_list", "h0",     "h_p",      "h_q",       "r_min",      "r_max",    "grid_n",      "max_iters",
      "step0", "grad_tol", "energy_tol", "path_points", "deform_rounds", "seed", "out_dir",     "command"};
  return keys;
}

KeyValues read_key_values(std::istream& in, const std::string& origin) {
  const std::set<std::string> known(config_keys().begin(), config_keys().end());
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known.count(key)) throw Error(ErrorKind::UnknownKey, "unknown config key '" + key + "'");
    if (value.empty()) throw Error(ErrorKind::Config, "key '" + key + "' has an empty value");
    kv[key] = value;
  }
  return kv;
}

KeyValues read_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Unreadable, "cannot read config file '" + path + "'");
  return read_key_values(in, path);
}

RunConfig make_run_config(const KeyValues& kv) {
  const std::set<std::string> known(config_keys().begin(), config_keys().end());
  for (const auto& [k, v] : kv)
    if (!known.count(k)) throw Error(ErrorKind::UnknownKey, "unknown config key '" + k + "'");

  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::MissingKey, "missing required config key '" + key + "'");
    return it->second;
  };
  auto opt_double = [&](const std::string& key, double fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : to_double(key, it->second);
  };
  auto opt_long = [&](const std::string& key, long fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : to_long(key, it->second);
  };

  RunConfig c;
  c.command = need("command");
  if (!known_commands().count(c.command))
    throw Error(ErrorKind::Config, "key 'command': unknown command '" + c.command + "'");

  auto& p = c.params;
  p.N = static_cast<int>(to_long("N", need("N")));
  p.lambda1 = to_double("lambda1", need("lambda1"));
  p.lambda2 = to_double("lambda2", need("lambda2"));
  p.s1 = to_double("s1", need("s1"));
  p.s2 = to_double("s2", need("s2"));
  p.s3 = to_double("s3", need("s3"));
  p.alpha = to_double("alpha", need("alpha"));
  p.beta = to_double("beta", need("beta"));
  p.h.h0 = opt_double("h0", 1.0);
  p.h.p = opt_double("h_p", 1.0);
  p.h.q = opt_double("h_q", 6.0);

  if (c.command == "sweep") {
    c.nu_list = to_list("nu_list", need("nu_list"));
    p.nu = opt_double("nu", 0.0);
  } else if (c.command == "solve-ground" || c.command == "solve-mp") {
    p.nu = to_double("nu", need("nu"));
  } else {
    p.nu = opt_double("nu", 0.0);
  }
  if (c.command != "constants" && c.command != "validate") c.out_dir = need("out_dir");
  else if (kv.count("out_dir")) c.out_dir = kv.at("out_dir");

  c.r_min = opt_double("r_min", kDefaultRMin);
  c.r_max = opt_double("r_max", kDefaultRMax);
  c.grid_n = opt_long("grid_n", kDefaultGridSize);
  c.solver.max_iters = static_cast<int>(opt_long("max_iters", c.solver.max_iters));
  c.solver.step0 = opt_double("step0", c.solver.step0);
  c.solver.grad_tol = opt_double("grad_tol", c.solver.grad_tol);
  c.solver.energy_tol = opt_double("energy_tol", c.solver.energy_tol);
  c.solver.path_points = static_cast<int>(opt_long("path_points", c.solver.path_points));
  c.solver.deform_rounds = static_cast<int>(opt_long("deform_rounds", c.solver.deform_rounds));
  const long seed = opt_long("seed", 0);
  if (seed < 0) throw Error(ErrorKind::Config, "key 'seed' must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.solver.validate();
  return c;
}

}  // namespace hsys
