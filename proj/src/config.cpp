#include "metamap/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "metamap/errors.hpp"

namespace metamap {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(ErrorKind::config, "bad numeric value for '" + key + "': " + v);
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(ErrorKind::config, "bad integer value for '" + key + "': " + v);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorKind::config, "alpha must lie in (0,1)");
  if (!(eps >= 0.0 && eps <= 0.125))
    fail(ErrorKind::config, "eps must lie in [0,1/8]");
  if (eps_schedule.empty())
    fail(ErrorKind::config, "eps_schedule must not be empty");
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    if (!(eps_schedule[i] > 0.0))
      fail(ErrorKind::config, "eps_schedule entries must be positive");
    if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
      fail(ErrorKind::config, "eps_schedule must be strictly decreasing");
  }
  if (grid_m < 6 || grid_m > (1 << 22))
    fail(ErrorKind::config, "grid must lie in [6, 2^22]");
  if (w_count < 4 || w_count > 100000)
    fail(ErrorKind::config, "w_count must lie in [4, 1e5]");
  if (cylinder_n < 0) fail(ErrorKind::config, "cylinders must be >= 0");
  if (mc_steps < 1000) fail(ErrorKind::config, "mc_steps must be >= 1000");
  if (mc_compare_cells < 8 || mc_compare_cells > (1 << 16))
    fail(ErrorKind::config, "mc_compare_cells must lie in [8, 2^16]");
}

std::vector<double> parse_schedule(const std::string& text) {
  std::string body = trim(text);
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') fail(ErrorKind::config, "unterminated list: " + text);
    body = body.substr(1, body.size() - 2);
  }
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double("eps_schedule", item));
  }
  if (out.empty()) fail(ErrorKind::config, "empty schedule: " + text);
  return out;
}

void apply_config_kv(ExperimentConfig& cfg, const std::string& key,
                     const std::string& value) {
  if (key == "alpha") cfg.alpha = parse_double(key, value);
  else if (key == "eps" || key == "epsilon") cfg.eps = parse_double(key, value);
  else if (key == "eps_schedule" || key == "eps-schedule")
    cfg.eps_schedule = parse_schedule(value);
  else if (key == "grid") cfg.grid_m = static_cast<int>(parse_int(key, value));
  else if (key == "cylinders") cfg.cylinder_n = static_cast<int>(parse_int(key, value));
  else if (key == "w_count") cfg.w_count = static_cast<int>(parse_int(key, value));
  else if (key == "mc_steps") cfg.mc_steps = parse_int(key, value);
  else if (key == "mc_compare_cells")
    cfg.mc_compare_cells = static_cast<int>(parse_int(key, value));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "out" || key == "output_dir") cfg.output_dir = value;
  else fail(ErrorKind::config, "unknown config key: " + key);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::config,
           "config line " + std::to_string(lineno) + " is not 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    apply_config_kv(cfg, key, value);
  }
  return cfg;
}

}  // namespace metamap
