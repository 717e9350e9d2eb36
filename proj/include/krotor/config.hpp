#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "krotor/csv.hpp"
#include "krotor/params.hpp"
#include "krotor/tolerances.hpp"

namespace krotor {

/// Full description of one experiment run. Flat key=value text with
/// [section] headers; every field has a working default so a bare experiment
/// name is runnable.
struct ExperimentConfig {
  std::string experiment;

  // [model]
  int r = 1;
  int s = 4;
  int omega = 1;
  double delta = 0.04;
  double kick = 0.5;
  std::string kick_mode = "effective";  // effective | bare
  double lambda = 0.0;

  // [initial]
  std::string initial = "coherent";  // coherent | eigenstate | uniform_line
  double p0 = 0.5;
  double theta0 = 0.5;
  long eigen_n = 0;        // eigenstate index
  long n_points = 10000;   // uniform_line size

  // [run]
  int t_max = 3;
  std::vector<double> delta_sweep;  // empty: use [model] delta only
  std::string precision = "double";  // double | float (sweep engine only)
  bool dump_branches = true;
  bool write_series = true;
  double tdiff_safety = 1.0;  // sweep t_max scale: t_max(delta) = min(t_max, ceil(safety/delta^2))

  // [grid]
  int nodes_per_sigma = 6;
  double p_pad_sigma = 6.0;

  // [tolerances]
  Tolerances tol{};

  // [output]
  std::string out_dir = "out";
  std::string prefix;

  ModelParams model() const {
    return make_params(r, s, omega, kick, delta, lambda,
                       kick_mode == "bare" ? KickMode::Bare : KickMode::Effective);
  }

  ModelParams model_at(double d) const {
    return make_params(r, s, omega, kick, d, lambda,
                       kick_mode == "bare" ? KickMode::Bare : KickMode::Effective);
  }

  std::vector<double> sweep_or_single() const {
    return delta_sweep.empty() ? std::vector<double>{delta} : delta_sweep;
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(s.front())) s.erase(s.begin());
  while (!s.empty() && issp(s.back())) s.pop_back();
  return s;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("bad numeric value for " + key + ": '" + v + "'");
  }
}

inline long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("bad integer value for " + key + ": '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw config_error("bad boolean value for " + key + ": '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

}  // namespace detail

/// Apply one "section.key=value" assignment.
inline void apply_config_entry(ExperimentConfig& cfg, const std::string& section,
                               const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_list;
  using detail::parse_long;
  const std::string full = section + "." + key;

  if (section == "model") {
    if (key == "r") cfg.r = static_cast<int>(parse_long(full, value));
    else if (key == "s") cfg.s = static_cast<int>(parse_long(full, value));
    else if (key == "omega") cfg.omega = static_cast<int>(parse_long(full, value));
    else if (key == "delta") cfg.delta = parse_double(full, value);
    else if (key == "k" || key == "kick") cfg.kick = parse_double(full, value);
    else if (key == "kick_mode") {
      if (value != "effective" && value != "bare")
        throw config_error("model.kick_mode must be 'effective' or 'bare'");
      cfg.kick_mode = value;
    } else if (key == "lambda") cfg.lambda = parse_double(full, value);
    else throw config_error("unknown key " + full);
  } else if (section == "initial") {
    if (key == "kind") {
      if (value != "coherent" && value != "eigenstate" && value != "uniform_line")
        throw config_error("initial.kind must be coherent, eigenstate or uniform_line");
      cfg.initial = value;
    } else if (key == "p0") cfg.p0 = parse_double(full, value);
    else if (key == "theta0") cfg.theta0 = parse_double(full, value);
    else if (key == "n") cfg.eigen_n = parse_long(full, value);
    else if (key == "n_points") cfg.n_points = parse_long(full, value);
    else throw config_error("unknown key " + full);
  } else if (section == "run") {
    if (key == "t_max") cfg.t_max = static_cast<int>(parse_long(full, value));
    else if (key == "delta_sweep") cfg.delta_sweep = parse_list(full, value);
    else if (key == "precision") {
      if (value != "double" && value != "float")
        throw config_error("run.precision must be 'double' or 'float'");
      cfg.precision = value;
    } else if (key == "dump_branches") cfg.dump_branches = parse_bool(full, value);
    else if (key == "write_series") cfg.write_series = parse_bool(full, value);
    else if (key == "tdiff_safety") cfg.tdiff_safety = parse_double(full, value);
    else throw config_error("unknown key " + full);
  } else if (section == "grid") {
    if (key == "nodes_per_sigma") cfg.nodes_per_sigma = static_cast<int>(parse_long(full, value));
    else if (key == "p_pad_sigma") cfg.p_pad_sigma = parse_double(full, value);
    else throw config_error("unknown key " + full);
  } else if (section == "tolerances") {
    if (key == "eps_zero") cfg.tol.eps_zero = parse_double(full, value);
    else if (key == "leak_tol") cfg.tol.leak_tol = parse_double(full, value);
    else if (key == "pos_tol") cfg.tol.pos_tol = parse_double(full, value);
    else if (key == "amp_tol") cfg.tol.amp_tol = parse_double(full, value);
    else if (key == "sel_tol") cfg.tol.sel_tol = parse_double(full, value);
    else if (key == "tdiff_threshold") cfg.tol.tdiff_threshold = parse_double(full, value);
    else if (key == "branch_cap") cfg.tol.branch_cap = static_cast<std::size_t>(parse_long(full, value));
    else throw config_error("unknown key " + full);
  } else if (section == "output") {
    if (key == "dir") cfg.out_dir = value;
    else if (key == "prefix") cfg.prefix = value;
    else throw config_error("unknown key " + full);
  } else {
    throw config_error("unknown config section [" + section + "]");
  }
}

/// Parse flat key=value text with [section] headers. Lines starting with '#'
/// or ';' are comments.
inline void parse_config_text(ExperimentConfig& cfg, std::istream& in) {
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("malformed section header at line " + std::to_string(lineno));
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("expected key=value at line " + std::to_string(lineno));
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw config_error("key '" + key + "' outside any [section]");
    apply_config_entry(cfg, section, key, value);
  }
}

inline void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file: " + path.string());
  parse_config_text(cfg, in);
}

/// Apply a "section.key=value" override string.
inline void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw config_error("override must be section.key=value");
  const std::string lhs = detail::trim(assignment.substr(0, eq));
  const std::string value = detail::trim(assignment.substr(eq + 1));
  const auto dot = lhs.find('.');
  if (dot == std::string::npos) throw config_error("override must be section.key=value");
  apply_config_entry(cfg, lhs.substr(0, dot), lhs.substr(dot + 1), value);
}

/// The full effective parameter set as "key=value" tokens, used verbatim in
/// output-file headers.
inline std::vector<std::string> config_summary(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  out.push_back("experiment=" + cfg.experiment);
  out.push_back("r=" + std::to_string(cfg.r));
  out.push_back("s=" + std::to_string(cfg.s));
  out.push_back("omega=" + std::to_string(cfg.omega));
  out.push_back("delta=" + format_double_short(cfg.delta));
  out.push_back("k=" + format_double_short(cfg.kick));
  out.push_back("kick_mode=" + cfg.kick_mode);
  out.push_back("lambda=" + format_double_short(cfg.lambda));
  out.push_back("initial=" + cfg.initial);
  if (cfg.initial == "coherent") {
    out.push_back("p0=" + format_double_short(cfg.p0));
    out.push_back("theta0=" + format_double_short(cfg.theta0));
  } else if (cfg.initial == "eigenstate") {
    out.push_back("n=" + std::to_string(cfg.eigen_n));
  } else {
    out.push_back("p0=" + format_double_short(cfg.p0));
    out.push_back("n_points=" + std::to_string(cfg.n_points));
  }
  out.push_back("t_max=" + std::to_string(cfg.t_max));
  if (!cfg.delta_sweep.empty()) {
    std::string sweep = "delta_sweep=";
    for (std::size_t i = 0; i < cfg.delta_sweep.size(); ++i)
      sweep += (i ? "," : "") + format_double_short(cfg.delta_sweep[i]);
    out.push_back(sweep);
  }
  out.push_back("precision=" + cfg.precision);
  out.push_back("pos_tol=" + format_double_short(cfg.tol.pos_tol));
  out.push_back("amp_tol=" + format_double_short(cfg.tol.amp_tol));
  out.push_back("sel_tol=" + format_double_short(cfg.tol.sel_tol));
  out.push_back("leak_tol=" + format_double_short(cfg.tol.leak_tol));
  out.push_back("tdiff_threshold=" + format_double_short(cfg.tol.tdiff_threshold));
  return out;
}

}  // namespace krotor
