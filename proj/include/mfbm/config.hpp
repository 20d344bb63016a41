#pragma once

// Run configuration: a flat "key = value" file with dotted keys. A bare
// "[section]" line prefixes the keys that follow it. '#' starts a comment.
// Unknown keys are errors.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mfbm/error.hpp"
#include "mfbm/field.hpp"
#include "mfbm/kernel.hpp"
#include "mfbm/limits.hpp"
#include "mfbm/modes.hpp"

namespace mfbm {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct RunConfig {
  ModelParams params{2, 0.5};
  Truncation truncation{8, 16};
  int radial_grid = 128;
  std::uint64_t seed = kDefaultSeed;
  std::string output_dir = "out";

  // eigs
  int eigs_n_keep = 0;  // 0: n0
  bool eigs_convergence = true;

  // covcheck
  int covcheck_radii = 16;
  int covcheck_m_max = 8;
  int covcheck_nodes = 24;

  // simulate
  std::string simulate_method = "kl";
  std::vector<double> simulate_points;  // flat, N per point
  int simulate_random_points = 16;
  int simulate_replicas = 1;
  Band band;
  FrequencyGrid freq;

  // rkhs-norm
  std::vector<double> rkhs_y;  // flat, N per point; empty: 0.6·e₁ and e₁
  int rkhs_angular = 0;        // 0: 4·m0
  int rkhs_pairs = 0;

  // limits
  Example example = Example::levy;
  std::vector<double> schedule;  // empty: example default
  double horizon = 80.0;
  int lattice = 257;
  int modulus_lattice = 129;
  std::vector<double> modulus_schedule{0.125, 0.0625, 0.03125, 0.015625};
  int limits_grid = 32;
  Truncation limits_truncation{4, 8};
  int limits_angular = 16;
  std::vector<double> target_y;  // empty: (0.5, 0, ...)
  double target_scale = 0.7;

  std::vector<double> effective_schedule() const {
    if (!schedule.empty()) return schedule;
    switch (example) {
      case Example::local_lil: return {0.3, 0.1, 0.03, 0.01, 0.003};
      case Example::global_lil: return {5, 10, 20, 40, 80};
      default: return {0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
    }
  }

  Point effective_target_y() const {
    if (!target_y.empty()) return target_y;
    Point y(static_cast<std::size_t>(params.N), 0.0);
    y[0] = 0.5;
    return y;
  }

  std::vector<Point> points_of(const std::vector<double>& flat, const std::string& key) const {
    const auto N = static_cast<std::size_t>(params.N);
    if (flat.size() % N != 0) {
      throw ConfigError(key + ": " + std::to_string(flat.size()) + " coordinates is not a multiple of N=" +
                        std::to_string(N));
    }
    std::vector<Point> out;
    for (std::size_t i = 0; i < flat.size(); i += N) out.emplace_back(flat.begin() + i, flat.begin() + i + N);
    return out;
  }

  void validate() const {
    try {
      params.validate();
      truncation.validate();
      limits_truncation.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    if (radial_grid < 2) throw ConfigError("grid.radial must be >= 2");
    if (covcheck_radii < 1) throw ConfigError("covcheck.radii must be >= 1 (empty radius grid)");
    if (covcheck_m_max < 0) throw ConfigError("covcheck.m_max must be >= 0");
    if (covcheck_nodes < 2) throw ConfigError("covcheck.nodes must be >= 2");
    if (simulate_method != "kl" && simulate_method != "cholesky" && simulate_method != "spectral") {
      throw ConfigError("simulate.method must be kl, cholesky or spectral, got '" + simulate_method + "'");
    }
    if (simulate_replicas < 1) throw ConfigError("simulate.replicas must be >= 1");
    if (simulate_random_points < 0) throw ConfigError("simulate.random_points must be >= 0");
    if (!(band.b > band.a) || band.a < 0.0) throw ConfigError("spectral band must satisfy 0 <= a < b");
    if (freq.shells < 1 || !(freq.k_max > freq.k_min) || freq.k_min <= 0.0) {
      throw ConfigError("spectral grid needs shells >= 1 and 0 < k_min < k_max");
    }
    if (lattice < 3 || modulus_lattice < 3) throw ConfigError("limits lattices need at least 3 points per axis");
    if (limits_grid < limits_truncation.n0) throw ConfigError("limits.rkhs.grid must be >= limits.rkhs.n0");
    if (!target_y.empty() && target_y.size() != static_cast<std::size_t>(params.N)) {
      throw ConfigError("limits.target.y needs N=" + std::to_string(params.N) + " coordinates");
    }
    if (!(target_scale >= 0.0 && target_scale < 1.0)) throw ConfigError("limits.target.scale must lie in [0,1)");
    points_of(simulate_points, "simulate.points");
    points_of(rkhs_y, "rkhs.y");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(v.substr(pos)) != "") throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(v.substr(pos)) != "") throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long out = 0;
  const std::string t = trim(v);
  try {
    if (!t.empty() && t[0] != '-') out = std::stoull(t, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != t.size()) throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  return out;
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

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

}  // namespace detail

inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  auto as_int = [&] { return static_cast<int>(parse_int(key, value)); };
  auto as_num = [&] { return parse_double(key, value); };
  auto as_list = [&] { return parse_list(key, value); };

  if (key == "model.N") c.params.N = as_int();
  else if (key == "model.H") c.params.H = as_num();
  else if (key == "truncation.m0") c.truncation.m0 = as_int();
  else if (key == "truncation.n0") c.truncation.n0 = as_int();
  else if (key == "grid.radial") c.radial_grid = as_int();
  else if (key == "seed") c.seed = parse_u64(key, value);
  else if (key == "output.dir") c.output_dir = value;
  else if (key == "eigs.n_keep") c.eigs_n_keep = as_int();
  else if (key == "eigs.convergence") c.eigs_convergence = parse_bool(key, value);
  else if (key == "covcheck.radii") c.covcheck_radii = as_int();
  else if (key == "covcheck.m_max") c.covcheck_m_max = as_int();
  else if (key == "covcheck.nodes") c.covcheck_nodes = as_int();
  else if (key == "simulate.method") c.simulate_method = value;
  else if (key == "simulate.points") c.simulate_points = as_list();
  else if (key == "simulate.random_points") c.simulate_random_points = as_int();
  else if (key == "simulate.replicas") c.simulate_replicas = as_int();
  else if (key == "simulate.band.a") c.band.a = as_num();
  else if (key == "simulate.band.b") c.band.b = value == "inf" ? std::numeric_limits<double>::infinity() : as_num();
  else if (key == "spectral.shells") c.freq.shells = as_int();
  else if (key == "spectral.directions") c.freq.directions = as_int();
  else if (key == "spectral.k_min") c.freq.k_min = as_num();
  else if (key == "spectral.k_max") c.freq.k_max = as_num();
  else if (key == "rkhs.y") c.rkhs_y = as_list();
  else if (key == "rkhs.angular") c.rkhs_angular = as_int();
  else if (key == "rkhs.pairs") c.rkhs_pairs = as_int();
  else if (key == "limits.example") {
    try {
      c.example = parse_example(value);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("limits.example: ") + e.what());
    }
  }
  else if (key == "limits.schedule") c.schedule = as_list();
  else if (key == "limits.horizon") c.horizon = as_num();
  else if (key == "limits.lattice") c.lattice = as_int();
  else if (key == "limits.modulus.lattice") c.modulus_lattice = as_int();
  else if (key == "limits.modulus.schedule") c.modulus_schedule = as_list();
  else if (key == "limits.rkhs.grid") c.limits_grid = as_int();
  else if (key == "limits.rkhs.m0") c.limits_truncation.m0 = as_int();
  else if (key == "limits.rkhs.n0") c.limits_truncation.n0 = as_int();
  else if (key == "limits.rkhs.angular") c.limits_angular = as_int();
  else if (key == "limits.target.y") c.target_y = as_list();
  else if (key == "limits.target.scale") c.target_scale = as_num();
  else throw ConfigError("unknown config key '" + key + "'");
}

inline RunConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  RunConfig c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source + ":" + std::to_string(lineno) + ": malformed section");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    try {
      apply_setting(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace mfbm
