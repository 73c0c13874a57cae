#pragma once

// Problem configuration and its flat "key = value" text format.
//
// Every key mirrors a field below (SI units). Unknown keys, duplicate keys and
// malformed values are rejected. An empty file yields the benchmark setting:
// 1 m clamped bar, E = 1 GPa, rho = 1000 kg/m^3, h = 1 mm, dt = 0.25 us,
// t in [0, 1 ms], Gaussian pulse (a, b, w) = (5 mm, 0.5 m, 20 mm), interface at 0.6 m.

#include <nosam/error.hpp>
#include <nosam/fem1d.hpp>
#include <nosam/newmark.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

namespace nosam {

enum class TractionMethod { ElementStress, ResidualReaction };
enum class LambdaReset { PerWindow, InitialOnly };

struct ProblemConfig {
  MaterialParams material{};
  double x_left = 0.0;
  double x_right = 1.0;
  double h = 1.0e-3;
  double dt = 2.5e-7;
  double t0 = 0.0;
  double tf = 1.0e-3;
  double ic_amplitude = 0.005;
  double ic_center = 0.5;
  double ic_width = 0.02;
  double dirichlet_left = 0.0;
  double dirichlet_right = 0.0;
  double interface_coordinate = 0.6;
  double schwarz_tolerance = 1.0e-8;
  int max_schwarz_iters = 100;
  double newmark_beta = 0.25;
  double newmark_gamma = 0.5;

  // Coupling and training knobs.
  TractionMethod traction_method = TractionMethod::ElementStress;
  LambdaReset lambda_reset = LambdaReset::PerWindow;
  double lambda_reg = 1.0e-4;
  double theta_1 = 1.0;
  double theta_2 = 1.0;
  double alpha12_bar = 1.0e-3;
  double alpha21_bar = 1.0e-3;
  double beta12 = 1.0;
  double beta21 = 1.0;
  double training_cutoff = -1.0;  // negative: train on the whole trajectory

  NewmarkParams newmark() const { return {newmark_beta, newmark_gamma, dt}; }

  Index n_steps() const { return static_cast<Index>(std::llround((tf - t0) / dt)); }

  /// Time of step n, computed from the counter (never accumulated).
  double time_at(Index n) const { return t0 + static_cast<double>(n) * dt; }

  Index training_steps() const {
    if (training_cutoff < 0.0) return n_steps();
    return static_cast<Index>(std::llround((training_cutoff - t0) / dt));
  }

  void validate() const {
    material.validate();
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (tf < t0) throw ConfigError("tf must not precede t0");
    const double steps = (tf - t0) / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
      throw ConfigError("(tf - t0) / dt must be an integer");
    }
    if (!(schwarz_tolerance > 0.0)) throw ConfigError("schwarz_tolerance must be positive");
    if (max_schwarz_iters < 1) throw ConfigError("max_schwarz_iters must be at least 1");
    if (!(ic_width > 0.0)) throw ConfigError("ic_width must be positive");
    if (!(interface_coordinate > x_left && interface_coordinate < x_right)) {
      throw ConfigError("interface_coordinate must lie strictly inside the bar");
    }
    const Mesh1D mesh = build_uniform_mesh(x_left, x_right, h);
    if (!mesh.node_at(interface_coordinate)) throw ConfigError("interface_coordinate is not a mesh node");
    if (!(theta_1 > 0.0 && theta_1 <= 1.0) || !(theta_2 > 0.0 && theta_2 <= 1.0)) {
      throw ConfigError("relaxation parameters must lie in (0, 1]");
    }
    if (!(lambda_reg >= 0.0)) throw ConfigError("lambda_reg must be non-negative");
    if (training_cutoff >= 0.0) {
      const double ts = (training_cutoff - t0) / dt;
      if (training_cutoff > tf || std::abs(ts - std::round(ts)) > 1e-9 * std::max(1.0, ts) || ts < 1.0) {
        throw ConfigError("training_cutoff must be a step time in (t0, tf]");
      }
    }
    newmark().validate();
  }
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': not a finite number: '" + text + "'");
  }
  return v;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses the flat key/value format; `source` names the input in error messages.
inline ProblemConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  ProblemConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto num = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = detail::parse_double(k, v); };
  };
  const std::map<std::string, Setter> setters{
      {"youngs_modulus", num(c.material.youngs_modulus)},
      {"density", num(c.material.density)},
      {"area", num(c.material.area)},
      {"x_left", num(c.x_left)},
      {"x_right", num(c.x_right)},
      {"h", num(c.h)},
      {"dt", num(c.dt)},
      {"t0", num(c.t0)},
      {"tf", num(c.tf)},
      {"ic_amplitude", num(c.ic_amplitude)},
      {"ic_center", num(c.ic_center)},
      {"ic_width", num(c.ic_width)},
      {"dirichlet_left", num(c.dirichlet_left)},
      {"dirichlet_right", num(c.dirichlet_right)},
      {"interface_coordinate", num(c.interface_coordinate)},
      {"schwarz_tolerance", num(c.schwarz_tolerance)},
      {"newmark_beta", num(c.newmark_beta)},
      {"newmark_gamma", num(c.newmark_gamma)},
      {"lambda_reg", num(c.lambda_reg)},
      {"theta_1", num(c.theta_1)},
      {"theta_2", num(c.theta_2)},
      {"alpha12_bar", num(c.alpha12_bar)},
      {"alpha21_bar", num(c.alpha21_bar)},
      {"beta12", num(c.beta12)},
      {"beta21", num(c.beta21)},
      {"training_cutoff", num(c.training_cutoff)},
      {"max_schwarz_iters",
       [&c](const std::string& k, const std::string& v) {
         const double d = detail::parse_double(k, v);
         if (d != std::floor(d) || d < 1 || d > 1e6) throw ConfigError("key '" + k + "': expected a positive integer");
         c.max_schwarz_iters = static_cast<int>(d);
       }},
      {"traction_method",
       [&c](const std::string& k, const std::string& v) {
         if (v == "element_stress") c.traction_method = TractionMethod::ElementStress;
         else if (v == "residual_reaction") c.traction_method = TractionMethod::ResidualReaction;
         else throw ConfigError("key '" + k + "': expected element_stress or residual_reaction");
       }},
      {"lambda_reset",
       [&c](const std::string& k, const std::string& v) {
         if (v == "per_window") c.lambda_reset = LambdaReset::PerWindow;
         else if (v == "initial_only") c.lambda_reset = LambdaReset::InitialOnly;
         else throw ConfigError("key '" + k + "': expected per_window or initial_only");
       }},
  };

  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      it->second(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  c.validate();
  return c;
}

inline ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

inline ProblemConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

/// Serializes every key, so a run can be reproduced from its output directory.
inline std::string format_config(const ProblemConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "youngs_modulus = " << c.material.youngs_modulus << "\n"
    << "density = " << c.material.density << "\n"
    << "area = " << c.material.area << "\n"
    << "x_left = " << c.x_left << "\n"
    << "x_right = " << c.x_right << "\n"
    << "h = " << c.h << "\n"
    << "dt = " << c.dt << "\n"
    << "t0 = " << c.t0 << "\n"
    << "tf = " << c.tf << "\n"
    << "ic_amplitude = " << c.ic_amplitude << "\n"
    << "ic_center = " << c.ic_center << "\n"
    << "ic_width = " << c.ic_width << "\n"
    << "dirichlet_left = " << c.dirichlet_left << "\n"
    << "dirichlet_right = " << c.dirichlet_right << "\n"
    << "interface_coordinate = " << c.interface_coordinate << "\n"
    << "schwarz_tolerance = " << c.schwarz_tolerance << "\n"
    << "max_schwarz_iters = " << c.max_schwarz_iters << "\n"
    << "newmark_beta = " << c.newmark_beta << "\n"
    << "newmark_gamma = " << c.newmark_gamma << "\n"
    << "traction_method = "
    << (c.traction_method == TractionMethod::ElementStress ? "element_stress" : "residual_reaction") << "\n"
    << "lambda_reset = " << (c.lambda_reset == LambdaReset::PerWindow ? "per_window" : "initial_only") << "\n"
    << "lambda_reg = " << c.lambda_reg << "\n"
    << "theta_1 = " << c.theta_1 << "\n"
    << "theta_2 = " << c.theta_2 << "\n"
    << "alpha12_bar = " << c.alpha12_bar << "\n"
    << "alpha21_bar = " << c.alpha21_bar << "\n"
    << "beta12 = " << c.beta12 << "\n"
    << "beta21 = " << c.beta21 << "\n"
    << "training_cutoff = " << c.training_cutoff << "\n";
  return o.str();
}

}  // namespace nosam
