#pragma once

// Multiplicative non-overlapping Schwarz controller for two subdomains.

#include <nosam/config.hpp>
#include <nosam/subdomain.hpp>
#include <nosam/transmission.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace nosam {

struct SchwarzOptions {
  double tolerance = 1e-8;
  int max_iters = 100;
  LambdaReset lambda_reset = LambdaReset::PerWindow;

  static SchwarzOptions from_config(const ProblemConfig& c) {
    return {c.schwarz_tolerance, c.max_schwarz_iters, c.lambda_reset};
  }
};

struct WindowResult {
  int iterations = 0;
  bool converged = false;
  double last_measure = 0.0;
};

/// One time window: Omega_1 solves with data from Omega_2's iterate s-1,
/// then Omega_2 with data from Omega_1's iterate s, until both changes fall
/// below the tolerance. Every solve pair counts as one iteration.
inline WindowResult advance_window(SubdomainModel& left, SubdomainModel& right, const TransmissionSpec& spec,
                                   InterfaceState& iface, double t_next, const SchwarzOptions& opt) {
  left.begin_window(t_next);
  right.begin_window(t_next);
  if (opt.lambda_reset == LambdaReset::PerWindow) {
    iface.into_left = {};
    iface.into_right = {};
  }
  const ReceiverCoefficients c1 = spec.into(Side::LeftOfInterface);
  const ReceiverCoefficients c2 = spec.into(Side::RightOfInterface);
  WindowResult res;
  for (int s = 1; s <= opt.max_iters; ++s) {
    iface.from_right = right.output();
    iface.into_left = receive(c1, iface.from_right, iface.into_left);
    left.solve_iteration(iface.into_left);
    iface.from_left = left.output();
    iface.into_right = receive(c2, iface.from_left, iface.into_right);
    right.solve_iteration(iface.into_right);

    res.iterations = s;
    res.last_measure = std::max(left.change_measure(), right.change_measure());
    if (!std::isfinite(res.last_measure)) return res;
    if (res.last_measure < opt.tolerance) {
      res.converged = true;
      left.accept();
      right.accept();
      return res;
    }
  }
  return res;
}

struct SchwarzRun {
  bool converged = true;
  std::string diagnostic;
  std::vector<int> iterations;  // per window
  Index windows = 0;
  double wall_time_s = 0.0;     // Schwarz loop only
  double last_measure = 0.0;

  double mean_iterations() const {
    if (iterations.empty()) return 0.0;
    double s = 0.0;
    for (int i : iterations) s += i;
    return s / static_cast<double>(iterations.size());
  }
};

/// Called after every converged window with the step index n (state at t_n).
using WindowObserver = std::function<void(Index n, double t, const SubdomainModel& left, const SubdomainModel& right)>;

/// Time loop over (tf - t0)/dt windows from the given subdomain start states.
/// Stops at the first window that fails to converge. Observer time is not
/// included in wall_time_s.
inline SchwarzRun run_coupled(const ProblemConfig& cfg, const TransmissionSpec& spec, SubdomainModel& left,
                              SubdomainModel& right, const KinematicState& left_start,
                              const KinematicState& right_start, const WindowObserver& observer = {}) {
  if (left.layout().side != Side::LeftOfInterface || right.layout().side != Side::RightOfInterface) {
    throw ConfigError("subdomain models are on the wrong sides");
  }
  const SchwarzOptions opt = SchwarzOptions::from_config(cfg);
  SchwarzRun run;
  if (auto d = spec.diagnostic()) run.diagnostic = "warning: " + *d;
  left.reset(left_start);
  right.reset(right_start);
  if (observer) observer(0, cfg.t0, left, right);
  InterfaceState iface;
  const Index steps = cfg.n_steps();
  run.iterations.reserve(static_cast<std::size_t>(steps));
  using clock = std::chrono::steady_clock;
  double elapsed = 0.0;
  for (Index n = 0; n < steps; ++n) {
    const auto t_begin = clock::now();
    const WindowResult w = advance_window(left, right, spec, iface, cfg.time_at(n + 1), opt);
    elapsed += std::chrono::duration<double>(clock::now() - t_begin).count();
    run.last_measure = w.last_measure;
    if (!w.converged) {
      run.converged = false;
      std::ostringstream msg;
      msg << "Schwarz window " << n + 1 << " (t = " << cfg.time_at(n + 1) << " s) ";
      if (!std::isfinite(w.last_measure)) {
        msg << "produced a non-finite iterate after " << w.iterations << " iterations";
      } else {
        msg << "did not converge in " << w.iterations << " iterations (last measure " << w.last_measure
            << ", tolerance " << opt.tolerance << ")";
      }
      if (!run.diagnostic.empty()) msg << "; " << run.diagnostic;
      run.diagnostic = msg.str();
      break;
    }
    run.iterations.push_back(w.iterations);
    ++run.windows;
    if (observer) observer(n + 1, cfg.time_at(n + 1), left, right);
  }
  run.wall_time_s = elapsed;
  return run;
}

}  // namespace nosam
