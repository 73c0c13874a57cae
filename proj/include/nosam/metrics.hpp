#pragma once

// Errors of coupled runs against the monolithic reference.

#include <nosam/monolithic.hpp>
#include <nosam/schwarz.hpp>
#include <nosam/subdomain.hpp>

#include <memory>
#include <vector>

namespace nosam {

/// eps = ||du|| + dt ||dv|| + dt^2/2 ||da||.
inline double step_error(const KinematicState& coupled, const KinematicState& reference, double dt) {
  if (coupled.size() != reference.size()) throw ConfigError("states do not conform");
  return (coupled.u - reference.u).norm() + dt * (coupled.v - reference.v).norm() +
         0.5 * dt * dt * (coupled.a - reference.a).norm();
}

/// Sum over subdomains and steps after t0, divided by N_t - 1 where N_t
/// counts recorded states including t0. `per_step[k][n]` is subdomain k at t_n.
inline double average_error(const std::vector<std::vector<double>>& per_step) {
  if (per_step.empty() || per_step.front().size() < 2) throw ConfigError("need at least two recorded states");
  const std::size_t nt = per_step.front().size();
  double sum = 0.0;
  for (const auto& sub : per_step) {
    if (sub.size() != nt) throw ConfigError("subdomain error series differ in length");
    for (std::size_t n = 1; n < nt; ++n) sum += sub[n];
  }
  return sum / static_cast<double>(nt - 1);
}

inline double iteration_stats(const SchwarzRun& run) { return run.mean_iterations(); }

/// Monolithic states in increasing step order.
class ReferenceSource {
public:
  virtual ~ReferenceSource() = default;
  virtual KinematicState at(Index n) = 0;
};

class TrajectoryReference final : public ReferenceSource {
public:
  explicit TrajectoryReference(const Trajectory& t) : traj_(t) {}
  KinematicState at(Index n) override {
    if (n < 0 || n >= traj_.n_states()) throw ConfigError("reference step out of range");
    return traj_.state(n);
  }

private:
  const Trajectory& traj_;
};

/// Re-runs the monolithic problem alongside the coupled run so that long
/// horizons need not be stored.
class StreamingReference final : public ReferenceSource {
public:
  explicit StreamingReference(const ProblemConfig& cfg) : solver_(cfg), state_(solver_.initial_state()) {}
  KinematicState at(Index n) override {
    if (n < step_) throw ConfigError("streaming reference cannot rewind");
    while (step_ < n) state_ = solver_.advance(state_, step_++);
    return state_;
  }

private:
  MonolithicSolver solver_;
  KinematicState state_;
  Index step_ = 0;
};

struct ErrorReport {
  std::vector<double> times;
  std::vector<double> eps_left;   // per recorded state, t0 included
  std::vector<double> eps_right;
  double eps_avg = 0.0;
  double mean_iterations = 0.0;
  double wall_time_s = 0.0;

  double total(std::size_t n) const { return eps_left[n] + eps_right[n]; }
};

/// Observer that records per-step subdomain errors.
class ErrorTracker {
public:
  ErrorTracker(ReferenceSource& ref, double dt) : ref_(ref), dt_(dt) {}

  void operator()(Index n, double t, const SubdomainModel& left, const SubdomainModel& right) {
    const KinematicState bar = ref_.at(n);
    report_.times.push_back(t);
    report_.eps_left.push_back(step_error(left.state(), left.layout().restrict(bar), dt_));
    report_.eps_right.push_back(step_error(right.state(), right.layout().restrict(bar), dt_));
  }

  WindowObserver observer() {
    return [this](Index n, double t, const SubdomainModel& l, const SubdomainModel& r) { (*this)(n, t, l, r); };
  }

  /// Completes the report with run statistics.
  ErrorReport finish(const SchwarzRun& run) {
    ErrorReport r = report_;
    if (r.eps_left.size() >= 2) r.eps_avg = average_error({r.eps_left, r.eps_right});
    r.mean_iterations = run.mean_iterations();
    r.wall_time_s = run.wall_time_s;
    return r;
  }

private:
  ReferenceSource& ref_;
  double dt_;
  ErrorReport report_;
};

}  // namespace nosam
