#pragma once

// Robin parameter sweeps and Pareto fronts over (error, iterations).

#include <nosam/experiment.hpp>
#include <nosam/metrics.hpp>
#include <nosam/monolithic.hpp>
#include <nosam/transmission.hpp>

#include <array>
#include <atomic>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace nosam {

using RobinParams = std::array<double, 4>;  // alpha12_bar, alpha21_bar, beta12, beta21

struct SweepRecord {
  RobinParams params{};
  double eps_avg = 0.0;
  double mean_iterations = 0.0;
  double wall_time_s = 0.0;
  bool converged = false;
  std::string diagnostic;
};

struct SweepAxes {
  std::vector<double> alpha12_bar;
  std::vector<double> alpha21_bar;
  std::vector<double> beta12;
  std::vector<double> beta21;

  /// Five values per coefficient, 625 combinations.
  static SweepAxes benchmark() {
    const std::vector<double> v{1e-3, 1e-1, 1.0, 3.0, 5.0};
    return {v, v, v, v};
  }
};

/// Cartesian product, alpha12_bar varying slowest.
inline std::vector<RobinParams> generate_grid(const SweepAxes& ax) {
  std::vector<RobinParams> out;
  for (double a : ax.alpha12_bar)
    for (double b : ax.alpha21_bar)
      for (double c : ax.beta12)
        for (double d : ax.beta21) out.push_back({a, b, c, d});
  return out;
}

/// Everything a sweep point needs that does not depend on the Robin coefficients.
struct SweepContext {
  ProblemConfig cfg;
  const Trajectory* reference = nullptr;
  double sigma_max = 0.0;
};

inline SweepRecord run_sweep_point(const SweepContext& ctx, const RobinParams& p) {
  SweepRecord rec;
  rec.params = p;
  try {
    const auto spec = TransmissionSpec::robin_robin(p[0], p[1], p[2], p[3], ctx.sigma_max);
    auto left = make_model(ctx.cfg, Side::LeftOfInterface, spec);
    auto right = make_model(ctx.cfg, Side::RightOfInterface, spec);
    TrajectoryReference ref(*ctx.reference);
    const CoupledResult res = run_case(ctx.cfg, spec, *left, *right, ref);
    rec.converged = res.run.converged;
    rec.mean_iterations = res.run.mean_iterations();
    rec.wall_time_s = res.run.wall_time_s;
    rec.diagnostic = res.run.diagnostic;
    if (rec.converged) rec.eps_avg = res.errors.eps_avg;
  } catch (const std::exception& e) {
    rec.converged = false;
    rec.diagnostic = e.what();
  }
  return rec;
}

/// Runs every grid point on `jobs` worker threads. `sink` is called (serialized)
/// as each record completes; the returned list is in grid order.
inline std::vector<SweepRecord> run_sweep(const SweepContext& ctx, const std::vector<RobinParams>& grid, int jobs,
                                          const std::function<void(const SweepRecord&)>& sink = {}) {
  std::vector<SweepRecord> out(grid.size());
  if (grid.empty()) return out;
  std::atomic<std::size_t> next{0};
  std::mutex sink_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      out[i] = run_sweep_point(ctx, grid[i]);
      if (sink) {
        std::lock_guard<std::mutex> lock(sink_mutex);
        sink(out[i]);
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(grid.size())));
  if (n == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

inline bool dominates(const SweepRecord& a, const SweepRecord& b) {
  return a.eps_avg <= b.eps_avg && a.mean_iterations <= b.mean_iterations &&
         (a.eps_avg < b.eps_avg || a.mean_iterations < b.mean_iterations);
}

/// Non-dominated converged records under (eps_avg, mean_iterations) minimization.
inline std::vector<SweepRecord> pareto_front(const std::vector<SweepRecord>& records) {
  std::vector<SweepRecord> front;
  for (const auto& r : records) {
    if (!r.converged) continue;
    bool dominated = false;
    for (const auto& o : records) {
      if (o.converged && dominates(o, r)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(r);
  }
  return front;
}

inline const char* sweep_csv_header() {
  return "alpha12_bar,alpha21_bar,beta12,beta21,eps_avg,mean_iterations,wall_time_s,converged";
}

inline std::string sweep_csv_row(const SweepRecord& r) {
  std::ostringstream o;
  o.precision(10);
  o << r.params[0] << "," << r.params[1] << "," << r.params[2] << "," << r.params[3] << ",";
  if (r.converged) o << r.eps_avg;
  o << "," << r.mean_iterations << "," << r.wall_time_s << "," << (r.converged ? "true" : "false");
  return o.str();
}

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::string s = std::string(sweep_csv_header()) + "\n";
  for (const auto& r : records) s += sweep_csv_row(r) + "\n";
  return s;
}

}  // namespace nosam
