#pragma once

// Bundled benchmark studies and the per-run output writer shared by the CLI.

#include <nosam/experiment.hpp>
#include <nosam/io.hpp>
#include <nosam/sweep.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace nosam {

/// Monolithic data shared by every run of a study.
struct ReferenceData {
  ProblemConfig cfg;
  Trajectory traj;
  double sigma_max = 0.0;

  static ReferenceData compute(const ProblemConfig& cfg) {
    ReferenceData r;
    r.cfg = cfg;
    r.traj = run_monolithic(cfg);
    r.sigma_max = compute_sigma_max(r.traj, cfg.material);
    return r;
  }
};

inline std::string config_hash(const ProblemConfig& cfg) { return io::sha256_hex(format_config(cfg)); }

inline io::json case_summary(const ProblemConfig& cfg, const CoupledResult& res) {
  io::json j = {{"left_model", res.left_model},
                {"right_model", res.right_model},
                {"converged", res.run.converged},
                {"windows", res.run.windows},
                {"mean_iterations", res.run.mean_iterations()},
                {"wall_time_s", res.run.wall_time_s},
                {"config_hash", config_hash(cfg)}};
  j["eps_avg"] = res.run.converged && res.errors.times.size() >= 2 ? io::json(res.errors.eps_avg) : io::json(nullptr);
  if (!res.run.diagnostic.empty()) j["diagnostic"] = res.run.diagnostic;
  return j;
}

/// iterations.csv, errors.csv and summary.json of one coupled run.
inline io::json write_case(const std::filesystem::path& dir, const ProblemConfig& cfg, const CoupledResult& res,
                           const io::json& extra = io::json::object()) {
  io::ensure_dir(dir);
  io::write_iterations_csv(dir / "iterations.csv", cfg, res.run);
  io::write_errors_csv(dir / "errors.csv", res.errors);
  io::json s = case_summary(cfg, res);
  for (auto it = extra.begin(); it != extra.end(); ++it) s[it.key()] = it.value();
  io::write_json(dir / "summary.json", s);
  return s;
}

/// Collects every converged subdomain state of a run (nodes x states per field).
class StateRecorder {
public:
  void operator()(Index, double, const SubdomainModel& l, const SubdomainModel& r) {
    push(0, l.state());
    push(1, r.state());
  }

  WindowObserver observer() {
    return [this](Index n, double t, const SubdomainModel& l, const SubdomainModel& r) { (*this)(n, t, l, r); };
  }

  /// sub1_{u,v,a} and sub2_{u,v,a} in the trajectory field format.
  void save(const std::filesystem::path& dir, const SubdomainLayout& left, const SubdomainLayout& right, double dt,
            double t0) const {
    const SubdomainLayout* lay[2] = {&left, &right};
    const char* field[3] = {"u", "v", "a"};
    for (int s = 0; s < 2; ++s) {
      for (int f = 0; f < 3; ++f) {
        const auto& cols = cols_[s][f];
        Matrix m(cols.empty() ? 0 : cols.front().size(), static_cast<Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) m.col(static_cast<Index>(k)) = cols[k];
        io::write_field(dir, "sub" + std::to_string(s + 1) + "_" + field[f], m, lay[s]->mesh, dt, t0);
      }
    }
  }

private:
  void push(int s, const KinematicState& x) {
    cols_[s][0].push_back(x.u);
    cols_[s][1].push_back(x.v);
    cols_[s][2].push_back(x.a);
  }
  std::vector<Vector> cols_[2][3];
};

// ---- FOM-FOM table -------------------------------------------------------------

struct Table1Row {
  std::string name;
  TransmissionKind kind;
  RobinParams params;
  double target_eps;
  double target_iterations;
};

inline std::vector<Table1Row> table1_rows() {
  return {
      {"lowest_error", TransmissionKind::RobinRobin, {1e-3, 1e-3, 1.0, 1.0}, 2.57e-4, 2.66},
      {"highest_error", TransmissionKind::RobinRobin, {1e-1, 1.0, 1.0, 3.0}, 1.61e-3, 3.27},
      {"lowest_iterations", TransmissionKind::RobinRobin, {1e-3, 1e-3, 1e-1, 5.0}, 2.57e-4, 2.55},
      {"highest_iterations", TransmissionKind::RobinRobin, {1e-1, 1e-1, 1e-3, 3.0}, 1.11e-3, 3.31},
      {"dirichlet_neumann", TransmissionKind::AlternatingDN, {0.0, 1.0, 1.0, 0.0}, 3.43e-4, 3.73},
  };
}

inline TransmissionSpec spec_for(TransmissionKind kind, const RobinParams& p, double sigma_max) {
  if (kind == TransmissionKind::RobinRobin) return TransmissionSpec::robin_robin(p[0], p[1], p[2], p[3], sigma_max);
  if (kind == TransmissionKind::AlternatingDN) return TransmissionSpec::alternating_dn(sigma_max);
  return TransmissionSpec::dirichlet_dirichlet(sigma_max);
}

inline CoupledResult run_fom_fom(const ReferenceData& ref, const TransmissionSpec& spec,
                                 const WindowObserver& extra = {}) {
  auto l = make_model(ref.cfg, Side::LeftOfInterface, spec);
  auto r = make_model(ref.cfg, Side::RightOfInterface, spec);
  TrajectoryReference tr(ref.traj);
  return run_case(ref.cfg, spec, *l, *r, tr, extra);
}

inline io::json preset_table1(const ReferenceData& ref, const std::filesystem::path& out) {
  io::json rows = io::json::array();
  for (const auto& row : table1_rows()) {
    const auto spec = spec_for(row.kind, row.params, ref.sigma_max);
    const CoupledResult res = run_fom_fom(ref, spec);
    io::json extra = {{"case", row.name},
                      {"transmission", to_string(row.kind)},
                      {"alpha12_bar", row.params[0]},
                      {"alpha21_bar", row.params[1]},
                      {"beta12", row.params[2]},
                      {"beta21", row.params[3]},
                      {"target_eps", row.target_eps},
                      {"target_iterations", row.target_iterations}};
    rows.push_back(write_case(out / row.name, ref.cfg, res, extra));
    std::cerr << row.name << ": " << res.run.mean_iterations() << " it, eps " << res.errors.eps_avg << "\n";
  }
  io::json s = {{"preset", "table1"}, {"sigma_max", ref.sigma_max}, {"rows", rows}};
  io::write_json(out / "summary.json", s);
  return s;
}

// ---- FOM/ROM coupling table ------------------------------------------------------

struct Table2Row {
  TransmissionKind kind;
  bool left_rom;
  bool right_rom;
  Index m1;  // 0 when FOM
  Index m2;
  double target_eps;
  double target_iterations;

  std::string name() const {
    std::string s = to_string(kind) + "_" + (left_rom ? "opinf" : "fom") + "_" + (right_rom ? "opinf" : "fom");
    if (left_rom || right_rom) s += "_" + std::to_string(left_rom ? m1 : 0) + "_" + std::to_string(right_rom ? m2 : 0);
    return s;
  }
};

inline std::vector<Table2Row> table2_rows() {
  using K = TransmissionKind;
  return {
      {K::AlternatingDN, false, false, 0, 0, 3.43e-4, 3.73},  {K::AlternatingDN, true, false, 20, 0, 7.37e-4, 6.08},
      {K::AlternatingDN, false, true, 0, 17, 7.31e-4, 4.10},  {K::AlternatingDN, true, true, 20, 17, 9.63e-4, 4.12},
      {K::AlternatingDN, true, false, 34, 0, 1.29e-4, 5.45},  {K::AlternatingDN, false, true, 0, 29, 1.53e-4, 4.19},
      {K::AlternatingDN, true, true, 34, 29, 2.03e-4, 4.10},  {K::RobinRobin, false, false, 0, 0, 2.57e-4, 2.66},
      {K::RobinRobin, true, false, 20, 0, 6.35e-4, 2.89},     {K::RobinRobin, false, true, 0, 17, 2.18e-3, 3.00},
      {K::RobinRobin, true, true, 20, 17, 2.47e-3, 2.88},     {K::RobinRobin, true, false, 34, 0, 1.62e-4, 2.00},
      {K::RobinRobin, false, true, 0, 29, 9.42e23, 3.80},     {K::RobinRobin, true, true, 34, 29, 1.22e-4, 2.00},
  };
}

/// Trains (and memoizes) subdomain ROMs of a study.
class RomCache {
public:
  RomCache(const ReferenceData& ref, Index samples) : ref_(ref), samples_(samples) {}

  std::shared_ptr<const TrainedRom> get(const TransmissionSpec& spec, Side side, Index modes) {
    const auto key = std::make_tuple(to_string(spec.kind), side == Side::LeftOfInterface, modes);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto rom = std::make_shared<const TrainedRom>(
        train_rom(ref_.cfg, ref_.traj, side, spec.into(side), ref_.sigma_max, ModeChoice::fixed(modes), samples_));
    cache_.emplace(key, rom);
    return rom;
  }

private:
  const ReferenceData& ref_;
  Index samples_;
  std::map<std::tuple<std::string, bool, Index>, std::shared_ptr<const TrainedRom>> cache_;
};

/// Modes needed per subdomain for an energy target (free-DOF snapshots, Dirichlet interface partition).
inline std::pair<Index, Index> energy_mode_counts(const ReferenceData& ref, double target, Index samples) {
  const ReceiverCoefficients dirichlet{0.0, 1.0, 1.0};
  const ReceiverCoefficients robin{1.0, 1.0, 1.0};
  const auto l = make_layout(ref.cfg, Side::LeftOfInterface, dirichlet);
  const auto r = make_layout(ref.cfg, Side::RightOfInterface, robin);
  return {compute_basis(subdomain_snapshots(ref.traj, l, samples), target).r,
          compute_basis(subdomain_snapshots(ref.traj, r, samples), target).r};
}

inline CoupledResult run_table2_row(const ReferenceData& ref, RomCache& roms, const Table2Row& row) {
  const RobinParams rr{1e-3, 1e-3, 1.0, 1.0};
  const auto spec = spec_for(row.kind, rr, ref.sigma_max);
  auto l = make_model(ref.cfg, Side::LeftOfInterface, spec,
                      row.left_rom ? roms.get(spec, Side::LeftOfInterface, row.m1) : nullptr);
  auto r = make_model(ref.cfg, Side::RightOfInterface, spec,
                      row.right_rom ? roms.get(spec, Side::RightOfInterface, row.m2) : nullptr);
  TrajectoryReference tr(ref.traj);
  return run_case(ref.cfg, spec, *l, *r, tr);
}

inline io::json preset_table2(const ReferenceData& ref, const std::filesystem::path& out) {
  const Index samples = ref.cfg.training_steps();
  RomCache roms(ref, samples);
  io::json rows = io::json::array();
  for (const auto& row : table2_rows()) {
    const CoupledResult res = run_table2_row(ref, roms, row);
    io::json extra = {{"case", row.name()},
                      {"transmission", to_string(row.kind)},
                      {"m1", row.left_rom ? io::json(row.m1) : io::json(nullptr)},
                      {"m2", row.right_rom ? io::json(row.m2) : io::json(nullptr)},
                      {"target_eps", row.target_eps},
                      {"target_iterations", row.target_iterations}};
    rows.push_back(write_case(out / row.name(), ref.cfg, res, extra));
    std::cerr << row.name() << ": " << res.run.mean_iterations() << " it, eps " << res.errors.eps_avg << ", "
              << res.run.wall_time_s << " s\n";
  }
  const auto e3 = energy_mode_counts(ref, 0.999, samples);
  const auto e8 = energy_mode_counts(ref, 0.99999999, samples);
  io::json s = {{"preset", "table2"},
                {"sigma_max", ref.sigma_max},
                {"training_samples", samples},
                {"energy_modes", {{"0.999", {e3.first, e3.second}}, {"0.99999999", {e8.first, e8.second}}}},
                {"rows", rows}};
  io::write_json(out / "summary.json", s);
  return s;
}

// ---- predictive horizon ------------------------------------------------------------

struct HorizonResult {
  std::string name;
  CoupledResult result;
};

/// Long-horizon runs of the four DN/RR x FOM-FOM/OpInf-OpInf(34/29) configurations.
/// ROMs and sigma_max come from the training window only; the reference is
/// recomputed alongside each run.
inline std::vector<HorizonResult> run_horizon_study(const ProblemConfig& cfg, Index m1 = 34, Index m2 = 29) {
  if (cfg.training_cutoff < 0.0) throw ConfigError("predictive study needs training_cutoff");
  ProblemConfig train_cfg = cfg;
  train_cfg.tf = cfg.training_cutoff;
  train_cfg.training_cutoff = -1.0;
  const ReferenceData train = ReferenceData::compute(train_cfg);
  RomCache roms(train, train_cfg.n_steps());
  std::vector<HorizonResult> out;
  const RobinParams rr{1e-3, 1e-3, 1.0, 1.0};
  for (auto kind : {TransmissionKind::AlternatingDN, TransmissionKind::RobinRobin}) {
    for (bool rom : {false, true}) {
      const auto spec = spec_for(kind, rr, train.sigma_max);
      auto l = make_model(cfg, Side::LeftOfInterface, spec, rom ? roms.get(spec, Side::LeftOfInterface, m1) : nullptr);
      auto r = make_model(cfg, Side::RightOfInterface, spec, rom ? roms.get(spec, Side::RightOfInterface, m2) : nullptr);
      StreamingReference ref(cfg);
      HorizonResult h;
      h.name = to_string(kind) + (rom ? "_opinf_opinf" : "_fom_fom");
      h.result = run_case(cfg, spec, *l, *r, ref);
      std::cerr << h.name << ": " << h.result.run.mean_iterations() << " it, " << h.result.run.windows
                << " windows\n";
      out.push_back(std::move(h));
    }
  }
  return out;
}

struct HorizonChecks {
  double rr_rom_below_dn_fom_fraction = 0.0;  // over post-cutoff steps
  double dn_rom_growth = 0.0;                 // max over last 10% / value at cutoff
};

inline HorizonChecks horizon_checks(const std::vector<HorizonResult>& runs, Index cutoff_step) {
  auto find = [&](const std::string& n) -> const ErrorReport& {
    for (const auto& r : runs)
      if (r.name == n) return r.result.errors;
    throw ConfigError("missing horizon run " + n);
  };
  const ErrorReport& rr_rom = find("rr_opinf_opinf");
  const ErrorReport& dn_fom = find("dn_fom_fom");
  const ErrorReport& dn_rom = find("dn_opinf_opinf");
  HorizonChecks c;
  const std::size_t n = std::min(rr_rom.times.size(), dn_fom.times.size());
  std::size_t below = 0, total = 0;
  for (auto k = static_cast<std::size_t>(cutoff_step) + 1; k < n; ++k) {
    ++total;
    if (rr_rom.total(k) < dn_fom.total(k)) ++below;
  }
  c.rr_rom_below_dn_fom_fraction = total ? static_cast<double>(below) / static_cast<double>(total) : 0.0;
  if (dn_rom.times.size() > static_cast<std::size_t>(cutoff_step)) {
    const std::size_t m = dn_rom.times.size();
    double tail = 0.0;
    for (std::size_t k = m - std::max<std::size_t>(1, m / 10); k < m; ++k) tail = std::max(tail, dn_rom.total(k));
    c.dn_rom_growth = tail / dn_rom.total(static_cast<std::size_t>(cutoff_step));
  }
  return c;
}

inline io::json preset_fig8(const ProblemConfig& cfg, const std::filesystem::path& out) {
  const auto runs = run_horizon_study(cfg);
  io::json rows = io::json::array();
  for (const auto& r : runs) rows.push_back(write_case(out / r.name, cfg, r.result, {{"case", r.name}}));
  const Index cutoff = cfg.training_steps();
  const HorizonChecks c = horizon_checks(runs, cutoff);
  io::json s = {{"preset", "fig8"},
                {"tf", cfg.tf},
                {"training_cutoff", cfg.training_cutoff},
                {"cutoff_step", cutoff},
                {"rr_opinf_below_dn_fom_fraction", c.rr_rom_below_dn_fom_fraction},
                {"dn_opinf_growth_factor", c.dn_rom_growth},
                {"rows", rows}};
  io::write_json(out / "summary.json", s);
  return s;
}

inline ProblemConfig fig8_config(ProblemConfig cfg = {}) {
  cfg.tf = 1e-2;
  cfg.training_cutoff = 1e-3;
  cfg.validate();
  return cfg;
}

// ---- Robin sweep -------------------------------------------------------------------

inline io::json preset_fig2(const ReferenceData& ref, const std::filesystem::path& out, int jobs,
                            const SweepAxes& axes = SweepAxes::benchmark()) {
  io::ensure_dir(out);
  const auto grid = generate_grid(axes);
  const SweepContext ctx{ref.cfg, &ref.traj, ref.sigma_max};
  // Progress file in completion order; sweep.csv is rewritten in grid order at the end.
  std::ofstream progress(out / "sweep.partial.csv");
  if (!progress) throw IoError("cannot write sweep progress file in '" + out.string() + "'");
  progress << sweep_csv_header() << "\n" << std::flush;
  std::size_t done = 0;
  const auto records = run_sweep(ctx, grid, jobs, [&](const SweepRecord& r) {
    progress << sweep_csv_row(r) << "\n" << std::flush;
    if (++done % 25 == 0) std::cerr << done << "/" << grid.size() << " sweep points\n";
  });
  progress.close();
  io::write_text(out / "sweep.csv", sweep_csv(records));
  std::filesystem::remove(out / "sweep.partial.csv");
  const auto front = pareto_front(records);
  io::write_text(out / "pareto.csv", sweep_csv(front));

  const CoupledResult dn = run_fom_fom(ref, TransmissionSpec::alternating_dn(ref.sigma_max));
  std::size_t converged = 0, fewer = 0;
  const SweepRecord* best_eps = nullptr;
  const SweepRecord* best_it = nullptr;
  for (const auto& r : records) {
    if (!r.converged) continue;
    ++converged;
    if (r.mean_iterations < dn.run.mean_iterations()) ++fewer;
    if (!best_eps || r.eps_avg < best_eps->eps_avg) best_eps = &r;
    if (!best_it || r.mean_iterations < best_it->mean_iterations) best_it = &r;
  }
  auto rec_json = [](const SweepRecord* r) -> io::json {
    if (!r) return nullptr;
    return {{"alpha12_bar", r->params[0]}, {"alpha21_bar", r->params[1]}, {"beta12", r->params[2]},
            {"beta21", r->params[3]},      {"eps_avg", r->eps_avg},       {"mean_iterations", r->mean_iterations}};
  };
  io::json s = {{"preset", "fig2"},
                {"points", records.size()},
                {"converged", converged},
                {"fewer_iterations_than_dn", fewer},
                {"pareto_size", front.size()},
                {"lowest_error", rec_json(best_eps)},
                {"lowest_iterations", rec_json(best_it)},
                {"dn_reference", {{"eps_avg", dn.errors.eps_avg}, {"mean_iterations", dn.run.mean_iterations()}}},
                {"sigma_max", ref.sigma_max},
                {"config_hash", config_hash(ref.cfg)}};
  io::write_json(out / "summary.json", s);
  return s;
}

}  // namespace nosam
