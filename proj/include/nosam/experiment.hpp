#pragma once

// Assembly of coupled runs: training subdomain ROMs from a monolithic
// trajectory, building subdomain models and running them against a reference.

#include <nosam/metrics.hpp>
#include <nosam/monolithic.hpp>
#include <nosam/opinf.hpp>
#include <nosam/pod.hpp>
#include <nosam/schwarz.hpp>
#include <nosam/subdomain.hpp>
#include <nosam/transmission.hpp>

#include <memory>
#include <optional>
#include <string>

namespace nosam {

/// Energy target or explicit mode count.
struct ModeChoice {
  std::optional<double> energy;
  Index modes = 0;

  static ModeChoice by_energy(double e) { return {e, 0}; }
  static ModeChoice fixed(Index r) { return {std::nullopt, r}; }
};

struct TrainedRom {
  Side side = Side::LeftOfInterface;
  PodBasis basis;
  RomOperators ops;
};

/// Trains the ROM of one subdomain from the first `samples` stepped states.
inline TrainedRom train_rom(const ProblemConfig& cfg, const Trajectory& traj, Side side,
                            const ReceiverCoefficients& coeff, double sigma_max, const ModeChoice& modes,
                            Index samples) {
  const SubdomainLayout layout = make_layout(cfg, side, coeff);
  const Matrix snaps = subdomain_snapshots(traj, layout, samples);
  TrainedRom t;
  t.side = side;
  t.basis = modes.energy ? compute_basis(snaps, *modes.energy) : compute_basis_fixed(snaps, modes.modes);
  const RomForm form = rom_form_for(coeff);
  const TrainingSet ts = build_training_set(traj, layout, t.basis, form, coeff.alpha, coeff.beta, sigma_max, samples);
  t.ops = infer_operators(ts, cfg.lambda_reg);
  return t;
}

/// FOM when `rom` is empty, otherwise the given trained ROM.
inline std::unique_ptr<SubdomainModel> make_model(const ProblemConfig& cfg, Side side, const TransmissionSpec& spec,
                                                  const std::shared_ptr<const TrainedRom>& rom = nullptr) {
  SubdomainLayout layout = make_layout(cfg, side, spec.into(side));
  if (!rom) return std::make_unique<FomSubdomain>(std::move(layout), cfg.newmark(), cfg.traction_method);
  if (rom->side != side) throw ConfigError("ROM was trained for the other subdomain");
  return std::make_unique<RomSubdomain>(std::move(layout), rom->basis, rom->ops, cfg.newmark());
}

struct CoupledResult {
  SchwarzRun run;
  ErrorReport errors;
  std::string left_model;
  std::string right_model;
};

/// Runs the coupled problem from the monolithic initial state and tracks the
/// error against `ref` at every converged window.
inline CoupledResult run_case(const ProblemConfig& cfg, const TransmissionSpec& spec, SubdomainModel& left,
                              SubdomainModel& right, ReferenceSource& ref, const WindowObserver& extra = {}) {
  const KinematicState init = MonolithicSolver(cfg).initial_state();
  ErrorTracker tracker(ref, cfg.dt);
  auto obs = [&](Index n, double t, const SubdomainModel& l, const SubdomainModel& r) {
    tracker(n, t, l, r);
    if (extra) extra(n, t, l, r);
  };
  CoupledResult res;
  res.left_model = left.describe();
  res.right_model = right.describe();
  res.run = run_coupled(cfg, spec, left, right, left.layout().restrict(init), right.layout().restrict(init), obs);
  res.errors = tracker.finish(res.run);
  return res;
}

}  // namespace nosam
