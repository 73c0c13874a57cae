#pragma once

// Single-domain reference simulation of the clamped bar.

#include <nosam/config.hpp>
#include <nosam/fem1d.hpp>
#include <nosam/newmark.hpp>

#include <algorithm>
#include <memory>
#include <vector>

namespace nosam {

/// Recorded monolithic history. Fields are column-major, one column per
/// recorded state (t0 first).
struct Trajectory {
  Mesh1D mesh;
  Index interface_index = -1;
  double dt = 0.0;
  double t0 = 0.0;
  std::vector<double> times;
  Matrix u;
  Matrix v;
  Matrix a;
  Vector g_gamma;  // interface displacement
  // Interface traction seen by each subdomain (row 0: left, row 1: right),
  // signed by that subdomain's outward normal and taken from the stress of
  // the element on the neighbor's side of the interface.
  Matrix t_gamma;

  Index n_states() const { return static_cast<Index>(times.size()); }

  KinematicState state(Index n) const { return {u.col(n), v.col(n), a.col(n), times[static_cast<std::size_t>(n)]}; }
};

/// Stepping engine for the monolithic bar; also used to stream long references.
class MonolithicSolver {
public:
  explicit MonolithicSolver(const ProblemConfig& cfg)
      : cfg_(cfg), mesh_(build_uniform_mesh(cfg.x_left, cfg.x_right, cfg.h)) {
    cfg_.validate();
    const auto ms = assemble_system(mesh_, cfg_.material);
    const Index n = mesh_.n_nodes();
    sys_ = partition_system(ms.mass, ms.stiffness, make_partition(n, {0, n - 1}));
    g_ = Vector(2);
    g_ << cfg_.dirichlet_left, cfg_.dirichlet_right;
    forcing_ = sys_.dirichlet_map * g_;
    stepper_ = std::make_unique<NewmarkStepper<SparseMatrix>>(sys_.mass_free, sys_.stiffness_free, cfg_.newmark());
    interface_index_ = *mesh_.node_at(cfg_.interface_coordinate);
  }

  const Mesh1D& mesh() const { return mesh_; }
  const AssembledSystem& system() const { return sys_; }
  Index interface_index() const { return interface_index_; }

  /// Gaussian displacement, zero velocity, consistent acceleration.
  KinematicState initial_state() const {
    const Index n = mesh_.n_nodes();
    KinematicState s;
    s.u = gaussian_ic(mesh_, cfg_.ic_amplitude, cfg_.ic_center, cfg_.ic_width);
    s.u(0) = cfg_.dirichlet_left;
    s.u(n - 1) = cfg_.dirichlet_right;
    s.v = Vector::Zero(n);
    s.a = Vector::Zero(n);
    s.t = cfg_.t0;
    const Vector af = initial_acceleration(sys_.mass_free, sys_.stiffness_free, forcing_, gather(s.u));
    scatter(af, s.a);
    return s;
  }

  /// Advances the state to step index n + 1 (time from the counter).
  KinematicState advance(const KinematicState& s, Index n) const {
    KinematicState free_s{gather(s.u), gather(s.v), gather(s.a), s.t};
    const KinematicState nf = stepper_->step(forcing_, free_s, cfg_.time_at(n + 1));
    const Index nn = mesh_.n_nodes();
    KinematicState out;
    out.u = Vector::Zero(nn);
    out.v = Vector::Zero(nn);
    out.a = Vector::Zero(nn);
    out.u(0) = cfg_.dirichlet_left;
    out.u(nn - 1) = cfg_.dirichlet_right;
    scatter(nf.u, out.u);
    scatter(nf.v, out.v);
    scatter(nf.a, out.a);
    out.t = nf.t;
    return out;
  }

  /// Interface tractions (left subdomain, right subdomain) for a full-bar displacement.
  std::pair<double, double> interface_tractions(const Vector& u) const {
    const Index g = interface_index_;
    const double e = cfg_.material.youngs_modulus;
    const double sigma_left = e * (u(g) - u(g - 1)) / (mesh_.node_coords[g] - mesh_.node_coords[g - 1]);
    const double sigma_right = e * (u(g + 1) - u(g)) / (mesh_.node_coords[g + 1] - mesh_.node_coords[g]);
    return {sigma_right * outward_normal(Side::LeftOfInterface), sigma_left * outward_normal(Side::RightOfInterface)};
  }

private:
  Vector gather(const Vector& full) const { return full.segment(1, full.size() - 2); }
  static void scatter(const Vector& free, Vector& full) { full.segment(1, free.size()) = free; }

  ProblemConfig cfg_;
  Mesh1D mesh_;
  AssembledSystem sys_;
  Vector g_;
  Vector forcing_;
  std::unique_ptr<NewmarkStepper<SparseMatrix>> stepper_;
  Index interface_index_ = 0;
};

/// Runs the full bar from t0 to tf and records every state.
inline Trajectory run_monolithic(const ProblemConfig& cfg) {
  MonolithicSolver solver(cfg);
  const Index steps = cfg.n_steps();
  const Index n = solver.mesh().n_nodes();
  Trajectory tr;
  tr.mesh = solver.mesh();
  tr.interface_index = solver.interface_index();
  tr.dt = cfg.dt;
  tr.t0 = cfg.t0;
  tr.times.resize(static_cast<std::size_t>(steps + 1));
  tr.u.resize(n, steps + 1);
  tr.v.resize(n, steps + 1);
  tr.a.resize(n, steps + 1);
  tr.g_gamma.resize(steps + 1);
  tr.t_gamma.resize(2, steps + 1);
  KinematicState s = solver.initial_state();
  for (Index k = 0; k <= steps; ++k) {
    if (k > 0) s = solver.advance(s, k - 1);
    tr.times[static_cast<std::size_t>(k)] = cfg.time_at(k);
    tr.u.col(k) = s.u;
    tr.v.col(k) = s.v;
    tr.a.col(k) = s.a;
    tr.g_gamma(k) = s.u(tr.interface_index);
    const auto [t1, t2] = solver.interface_tractions(s.u);
    tr.t_gamma(0, k) = t1;
    tr.t_gamma(1, k) = t2;
  }
  return tr;
}

/// Largest |element stress| over all recorded states, t0 included.
inline double compute_sigma_max(const Trajectory& traj, const Mesh1D& mesh, const MaterialParams& mat) {
  if (traj.n_states() == 0) throw ConfigError("empty trajectory");
  double m = 0.0;
  for (Index k = 0; k < traj.n_states(); ++k) {
    m = std::max(m, element_stress(mesh, mat, traj.u.col(k)).cwiseAbs().maxCoeff());
  }
  return m;
}

inline double compute_sigma_max(const Trajectory& traj, const MaterialParams& mat) {
  return compute_sigma_max(traj, traj.mesh, mat);
}

}  // namespace nosam
