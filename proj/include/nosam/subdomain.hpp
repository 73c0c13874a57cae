#pragma once

// Subdomain layout and the full-order subdomain solver used inside the
// Schwarz loop.

#include <nosam/config.hpp>
#include <nosam/fem1d.hpp>
#include <nosam/newmark.hpp>
#include <nosam/transmission.hpp>

#include <cmath>
#include <memory>
#include <string>

namespace nosam {

/// Geometry, partition and barred operators of one subdomain. The interface
/// node is constrained when the subdomain receives Dirichlet data, free otherwise.
struct SubdomainLayout {
  Side side = Side::LeftOfInterface;
  Mesh1D mesh;
  MaterialParams material;
  Index gamma = 0;          // local interface node
  Index outer = 0;          // local node on the physical boundary
  Index global_offset = 0;  // bar index of local node 0
  double outer_value = 0.0;
  ReceiverCoefficients coefficients;
  AssembledSystem system;

  Index n_nodes() const { return mesh.n_nodes(); }
  Index n_free() const { return static_cast<Index>(system.partition.free.size()); }
  bool dirichlet_interface() const { return coefficients.dirichlet(); }

  /// Node adjacent to the interface inside the subdomain.
  Index gamma_neighbor() const { return side == Side::LeftOfInterface ? gamma - 1 : gamma + 1; }

  /// Constrained values in partition order for the given interface displacement.
  Vector constrained_values(double u_gamma) const {
    const auto& c = system.partition.constrained;
    Vector g(static_cast<Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) g(static_cast<Index>(i)) = c[i] == gamma ? u_gamma : outer_value;
    return g;
  }

  /// Bar-wide node indices of the free DOFs.
  IndexList global_free() const {
    IndexList out;
    for (Index i : system.partition.free) out.push_back(i + global_offset);
    return out;
  }

  /// Restriction of a bar-wide vector to this subdomain's nodes.
  Vector restrict(const Vector& bar) const { return bar.segment(global_offset, n_nodes()); }

  KinematicState restrict(const KinematicState& bar) const {
    return {restrict(bar.u), restrict(bar.v), restrict(bar.a), bar.t};
  }
};

inline SubdomainLayout make_layout(const ProblemConfig& cfg, Side side, const ReceiverCoefficients& coeff) {
  SubdomainLayout l;
  l.side = side;
  l.material = cfg.material;
  l.coefficients = coeff;
  const Mesh1D bar = build_uniform_mesh(cfg.x_left, cfg.x_right, cfg.h);
  const auto g = bar.node_at(cfg.interface_coordinate);
  if (!g || *g == 0 || *g == bar.n_nodes() - 1) throw ConfigError("interface must be an interior mesh node");
  if (side == Side::LeftOfInterface) {
    l.mesh = build_uniform_mesh(cfg.x_left, cfg.interface_coordinate, cfg.h);
    l.global_offset = 0;
    l.gamma = l.mesh.n_nodes() - 1;
    l.outer = 0;
    l.outer_value = cfg.dirichlet_left;
  } else {
    l.mesh = build_uniform_mesh(cfg.interface_coordinate, cfg.x_right, cfg.h);
    l.global_offset = *g;
    l.gamma = 0;
    l.outer = l.mesh.n_nodes() - 1;
    l.outer_value = cfg.dirichlet_right;
  }
  if (l.mesh.n_nodes() < 3) throw ConfigError("each subdomain needs at least two elements");
  IndexList constrained{l.outer};
  if (coeff.dirichlet()) {
    if (coeff.beta == 0.0) throw ConfigError("Dirichlet transmission needs beta != 0");
    constrained.push_back(l.gamma);
  }
  const auto ms = assemble_system(l.mesh, l.material);
  l.system = partition_system(ms.mass, ms.stiffness, make_partition(l.n_nodes(), constrained, l.gamma));
  l.system.interface_load_map = interface_load_map(l.mesh, l.material, l.system.partition, l.gamma);
  return l;
}

/// ||u + dt v + dt^2/2 a|| of a state, and of the difference of two states.
inline double combined_norm(const Vector& u, const Vector& v, const Vector& a, double dt) {
  return (u + dt * v + 0.5 * dt * dt * a).norm();
}

/// Relative change between successive Schwarz iterates; falls back to the
/// absolute change when the previous iterate is (numerically) zero.
inline double convergence_measure(double numerator, double denominator) {
  if (denominator < 1e-14 * std::max(1.0, numerator)) return numerator;
  return numerator / denominator;
}

inline double convergence_measure(const KinematicState& prev, const KinematicState& next, double dt) {
  if (!prev.conforms() || !next.conforms() || prev.size() != next.size()) {
    throw ConfigError("iterates do not conform");
  }
  const double num = combined_norm(next.u - prev.u, next.v - prev.v, next.a - prev.a, dt);
  const double den = combined_norm(prev.u, prev.v, prev.a, dt);
  return convergence_measure(num, den);
}

inline bool check_convergence(const KinematicState& prev, const KinematicState& next, double dt, double delta) {
  return convergence_measure(prev, next, dt) < delta;
}

/// A subdomain solver as seen by the Schwarz controller. Iterate 0 of a
/// window is the window start; every solve produces the next iterate.
class SubdomainModel {
public:
  virtual ~SubdomainModel() = default;

  virtual const SubdomainLayout& layout() const = 0;
  virtual std::string describe() const = 0;

  /// Sets the current state from a full-order state on the subdomain mesh.
  virtual void reset(const KinematicState& start) = 0;
  /// Opens the window ending at t_next from the current (accepted) state.
  virtual void begin_window(double t_next) = 0;
  virtual void solve_iteration(const InterfaceData& data) = 0;
  /// Interface values of the latest iterate, traction expressed for the neighbor.
  virtual InterfaceOutput output() const = 0;
  /// Relative change between the latest two iterates.
  virtual double change_measure() const = 0;
  /// Makes the latest iterate the next window's start.
  virtual void accept() = 0;
  /// Full-order state of the latest iterate.
  virtual KinematicState state() const = 0;
};

/// Finite element subdomain: barred system plus the Robin/Neumann terms,
/// with the effective matrix factorized once.
class FomSubdomain final : public SubdomainModel {
public:
  FomSubdomain(SubdomainLayout layout, NewmarkParams params,
               TractionMethod traction = TractionMethod::ElementStress)
      : layout_(std::move(layout)), params_(params), traction_(traction) {
    const auto& sys = layout_.system;
    SparseMatrix k_total = sys.stiffness_free;
    if (!layout_.dirichlet_interface()) {
      const auto& c = layout_.coefficients;
      robin_row_ = *sys.partition.free_position(layout_.gamma);
      if (c.beta != 0.0) {
        const auto rc = robin_contributions(layout_.mesh, sys.partition, layout_.gamma, c.alpha, 0.0);
        k_total += (c.beta / c.alpha * layout_.material.area) * rc.stiffness;
      }
    }
    stepper_ = std::make_unique<NewmarkStepper<SparseMatrix>>(sys.mass_free, k_total, params_);
  }

  const SubdomainLayout& layout() const override { return layout_; }
  std::string describe() const override { return "FOM"; }

  void reset(const KinematicState& start) override {
    if (!start.conforms() || start.size() != layout_.n_nodes()) throw ConfigError("start state does not fit subdomain");
    current_ = start;
    previous_ = start;
  }

  void begin_window(double t_next) override {
    start_ = current_;
    previous_ = current_;
    start_free_ = gather(start_);
    inertia_ = stepper_->inertia_rhs(start_free_);
    t_next_ = t_next;
  }

  void solve_iteration(const InterfaceData& d) override {
    const auto& sys = layout_.system;
    const auto& c = layout_.coefficients;
    const double u_gamma = c.dirichlet() ? d.lambda / c.beta : 0.0;
    Vector f = sys.dirichlet_map * layout_.constrained_values(u_gamma);
    if (!c.dirichlet()) f(robin_row_) += d.lambda / c.alpha * layout_.material.area;
    const KinematicState nf = stepper_->step_with_inertia(f, inertia_, start_free_, t_next_);

    previous_ = std::move(current_);
    KinematicState next;
    const Index n = layout_.n_nodes();
    next.u = Vector::Zero(n);
    next.v = Vector::Zero(n);
    next.a = Vector::Zero(n);
    next.t = t_next_;
    const auto& fr = sys.partition.free;
    for (std::size_t i = 0; i < fr.size(); ++i) {
      const auto k = static_cast<Index>(i);
      next.u(fr[i]) = nf.u(k);
      next.v(fr[i]) = nf.v(k);
      next.a(fr[i]) = nf.a(k);
    }
    // Outer boundary is held fixed in time.
    next.u(layout_.outer) = layout_.outer_value;
    if (c.dirichlet()) {
      next.u(layout_.gamma) = u_gamma;
      next.v(layout_.gamma) = d.v;
      next.a(layout_.gamma) = d.a;
    }
    current_ = std::move(next);
  }

  InterfaceOutput output() const override {
    InterfaceOutput o;
    o.u = current_.u(layout_.gamma);
    o.v = current_.v(layout_.gamma);
    o.a = current_.a(layout_.gamma);
    o.traction = -extract_traction(layout_.mesh, layout_.material, current_.u, layout_.side, traction_,
                                   &layout_.system.mass, &layout_.system.stiffness, &current_.a);
    return o;
  }

  double change_measure() const override { return convergence_measure(previous_, current_, params_.dt); }

  void accept() override { previous_ = current_; }

  KinematicState state() const override { return current_; }

private:
  KinematicState gather(const KinematicState& s) const {
    const auto& fr = layout_.system.partition.free;
    KinematicState out;
    const auto n = static_cast<Index>(fr.size());
    out.u.resize(n);
    out.v.resize(n);
    out.a.resize(n);
    for (Index i = 0; i < n; ++i) {
      out.u(i) = s.u(fr[static_cast<std::size_t>(i)]);
      out.v(i) = s.v(fr[static_cast<std::size_t>(i)]);
      out.a(i) = s.a(fr[static_cast<std::size_t>(i)]);
    }
    out.t = s.t;
    return out;
  }

  SubdomainLayout layout_;
  NewmarkParams params_;
  TractionMethod traction_;
  std::unique_ptr<NewmarkStepper<SparseMatrix>> stepper_;
  Index robin_row_ = -1;
  KinematicState start_;
  KinematicState start_free_;
  KinematicState previous_;
  KinematicState current_;
  Vector inertia_;
  double t_next_ = 0.0;
};

}  // namespace nosam
