#pragma once

// Operator Inference: reduced operators regressed from projected snapshot
// data, and the reduced subdomain model that runs inside the Schwarz loop.

#include <nosam/monolithic.hpp>
#include <nosam/newmark.hpp>
#include <nosam/pod.hpp>
#include <nosam/subdomain.hpp>
#include <nosam/transmission.hpp>

#include <Eigen/QR>

#include <array>
#include <cmath>
#include <iostream>
#include <memory>
#include <string>

namespace nosam {

/// Which learned form a subdomain uses, set by the data it receives.
enum class RomForm { Dirichlet, Neumann, Robin };

inline std::string to_string(RomForm f) {
  switch (f) {
    case RomForm::Dirichlet: return "dirichlet";
    case RomForm::Neumann: return "neumann";
    case RomForm::Robin: return "robin";
  }
  return "?";
}

inline RomForm parse_rom_form(const std::string& s) {
  if (s == "dirichlet") return RomForm::Dirichlet;
  if (s == "neumann") return RomForm::Neumann;
  if (s == "robin") return RomForm::Robin;
  throw ConfigError("unknown ROM form '" + s + "'");
}

inline RomForm rom_form_for(const ReceiverCoefficients& c) {
  if (c.dirichlet()) return RomForm::Dirichlet;
  return c.beta == 0.0 ? RomForm::Neumann : RomForm::Robin;
}

/// Learned operators of
///   a = -K u + B g + H t / sigma_max                                 (Dirichlet, Neumann)
///   a = -(K + (beta/alpha) S) u + B g + R c / (alpha sigma_max)        (Robin)
/// with identity reduced mass. Dirichlet forms take g = [g_outer, g_gamma].
struct RomOperators {
  RomForm form = RomForm::Dirichlet;
  Index r = 0;
  Matrix K;
  Matrix B;
  Matrix H;  // r x 1, Neumann only
  Matrix S;  // r x r, Robin only
  Matrix R;  // r x 1, Robin only
  double alpha = 0.0;  // raw coefficients the operators are used with
  double beta = 0.0;
  double sigma_max = 1.0;
  double lambda_reg = 0.0;

  Matrix k_total() const {
    if (form == RomForm::Robin) return K + (beta / alpha) * S;
    return K;
  }

  bool finite() const {
    auto ok = [](const Matrix& m) { return m.size() == 0 || m.allFinite(); };
    return ok(K) && ok(B) && ok(H) && ok(S) && ok(R);
  }
};

/// Regression data for one subdomain.
struct TrainingSet {
  RomForm form = RomForm::Dirichlet;
  Matrix u_hat;      // r x P
  Matrix a_hat;      // r x P
  Matrix g;          // m x P boundary displacements (outer, and interface for Dirichlet)
  Vector t_scaled;   // P, interface traction / sigma_max (Neumann)
  Vector c_scaled;   // P, (alpha t + beta g_gamma) / sigma_max (Robin)
  double alpha = 0.0;
  double beta = 0.0;
  double sigma_max = 1.0;

  Index samples() const { return u_hat.cols(); }
};

/// Free-DOF displacement snapshots of a subdomain over the stepped states 1..P.
inline Matrix subdomain_snapshots(const Trajectory& traj, const SubdomainLayout& layout, Index samples,
                                  const Matrix& field) {
  if (samples < 1 || samples >= traj.n_states()) throw ConfigError("training window exceeds the trajectory");
  const IndexList rows = layout.global_free();
  Matrix x(static_cast<Index>(rows.size()), samples);
  for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Index>(i)) = field.row(rows[i]).segment(1, samples);
  return x;
}

inline Matrix subdomain_snapshots(const Trajectory& traj, const SubdomainLayout& layout, Index samples) {
  return subdomain_snapshots(traj, layout, samples, traj.u);
}

/// Projects the monolithic data for one subdomain and assembles the boundary
/// series its form needs. The interface traction is the one the neighbor
/// supplies online: stress of the neighbor-side element, signed by this
/// subdomain's outward normal (Trajectory::t_gamma).
inline TrainingSet build_training_set(const Trajectory& traj, const SubdomainLayout& layout, const PodBasis& basis,
                                      RomForm form, double alpha, double beta, double sigma_max, Index samples) {
  if (!(sigma_max > 0.0)) throw ConfigError("sigma_max must be positive");
  if (layout.dirichlet_interface() != (form == RomForm::Dirichlet)) {
    throw ConfigError("ROM form does not match the subdomain's interface partition");
  }
  if (basis.phi.rows() != layout.n_free()) throw ConfigError("basis does not match subdomain free DOFs");
  if (form == RomForm::Robin && (alpha == 0.0 || beta == 0.0)) throw ConfigError("Robin form needs alpha, beta != 0");
  if (form == RomForm::Neumann && alpha == 0.0) throw ConfigError("Neumann form needs alpha != 0");
  TrainingSet ts;
  ts.form = form;
  ts.alpha = alpha;
  ts.beta = beta;
  ts.sigma_max = sigma_max;
  ts.u_hat = basis.phi.transpose() * subdomain_snapshots(traj, layout, samples, traj.u);
  ts.a_hat = basis.phi.transpose() * subdomain_snapshots(traj, layout, samples, traj.a);
  const Index row = layout.side == Side::LeftOfInterface ? 0 : 1;
  const Vector g_gamma = traj.g_gamma.segment(1, samples);
  const Vector traction = traj.t_gamma.row(row).segment(1, samples).transpose();
  const Index m = form == RomForm::Dirichlet ? 2 : 1;
  ts.g = Matrix::Constant(m, samples, layout.outer_value);
  if (form == RomForm::Dirichlet) ts.g.row(1) = g_gamma.transpose();
  if (form == RomForm::Neumann) ts.t_scaled = traction / sigma_max;
  if (form == RomForm::Robin) ts.c_scaled = (alpha * traction + beta * g_gamma) / sigma_max;
  return ts;
}

/// argmin_X ||D X - Y||_F^2 + lambda^2 ||X||_F^2 via QR of [D; lambda I].
inline Matrix ridge_solve(const Matrix& d, const Matrix& y, double lambda) {
  if (!d.allFinite() || !y.allFinite()) throw ConfigError("non-finite regression data");
  const Index p = d.rows(), q = d.cols();
  Matrix aug(p + q, q);
  aug << d, lambda * Matrix::Identity(q, q);
  Matrix rhs = Matrix::Zero(p + q, y.cols());
  rhs.topRows(p) = y;
  return aug.householderQr().solve(rhs);
}

/// Learns the operators of the training set's form. `lambda_reg` is the
/// ridge weight lambda in the penalty lambda^2 ||O||_F^2.
inline RomOperators infer_operators(const TrainingSet& ts, double lambda_reg) {
  const Index r = ts.u_hat.rows(), p = ts.samples();
  if (lambda_reg < 0.0) throw ConfigError("lambda_reg must be non-negative");
  const Index m = ts.g.rows();
  Index q = 2 * r + m + 1;
  if (ts.form != RomForm::Robin) q = r + m + 1;
  if (ts.form == RomForm::Dirichlet) q = r + m;
  if (p < q && lambda_reg == 0.0) throw SolverError("underdetermined regression without regularization");
  if (p < q) std::cerr << "warning: " << p << " samples for " << q << " unknowns per row; ridge term decides\n";

  Matrix d(p, q);
  switch (ts.form) {
    case RomForm::Dirichlet: d << ts.u_hat.transpose(), ts.g.transpose(); break;
    case RomForm::Neumann: d << ts.u_hat.transpose(), ts.g.transpose(), ts.t_scaled; break;
    case RomForm::Robin:
      d << ts.u_hat.transpose(), (ts.beta / ts.alpha) * ts.u_hat.transpose(), ts.g.transpose(),
          ts.c_scaled / ts.alpha;
      break;
  }
  const Matrix o = ridge_solve(d, ts.a_hat.transpose(), lambda_reg);

  RomOperators ops;
  ops.form = ts.form;
  ops.r = r;
  ops.alpha = ts.alpha;
  ops.beta = ts.beta;
  ops.sigma_max = ts.sigma_max;
  ops.lambda_reg = lambda_reg;
  ops.K = -o.topRows(r).transpose();
  Index at = r;
  if (ts.form == RomForm::Robin) {
    ops.S = -o.middleRows(r, r).transpose();
    at += r;
  }
  ops.B = o.middleRows(at, m).transpose();
  at += m;
  if (ts.form == RomForm::Neumann) ops.H = o.middleRows(at, 1).transpose();
  if (ts.form == RomForm::Robin) ops.R = o.middleRows(at, 1).transpose();
  if (!ops.finite()) throw SolverError("inferred operators are not finite");
  return ops;
}

/// Boundary inputs of one reduced step in physical units.
struct RomInputs {
  Vector g;              // [g_outer] or [g_outer, g_gamma]
  double traction = 0.0; // Pa, Neumann
  double c = 0.0;        // alpha t + beta g_gamma, Robin
};

inline Vector rom_forcing(const RomOperators& ops, const RomInputs& in) {
  Vector f = ops.B * in.g;
  if (ops.form == RomForm::Neumann) f += ops.H.col(0) * (in.traction / ops.sigma_max);
  if (ops.form == RomForm::Robin) f += ops.R.col(0) * (in.c / (ops.alpha * ops.sigma_max));
  return f;
}

/// Newmark stepping of the reduced system with identity mass.
class RomStepper {
public:
  RomStepper(const RomOperators& ops, NewmarkParams params)
      : ops_(ops), stepper_(Matrix::Identity(ops.r, ops.r), ops.k_total(), params) {}

  const RomOperators& operators() const { return ops_; }

  KinematicState step(const RomInputs& in, const KinematicState& s, double t_next) const {
    return stepper_.step(rom_forcing(ops_, in), s, t_next);
  }

  const NewmarkStepper<Matrix>& newmark() const { return stepper_; }

private:
  RomOperators ops_;
  NewmarkStepper<Matrix> stepper_;
};

inline KinematicState rom_step(const RomOperators& ops, const RomInputs& in, const KinematicState& s,
                               const NewmarkParams& p) {
  return RomStepper(ops, p).step(in, s, s.t + p.dt);
}

/// OpInf subdomain. Each iteration projects the window start, advances the
/// reduced system, lifts back and imposes Dirichlet interface data strongly.
///
/// A lifted state projects back onto its own reduced coordinates, so after
/// the first window the start is kept in reduced form and only the few basis
/// rows needed at the interface are evaluated per iteration; state() lifts
/// the full field on demand.
class RomSubdomain final : public SubdomainModel {
public:
  RomSubdomain(SubdomainLayout layout, PodBasis basis, RomOperators ops, NewmarkParams params)
      : layout_(std::move(layout)), basis_(std::move(basis)), stepper_(ops, params), params_(params) {
    if (basis_.phi.rows() != layout_.n_free() || basis_.r != ops.r) throw ConfigError("basis and operators disagree");
    if (rom_form_for(layout_.coefficients) != ops.form) {
      throw ConfigError("ROM trained for " + to_string(ops.form) + " data cannot receive " +
                        to_string(rom_form_for(layout_.coefficients)) + " data");
    }
    if (ops.form != RomForm::Dirichlet &&
        (ops.alpha != layout_.coefficients.alpha || ops.beta != layout_.coefficients.beta)) {
      // alpha and beta enter the Robin form explicitly, so retuning is legal; note it.
      std::cerr << "note: ROM trained with (alpha, beta) = (" << ops.alpha << ", " << ops.beta
                << ") used with (" << layout_.coefficients.alpha << ", " << layout_.coefficients.beta << ")\n";
      RomOperators tuned = ops;
      tuned.alpha = layout_.coefficients.alpha;
      tuned.beta = layout_.coefficients.beta;
      stepper_ = RomStepper(tuned, params);
    }
    const auto& part = layout_.system.partition;
    auto row_of = [&](Index node) -> Vector {
      const auto pos = part.free_position(node);
      return pos ? Vector(basis_.phi.row(*pos).transpose()) : Vector();
    };
    phi_gamma_ = row_of(layout_.gamma);
    phi_adjacent_ = row_of(layout_.gamma_neighbor());
  }

  const SubdomainLayout& layout() const override { return layout_; }
  const PodBasis& basis() const { return basis_; }
  const RomOperators& operators() const { return stepper_.operators(); }
  std::string describe() const override { return "OpInf(r=" + std::to_string(basis_.r) + ")"; }

  void reset(const KinematicState& start) override {
    if (!start.conforms() || start.size() != layout_.n_nodes()) throw ConfigError("start state does not fit subdomain");
    const auto& fr = layout_.system.partition.free;
    Matrix free(static_cast<Index>(fr.size()), 3);
    for (std::size_t i = 0; i < fr.size(); ++i) {
      free(static_cast<Index>(i), 0) = start.u(fr[i]);
      free(static_cast<Index>(i), 1) = start.v(fr[i]);
      free(static_cast<Index>(i), 2) = start.a(fr[i]);
    }
    const Matrix red = basis_.phi.transpose() * free;
    current_ = {red.col(0), red.col(1), red.col(2), start.t};
    gamma_current_ = {start.u(layout_.gamma), start.v(layout_.gamma), start.a(layout_.gamma)};
    reset_state_ = start;
    pending_full_start_ = true;
  }

  void begin_window(double t_next) override {
    start_ = current_;
    previous_ = current_;
    gamma_start_ = gamma_current_;
    gamma_previous_ = gamma_current_;
    inertia_ = stepper_.newmark().inertia_rhs(start_);
    t_next_ = t_next;
    first_iteration_ = true;
  }

  void solve_iteration(const InterfaceData& d) override {
    const auto& c = layout_.coefficients;
    RomInputs in;
    const RomOperators& ops = stepper_.operators();
    if (ops.form == RomForm::Dirichlet) {
      in.g = Vector(2);
      in.g << layout_.outer_value, d.lambda / c.beta;
    } else {
      in.g = Vector::Constant(1, layout_.outer_value);
      in.traction = d.lambda / c.alpha;
      in.c = d.lambda;
    }
    previous_ = std::move(current_);
    gamma_previous_ = gamma_current_;
    current_ = stepper_.newmark().step_with_inertia(rom_forcing(ops, in), inertia_, start_, t_next_);
    if (c.dirichlet()) {
      gamma_current_ = {d.lambda / c.beta, d.v, d.a};
    } else {
      gamma_current_ = {phi_gamma_.dot(current_.u), phi_gamma_.dot(current_.v), phi_gamma_.dot(current_.a)};
    }
    measure_against_full_ = first_iteration_ && pending_full_start_;
    first_iteration_ = false;
  }

  InterfaceOutput output() const override {
    InterfaceOutput o;
    o.u = gamma_current_[0];
    o.v = gamma_current_[1];
    o.a = gamma_current_[2];
    const double u_adj = phi_adjacent_.dot(current_.u);
    const double h = std::abs(layout_.mesh.node_coords[layout_.gamma] -
                              layout_.mesh.node_coords[layout_.gamma_neighbor()]);
    // Outward strain at the interface end, times the neighbor's normal sign.
    const double sigma_out = layout_.material.youngs_modulus * (o.u - u_adj) / h;
    o.traction = -sigma_out;
    return o;
  }

  double change_measure() const override {
    const double dt = params_.dt;
    if (measure_against_full_) return convergence_measure(reset_state_, state(), dt);
    auto combo = [dt](const Vector& u, const Vector& v, const Vector& a) { return u + dt * v + 0.5 * dt * dt * a; };
    const Vector dw = combo(current_.u - previous_.u, current_.v - previous_.v, current_.a - previous_.a);
    const Vector w = combo(previous_.u, previous_.v, previous_.a);
    double num2 = dw.squaredNorm(), den2 = w.squaredNorm();
    if (layout_.dirichlet_interface()) {
      const double dg = (gamma_current_[0] - gamma_previous_[0]) + dt * (gamma_current_[1] - gamma_previous_[1]) +
                        0.5 * dt * dt * (gamma_current_[2] - gamma_previous_[2]);
      const double g = gamma_previous_[0] + dt * gamma_previous_[1] + 0.5 * dt * dt * gamma_previous_[2];
      num2 += dg * dg;
      den2 += g * g;
    }
    // The outer node holds u = g_outer, v = a = 0 in every iterate.
    den2 += layout_.outer_value * layout_.outer_value;
    return convergence_measure(std::sqrt(num2), std::sqrt(den2));
  }

  void accept() override {
    previous_ = current_;
    gamma_previous_ = gamma_current_;
    pending_full_start_ = false;
  }

  KinematicState state() const override {
    const Index n = layout_.n_nodes();
    KinematicState s;
    s.u = Vector::Zero(n);
    s.v = Vector::Zero(n);
    s.a = Vector::Zero(n);
    s.t = current_.t;
    const Matrix lifted = basis_.phi * (Matrix(current_.u.size(), 3) << current_.u, current_.v, current_.a).finished();
    const auto& fr = layout_.system.partition.free;
    for (std::size_t i = 0; i < fr.size(); ++i) {
      s.u(fr[i]) = lifted(static_cast<Index>(i), 0);
      s.v(fr[i]) = lifted(static_cast<Index>(i), 1);
      s.a(fr[i]) = lifted(static_cast<Index>(i), 2);
    }
    s.u(layout_.outer) = layout_.outer_value;
    if (layout_.dirichlet_interface()) {
      s.u(layout_.gamma) = gamma_current_[0];
      s.v(layout_.gamma) = gamma_current_[1];
      s.a(layout_.gamma) = gamma_current_[2];
    }
    return s;
  }

private:
  SubdomainLayout layout_;
  PodBasis basis_;
  RomStepper stepper_;
  NewmarkParams params_;
  Vector phi_gamma_;
  Vector phi_adjacent_;
  KinematicState start_, previous_, current_;
  std::array<double, 3> gamma_start_{}, gamma_previous_{}, gamma_current_{};
  KinematicState reset_state_;
  Vector inertia_;
  double t_next_ = 0.0;
  bool pending_full_start_ = false;
  bool first_iteration_ = false;
  bool measure_against_full_ = false;
};

}  // namespace nosam
