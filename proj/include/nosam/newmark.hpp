#pragma once

// Newmark-beta integration of M u'' + K u = f(t).

#include <nosam/error.hpp>
#include <nosam/types.hpp>

#include <Eigen/SparseCholesky>

#include <cmath>
#include <string>
#include <type_traits>

namespace nosam {

struct NewmarkParams {
  double beta = 0.25;
  double gamma = 0.5;
  double dt = 0.0;

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("Newmark time step must be positive");
    if (!(beta > 0.0)) throw ConfigError("Newmark beta must be positive");
  }
};

struct KinematicState {
  Vector u;
  Vector v;
  Vector a;
  double t = 0.0;

  Index size() const { return u.size(); }
  bool conforms() const { return u.size() == v.size() && u.size() == a.size(); }
};

namespace detail {

template <class Mat>
inline constexpr bool is_sparse_v = std::is_base_of_v<Eigen::SparseMatrixBase<Mat>, Mat>;

/// Factorization wrapper: LDLT for sparse symmetric systems, LU for dense ones.
template <class Mat>
class Factorization {
public:
  Factorization() = default;

  explicit Factorization(const Mat& a) { compute(a); }

  void compute(const Mat& a) {
    if constexpr (is_sparse_v<Mat>) {
      solver_.compute(a);
      if (solver_.info() != Eigen::Success) throw SolverError("sparse factorization failed");
      const Vector d = solver_.vectorD();
      const double scale = d.cwiseAbs().maxCoeff();
      if (!std::isfinite(scale) || d.cwiseAbs().minCoeff() <= 1e-14 * scale) {
        throw SolverError("effective matrix is singular");
      }
    } else {
      solver_.compute(a);
      const double rc = solver_.rcond();
      if (!std::isfinite(rc) || rc < 1e-15) throw SolverError("effective matrix is singular (rcond " +
                                                              std::to_string(rc) + ")");
    }
  }

  Vector solve(const Vector& b) const { return solver_.solve(b); }

private:
  using SolverT = std::conditional_t<is_sparse_v<Mat>,
                                     Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>>,
                                     Eigen::PartialPivLU<Matrix>>;
  SolverT solver_;
};

}  // namespace detail

/// Solves M a0 = f0 - K u0.
template <class Mat>
Vector initial_acceleration(const Mat& mass, const Mat& stiffness, const Vector& f0, const Vector& u0) {
  detail::Factorization<Mat> fact;
  try {
    fact.compute(mass);
  } catch (const SolverError&) {
    throw SolverError("mass matrix is singular");
  }
  return fact.solve(f0 - stiffness * u0);
}

/// Average-acceleration Newmark stepper with the effective matrix factorized
/// once; the stiffness passed in is the total one (including Robin terms).
template <class Mat>
class NewmarkStepper {
public:
  NewmarkStepper(Mat mass, const Mat& stiffness_total, NewmarkParams params)
      : mass_(std::move(mass)), params_(params) {
    params_.validate();
    const double c0 = 1.0 / (params_.beta * params_.dt * params_.dt);
    Mat eff = mass_ * c0 + stiffness_total;
    fact_.compute(eff);
  }

  const NewmarkParams& params() const { return params_; }

  /// Inertial right-hand-side term M (u/(b dt^2) + v/(b dt) + (1/(2b) - 1) a).
  Vector inertia_rhs(const KinematicState& s) const {
    return mass_ * predictor(s);
  }

  /// Advances with a precomputed inertia term (reused across Schwarz iterations).
  KinematicState step_with_inertia(const Vector& f_next, const Vector& inertia, const KinematicState& s,
                                   double t_next) const {
    KinematicState out;
    out.u = fact_.solve(f_next + inertia);
    finish(s, out);
    out.t = t_next;
    return out;
  }

  KinematicState step(const Vector& f_next, const KinematicState& s, double t_next) const {
    return step_with_inertia(f_next, inertia_rhs(s), s, t_next);
  }

  /// Fills a and v of `next` from its u via the Newmark relations.
  void finish(const KinematicState& s, KinematicState& next) const {
    const double b = params_.beta, g = params_.gamma, dt = params_.dt;
    next.a = (next.u - s.u) / (b * dt * dt) - s.v / (b * dt) - (0.5 / b - 1.0) * s.a;
    next.v = s.v + dt * ((1.0 - g) * s.a + g * next.a);
  }

private:
  Vector predictor(const KinematicState& s) const {
    const double b = params_.beta, dt = params_.dt;
    return s.u / (b * dt * dt) + s.v / (b * dt) + (0.5 / b - 1.0) * s.a;
  }

  Mat mass_;
  NewmarkParams params_;
  detail::Factorization<Mat> fact_;
};

/// One-off Newmark step (factorizes on every call; prefer NewmarkStepper in loops).
template <class Mat>
KinematicState newmark_step(const Mat& mass, const Mat& stiffness_total, const Vector& f_next,
                            const KinematicState& state, const NewmarkParams& p) {
  if (!state.conforms() || state.size() != mass.rows()) throw ConfigError("state does not conform to system");
  NewmarkStepper<Mat> stepper(mass, stiffness_total, p);
  return stepper.step(f_next, state, state.t + p.dt);
}

/// Scalar Newmark update used for prescribed (constrained) nodes.
inline void newmark_scalar_update(double u_prev, double v_prev, double a_prev, double u_next,
                                  const NewmarkParams& p, double& v_next, double& a_next) {
  const double b = p.beta, g = p.gamma, dt = p.dt;
  a_next = (u_next - u_prev) / (b * dt * dt) - v_prev / (b * dt) - (0.5 / b - 1.0) * a_prev;
  v_next = v_prev + dt * ((1.0 - g) * a_prev + g * a_next);
}

}  // namespace nosam
