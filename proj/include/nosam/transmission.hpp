#pragma once

// Transmission conditions at the interface point and the data exchanged
// between the two subdomains.

#include <nosam/config.hpp>
#include <nosam/error.hpp>
#include <nosam/fem1d.hpp>
#include <nosam/types.hpp>

#include <cmath>
#include <optional>
#include <string>

namespace nosam {

enum class TransmissionKind { AlternatingDN, RobinRobin, DirichletDirichlet };

inline std::string to_string(TransmissionKind k) {
  switch (k) {
    case TransmissionKind::AlternatingDN: return "dn";
    case TransmissionKind::RobinRobin: return "rr";
    case TransmissionKind::DirichletDirichlet: return "dd";
  }
  return "?";
}

inline TransmissionKind parse_transmission_kind(const std::string& s) {
  if (s == "dn") return TransmissionKind::AlternatingDN;
  if (s == "rr") return TransmissionKind::RobinRobin;
  if (s == "dd") return TransmissionKind::DirichletDirichlet;
  throw ConfigError("unknown transmission kind '" + s + "' (expected dn, rr or dd)");
}

/// Coefficients of the condition a subdomain receives: lambda = theta (alpha T + beta u) + (1 - theta) lambda_prev.
/// alpha is the raw (dimensional) value; alpha == 0 means Dirichlet data.
struct ReceiverCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 1.0;

  bool dirichlet() const { return alpha == 0.0; }
  bool neumann() const { return alpha != 0.0 && beta == 0.0; }
};

/// Transmission condition pair. The alpha values are stored normalized by sigma_max.
struct TransmissionSpec {
  TransmissionKind kind = TransmissionKind::AlternatingDN;
  double alpha12_bar = 0.0;
  double alpha21_bar = 1.0;
  double beta12 = 1.0;
  double beta21 = 0.0;
  double theta_1 = 1.0;
  double theta_2 = 1.0;
  double sigma_max = 1.0;

  static TransmissionSpec alternating_dn(double sigma_max, double theta_1 = 1.0, double theta_2 = 1.0) {
    TransmissionSpec s{TransmissionKind::AlternatingDN, 0.0, 1.0, 1.0, 0.0, theta_1, theta_2, sigma_max};
    s.validate();
    return s;
  }

  static TransmissionSpec robin_robin(double a12_bar, double a21_bar, double b12, double b21, double sigma_max,
                                      double theta_1 = 1.0, double theta_2 = 1.0) {
    TransmissionSpec s{TransmissionKind::RobinRobin, a12_bar, a21_bar, b12, b21, theta_1, theta_2, sigma_max};
    s.validate();
    return s;
  }

  static TransmissionSpec dirichlet_dirichlet(double sigma_max, double theta_1 = 1.0, double theta_2 = 1.0) {
    TransmissionSpec s{TransmissionKind::DirichletDirichlet, 0.0, 0.0, 1.0, 1.0, theta_1, theta_2, sigma_max};
    s.validate();
    return s;
  }

  /// Builds the spec named by `kind`, taking Robin coefficients and relaxation from the config.
  static TransmissionSpec from_config(TransmissionKind kind, const ProblemConfig& c, double sigma_max) {
    switch (kind) {
      case TransmissionKind::AlternatingDN: return alternating_dn(sigma_max, c.theta_1, c.theta_2);
      case TransmissionKind::RobinRobin:
        return robin_robin(c.alpha12_bar, c.alpha21_bar, c.beta12, c.beta21, sigma_max, c.theta_1, c.theta_2);
      case TransmissionKind::DirichletDirichlet: return dirichlet_dirichlet(sigma_max, c.theta_1, c.theta_2);
    }
    throw ConfigError("unknown transmission kind");
  }

  double alpha12() const { return alpha12_bar / sigma_max; }
  double alpha21() const { return alpha21_bar / sigma_max; }

  /// Data received by the subdomain on `receiver` (left: Omega_1, right: Omega_2).
  ReceiverCoefficients into(Side receiver) const {
    if (receiver == Side::LeftOfInterface) return {alpha12(), beta12, theta_1};
    return {alpha21(), beta21, theta_2};
  }

  /// alpha12 beta21 + alpha21 beta12 (normalized). When it vanishes the pair
  /// of conditions cannot enforce both displacement and traction continuity.
  double determinant() const { return alpha12_bar * beta21 + alpha21_bar * beta12; }

  std::optional<std::string> diagnostic() const {
    if (determinant() == 0.0) {
      return std::string("transmission pair is degenerate (alpha12*beta21 + alpha21*beta12 = 0): "
                         "interface traction continuity is never enforced");
    }
    return std::nullopt;
  }

  void validate() const {
    if (!(sigma_max > 0.0) || !std::isfinite(sigma_max)) throw ConfigError("sigma_max must be positive");
    if (!(theta_1 > 0.0 && theta_1 <= 1.0) || !(theta_2 > 0.0 && theta_2 <= 1.0)) {
      throw ConfigError("relaxation parameters must lie in (0, 1]");
    }
    for (double v : {alpha12_bar, alpha21_bar, beta12, beta21}) {
      if (!std::isfinite(v)) throw ConfigError("transmission coefficients must be finite");
    }
    switch (kind) {
      case TransmissionKind::AlternatingDN:
        if (alpha12_bar != 0.0 || beta21 != 0.0 || alpha21_bar != 1.0 || beta12 != 1.0) {
          throw ConfigError("alternating Dirichlet-Neumann requires (alpha12, alpha21, beta12, beta21) = (0, 1, 1, 0)");
        }
        break;
      case TransmissionKind::RobinRobin:
        if (alpha12_bar == 0.0 || alpha21_bar == 0.0 || beta12 == 0.0 || beta21 == 0.0) {
          throw ConfigError("Robin-Robin requires all four coefficients to be nonzero");
        }
        break;
      case TransmissionKind::DirichletDirichlet:
        if (alpha12_bar != 0.0 || alpha21_bar != 0.0 || beta12 == 0.0 || beta21 == 0.0) {
          throw ConfigError("Dirichlet-Dirichlet requires alpha12 = alpha21 = 0 and nonzero betas");
        }
        break;
    }
  }
};

/// Interface quantities a subdomain publishes for its neighbor.
struct InterfaceOutput {
  double u = 0.0;
  double v = 0.0;
  double a = 0.0;
  double traction = 0.0;  // traction acting on the neighbor (neighbor's outward normal)
};

/// Data a subdomain receives. For Dirichlet receivers, velocity and
/// acceleration travel alongside u = lambda / beta.
struct InterfaceData {
  double lambda = 0.0;
  double v = 0.0;
  double a = 0.0;
};

struct InterfaceState {
  InterfaceData into_left;
  InterfaceData into_right;
  InterfaceOutput from_left;
  InterfaceOutput from_right;
};

inline double relax_lambda(double theta, double alpha, double beta, double t_neighbor, double u_neighbor,
                           double lambda_prev) {
  return theta * (alpha * t_neighbor + beta * u_neighbor) + (1.0 - theta) * lambda_prev;
}

/// Relaxed data for a receiver given its neighbor's latest output.
inline InterfaceData receive(const ReceiverCoefficients& c, const InterfaceOutput& nbr, const InterfaceData& prev) {
  InterfaceData d;
  d.lambda = relax_lambda(c.theta, c.alpha, c.beta, nbr.traction, nbr.u, prev.lambda);
  d.v = c.theta * nbr.v + (1.0 - c.theta) * prev.v;
  d.a = c.theta * nbr.a + (1.0 - c.theta) * prev.a;
  return d;
}

struct RobinContributions {
  SparseMatrix stiffness;  // S: unit entry at the interface row
  Vector force;            // R: c at the interface row
};

/// Point-interface Robin operators; the caller scales S by beta/alpha and R by 1/alpha.
inline RobinContributions robin_contributions(const Mesh1D& mesh, const BcPartition& partition,
                                              Index interface_index, double alpha, double c_value) {
  if (alpha == 0.0) throw ConfigError("Robin contributions need alpha != 0 (use Dirichlet data instead)");
  if (interface_index != 0 && interface_index != mesh.n_nodes() - 1) {
    throw ConfigError("interface node must be a mesh endpoint in 1D");
  }
  const auto j = partition.free_position(interface_index);
  if (!j) throw ConfigError("Robin interface node must be free");
  const auto n = static_cast<Index>(partition.free.size());
  RobinContributions rc;
  rc.stiffness.resize(n, n);
  rc.stiffness.insert(*j, *j) = 1.0;
  rc.stiffness.makeCompressed();
  rc.force = Vector::Zero(n);
  rc.force(*j) = c_value;
  return rc;
}

/// Traction acting on the subdomain itself at its interface end (its own outward normal).
/// Element stress: stress of the interface element times the outward normal.
/// Residual reaction: interface row of (M a + K u) over the full subdomain, divided by the area.
inline double extract_traction(const Mesh1D& mesh, const MaterialParams& mat, const Vector& u, Side side,
                               TractionMethod method = TractionMethod::ElementStress,
                               const SparseMatrix* mass = nullptr, const SparseMatrix* stiffness = nullptr,
                               const Vector* a = nullptr) {
  const Index n = mesh.n_nodes();
  if (u.size() != n || n < 2) throw ConfigError("displacement size does not match mesh");
  const Index g = side == Side::LeftOfInterface ? n - 1 : 0;
  if (method == TractionMethod::ElementStress) {
    const Index e = side == Side::LeftOfInterface ? n - 2 : 0;
    const double sigma = mat.youngs_modulus * (u(e + 1) - u(e)) / (mesh.node_coords[e + 1] - mesh.node_coords[e]);
    return sigma * outward_normal(side);
  }
  if (!mass || !stiffness || !a) throw ConfigError("residual-reaction traction needs M, K and the acceleration");
  // M and K are symmetric, so the interface row equals the (cheaper) column.
  const double r = mass->col(g).dot(*a) + stiffness->col(g).dot(u);
  return r / mat.area;
}

}  // namespace nosam
