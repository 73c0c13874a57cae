#pragma once

// Proper orthogonal decomposition of displacement snapshots.

#include <nosam/error.hpp>
#include <nosam/types.hpp>

#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <string>

namespace nosam {

/// Snapshot columns over a subdomain's free DOFs plus the interface series
/// recorded at the same instants.
struct SnapshotSet {
  Matrix u;                   // N x tau
  std::optional<Matrix> a;    // N x tau
  Vector g_gamma;             // interface displacement per snapshot
  Vector t_gamma;             // interface traction (Pa) per snapshot

  Index count() const { return u.cols(); }
};

struct PodBasis {
  Matrix phi;              // N x r, orthonormal columns
  Vector singular_values;  // numerical-rank singular values, descending
  Index r = 0;
  Index rank = 0;
  double captured_energy = 0.0;
  double energy_target = -1.0;  // negative when r was fixed

  /// E(k) = sum_{i<k} mu_i^2 / sum_{i<R} mu_i^2.
  double energy(Index k) const {
    const double total = singular_values.squaredNorm();
    return singular_values.head(k).squaredNorm() / total;
  }
};

namespace detail {

inline PodBasis basis_from_svd(const Matrix& snapshots, std::optional<double> energy_target, Index fixed_r) {
  if (snapshots.size() == 0) throw ConfigError("empty snapshot matrix");
  if (!snapshots.allFinite()) throw ConfigError("snapshot matrix contains non-finite values");
  Eigen::BDCSVD<Matrix> svd(snapshots, Eigen::ComputeThinU);
  const Vector mu = svd.singularValues();
  if (mu.size() == 0 || mu(0) == 0.0) throw ConfigError("snapshot matrix is zero");
  Index rank = 0;
  while (rank < mu.size() && mu(rank) >= 1e-12 * mu(0)) ++rank;

  PodBasis b;
  b.singular_values = mu.head(rank);
  b.rank = rank;
  if (energy_target) {
    const double target = *energy_target;
    if (!(target > 0.0 && target <= 1.0)) throw ConfigError("energy target must lie in (0, 1]");
    const double total = b.singular_values.squaredNorm();
    double acc = 0.0;
    Index r = 0;
    while (r < rank) {
      acc += mu(r) * mu(r);
      ++r;
      if (acc / total >= target) break;
    }
    b.r = r;
    b.energy_target = target;
  } else {
    if (fixed_r < 1 || fixed_r > rank) {
      throw ConfigError("requested " + std::to_string(fixed_r) + " modes but the snapshot rank is " +
                        std::to_string(rank));
    }
    b.r = fixed_r;
  }
  b.phi = svd.matrixU().leftCols(b.r);
  b.captured_energy = b.energy(b.r);
  return b;
}

}  // namespace detail

/// Smallest r whose captured energy reaches the target.
inline PodBasis compute_basis(const Matrix& snapshots, double energy_target) {
  return detail::basis_from_svd(snapshots, energy_target, 0);
}

/// Leading r left singular vectors.
inline PodBasis compute_basis_fixed(const Matrix& snapshots, Index r) {
  return detail::basis_from_svd(snapshots, std::nullopt, r);
}

inline PodBasis compute_basis(const SnapshotSet& s, double energy_target) { return compute_basis(s.u, energy_target); }

inline Vector project_state(const PodBasis& b, const Vector& full) {
  if (full.size() != b.phi.rows()) throw ConfigError("state size does not match basis");
  return b.phi.transpose() * full;
}

inline Vector reconstruct_state(const PodBasis& b, const Vector& reduced) {
  if (reduced.size() != b.r) throw ConfigError("reduced state size does not match basis");
  return b.phi * reduced;
}

}  // namespace nosam
