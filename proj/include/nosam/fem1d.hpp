#pragma once

// Linear-element finite element machinery for a 1D elastic bar.

#include <nosam/error.hpp>
#include <nosam/types.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace nosam {

struct MaterialParams {
  double youngs_modulus = 1.0e9;  // Pa
  double density = 1000.0;        // kg/m^3
  double area = 1.0;              // m^2

  double wave_speed() const { return std::sqrt(youngs_modulus / density); }

  void validate() const {
    if (!(youngs_modulus > 0.0) || !(density > 0.0) || !(area > 0.0)) {
      throw ConfigError("material parameters must be positive (E, rho, A)");
    }
  }
};

struct Mesh1D {
  double x_left = 0.0;
  double x_right = 0.0;
  double h = 0.0;
  std::vector<double> node_coords;

  Index n_nodes() const { return static_cast<Index>(node_coords.size()); }
  Index n_elements() const { return n_nodes() - 1; }
  double length() const { return x_right - x_left; }

  /// Node index whose coordinate equals x (within 1e-9 h), if any.
  std::optional<Index> node_at(double x) const {
    const double s = (x - x_left) / h;
    const double r = std::round(s);
    if (r < 0.0 || r > static_cast<double>(n_elements())) return std::nullopt;
    const auto i = static_cast<Index>(r);
    if (std::abs(node_coords[i] - x) > 1e-9 * h) return std::nullopt;
    return i;
  }
};

/// Dirichlet/free split of the node set, plus the interface node when the
/// mesh belongs to a subdomain.
struct BcPartition {
  IndexList constrained;
  IndexList free;
  std::optional<Index> interface_index;

  /// Position of a node inside `free`, if it is free.
  std::optional<Index> free_position(Index node) const {
    auto it = std::find(free.begin(), free.end(), node);
    if (it == free.end()) return std::nullopt;
    return static_cast<Index>(it - free.begin());
  }
};

/// Full mass/stiffness plus the barred operators over the free indices.
struct AssembledSystem {
  SparseMatrix mass;
  SparseMatrix stiffness;
  SparseMatrix mass_free;       // M[i_u, i_u]
  SparseMatrix stiffness_free;  // K[i_u, i_u]
  SparseMatrix dirichlet_map;   // B = -K[i_u, i_d]
  Matrix interface_load_map;    // H, |i_u| x 1
  BcPartition partition;
};

inline Mesh1D build_uniform_mesh(double x_left, double x_right, double h) {
  if (!(x_right > x_left)) throw ConfigError("mesh requires x_right > x_left");
  if (!(h > 0.0)) throw ConfigError("mesh requires h > 0");
  const double count = (x_right - x_left) / h;
  const double rounded = std::round(count);
  if (rounded < 1.0 || std::abs(count - rounded) > 1e-9 * std::max(1.0, count)) {
    throw ConfigError("mesh length " + std::to_string(x_right - x_left) +
                      " is not an integer multiple of h = " + std::to_string(h));
  }
  const auto n_el = static_cast<Index>(rounded);
  Mesh1D mesh;
  mesh.x_left = x_left;
  mesh.x_right = x_right;
  mesh.h = (x_right - x_left) / static_cast<double>(n_el);
  mesh.node_coords.resize(static_cast<std::size_t>(n_el + 1));
  for (Index i = 0; i <= n_el; ++i) {
    mesh.node_coords[static_cast<std::size_t>(i)] = x_left + static_cast<double>(i) * mesh.h;
  }
  mesh.node_coords.back() = x_right;
  return mesh;
}

struct MassStiffness {
  SparseMatrix mass;
  SparseMatrix stiffness;
};

/// Consistent mass and stiffness of linear two-node elements.
inline MassStiffness assemble_system(const Mesh1D& mesh, const MaterialParams& mat) {
  mat.validate();
  const Index n = mesh.n_nodes();
  if (n < 2) throw ConfigError("mesh needs at least one element");
  std::vector<Eigen::Triplet<double>> mt, kt;
  mt.reserve(static_cast<std::size_t>(4 * mesh.n_elements()));
  kt.reserve(static_cast<std::size_t>(4 * mesh.n_elements()));
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const double he = mesh.node_coords[e + 1] - mesh.node_coords[e];
    const double m = mat.density * mat.area * he / 6.0;
    const double k = mat.youngs_modulus * mat.area / he;
    const Index a = e, b = e + 1;
    mt.emplace_back(a, a, 2.0 * m);
    mt.emplace_back(a, b, m);
    mt.emplace_back(b, a, m);
    mt.emplace_back(b, b, 2.0 * m);
    kt.emplace_back(a, a, k);
    kt.emplace_back(a, b, -k);
    kt.emplace_back(b, a, -k);
    kt.emplace_back(b, b, k);
  }
  MassStiffness out;
  out.mass.resize(n, n);
  out.stiffness.resize(n, n);
  out.mass.setFromTriplets(mt.begin(), mt.end());
  out.stiffness.setFromTriplets(kt.begin(), kt.end());
  return out;
}

namespace detail {

inline SparseMatrix extract_block(const SparseMatrix& a, const IndexList& rows, const IndexList& cols) {
  std::vector<Index> row_map(static_cast<std::size_t>(a.rows()), -1);
  std::vector<Index> col_map(static_cast<std::size_t>(a.cols()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_map[static_cast<std::size_t>(rows[i])] = static_cast<Index>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) col_map[static_cast<std::size_t>(cols[j])] = static_cast<Index>(j);
  std::vector<Eigen::Triplet<double>> t;
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      const Index r = row_map[static_cast<std::size_t>(it.row())];
      const Index c = col_map[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
    }
  }
  SparseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace detail

/// Complement of `constrained` in [0, n), sorted; rejects duplicates and out-of-range indices.
inline BcPartition make_partition(Index n_nodes, IndexList constrained,
                                  std::optional<Index> interface_index = std::nullopt) {
  std::sort(constrained.begin(), constrained.end());
  if (std::adjacent_find(constrained.begin(), constrained.end()) != constrained.end()) {
    throw ConfigError("duplicate constrained index");
  }
  for (Index i : constrained) {
    if (i < 0 || i >= n_nodes) throw ConfigError("constrained index out of range");
  }
  BcPartition p;
  p.constrained = constrained;
  p.interface_index = interface_index;
  for (Index i = 0; i < n_nodes; ++i) {
    if (!std::binary_search(constrained.begin(), constrained.end(), i)) p.free.push_back(i);
  }
  return p;
}

inline AssembledSystem partition_system(const SparseMatrix& mass, const SparseMatrix& stiffness,
                                        const BcPartition& partition) {
  if (partition.constrained.empty()) {
    throw ConfigError("partition_system needs at least one constrained index (K would be singular)");
  }
  if (partition.free.empty()) throw ConfigError("partition leaves no free degrees of freedom");
  AssembledSystem sys;
  sys.mass = mass;
  sys.stiffness = stiffness;
  sys.partition = partition;
  sys.mass_free = detail::extract_block(mass, partition.free, partition.free);
  sys.stiffness_free = detail::extract_block(stiffness, partition.free, partition.free);
  sys.dirichlet_map = -detail::extract_block(stiffness, partition.free, partition.constrained);
  sys.interface_load_map = Matrix::Zero(static_cast<Index>(partition.free.size()), 1);
  return sys;
}

/// Single-column map from the interface traction to free-DOF forces.
inline Matrix interface_load_map(const Mesh1D& mesh, const MaterialParams& mat, const BcPartition& partition,
                                 Index interface_index) {
  if (interface_index != 0 && interface_index != mesh.n_nodes() - 1) {
    throw ConfigError("interface node must be a mesh endpoint in 1D");
  }
  Matrix h = Matrix::Zero(static_cast<Index>(partition.free.size()), 1);
  if (auto row = partition.free_position(interface_index)) h(*row, 0) = mat.area;
  return h;
}

inline Vector gaussian_ic(const Mesh1D& mesh, double amplitude, double center, double width) {
  if (!(width > 0.0)) throw ConfigError("Gaussian width must be positive");
  Vector u(mesh.n_nodes());
  for (Index i = 0; i < mesh.n_nodes(); ++i) {
    const double d = mesh.node_coords[i] - center;
    u(i) = amplitude * std::exp(-d * d / (2.0 * width * width));
  }
  return u;
}

/// sigma_e = E (u_{e+1} - u_e) / h per element.
inline Vector element_stress(const Mesh1D& mesh, const MaterialParams& mat, const Vector& u) {
  if (u.size() != mesh.n_nodes()) throw ConfigError("displacement size does not match mesh");
  Vector s(mesh.n_elements());
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    s(e) = mat.youngs_modulus * (u(e + 1) - u(e)) / (mesh.node_coords[e + 1] - mesh.node_coords[e]);
  }
  return s;
}

}  // namespace nosam
