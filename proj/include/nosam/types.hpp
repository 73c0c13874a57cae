#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <vector>

namespace nosam {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using IndexList = std::vector<Index>;

/// Which end of a subdomain mesh touches the interface.
enum class Side { LeftOfInterface, RightOfInterface };

/// Outward unit normal of the subdomain at the interface point.
inline double outward_normal(Side side) { return side == Side::LeftOfInterface ? 1.0 : -1.0; }

}  // namespace nosam
