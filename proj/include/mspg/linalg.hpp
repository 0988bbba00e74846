#pragma once

/// @file linalg.hpp
/// @brief Linear-algebra vocabulary types used throughout the library.

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mspg {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;
using Triplet = Eigen::Triplet<double, Index>;

/// Sorted list of global indices (fine nodes or fine DOFs, depending on context).
using IndexSet = std::vector<Index>;

}  // namespace mspg
