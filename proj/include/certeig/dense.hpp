#pragma once

#include <Eigen/Core>

#include "certeig/phase_model.hpp"

namespace certeig {

// A dense matrix acting on fields, together with the inner product it is measured in.
struct DenseOperator {
    Eigen::MatrixXd matrix;
    WeightedSpace space;

    Eigen::Index dim() const { return matrix.rows(); }
};

// D^-1 A^T D for the diagonal weights D of the operator's space.
DenseOperator weighted_adjoint(const DenseOperator& a);

// D^{1/2} A D^{-1/2}: the same operator in Euclidean coordinates.
Eigen::MatrixXd to_euclidean(const DenseOperator& a);

// Operator norm in the weighted space (largest singular value of to_euclidean).
double weighted_norm(const DenseOperator& a);

}  // namespace certeig
