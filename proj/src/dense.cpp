#include "certeig/dense.hpp"

#include <Eigen/SVD>

namespace certeig {

DenseOperator weighted_adjoint(const DenseOperator& a)
{
    const Eigen::VectorXd& d = a.space.weights();
    Eigen::MatrixXd m = d.cwiseInverse().asDiagonal() * a.matrix.transpose() * d.asDiagonal();
    return {std::move(m), a.space};
}

Eigen::MatrixXd to_euclidean(const DenseOperator& a)
{
    const Eigen::VectorXd s = a.space.weights().cwiseSqrt();
    return s.asDiagonal() * a.matrix * s.cwiseInverse().asDiagonal();
}

double weighted_norm(const DenseOperator& a)
{
    Eigen::BDCSVD<Eigen::MatrixXd> svd(to_euclidean(a));
    return svd.singularValues()(0);
}

}  // namespace certeig
