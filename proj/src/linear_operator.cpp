#include "certeig/linear_operator.hpp"

#include <cmath>

#include "certeig/errors.hpp"

namespace certeig {

CertifiedComplex CertifiedOperator::apply(const ComplexField& x, double eta) const
{
    const double part = eta / std::sqrt(2.0);
    CertifiedResult re = apply(StateField(x.real()), part);
    CertifiedResult im = apply(StateField(x.imag()), part);
    CertifiedComplex out;
    out.value = re.value.cast<Complex>() + Complex(0.0, 1.0) * im.value.cast<Complex>();
    out.bound = std::hypot(re.bound, im.bound);
    out.iterations = re.iterations + im.iterations;
    out.c_applications = re.c_applications + im.c_applications;
    return out;
}

DenseCertifiedOperator::DenseCertifiedOperator(DenseOperator op)
    : op_(std::move(op)), adjoint_(weighted_adjoint(op_))
{
    if (op_.matrix.rows() != op_.matrix.cols() || static_cast<std::size_t>(op_.matrix.rows()) != op_.space.size()) {
        throw Error(ErrorKind::ShapeMismatch, "dense operator must be square and match its space");
    }
}

CertifiedResult DenseCertifiedOperator::apply(const StateField& x, double /*eta*/) const
{
    if (x.size() != op_.matrix.cols()) {
        throw Error(ErrorKind::ShapeMismatch, "field size does not match the dense operator");
    }
    count();
    return {op_.matrix * x, 0.0, 0, 1};
}

CertifiedResult DenseCertifiedOperator::apply_adjoint(const StateField& x, double /*eta*/) const
{
    if (x.size() != adjoint_.matrix.cols()) {
        throw Error(ErrorKind::ShapeMismatch, "field size does not match the dense operator");
    }
    count();
    return {adjoint_.matrix * x, 0.0, 0, 1};
}

}  // namespace certeig
