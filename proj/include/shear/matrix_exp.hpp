#pragma once

#include <Eigen/Dense>

namespace shear {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using RealOf = typename Eigen::NumTraits<Scalar>::Real;

template <class Scalar>
RealOf<Scalar> norm1(const Mat<Scalar>& a) {
    if (a.size() == 0) return RealOf<Scalar>(0);
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

/// exp(A) by scaling and squaring with a Taylor kernel.
///
/// A is scaled by 2^-s until ||A||_1 <= 1/2. The series is summed until the
/// next term drops below the working epsilon relative to the partial sum (the
/// tail is then bounded by the last term). The result is squared s times.
/// Works for any Eigen scalar with a NumTraits epsilon, including
/// multiprecision reals.
template <class Scalar>
Mat<Scalar> expm(const Mat<Scalar>& a) {
    using Real = RealOf<Scalar>;
    const Eigen::Index n = a.rows();
    const Real half(0.5);
    Real scaled = norm1<Scalar>(a);
    Real factor(1);
    int squarings = 0;
    while (scaled > half) {
        scaled /= Real(2);
        factor /= Real(2);
        ++squarings;
    }
    const Mat<Scalar> x = a * Scalar(factor);
    const Real eps = Eigen::NumTraits<Real>::epsilon();

    Mat<Scalar> sum = Mat<Scalar>::Identity(n, n);
    Mat<Scalar> term = Mat<Scalar>::Identity(n, n);
    for (int k = 1; k < 400; ++k) {
        term = (term * x) * Scalar(Real(1) / Real(k));
        sum += term;
        if (norm1<Scalar>(term) <= eps * norm1<Scalar>(sum) * Real(0.25)) break;
    }
    for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
    return sum;
}

}  // namespace shear
