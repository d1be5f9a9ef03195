#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace hkq {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

// XY - YX with the diagonal-diagonal part cancelled analytically.
// For nearly triangular matrices XY and YX are much larger than their
// difference; this form keeps the difference to full relative accuracy.
CMatrix commutator(const CMatrix& x, const CMatrix& y);

// Subtracts (tr m / n) Id.
void remove_trace(CMatrix& m);

CMatrix hermitian_part(const CMatrix& m);
CMatrix skew_hermitian_part(const CMatrix& m);

// e^h for Hermitian h, and e^k for skew-Hermitian k, via eigendecomposition.
CMatrix expm_hermitian(const CMatrix& h);
CMatrix expm_skew_hermitian(const CMatrix& k);
// e^h - Id and log(Id + p) for Hermitian h, p, accurate when the argument is small.
CMatrix expm1_hermitian(const CMatrix& h);
CMatrix log1p_hermitian(const CMatrix& p);

// 2-norm condition number (infinity for singular input).
double condition_number(const CMatrix& g);

// Optimal assignment minimizing sum cost(i, perm[i]) (Hungarian algorithm).
std::vector<int> solve_assignment(const RMatrix& cost);

}  // namespace hkq
