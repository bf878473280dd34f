#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace qoc {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Dense operations sized for this project's state spaces (dim <= 2048).

CVec matvec(const CMat& m, const CVec& v);

// LU with partial pivoting. Throws std::runtime_error with a condition
// diagnostic when a pivot falls below 1e-14 times the largest row norm.
CVec solve_linear(const CMat& a, const CVec& b);
CMat solve_linear(const CMat& a, const CMat& b);

// Unitary-normalized discrete Fourier transform, X_k = n^{-1/2} sum_j x_j w^{jk}
// with w = exp(-2*pi*i/n) forward and exp(+2*pi*i/n) inverse. Radix-2 for
// powers of two, direct O(n^2) otherwise.
CVec dft(const CVec& x);
CVec idft(const CVec& x);

// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
// Rejects inputs whose Hermiticity defect exceeds 1e-10 relative to scale.
std::pair<RVec, CMat> eig_hermitian(const CMat& a);

CMat kron(const CMat& a, const CMat& b);

double hermiticity_defect(const CMat& a);

}  // namespace qoc
