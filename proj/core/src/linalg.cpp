#include "qoc/linalg.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qoc {

namespace {

bool is_pow2(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 transform; sign = -1 forward, +1 inverse.
void fft_pow2(CVec& a, int sign) {
  const Eigen::Index n = a.size();
  for (Eigen::Index i = 1, j = 0; i < n; ++i) {
    Eigen::Index bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (Eigen::Index len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    for (Eigen::Index i = 0; i < n; i += len) {
      for (Eigen::Index k = 0; k < len / 2; ++k) {
        const Complex w = std::polar(1.0, ang * static_cast<double>(k));
        const Complex u = a[i + k];
        const Complex t = w * a[i + k + len / 2];
        a[i + k] = u + t;
        a[i + k + len / 2] = u - t;
      }
    }
  }
}

CVec dft_direct(const CVec& x, int sign) {
  const Eigen::Index n = x.size();
  CVec out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const long long m = (static_cast<long long>(j) * k) % n;
      acc += x[j] * std::polar(1.0, sign * 2.0 * std::numbers::pi *
                                        static_cast<double>(m) / static_cast<double>(n));
    }
    out[k] = acc;
  }
  return out;
}

CVec dft_impl(const CVec& x, int sign) {
  if (x.size() == 0) throw std::invalid_argument("dft: empty input");
  CVec out;
  if (is_pow2(x.size())) {
    out = x;
    fft_pow2(out, sign);
  } else {
    out = dft_direct(x, sign);
  }
  out /= std::sqrt(static_cast<double>(x.size()));
  return out;
}

}  // namespace

CVec matvec(const CMat& m, const CVec& v) {
  if (m.cols() != v.size()) {
    std::ostringstream os;
    os << "matvec: shape mismatch (" << m.rows() << "x" << m.cols() << ") * (" << v.size() << ")";
    throw std::invalid_argument(os.str());
  }
  return m * v;
}

namespace {

template <typename Rhs>
Rhs solve_impl(const CMat& a, const Rhs& b) {
  if (a.rows() != a.cols()) throw std::invalid_argument("solve_linear: matrix not square");
  if (a.rows() != b.rows()) throw std::invalid_argument("solve_linear: rhs dimension mismatch");
  Eigen::PartialPivLU<CMat> lu(a);
  const double max_row_norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  const double pivot_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (pivot_min < 1e-14 * max_row_norm) {
    std::ostringstream os;
    os << "solve_linear: matrix numerically singular (min pivot " << pivot_min
       << " vs row-norm scale " << max_row_norm << ")";
    throw std::runtime_error(os.str());
  }
  return lu.solve(b);
}

}  // namespace

CVec solve_linear(const CMat& a, const CVec& b) { return solve_impl(a, b); }
CMat solve_linear(const CMat& a, const CMat& b) { return solve_impl(a, b); }

CVec dft(const CVec& x) { return dft_impl(x, -1); }
CVec idft(const CVec& x) { return dft_impl(x, +1); }

double hermiticity_defect(const CMat& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

std::pair<RVec, CMat> eig_hermitian(const CMat& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eig_hermitian: matrix not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (hermiticity_defect(a) > 1e-10 * scale) {
    throw std::invalid_argument("eig_hermitian: input not Hermitian within tolerance");
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: iteration failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace qoc
