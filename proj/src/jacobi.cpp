#include "ftcl/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ftcl {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

}  // namespace

Vector jacobi_eigenvalues(const Matrix& s, const JacobiOptions& opts) {
  if (s.rows() != s.cols()) {
    throw std::invalid_argument("eig_extremes: matrix is not square");
  }
  const Eigen::Index n = s.rows();
  if (n == 0) {
    throw std::invalid_argument("eig_extremes: empty matrix");
  }
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= opts.symmetry_tol)) {
    throw std::invalid_argument("eig_extremes: matrix is not symmetric (max asymmetry " +
                                std::to_string(asym) + ")");
  }

  Matrix a = 0.5 * (s + s.transpose());
  const double scale = a.norm();
  const double target = opts.rel_tol * scale;

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p,q); t is the smaller root of
        // t^2 + 2*theta*t - 1 = 0.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  Vector eig = a.diagonal();
  std::sort(eig.data(), eig.data() + eig.size());
  return eig;
}

EigExtremes eig_extremes(const Matrix& s, const JacobiOptions& opts) {
  const Vector eig = jacobi_eigenvalues(s, opts);
  return {eig(0), eig(eig.size() - 1)};
}

double spectral_norm(const Matrix& w) {
  if (w.size() == 0) return 0.0;
  const Matrix gram = w.transpose() * w;
  // Roundoff can leave a tiny negative extreme for rank-deficient W.
  return std::sqrt(std::max(0.0, eig_extremes(gram).lam_max));
}

}  // namespace ftcl
