#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ghsim/core/error.hpp"
#include "ghsim/core/random.hpp"

namespace ghsim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct EigenPairs {
  Vector values;   // descending
  Matrix vectors;  // columns
};

struct SubspaceOptions {
  std::size_t guard = 8;        // extra block columns beyond k
  int degree = 12;              // Chebyshev filter degree
  int max_iterations = 500;
  double tolerance = 1e-11;     // residual norm relative to the spectral bound
  std::uint64_t seed = 1;
};

namespace detail {

// Removes the span of the orthonormal columns of `basis` from V.
inline void project_out(Matrix& v, const Matrix& basis) {
  if (basis.cols() == 0) return;
  v -= basis * (basis.transpose() * v);
}

inline Matrix orthonormalize(const Matrix& v) {
  Eigen::HouseholderQR<Matrix> qr(v);
  return qr.householderQ() * Matrix::Identity(v.rows(), v.cols());
}

}  // namespace detail

/// Largest k eigenpairs of a symmetric operator, restricted to the orthogonal
/// complement of `deflate` (orthonormal columns). The spectrum must lie in
/// [lower, upper]. Chebyshev-filtered subspace iteration with Rayleigh-Ritz.
inline EigenPairs top_eigenpairs(const std::function<Matrix(const Matrix&)>& apply, Eigen::Index n, Eigen::Index k,
                                 double lower, double upper, const Matrix& deflate, const SubspaceOptions& opts = {}) {
  const Eigen::Index free_dim = n - deflate.cols();
  if (k < 1 || k > free_dim) fail(ErrorCode::InvalidArgument, "requested eigenpair count out of range");
  const Eigen::Index b = std::min<Eigen::Index>(free_dim, k + static_cast<Eigen::Index>(opts.guard));
  Rng g(opts.seed);
  Matrix v(n, b);
  for (Eigen::Index j = 0; j < b; ++j)
    for (Eigen::Index i = 0; i < n; ++i) v(i, j) = standard_normal(g);
  detail::project_out(v, deflate);
  v = detail::orthonormalize(v);

  auto ritz = [&](Matrix& basis, Vector& theta) {
    const Matrix h = basis.transpose() * apply(basis);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.transpose()));
    theta = es.eigenvalues().reverse();
    basis = basis * es.eigenvectors().rowwise().reverse();
  };
  Vector theta;
  ritz(v, theta);
  const double scale = std::max({std::abs(lower), std::abs(upper), 1.0});
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Matrix av = apply(v.leftCols(k));
    bool done = true;
    for (Eigen::Index j = 0; j < k && done; ++j)
      done = (av.col(j) - theta(j) * v.col(j)).norm() <= opts.tolerance * scale;
    if (done) return {theta.head(k), v.leftCols(k)};
    if (b == free_dim) break;  // Rayleigh-Ritz on the whole space is exact

    // Damp [lower, cut]; everything above cut is amplified.
    const double cut = theta(b - 1);
    const double c = 0.5 * (cut + lower), e = 0.5 * (cut - lower);
    if (!(e > 0)) break;
    Matrix y0 = v;
    Matrix y1 = (apply(v) - c * v) / e;
    for (int d = 2; d <= opts.degree; ++d) {
      Matrix y2 = 2.0 * (apply(y1) - c * y1) / e - y0;
      y0 = std::move(y1);
      y1 = std::move(y2);
      const double m = y1.cwiseAbs().maxCoeff();
      if (m > 1e100) {
        y0 /= m;
        y1 /= m;
      }
    }
    detail::project_out(y1, deflate);
    v = detail::orthonormalize(y1);
    detail::project_out(v, deflate);  // second pass against round-off drift
    v = detail::orthonormalize(v);
    ritz(v, theta);
  }
  if (b == free_dim) return {theta.head(k), v.leftCols(k)};
  fail(ErrorCode::ConvergenceFailure, "subspace iteration did not converge");
}

/// Dense symmetric eigendecomposition, eigenvalues ascending.
inline EigenPairs dense_eigen(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) fail(ErrorCode::ConvergenceFailure, "dense eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Flips each column so its largest-magnitude entry (first on ties) is positive.
inline void canonical_signs(Matrix& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index best = 0;
    double mag = -1;
    for (Eigen::Index i = 0; i < v.rows(); ++i)
      if (std::abs(v(i, j)) > mag + 1e-12) {
        mag = std::abs(v(i, j));
        best = i;
      }
    if (v(best, j) < 0) v.col(j) *= -1;
  }
}

}  // namespace ghsim
