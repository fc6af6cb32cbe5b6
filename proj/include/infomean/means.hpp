#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infomean/errors.hpp"

namespace infomean {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

// Neumaier-compensated sum; keeps weight-mass checks accurate for large n.
inline double stable_sum(std::span<const double> xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace detail

/// Throws unless w is a probability vector: n >= 1, all entries > 0,
/// mass 1 within 1e-12 absolute.
inline void validate_weights(std::span<const double> w) {
  if (w.empty()) throw validation_error("weights: need at least one component");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i]))
      throw validation_error("weights: entry " + std::to_string(i) + " must be positive and finite");
  }
  const double mass = detail::stable_sum(w);
  if (std::abs(mass - 1.0) > 1e-12)
    throw validation_error("weights: must sum to 1 within 1e-12, got " + std::to_string(mass));
}

/// Unblocked lower Cholesky. Returns nullopt when a pivot is nonpositive or
/// not finite. Used everywhere a factorization feeds reproducibility-sensitive
/// paths: the operation order is fixed and scale-equivariant.
inline std::optional<Matrix> try_cholesky(const Matrix& a) {
  const long d = a.rows();
  Matrix l = Matrix::Zero(d, d);
  for (long j = 0; j < d; ++j) {
    double s = a(j, j);
    for (long k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    if (!(s > 0.0) || !std::isfinite(s)) return std::nullopt;
    l(j, j) = std::sqrt(s);
    for (long i = j + 1; i < d; ++i) {
      double t = a(i, j);
      for (long k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
      l(i, j) = t / l(j, j);
    }
  }
  return l;
}

/// Solves A x = b given the lower Cholesky factor of A.
inline Vector cholesky_solve(const Matrix& l, Vector b) {
  const long d = l.rows();
  for (long i = 0; i < d; ++i) {
    for (long k = 0; k < i; ++k) b(i) -= l(i, k) * b(k);
    b(i) /= l(i, i);
  }
  for (long i = d - 1; i >= 0; --i) {
    for (long k = i + 1; k < d; ++k) b(i) -= l(k, i) * b(k);
    b(i) /= l(i, i);
  }
  return b;
}

/// Solves L^T x = z (back substitution only); draws with covariance A^{-1}
/// come from this applied to standard normal z.
inline Vector solve_transposed_lower(const Matrix& l, Vector z) {
  const long d = l.rows();
  for (long i = d - 1; i >= 0; --i) {
    for (long k = i + 1; k < d; ++k) z(i) -= l(k, i) * z(k);
    z(i) /= l(i, i);
  }
  return z;
}

/// Real symmetric positive definite matrix, validated on construction:
/// symmetry within 1e-12 relative to the largest entry, Cholesky succeeds.
/// Stores the symmetrized entries and caches the lower factor.
class SymmetricPD {
 public:
  explicit SymmetricPD(Matrix entries) {
    if (entries.rows() != entries.cols() || entries.rows() < 1)
      throw validation_error("SymmetricPD: matrix must be square with dim >= 1");
    if (!entries.allFinite()) throw validation_error("SymmetricPD: entries must be finite");
    const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
    const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
      throw validation_error("SymmetricPD: not symmetric within 1e-12 relative");
    entries_ = 0.5 * (entries + entries.transpose());
    auto l = try_cholesky(entries_);
    if (!l) throw validation_error("SymmetricPD: not positive definite (Cholesky failed)");
    chol_ = std::move(*l);
  }

  const Matrix& entries() const { return entries_; }
  const Matrix& cholesky_lower() const { return chol_; }
  long dim() const { return entries_.rows(); }

 private:
  Matrix entries_;
  Matrix chol_;
};

/// Eigen-decomposition of a symmetric matrix (input symmetrized first).
/// Returns ascending eigenvalues and orthonormal eigenvectors as columns.
inline std::pair<Vector, Matrix> sym_eigen(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (a + a.transpose()));
  if (solver.info() != Eigen::Success)
    throw validation_error("sym_eigen: eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline SymmetricPD pd_inverse(const SymmetricPD& a) {
  const long d = a.dim();
  Matrix inv(d, d);
  for (long j = 0; j < d; ++j) inv.col(j) = cholesky_solve(a.cholesky_lower(), Vector::Unit(d, j));
  return SymmetricPD(0.5 * (inv + inv.transpose()));
}

inline SymmetricPD pd_inv_sqrt(const SymmetricPD& a) {
  auto [lambda, q] = sym_eigen(a.entries());
  for (long i = 0; i < lambda.size(); ++i) {
    if (!(lambda(i) > 0.0))
      throw validation_error("pd_inv_sqrt: nonpositive eigenvalue, PD invariant broken");
    lambda(i) = 1.0 / std::sqrt(lambda(i));
  }
  Matrix r = q * lambda.asDiagonal() * q.transpose();
  return SymmetricPD(0.5 * (r + r.transpose()));
}

enum class MeanKind { arithmetic, geometric, harmonic };

/// Weighted scalar mean of positive values. Geometric uses exp-of-log form.
inline double weighted_mean(MeanKind kind, std::span<const double> w, std::span<const double> a) {
  validate_weights(w);
  if (a.size() != w.size()) throw validation_error("weighted_mean: length mismatch");
  for (double v : a)
    if (!(v > 0.0) || !std::isfinite(v))
      throw validation_error("weighted_mean: values must be positive and finite");
  double acc = 0.0;
  switch (kind) {
    case MeanKind::arithmetic:
      for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * a[i];
      return acc;
    case MeanKind::geometric:
      for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * std::log(a[i]);
      return std::exp(acc);
    case MeanKind::harmonic:
      for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] / a[i];
      return 1.0 / acc;
  }
  throw validation_error("weighted_mean: unknown kind");
}

namespace detail {

inline void check_mean_args(std::span<const double> w, std::span<const SymmetricPD> as) {
  validate_weights(w);
  if (as.size() != w.size()) throw validation_error("matrix mean: length mismatch");
  for (std::size_t i = 1; i < as.size(); ++i)
    if (as[i].dim() != as[0].dim()) throw validation_error("matrix mean: dimension mismatch");
}

}  // namespace detail

inline SymmetricPD matrix_arithmetic_mean(std::span<const double> w, std::span<const SymmetricPD> as) {
  detail::check_mean_args(w, as);
  Matrix acc = Matrix::Zero(as[0].dim(), as[0].dim());
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * as[i].entries();
  return SymmetricPD(std::move(acc));
}

inline SymmetricPD matrix_harmonic_mean(std::span<const double> w, std::span<const SymmetricPD> as) {
  detail::check_mean_args(w, as);
  Matrix acc = Matrix::Zero(as[0].dim(), as[0].dim());
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * pd_inverse(as[i]).entries();
  return pd_inverse(SymmetricPD(std::move(acc)));
}

enum class LoewnerRelation { GEQ, LEQ, EQ, INCOMPARABLE };

inline const char* to_string(LoewnerRelation r) {
  switch (r) {
    case LoewnerRelation::GEQ: return "GEQ";
    case LoewnerRelation::LEQ: return "LEQ";
    case LoewnerRelation::EQ: return "EQ";
    case LoewnerRelation::INCOMPARABLE: return "INCOMPARABLE";
  }
  return "?";
}

/// Outcome of a Loewner (PSD ordering) comparison. margin is the smallest
/// eigenvalue of the difference taken in the asserted direction; for
/// INCOMPARABLE it is the larger (least negative) of the two directions.
struct LoewnerResult {
  LoewnerRelation relation;
  double margin;
  double tolerance_used;
};

/// Scale-aware default tolerance for Loewner comparisons.
inline double default_loewner_atol(const Matrix& a, const Matrix& b) {
  return 1e-10 * (1.0 + a.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff());
}

/// Compares A and B in the Loewner order via eigenvalues of the symmetrized
/// difference. A >= B holds iff lambda_min(A - B) >= -atol.
inline LoewnerResult loewner_compare(const Matrix& a, const Matrix& b, double atol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw validation_error("loewner_compare: dimension mismatch");
  auto [lambda, q] = sym_eigen(a - b);
  const double lo = lambda(0);                     // lambda_min(A - B)
  const double neg_hi = -lambda(lambda.size() - 1);  // lambda_min(B - A)
  const bool geq = lo >= -atol;
  const bool leq = neg_hi >= -atol;
  if (geq && leq) return {LoewnerRelation::EQ, std::min(lo, neg_hi), atol};
  if (geq) return {LoewnerRelation::GEQ, lo, atol};
  if (leq) return {LoewnerRelation::LEQ, neg_hi, atol};
  return {LoewnerRelation::INCOMPARABLE, std::max(lo, neg_hi), atol};
}

inline LoewnerResult loewner_compare(const Matrix& a, const Matrix& b) {
  return loewner_compare(a, b, default_loewner_atol(a, b));
}

}  // namespace infomean
