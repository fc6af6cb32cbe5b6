#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "infomean/errors.hpp"
#include "infomean/means.hpp"
#include "infomean/rng.hpp"

namespace infomean {

namespace detail {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112353;  // log(2*pi)

inline void validate_precisions(std::span<const double> a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] > 0.0) || !std::isfinite(a[i]))
      throw validation_error("precisions: entry " + std::to_string(i) +
                             " must be positive and finite");
}

inline std::vector<double> cumulative(std::span<const double> w) {
  std::vector<double> cum(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) cum[i] = (acc += w[i]);
  cum.back() = 1.0;  // guard the scan against rounding at the top end
  return cum;
}

inline std::size_t pick_component(std::span<const double> cum, double u) {
  std::size_t i = 0;
  while (i + 1 < cum.size() && u >= cum[i]) ++i;
  return i;
}

}  // namespace detail

/// Univariate Gaussian scale mixture with the location fixed at zero.
/// Components are parameterized by precision a_i = 1/sigma_i^2.
class ScalarMixture {
 public:
  ScalarMixture(std::vector<double> weights, std::vector<double> precisions)
      : weights_(std::move(weights)), precisions_(std::move(precisions)) {
    validate_weights(weights_);
    if (precisions_.size() != weights_.size())
      throw validation_error("ScalarMixture: weights/precisions length mismatch");
    detail::validate_precisions(precisions_);
    const std::size_t n = weights_.size();
    sigmas_.resize(n);
    comp_scale_.resize(n);
    cum_weights_ = detail::cumulative(weights_);
    for (std::size_t i = 0; i < n; ++i) {
      sigmas_[i] = 1.0 / std::sqrt(precisions_[i]);
      comp_scale_[i] = weights_[i] * std::sqrt(precisions_[i]);
    }
    sigma_max_ = *std::max_element(sigmas_.begin(), sigmas_.end());
  }

  /// Variances are accepted at the boundary only; converted to precisions here.
  static ScalarMixture from_variances(std::vector<double> weights, std::vector<double> variances) {
    detail::validate_precisions(variances);
    for (double& v : variances) v = 1.0 / v;
    return ScalarMixture(std::move(weights), std::move(variances));
  }

  std::size_t component_count() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& precisions() const { return precisions_; }
  const std::vector<double>& sigmas() const { return sigmas_; }
  double sigma_max() const { return sigma_max_; }

  // w_i * sqrt(a_i); multiplicative responsibility prefactors.
  const std::vector<double>& component_scales() const { return comp_scale_; }
  const std::vector<double>& cumulative_weights() const { return cum_weights_; }

 private:
  std::vector<double> weights_;
  std::vector<double> precisions_;
  std::vector<double> sigmas_;
  std::vector<double> comp_scale_;
  std::vector<double> cum_weights_;
  double sigma_max_ = 0.0;
};

/// Multivariate Gaussian scale mixture; component i has precision matrix A_i
/// (inverse covariance), real symmetric positive definite, common dimension.
class MatrixMixture {
 public:
  MatrixMixture(std::vector<double> weights, std::vector<Matrix> precisions)
      : weights_(std::move(weights)) {
    validate_weights(weights_);
    if (precisions.size() != weights_.size())
      throw validation_error("MatrixMixture: weights/precisions length mismatch");
    components_.reserve(precisions.size());
    for (std::size_t i = 0; i < precisions.size(); ++i) {
      SymmetricPD pd(std::move(precisions[i]));
      if (pd.dim() != static_cast<long>(dim()) && i > 0)
        throw validation_error("MatrixMixture: precision matrices must share dimension");
      double root_det = 1.0;
      for (long j = 0; j < pd.dim(); ++j) root_det *= pd.cholesky_lower()(j, j);
      components_.push_back(Component{std::move(pd), weights_[i] * root_det,
                                      std::log(weights_[i]) + std::log(root_det)});
    }
    cum_weights_ = detail::cumulative(weights_);
  }

  std::size_t component_count() const { return weights_.size(); }
  std::size_t dim() const { return components_.empty() ? 0 : components_[0].precision.dim(); }
  const std::vector<double>& weights() const { return weights_; }
  const SymmetricPD& precision(std::size_t i) const { return components_[i].precision; }
  const std::vector<double>& cumulative_weights() const { return cum_weights_; }

  // w_i * sqrt(det A_i), computed from the Cholesky diagonal.
  double component_scale(std::size_t i) const { return components_[i].scale; }
  double log_component_scale(std::size_t i) const { return components_[i].log_scale; }

 private:
  struct Component {
    SymmetricPD precision;
    double scale;
    double log_scale;
  };
  std::vector<double> weights_;
  std::vector<Component> components_;
  std::vector<double> cum_weights_;
};

/// One draw from the joint experiment (Delta, X): the realized component
/// label (zero-based) and the observed point.
struct SampleDraw {
  int component;
  Vector point;
};

// ---------------------------------------------------------------------------
// densities and scores

inline double density(const ScalarMixture& m, double x) {
  constexpr double inv_sqrt_2pi = 0.3989422804014326779399461;
  double p = 0.0;
  for (std::size_t i = 0; i < m.component_count(); ++i) {
    const double a = m.precisions()[i];
    p += m.weights()[i] * std::sqrt(a) * inv_sqrt_2pi * std::exp(-0.5 * a * x * x);
  }
  return p;
}

inline double log_density(const ScalarMixture& m, double x) {
  const std::size_t n = m.component_count();
  double gmax = -std::numeric_limits<double>::infinity();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = m.precisions()[i];
    g[i] = std::log(m.weights()[i]) + 0.5 * std::log(a) - 0.5 * a * x * x;
    gmax = std::max(gmax, g[i]);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::exp(g[i] - gmax);
  return gmax + std::log(acc) - 0.5 * detail::kLog2Pi;
}

namespace detail {

// Scratch space so the Monte Carlo hot loop never allocates.
struct MatrixEval {
  Vector y;                  // L_i^T x
  Vector ax;                 // A_i x for the current component
  Vector score;              // accumulated mixture score
  std::vector<double> quad;  // x^T A_i x per component
  std::vector<double> resp;  // responsibilities

  void resize(std::size_t n, std::size_t d) {
    y.resize(d);
    ax.resize(d);
    score.resize(d);
    quad.resize(n);
    resp.resize(n);
  }
};

// Quadratic forms x^T A_i x evaluated through the Cholesky factor so that
// scaling every A_i by a power of four leaves them bit-identical.
inline void quadratic_forms(const MatrixMixture& m, const Vector& x, MatrixEval& ws) {
  const long d = static_cast<long>(m.dim());
  for (std::size_t i = 0; i < m.component_count(); ++i) {
    const Matrix& l = m.precision(i).cholesky_lower();
    double q = 0.0;
    for (long j = 0; j < d; ++j) {
      double yj = 0.0;
      for (long k = j; k < d; ++k) yj += l(k, j) * x(k);
      q += yj * yj;
    }
    ws.quad[i] = q;
  }
}

// Responsibilities via the multiplicative form r_i ∝ c_i exp(-Q_i/2), with the
// exponent shifted by the largest -Q_i/2. The shift and the normalization both
// cancel exactly under power-of-two scale changes of the c_i.
inline void responsibilities_from_quadratics(const MatrixMixture& m, MatrixEval& ws) {
  const std::size_t n = m.component_count();
  double tmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) tmax = std::max(tmax, -0.5 * ws.quad[i]);
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ws.resp[i] = m.component_scale(i) * std::exp(-0.5 * ws.quad[i] - tmax);
    denom += ws.resp[i];
  }
  for (std::size_t i = 0; i < n; ++i) ws.resp[i] /= denom;
}

inline void score_into(const MatrixMixture& m, const Vector& x, MatrixEval& ws) {
  const long d = static_cast<long>(m.dim());
  quadratic_forms(m, x, ws);
  responsibilities_from_quadratics(m, ws);
  ws.score.setZero();
  for (std::size_t i = 0; i < m.component_count(); ++i) {
    const Matrix& l = m.precision(i).cholesky_lower();
    // ax = L (L^T x)
    for (long j = 0; j < d; ++j) {
      double yj = 0.0;
      for (long k = j; k < d; ++k) yj += l(k, j) * x(k);
      ws.y(j) = yj;
    }
    for (long j = 0; j < d; ++j) {
      double v = 0.0;
      for (long k = 0; k <= j; ++k) v += l(j, k) * ws.y(k);
      ws.ax(j) = v;
    }
    ws.score -= ws.resp[i] * ws.ax;
  }
}

}  // namespace detail

inline double log_density(const MatrixMixture& m, const Vector& x) {
  if (x.size() != static_cast<long>(m.dim()))
    throw validation_error("log_density: point dimension mismatch");
  detail::MatrixEval ws;
  ws.resize(m.component_count(), m.dim());
  detail::quadratic_forms(m, x, ws);
  const std::size_t n = m.component_count();
  double gmax = -std::numeric_limits<double>::infinity();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = m.log_component_scale(i) - 0.5 * ws.quad[i];
    gmax = std::max(gmax, g[i]);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::exp(g[i] - gmax);
  return gmax + std::log(acc) - 0.5 * static_cast<double>(m.dim()) * detail::kLog2Pi;
}

/// Posterior component probabilities given x.
inline std::vector<double> responsibilities(const ScalarMixture& m, double x) {
  const std::size_t n = m.component_count();
  std::vector<double> r(n);
  double tmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) tmax = std::max(tmax, -0.5 * m.precisions()[i] * x * x);
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = m.component_scales()[i] * std::exp(-0.5 * m.precisions()[i] * x * x - tmax);
    denom += r[i];
  }
  for (std::size_t i = 0; i < n; ++i) r[i] /= denom;
  return r;
}

inline std::vector<double> responsibilities(const MatrixMixture& m, const Vector& x) {
  if (x.size() != static_cast<long>(m.dim()))
    throw validation_error("responsibilities: point dimension mismatch");
  detail::MatrixEval ws;
  ws.resize(m.component_count(), m.dim());
  detail::quadratic_forms(m, x, ws);
  detail::responsibilities_from_quadratics(m, ws);
  return ws.resp;
}

/// Score of the location family at theta = 0: d/dx log p(x).
inline double score(const ScalarMixture& m, double x) {
  const auto r = responsibilities(m, x);
  double mean_precision = 0.0;
  for (std::size_t i = 0; i < m.component_count(); ++i) mean_precision += r[i] * m.precisions()[i];
  return -mean_precision * x;
}

inline Vector score(const MatrixMixture& m, const Vector& x) {
  if (x.size() != static_cast<long>(m.dim()))
    throw validation_error("score: point dimension mismatch");
  detail::MatrixEval ws;
  ws.resize(m.component_count(), m.dim());
  detail::score_into(m, x, ws);
  return ws.score;
}

// ---------------------------------------------------------------------------
// moments

inline double variance(const ScalarMixture& m) {
  double v = 0.0;
  for (std::size_t i = 0; i < m.component_count(); ++i)
    v += m.weights()[i] / m.precisions()[i];
  return v;
}

inline Matrix covariance(const MatrixMixture& m) {
  const long d = static_cast<long>(m.dim());
  Matrix v = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < m.component_count(); ++i)
    v += m.weights()[i] * pd_inverse(m.precision(i)).entries();
  return 0.5 * (v + v.transpose());
}

// ---------------------------------------------------------------------------
// sampling

inline std::vector<SampleDraw> sample(const ScalarMixture& m, long count, std::uint64_t seed,
                                      std::uint64_t stream) {
  if (count < 0) throw validation_error("sample: count must be nonnegative");
  Rng rng(seed, stream);
  std::vector<SampleDraw> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    const auto i = detail::pick_component(m.cumulative_weights(), rng.uniform());
    Vector p(1);
    p(0) = m.sigmas()[i] * rng.normal();
    out.push_back(SampleDraw{static_cast<int>(i), std::move(p)});
  }
  return out;
}

namespace detail {

// Draws one point in place: component by inverse CDF, point as L^{-T} z.
inline int draw_into(const MatrixMixture& m, Rng& rng, Vector& x) {
  const auto i = pick_component(m.cumulative_weights(), rng.uniform());
  const long d = static_cast<long>(m.dim());
  for (long j = 0; j < d; ++j) x(j) = rng.normal();
  const Matrix& l = m.precision(i).cholesky_lower();
  for (long j = d - 1; j >= 0; --j) {
    for (long k = j + 1; k < d; ++k) x(j) -= l(k, j) * x(k);
    x(j) /= l(j, j);
  }
  return static_cast<int>(i);
}

}  // namespace detail

inline std::vector<SampleDraw> sample(const MatrixMixture& m, long count, std::uint64_t seed,
                                      std::uint64_t stream) {
  if (count < 0) throw validation_error("sample: count must be nonnegative");
  Rng rng(seed, stream);
  std::vector<SampleDraw> out;
  out.reserve(static_cast<std::size_t>(count));
  Vector x(m.dim());
  for (long k = 0; k < count; ++k) {
    const int comp = detail::draw_into(m, rng, x);
    out.push_back(SampleDraw{comp, x});
  }
  return out;
}

// ---------------------------------------------------------------------------
// convolution of weighted sums

/// Exact mixture of sum_i c_i X_i for independent scale-mixture X_i: one
/// component per index tuple, weight = product of component weights, variance
/// = sum of c_i^2 sigma^2. Component count is the product of the input counts
/// and is capped.
inline ScalarMixture convolve_weighted_sum(std::span<const ScalarMixture> ms,
                                           std::span<const double> coeffs,
                                           std::size_t max_components = 1000000) {
  if (ms.empty()) throw validation_error("convolve_weighted_sum: need at least one mixture");
  if (coeffs.size() != ms.size())
    throw validation_error("convolve_weighted_sum: coeffs/mixtures length mismatch");
  for (double c : coeffs)
    if (c == 0.0 || !std::isfinite(c))
      throw validation_error("convolve_weighted_sum: coefficients must be finite and nonzero");

  std::size_t total = 1;
  for (const auto& m : ms) {
    const std::size_t n = m.component_count();
    if (total > max_components / n)
      throw capacity_error("convolve_weighted_sum: component count exceeds cap of " +
                           std::to_string(max_components));
    total *= n;
  }

  std::vector<double> weights(total), precisions(total);
  std::vector<std::size_t> idx(ms.size(), 0);
  for (std::size_t t = 0; t < total; ++t) {
    double w = 1.0, var = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      w *= ms[i].weights()[idx[i]];
      var += coeffs[i] * coeffs[i] / ms[i].precisions()[idx[i]];
    }
    weights[t] = w;
    precisions[t] = 1.0 / var;
    for (std::size_t i = ms.size(); i-- > 0;) {  // odometer increment
      if (++idx[i] < ms[i].component_count()) break;
      idx[i] = 0;
    }
  }
  return ScalarMixture(std::move(weights), std::move(precisions));
}

}  // namespace infomean
