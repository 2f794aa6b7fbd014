#pragma once

// Two-class Gaussian mixture separation: Mahalanobis separation of the
// centres, Bayes error, ratio of separation for feature subsets, and a
// Monte-Carlo study of thinned slices. All linear algebra lives here.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tacoma/error.hpp"
#include "tacoma/rng.hpp"
#include "tacoma/split.hpp"

namespace tacoma {

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < m.rows_; ++i) {
      if (rows[i].size() != m.cols_) throw ArgumentError("ragged matrix rows");
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.cols_));
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  Matrix principal(std::span<const std::size_t> idx) const {
    Matrix m(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) m(a, b) = (*this)(idx[a], idx[b]);
    return m;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix operator*(const Matrix& o) const {
    if (cols_ != o.rows_) throw ArgumentError("matrix shape mismatch");
    Matrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const double a = (*this)(i, k);
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
      }
    return r;
  }

  // Largest |i - j| over nonzero entries below the diagonal.
  std::size_t lower_bandwidth() const {
    std::size_t b = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j + b < i && j < cols_; ++j) {
        if ((*this)(i, j) != 0.0) {
          b = i - j;
          break;
        }
      }
    }
    return b;
  }

  std::size_t upper_bandwidth() const {
    std::size_t b = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = cols_; j-- > i + b + 1;) {
        if ((*this)(i, j) != 0.0) {
          b = j - i;
          break;
        }
      }
    }
    return b;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_square(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ArgumentError("matrix must be square and non-empty");
}

inline void require_symmetric(const Matrix& m, double tol = 1e-12) {
  require_square(m);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double scale = std::max({1.0, std::abs(m(i, j)), std::abs(m(j, i))});
      if (std::abs(m(i, j) - m(j, i)) > tol * scale) throw ArgumentError("matrix is not symmetric");
    }
}

/// Lower-triangular H with positive diagonal and H H^T = sigma. Work is
/// confined to the band of sigma, so banded inputs factor in O(p b^2).
inline Matrix cholesky(const Matrix& sigma) {
  require_symmetric(sigma);
  const std::size_t n = sigma.rows();
  const std::size_t band = sigma.lower_bandwidth();
  Matrix h(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t lo = j > band ? j - band : 0;
    double d = sigma(j, j);
    for (std::size_t k = lo; k < j; ++k) d -= h(j, k) * h(j, k);
    if (!(d > 0.0)) {
      throw NumericError("matrix is not positive definite: pivot " + std::to_string(j) + " is " + std::to_string(d));
    }
    const double hjj = std::sqrt(d);
    h(j, j) = hjj;
    const std::size_t hi = std::min(n, j + band + 1);
    for (std::size_t i = j + 1; i < hi; ++i) {
      const std::size_t lo_i = i > band ? i - band : 0;
      double s = sigma(i, j);
      for (std::size_t k = std::max(lo, lo_i); k < j; ++k) s -= h(i, k) * h(j, k);
      h(i, j) = s / hjj;
    }
  }
  return h;
}

// Solves H y = b for lower-triangular H.
inline std::vector<double> forward_substitute(const Matrix& h, std::span<const double> b) {
  const std::size_t n = h.rows();
  const std::size_t band = h.lower_bandwidth();
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i > band ? i - band : 0; k < i; ++k) y[i] -= h(i, k) * y[k];
    y[i] /= h(i, i);
  }
  return y;
}

// Solves H^T x = y for lower-triangular H.
inline std::vector<double> back_substitute_transposed(const Matrix& h, std::span<const double> y) {
  const std::size_t n = h.rows();
  const std::size_t band = h.lower_bandwidth();
  std::vector<double> x(y.begin(), y.end());
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t hi = std::min(n, i + band + 1);
    for (std::size_t k = i + 1; k < hi; ++k) x[i] -= h(k, i) * x[k];
    x[i] /= h(i, i);
  }
  return x;
}

/// Gaussian elimination with partial pivoting restricted to the band.
/// Handles symmetric indefinite systems the Cholesky path rejects.
inline std::vector<double> solve_banded_lu(Matrix a, std::span<const double> rhs) {
  require_square(a);
  const std::size_t n = a.rows();
  if (rhs.size() != n) throw ArgumentError("right-hand side length mismatch");
  const std::size_t lower = a.lower_bandwidth();
  const std::size_t upper = a.upper_bandwidth() + lower;  // fill-in from row swaps
  std::vector<double> b(rhs.begin(), rhs.end());
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t last_row = std::min(n - 1, k + lower);
    const std::size_t last_col = std::min(n - 1, k + upper);
    std::size_t piv = k;
    for (std::size_t i = k + 1; i <= last_row; ++i) {
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    }
    if (a(piv, k) == 0.0) throw NumericError("singular matrix at column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = k; j <= last_col; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i <= last_row; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      a(i, k) = 0.0;
      for (std::size_t j = k + 1; j <= last_col; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t last_col = std::min(n - 1, i + upper);
    for (std::size_t j = i + 1; j <= last_col; ++j) b[i] -= a(i, j) * b[j];
    b[i] /= a(i, i);
  }
  return b;
}

struct SymmetricSolve {
  std::vector<double> x;
  bool positive_definite = true;
};

// Cholesky when sigma is positive definite, pivoted LU otherwise.
inline SymmetricSolve solve_symmetric(const Matrix& sigma, std::span<const double> u) {
  if (u.size() != sigma.rows()) throw ArgumentError("vector length does not match matrix");
  try {
    const Matrix h = cholesky(sigma);
    return {back_substitute_transposed(h, forward_substitute(h, u)), true};
  } catch (const NumericError&) {
    return {solve_banded_lu(sigma, u), false};
  }
}

/// u^T sigma^{-1} u. Positive definite inputs go through Cholesky; an
/// indefinite but nonsingular sigma still yields the quadratic form.
inline double separation(std::span<const double> u, const Matrix& sigma) {
  const auto solved = solve_symmetric(sigma, u);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * solved.x[i];
  return s;
}

// Standard normal CDF through the complementary error function, which the
// C library evaluates to within a few ulps.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Bayes error Phi(-sqrt(S)/2) for equal mixing weights and 0-1 loss.
inline double bayes_error(double s) {
  if (!(s >= 0.0)) throw ArgumentError("separation must be non-negative");
  return normal_cdf(-0.5 * std::sqrt(s));
}

/// Smallest eigenvalue of sigma^{-1} for positive definite sigma, i.e.
/// 1 / lambda_max(sigma), by inverse iteration on sigma^{-1} (which only
/// needs products with sigma). Stops when the Rayleigh quotient changes by
/// less than `tol` relative, or after `max_iter` steps.
inline double lambda_min_inverse(const Matrix& sigma, double tol = 1e-10, int max_iter = 10000) {
  require_square(sigma);
  const std::size_t n = sigma.rows();
  const std::size_t band = std::max(sigma.lower_bandwidth(), sigma.upper_bandwidth());
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  // A non-uniform start avoids being orthogonal to the top eigenvector for
  // symmetric structures.
  for (std::size_t i = 0; i < n; ++i) v[i] *= 1.0 + 1e-3 * static_cast<double>(i % 7);
  std::vector<double> w(n);
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i > band ? i - band : 0;
      const std::size_t hi = std::min(n, i + band + 1);
      double s = 0.0;
      for (std::size_t j = lo; j < hi; ++j) s += sigma(i, j) * v[j];
      w[i] = s;
    }
    double rq = 0.0;
    for (std::size_t i = 0; i < n; ++i) rq += v[i] * w[i];
    const bool done = it > 0 && std::abs(rq - lambda) <= tol * std::abs(rq);
    lambda = rq;
    v.swap(w);
    if (done) break;
  }
  if (!(lambda > 0.0)) throw NumericError("dominant eigenvalue is not positive");
  return 1.0 / lambda;
}

enum class CovarianceKind { Identity, Tridiagonal, Ar1 };

struct CovarianceSpec {
  CovarianceKind kind = CovarianceKind::Identity;
  double rho = 0.0;

  // "identity", "tridiag:<rho>" or "ar1:<rho>".
  static CovarianceSpec parse(const std::string& text) {
    if (text == "identity") return {};
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ArgumentError("bad covariance '" + text + "'");
    const std::string name = text.substr(0, colon);
    double rho = 0.0;
    try {
      std::size_t used = 0;
      rho = std::stod(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw ArgumentError("");
    } catch (const std::exception&) {
      throw ArgumentError("bad covariance parameter in '" + text + "'");
    }
    if (name == "tridiag" || name == "tridiagonal") return {CovarianceKind::Tridiagonal, rho};
    if (name == "ar1") return {CovarianceKind::Ar1, rho};
    throw ArgumentError("unknown covariance kind '" + name + "'");
  }
};

/// Structured covariance: identity, unit-diagonal tridiagonal with constant
/// off-diagonal rho, or AR(1) with entries rho^|i-j|. Definiteness is not
/// enforced here; see require_positive_definite.
inline Matrix make_cov(const CovarianceSpec& spec, std::size_t p) {
  if (p == 0) throw ArgumentError("dimension must be positive");
  Matrix m = Matrix::identity(p);
  switch (spec.kind) {
    case CovarianceKind::Identity:
      break;
    case CovarianceKind::Tridiagonal:
      for (std::size_t i = 0; i + 1 < p; ++i) m(i, i + 1) = m(i + 1, i) = spec.rho;
      break;
    case CovarianceKind::Ar1:
      if (!(std::abs(spec.rho) < 1.0)) throw ArgumentError("ar1 needs |rho| < 1");
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) m(i, j) = std::pow(spec.rho, static_cast<double>(i > j ? i - j : j - i));
      break;
  }
  return m;
}

inline void require_positive_definite(const Matrix& sigma) { (void)cholesky(sigma); }

// Two-class mixture with centre difference u = mu1 - mu2 and shared sigma.
struct MixtureSpec {
  std::vector<double> u;
  Matrix sigma;
  double pi = 0.5;

  std::size_t dimension() const { return u.size(); }

  void validate() const {
    if (u.empty()) throw ArgumentError("mixture dimension must be positive");
    if (sigma.rows() != u.size()) throw ArgumentError("covariance does not match centre difference");
    require_symmetric(sigma);
  }
};

struct SeparationReport {
  double s_full = 0.0;
  double s_subset = 0.0;
  double gamma = 0.0;
  double bayes_full = 0.5;
  double bayes_subset = 0.5;
  double lambda_min_inv = std::numeric_limits<double>::quiet_NaN();  // NaN unless sigma is PD
  bool positive_definite = true;
  std::size_t subset_size = 0;
};

inline std::vector<double> subvector(std::span<const double> u, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(u[i]);
  return out;
}

inline SeparationReport ratio_of_separation(std::span<const double> u, const Matrix& sigma,
                                            std::vector<std::size_t> subset) {
  if (subset.empty()) throw ArgumentError("subset is empty");
  require_symmetric(sigma);
  if (u.size() != sigma.rows()) throw ArgumentError("vector length does not match matrix");
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  if (subset.back() >= u.size()) throw ArgumentError("subset index out of range");

  SeparationReport r;
  const auto full = solve_symmetric(sigma, u);
  r.positive_definite = full.positive_definite;
  for (std::size_t i = 0; i < u.size(); ++i) r.s_full += u[i] * full.x[i];
  r.s_subset = separation(subvector(u, subset), sigma.principal(subset));
  r.gamma = r.s_full != 0.0 ? r.s_subset / r.s_full : 0.0;
  r.subset_size = subset.size();
  if (r.s_full >= 0.0) r.bayes_full = bayes_error(r.s_full);
  if (r.s_subset >= 0.0) r.bayes_subset = bayes_error(r.s_subset);
  if (r.positive_definite) r.lambda_min_inv = lambda_min_inverse(sigma);
  return r;
}

struct GammaStudy {
  std::vector<double> samples;
  double min = 0.0;
  double median = 0.0;
  double threshold = 0.0;
  double fraction_below = 0.0;
};

/// Draws `trials` random thinnings into J slices (sub-seed per trial) and
/// records gamma of the first slice of each. `epsilon` sets the reporting
/// threshold 1/J - epsilon.
inline GammaStudy mc_gamma(const MixtureSpec& spec, std::size_t parts, std::size_t trials, std::uint64_t seed,
                           double epsilon = 0.05) {
  spec.validate();
  if (trials < 1) throw ArgumentError("trials must be at least 1");
  const std::size_t p = spec.dimension();
  const double s_full = separation(spec.u, spec.sigma);
  if (s_full == 0.0) throw NumericError("full separation is zero");
  GammaStudy out;
  out.threshold = 1.0 / static_cast<double>(parts) - epsilon;
  out.samples.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto split = thin_split(p, parts, derive_seed(seed, t));
    const auto& slice = split.subsets.front();
    out.samples.push_back(separation(subvector(spec.u, slice), spec.sigma.principal(slice)) / s_full);
  }
  std::vector<double> sorted = out.samples;
  std::sort(sorted.begin(), sorted.end());
  out.min = sorted.front();
  const std::size_t m = sorted.size();
  out.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  const auto below = std::count_if(sorted.begin(), sorted.end(), [&](double g) { return g < out.threshold; });
  out.fraction_below = static_cast<double>(below) / static_cast<double>(m);
  return out;
}

}  // namespace tacoma
