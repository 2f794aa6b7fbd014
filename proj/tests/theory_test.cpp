#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "tacoma/rng.hpp"
#include "tacoma/theory.hpp"

namespace tacoma {
namespace {

// Adaptive Simpson quadrature of f on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 50) {
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fhi, double fmid, double whole, double eps, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
        const double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * eps) return left + right + (left + right - whole) / 15;
        return rec(lo, mid, flo, fmid, flm, left, eps / 2, d - 1) + rec(mid, hi, fmid, fhi, frm, right, eps / 2, d - 1);
      };
  return rec(a, b, fa, fb, fc, (b - a) / 6 * (fa + 4 * fc + fb), tol, depth);
}

double density(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi); }

// Gauss-Jordan inverse with partial pivoting.
Matrix inverse(Matrix a) {
  const std::size_t n = a.rows();
  Matrix inv = Matrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(a(c, k), a(piv, k));
      std::swap(inv(c, k), inv(piv, k));
    }
    const double d = a(c, c);
    for (std::size_t k = 0; k < n; ++k) {
      a(c, k) /= d;
      inv(c, k) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      for (std::size_t k = 0; k < n; ++k) {
        a(r, k) -= f * a(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

Matrix random_pd(Rng& rng, std::size_t p) {
  Matrix b(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) b(i, j) = rng.normal();
  Matrix s = b * b.transposed();
  for (std::size_t i = 0; i < p; ++i) s(i, i) += 0.5;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < i; ++j) s(i, j) = s(j, i);
  return s;
}

std::vector<double> ones(std::size_t p) { return std::vector<double>(p, 1.0); }

std::vector<std::size_t> first(std::size_t k) {
  std::vector<std::size_t> v(k);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

TEST(Cholesky, Identity) {
  const auto h = cholesky(Matrix::identity(5));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(h(i, j), i == j ? 1.0 : 0.0);
}

TEST(Cholesky, HandExample) {
  const auto h = cholesky(Matrix::from_rows({{4, 2}, {2, 3}}));
  EXPECT_DOUBLE_EQ(h(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(h(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(h(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(h(1, 1), std::sqrt(2.0));
}

TEST(Cholesky, IndefiniteFailsNamingPivot) {
  try {
    cholesky(Matrix::from_rows({{1, 2}, {2, 1}}));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("pivot 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cholesky(Matrix::from_rows({{1, 2}, {0, 1}})), ArgumentError);
}

TEST(Cholesky, ReconstructsRandomPdMatrices) {
  Rng rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 1 + rng.index(30);
    const auto s = random_pd(rng, p);
    const auto h = cholesky(s);
    const auto r = h * h.transposed();
    double scale = 0, err = 0;
    for (std::size_t i = 0; i < p; ++i) {
      EXPECT_GT(h(i, i), 0.0);
      for (std::size_t j = 0; j < p; ++j) {
        if (j > i) EXPECT_EQ(h(i, j), 0.0);
        scale = std::max(scale, std::abs(s(i, j)));
        err = std::max(err, std::abs(r(i, j) - s(i, j)));
      }
    }
    EXPECT_LE(err / scale, 1e-10);
  }
}

TEST(Separation, IdentityCovariance) {
  EXPECT_DOUBLE_EQ(separation(ones(7), Matrix::identity(7)), 7.0);
}

TEST(Separation, MatchesExplicitInverse) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = 1 + rng.index(20);
    const auto s = random_pd(rng, p);
    std::vector<double> u(p);
    for (auto& v : u) v = rng.normal();
    const auto inv = inverse(s);
    double expected = 0;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) expected += u[i] * inv(i, j) * u[j];
    EXPECT_NEAR(separation(u, s), expected, 1e-8 * std::abs(expected));
  }
}

TEST(Separation, TridiagonalExample) {
  const auto sigma = make_cov(CovarianceSpec::parse("tridiag:0.6"), 100);
  const auto r = ratio_of_separation(ones(100), sigma, first(50));
  EXPECT_NEAR(r.s_full, 45.87, 0.01);
  EXPECT_NEAR(r.s_subset, 23.32, 0.01);
  EXPECT_NEAR(r.gamma, 0.5084, 0.0005);
  EXPECT_NEAR(bayes_error(45.87), 3.54e-4, 0.02 * 3.54e-4);
  EXPECT_NEAR(bayes_error(23.32), 7.87e-3, 0.02 * 7.87e-3);
  // 0.6 exceeds 1/(2 cos(pi/101)), so this matrix is not positive definite.
  EXPECT_FALSE(r.positive_definite);
  EXPECT_TRUE(std::isnan(r.lambda_min_inv));
  EXPECT_THROW(require_positive_definite(sigma), NumericError);
}

TEST(Separation, AgreesWithInverseOnTridiagonalBelowThreshold) {
  const auto sigma = make_cov(CovarianceSpec::parse("tridiag:0.45"), 30);
  const auto inv = inverse(sigma);
  double expected = 0;
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j) expected += inv(i, j);
  EXPECT_NEAR(separation(ones(30), sigma), expected, 1e-10 * expected);
  EXPECT_TRUE(solve_symmetric(sigma, ones(30)).positive_definite);
}

TEST(Separation, MonotoneInSubset) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t p = 3 + rng.index(15);
    const auto s = random_pd(rng, p);
    std::vector<double> u(p);
    for (auto& v : u) v = rng.normal();
    std::vector<std::size_t> idx = first(p);
    rng.shuffle(idx);
    const std::size_t k = 1 + rng.index(p - 1);
    std::vector<std::size_t> small(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<std::size_t> big(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k + 1));
    const auto a = ratio_of_separation(u, s, small);
    const auto b = ratio_of_separation(u, s, big);
    EXPECT_LE(a.s_subset, b.s_subset * (1 + 1e-12));
    EXPECT_GE(a.gamma, 0.0);
    EXPECT_LE(a.gamma, 1.0 + 1e-12);
  }
}

TEST(RatioOfSeparation, ClosedForms) {
  const auto all = ratio_of_separation(ones(8), make_cov({}, 8), first(8));
  EXPECT_DOUBLE_EQ(all.gamma, 1.0);
  const auto half = ratio_of_separation(ones(8), Matrix::identity(8), {1, 3, 5, 7});
  EXPECT_DOUBLE_EQ(half.gamma, 0.5);
  EXPECT_DOUBLE_EQ(half.lambda_min_inv, 1.0);
  EXPECT_THROW(ratio_of_separation(ones(8), Matrix::identity(8), {}), ArgumentError);
  EXPECT_THROW(ratio_of_separation(ones(8), Matrix::identity(8), {8}), ArgumentError);
}

TEST(NormalCdf, KnownValues) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  const double oracle = 0.5 + simpson(density, 0.0, 1.959964, 1e-14);
  EXPECT_NEAR(oracle, 0.975, 1e-6);
  EXPECT_NEAR(normal_cdf(1.959964), oracle, 1e-12);
  for (double x : {-3.0, -1.0, 0.3, 2.5}) {
    const double q = 0.5 + (x >= 0 ? 1 : -1) * simpson(density, 0.0, std::abs(x), 1e-14);
    EXPECT_NEAR(normal_cdf(x), q, 1e-12);
  }
}

TEST(NormalCdf, Reflection) {
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const double x = rng.uniform(-8.0, 8.0);
    EXPECT_NEAR(normal_cdf(-x), 1.0 - normal_cdf(x), 1e-12);
  }
}

TEST(BayesError, ValuesAndMonotonicity) {
  EXPECT_DOUBLE_EQ(bayes_error(0.0), 0.5);
  EXPECT_THROW(bayes_error(-1.0), ArgumentError);
  double prev = 0.5;
  for (double s = 0.25; s < 60; s += 0.25) {
    const double e = bayes_error(s);
    EXPECT_LT(e, prev);
    EXPECT_GT(e, 0.0);
    prev = e;
  }
}

TEST(LambdaMinInverse, KnownSpectrum) {
  const auto sigma = make_cov(CovarianceSpec::parse("tridiag:0.4"), 100);
  // Top two eigenvalues differ by 0.06%, so power iteration stops short of full precision.
  EXPECT_NEAR(lambda_min_inverse(sigma), 1.0 / (1.0 + 0.8 * std::cos(std::numbers::pi / 101)), 1e-6);
  const auto small = make_cov(CovarianceSpec::parse("tridiag:0.4"), 5);
  EXPECT_NEAR(lambda_min_inverse(small), 1.0 / (1.0 + 0.8 * std::cos(std::numbers::pi / 6)), 1e-9);
  EXPECT_NEAR(lambda_min_inverse(Matrix::from_rows({{2, 0}, {0, 5}})), 0.2, 1e-10);
}

TEST(LambdaMinInverse, PermutationInvariant) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t p = 2 + rng.index(12);
    const auto s = random_pd(rng, p);
    auto perm = first(p);
    rng.shuffle(perm);
    const auto permuted = s.principal(perm);
    EXPECT_NEAR(lambda_min_inverse(permuted), lambda_min_inverse(s), 1e-7 * lambda_min_inverse(s));
  }
}

TEST(MakeCov, Structures) {
  const auto t = make_cov(CovarianceSpec::parse("tridiag:0.6"), 4);
  const auto te = Matrix::from_rows({{1, .6, 0, 0}, {.6, 1, .6, 0}, {0, .6, 1, .6}, {0, 0, .6, 1}});
  const auto a = make_cov(CovarianceSpec::parse("ar1:0.5"), 3);
  const auto ae = Matrix::from_rows({{1, .5, .25}, {.5, 1, .5}, {.25, .5, 1}});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(t(i, j), te(i, j));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(a(i, j), ae(i, j));
  const auto id = make_cov(CovarianceSpec::parse("identity"), 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(id(i, j), i == j ? 1.0 : 0.0);
  EXPECT_THROW(CovarianceSpec::parse("banded:0.2"), ArgumentError);
  EXPECT_THROW(CovarianceSpec::parse("tridiag:x"), ArgumentError);
  EXPECT_THROW(make_cov(CovarianceSpec::parse("ar1:1.5"), 3), ArgumentError);
}

TEST(McGamma, IdentityClosedForm) {
  MixtureSpec spec{ones(11), Matrix::identity(11)};
  const auto g = mc_gamma(spec, 3, 20, 4);
  ASSERT_EQ(g.samples.size(), 20u);
  for (double v : g.samples) EXPECT_DOUBLE_EQ(v, 4.0 / 11.0);  // first slice gets the extra feature
  EXPECT_NEAR(g.threshold, 1.0 / 3 - 0.05, 1e-15);
  EXPECT_EQ(g.fraction_below, 0.0);
}

TEST(McGamma, DeterministicAndSummarized) {
  MixtureSpec spec{ones(200), make_cov(CovarianceSpec::parse("tridiag:0.6"), 200)};
  const auto a = mc_gamma(spec, 2, 31, 7);
  EXPECT_EQ(a.samples, mc_gamma(spec, 2, 31, 7).samples);
  auto sorted = a.samples;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(a.min, sorted.front());
  EXPECT_EQ(a.median, sorted[15]);
  EXPECT_THROW(mc_gamma(spec, 2, 0, 7), ArgumentError);
}

}  // namespace
}  // namespace tacoma
