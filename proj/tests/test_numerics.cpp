#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dcrl/error.hpp"
#include "dcrl/numerics.hpp"

using namespace dcrl;

namespace {

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Matrix random_symmetric(SeededRng& rng, std::size_t n) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = rng.uniform(-1.0, 1.0);
  return a;
}

// det(A − λI) by Gaussian elimination with partial pivoting.
double char_poly(const Matrix& a, double lambda) {
  const std::size_t n = a.rows();
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = a(i, j);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] -= lambda;
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r * n + c]) > std::abs(m[p * n + c])) p = r;
    if (m[p * n + c] == 0.0) return 0.0;
    if (p != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(m[p * n + k], m[c * n + k]);
      det = -det;
    }
    det *= m[c * n + c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m[r * n + c] / m[c * n + c];
      for (std::size_t k = c; k < n; ++k) m[r * n + k] -= f * m[c * n + k];
    }
  }
  return det;
}

// Roots of the characteristic polynomial by grid scan and bisection, descending.
std::vector<double> bisection_eigenvalues(const Matrix& a) {
  const std::size_t n = a.rows();
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) r += std::abs(a(i, j));
    bound = std::max(bound, r);
  }
  std::vector<double> roots;
  const int grid = 200000;
  double x0 = -bound - 1e-3, f0 = char_poly(a, x0);
  for (int g = 1; g <= grid; ++g) {
    const double x1 = -bound - 1e-3 + (2.0 * bound + 2e-3) * g / grid;
    const double f1 = char_poly(a, x1);
    if (f0 == 0.0) {
      roots.push_back(x0);
    } else if ((f0 < 0) != (f1 < 0)) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi), fm = char_poly(a, mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  std::sort(roots.rbegin(), roots.rend());
  return roots;
}

}  // namespace

TEST(Matrix, ConstructorRejectsWrongLength) {
  EXPECT_THROW(Matrix(2, 3, std::vector<double>(5)), DimensionError);
}

TEST(Matrix, ProductsMatchNaiveLoops) {
  SeededRng rng(3);
  const Matrix a = gauss_matrix(rng, 4, 6), b = gauss_matrix(rng, 6, 3), c = gauss_matrix(rng, 4, 3);
  EXPECT_LT(max_abs_diff(matmul(a, b), naive_matmul(a, b)), 1e-13);
  EXPECT_LT(max_abs_diff(matmul_tn(a, c), naive_matmul(a.transposed(), c)), 1e-13);
  EXPECT_LT(max_abs_diff(matmul_nt(a, b.transposed()), naive_matmul(a, b)), 1e-13);
  EXPECT_THROW(matmul(a, c), DimensionError);
}

TEST(Matrix, NormsAndTrace) {
  const Matrix a{{1, 2}, {3, 4}};
  EXPECT_DOUBLE_EQ(frobenius_norm_sq(a), 30.0);
  EXPECT_DOUBLE_EQ(trace(a), 5.0);
  EXPECT_DOUBLE_EQ(asymmetry(a), 0.25);  // relative to max(1, max entry)
  EXPECT_THROW(trace(Matrix(2, 3)), DimensionError);
}

TEST(Matrix, SecondMomentIsGramOverN) {
  const Matrix x{{1, 0}, {1, 2}, {0, 2}};
  const Matrix s = second_moment(x);
  EXPECT_DOUBLE_EQ(s(0, 0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s(0, 1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s(1, 1), 8.0 / 3.0);
}

TEST(Rng, DeterministicPerSeed) {
  SeededRng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
}

TEST(Rng, UniformAndBelowRanges) {
  SeededRng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.below(7), 7u);
  }
}

TEST(Rng, NormalMoments) {
  SeededRng rng(5);
  const int n = 200000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    ss += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(ss / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Rng, StreamsAreDistinctAndReproducible) {
  std::set<std::uint64_t> first;
  for (std::uint64_t i = 0; i < 64; ++i) first.insert(SeededRng::stream(9, i).next_u64());
  EXPECT_EQ(first.size(), 64u);
  EXPECT_EQ(SeededRng::stream(9, 3).next_u64(), SeededRng::stream(9, 3).next_u64());
}

TEST(Rng, RandomOrthogonalIsOrthogonal) {
  SeededRng rng(2);
  const Matrix q = random_orthogonal(rng, 12);
  EXPECT_LT(max_abs_diff(matmul_tn(q, q), Matrix::identity(12)), tol::kOrthogonality);
}

TEST(SymEig, MatchesCharacteristicPolynomialBisection) {
  SeededRng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = random_symmetric(rng, 5);
    const auto e = sym_eig(a);
    const auto oracle = bisection_eigenvalues(a);
    ASSERT_EQ(oracle.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(e.eigenvalues[i], oracle[i], 1e-10);
  }
}

TEST(SymEig, ReconstructsAndIsOrthogonal) {
  SeededRng rng(12);
  const Matrix a = random_symmetric(rng, 30);
  const auto e = sym_eig(a);
  const Matrix& q = e.eigenvectors;
  EXPECT_LT(max_abs_diff(matmul_tn(q, q), Matrix::identity(30)), tol::kOrthogonality);
  const Matrix rec = matmul(matmul(q, Matrix::diagonal(e.eigenvalues)), q.transposed());
  EXPECT_LT(frobenius_norm(rec - a) / std::max(1.0, frobenius_norm(a)), tol::kEigResidual);
  EXPECT_TRUE(std::is_sorted(e.eigenvalues.rbegin(), e.eigenvalues.rend()));
}

TEST(SymEig, DiagonalInputSortsDescending) {
  const std::vector<double> d{1.0, 3.0, 2.0};
  const auto e = sym_eig(Matrix::diagonal(d));
  EXPECT_EQ(e.eigenvalues, (std::vector<double>{3.0, 2.0, 1.0}));
}

TEST(SymEig, RejectsInvalidInput) {
  EXPECT_THROW(sym_eig(Matrix(2, 3)), DimensionError);
  EXPECT_THROW(sym_eig(Matrix{{1, 2}, {0, 1}}), SymmetryError);
}

TEST(PowerStationary, TwoStateClosedForm) {
  const double a = 0.3, b = 0.1;
  const Matrix p{{1 - a, a}, {b, 1 - b}};
  const auto pi = power_stationary(p, 1e-14);
  EXPECT_NEAR(pi[0], b / (a + b), 1e-12);
  EXPECT_NEAR(pi[1], a / (a + b), 1e-12);
}

TEST(PowerStationary, PeriodicChainConverges) {
  const auto pi = power_stationary(Matrix{{0, 1}, {1, 0}}, 1e-14);
  EXPECT_NEAR(pi[0], 0.5, 1e-12);
}

TEST(PowerStationary, RejectsReducibleAndNonStochastic) {
  EXPECT_THROW(power_stationary(Matrix{{1, 0}, {0, 1}}, 1e-12), ConvergenceError);
  EXPECT_THROW(power_stationary(Matrix{{0.5, 0.4}, {0.5, 0.5}}, 1e-12), InputError);
}
