#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "dcrl/dynamics.hpp"
#include "dcrl/metrics.hpp"

using namespace dcrl;

namespace {

template <class F>
Matrix central_difference(const Matrix& at, F&& f, double h) {
  Matrix g(at.rows(), at.cols());
  for (std::size_t k = 0; k < at.size(); ++k) {
    Matrix p = at, m = at;
    p.data()[k] += h;
    m.data()[k] -= h;
    g.data()[k] = (f(p) - f(m)) / (2 * h);
  }
  return g;
}

// Orthonormal basis of row-space(W) by modified Gram-Schmidt, returned as columns.
Matrix row_basis(const Matrix& w) {
  Matrix b = w.transposed();
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      double d = 0.0;
      for (std::size_t r = 0; r < b.rows(); ++r) d += b(r, p) * b(r, c);
      for (std::size_t r = 0; r < b.rows(); ++r) b(r, c) -= d * b(r, p);
    }
    double n = 0.0;
    for (std::size_t r = 0; r < b.rows(); ++r) n += b(r, c) * b(r, c);
    for (std::size_t r = 0; r < b.rows(); ++r) b(r, c) /= std::sqrt(n);
  }
  return b;
}

}  // namespace

TEST(Energy, GradientsMatchCentralDifferences) {
  SeededRng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = gauss_matrix(rng, 12, 4), w = gauss_matrix(rng, 2, 4);
    const double lam = rng.uniform(0.1, 3.0);
    const Matrix gx = central_difference(x, [&](const Matrix& xx) { return joint_energy(xx, w, lam); }, 1e-5);
    const Matrix gw = central_difference(w, [&](const Matrix& ww) { return joint_energy(x, ww, lam); }, 1e-5);
    EXPECT_LT(max_abs_diff(grad_x(x, w), gx), 1e-7);
    EXPECT_LT(max_abs_diff(grad_w(x, w, lam), gw), 1e-7);
  }
}

TEST(Energy, CovarianceFormAgrees) {
  SeededRng rng(2);
  const Matrix x = gauss_matrix(rng, 30, 5), w = gauss_matrix(rng, 3, 5);
  EXPECT_NEAR(joint_energy(x, w, 0.7), joint_energy_from_covariance(second_moment(x), w, 0.7), 1e-12);
}

TEST(Lyapunov, RateMatchesDerivativeAlongFlow) {
  SeededRng rng(3);
  const Matrix sigma = second_moment(gauss_matrix(rng, 50, 4));
  const Matrix w = 0.6 * gauss_matrix(rng, 2, 4);
  const double gamma = 1.3, h = 1e-4;
  // Fourth-order central difference of V along RK4 steps.
  auto v_at = [&](int k) {
    Matrix ww = w;
    const double step = k < 0 ? -h : h;
    for (int i = 0; i < std::abs(k); ++i) ww = rk4_step(ww, sigma, gamma, step);
    return lyapunov(ww);
  };
  const double fd = (-v_at(2) + 8 * v_at(1) - 8 * v_at(-1) + v_at(-2)) / (12 * h);
  EXPECT_NEAR(lyapunov_rate(w, sigma, gamma), fd, 1e-8 * std::max(1.0, std::abs(fd)));
  EXPECT_LE(lyapunov_rate(w, sigma, gamma), 0.0);
  EXPECT_DOUBLE_EQ(lyapunov(Matrix{{0.6, 0.8}}), 0.0);
}

TEST(Latent, OrthoErrorAndEffectiveRank) {
  EXPECT_DOUBLE_EQ(ortho_error(Matrix::diagonal(std::vector<double>{2.0, 1.0})), 0.0);
  EXPECT_DOUBLE_EQ(ortho_error(Matrix(2, 2)), 0.0);
  EXPECT_NEAR(ortho_error(Matrix{{1, 1}, {1, 1}}), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(effective_rank(Matrix::identity(3)), 3.0, 1e-12);
  EXPECT_NEAR(effective_rank(Matrix{{1, 1}, {1, 1}}), 1.0, 1e-12);
  EXPECT_NEAR(effective_rank(Matrix::diagonal(std::vector<double>{3.0, 1.0})), 16.0 / 10.0, 1e-12);
}

TEST(Latent, CovarianceForms) {
  SeededRng rng(4);
  const Matrix x = gauss_matrix(rng, 20, 3), w = gauss_matrix(rng, 2, 3);
  EXPECT_LT(max_abs_diff(latent_covariance(x, w), latent_covariance_from_covariance(second_moment(x), w)), 1e-12);
}

TEST(Angles, SubspaceAngleMatchesGramSchmidtOracle) {
  SeededRng rng(5);
  const Matrix sigma = second_moment(gauss_matrix(rng, 200, 6));
  const auto ref = SpectralReference::from_covariance(sigma, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix w = gauss_matrix(rng, 2, 6);
    const Matrix b = row_basis(w);
    // sin θ_max = ||(I − Q_m Q_mᵀ) B||_2 via the largest eigenvalue of its Gram matrix.
    const Matrix proj = b - matmul(ref.q_m, matmul_tn(ref.q_m, b));
    const double oracle = std::sqrt(std::max(0.0, sym_eig(matmul_tn(proj, proj)).eigenvalues[0]));
    const auto got = subspace_angle(w, ref);
    EXPECT_FALSE(got.rank_deficient);
    EXPECT_NEAR(got.sin_theta, oracle, 1e-10);
  }
}

TEST(Angles, AlignedPerpendicularAndRankDeficient) {
  const Matrix sigma = Matrix::diagonal(std::vector<double>{5.0, 4.0, 1.0, 0.5});
  const auto ref = SpectralReference::from_covariance(sigma, 2);
  EXPECT_NEAR(subspace_angle(Matrix{{2, 1, 0, 0}, {0, 3, 0, 0}}, ref).sin_theta, 0.0, 1e-12);
  EXPECT_NEAR(noise_projection(Matrix{{2, 1, 0, 0}, {0, 3, 0, 0}}, ref), 0.0, 1e-12);
  EXPECT_NEAR(subspace_angle(Matrix{{0, 0, 1, 0}, {0, 0, 0, 1}}, ref).sin_theta, 1.0, 1e-12);
  EXPECT_NEAR(noise_projection(Matrix{{0, 0, 3, 0}, {0, 0, 0, 4}}, ref), 5.0, 1e-12);
  const auto deficient = subspace_angle(Matrix{{1, 0, 0, 0}, {2, 0, 0, 0}}, ref);
  EXPECT_TRUE(deficient.rank_deficient);
  EXPECT_EQ(deficient.sin_theta, 1.0);
}

TEST(Stationarity, ZeroAtEigenvectorRows) {
  const Matrix sigma = Matrix::diagonal(std::vector<double>{3.0, 2.0, 1.0});
  EXPECT_NEAR(stationarity_residual(Matrix{{0.5, 0, 0}, {0, 0.7, 0}}, sigma), 0.0, 1e-15);
  EXPECT_GT(stationarity_residual(Matrix{{1, 1, 0}}, sigma), 0.1);
}

TEST(Records, CadenceAndTail) {
  EXPECT_EQ(tail_start(15000), 12000u);
  EXPECT_TRUE(is_record_step(0, 100, 1000));
  EXPECT_TRUE(is_record_step(300, 100, 1000));
  EXPECT_FALSE(is_record_step(301, 100, 1000));
  EXPECT_TRUE(is_record_step(1000, 300, 1000));
  EXPECT_TRUE(is_record_step(tail_start(1003), 100, 1003));
}

TEST(Records, CsvLayout) {
  EXPECT_EQ(MetricsRecord::csv_header(2),
            "step,V,dV,E,frob_W,sin_theta,ortho_error,eff_rank,noise_proj,latent_eig_1,latent_eig_2");
  const Matrix sigma = Matrix::diagonal(std::vector<double>{3.0, 2.0, 1.0});
  const auto rec = compute_metrics(7, sigma, Matrix{{1, 0, 0}, {0, 0.5, 0}}, 1.0, -0.25);
  EXPECT_EQ(rec.step, 7u);
  EXPECT_NEAR(rec.V, 0.25 * 0.25 * 0.25, 1e-15);
  EXPECT_NEAR(rec.E, -0.5 * (3.0 + 0.5) + 0.25 * 0.0625, 1e-14);
  EXPECT_NEAR(rec.latent_eigs[0], 3.0, 1e-14);
  EXPECT_NEAR(rec.latent_eigs[1], 0.5, 1e-14);
  const std::string row = rec.csv_row();
  EXPECT_EQ(row.substr(0, 2), "7,");
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 10);
}

TEST(Records, NonFiniteWeightsGiveNaNFields) {
  const auto rec = compute_metrics(1, Matrix::identity(2), Matrix{{NAN, 0}}, 1.0, 0.0);
  EXPECT_TRUE(std::isnan(rec.sin_theta));
  EXPECT_TRUE(std::isnan(rec.E));
}
