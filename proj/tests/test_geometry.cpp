#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dcrl/error.hpp"
#include "dcrl/geometry.hpp"

using namespace dcrl;

namespace {

constexpr double kPi = std::numbers::pi;

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Brute-force nearest distance over a dense chart grid.
double grid_nearest(const ManifoldSpec& m, std::span<const double> v, double a0, double a1, int na, double b0,
                    double b1, int nb) {
  double best = INFINITY;
  for (int i = 0; i <= na; ++i)
    for (int j = 0; j <= nb; ++j) {
      const double a = a0 + (a1 - a0) * i / na, b = b0 + (b1 - b0) * j / nb;
      best = std::min(best, dist(embed(m, {a, b}), v));
    }
  return best;
}

void expect_nearest(const ManifoldSpec& m, double a0, double a1, int na, double b0, double b1, int nb, double noise,
                    std::uint64_t seed) {
  SeededRng rng(seed);
  const Swarm sw = sample_uniform(m, 15, rng);
  for (std::size_t i = 0; i < sw.size(); ++i) {
    std::vector<double> v(sw.positions.row(i).begin(), sw.positions.row(i).end());
    for (auto& c : v) c += noise * rng.normal();
    const Projection p = project_with_params(m, v);
    EXPECT_LT(dist(embed(m, p.params), p.point), 1e-9);
    const double d = dist(p.point, v);
    const double oracle = grid_nearest(m, v, a0, a1, na, b0, b1, nb);
    EXPECT_LE(d, oracle + 1e-9) << to_string(m.kind) << " query " << i;
    EXPECT_GE(d, oracle - 1e-2) << to_string(m.kind) << " query " << i;
  }
}

}  // namespace

TEST(Manifold, KindNamesRoundTrip) {
  for (auto k : {ManifoldKind::Circle, ManifoldKind::Sphere, ManifoldKind::SwissRoll, ManifoldKind::SCurve,
                 ManifoldKind::Torus, ManifoldKind::MoebiusStrip, ManifoldKind::SyntheticSpectrum})
    EXPECT_EQ(manifold_kind_from_string(to_string(k)), k);
  EXPECT_THROW(manifold_kind_from_string("klein_bottle"), CapabilityError);
}

TEST(Manifold, FactoriesValidateParameters) {
  EXPECT_THROW(ManifoldSpec::torus(0.5, 2.0), InputError);
  EXPECT_THROW(ManifoldSpec::moebius(0.2, 0.5), InputError);
  EXPECT_THROW(ManifoldSpec::synthetic_spectrum({1.0, 2.0}), InputError);
  EXPECT_THROW(ManifoldSpec::synthetic_spectrum({1.0, -1.0}), InputError);
  EXPECT_THROW(ManifoldSpec::synthetic_spectrum({}), DimensionError);
}

TEST(Manifold, SamplesLieOnTheManifold) {
  for (const auto& m : {ManifoldSpec::circle(2.0), ManifoldSpec::sphere(), ManifoldSpec::swiss_roll(),
                        ManifoldSpec::s_curve(), ManifoldSpec::torus(), ManifoldSpec::moebius()}) {
    SeededRng rng(7);
    const Swarm sw = sample_uniform(m, 300, rng);
    for (std::size_t i = 0; i < sw.size(); ++i)
      ASSERT_LT(constraint_residual(m, sw.positions.row(i)), tol::kConstraint) << to_string(m.kind);
  }
}

TEST(Manifold, SphereSamplesAreIsotropic) {
  SeededRng rng(1);
  const Swarm sw = sample_uniform(ManifoldSpec::sphere(), 40000, rng);
  double mz = 0.0, mz2 = 0.0;
  for (std::size_t i = 0; i < sw.size(); ++i) {
    mz += sw.positions(i, 2);
    mz2 += sw.positions(i, 2) * sw.positions(i, 2);
  }
  EXPECT_NEAR(mz / 40000, 0.0, 0.015);
  EXPECT_NEAR(mz2 / 40000, 1.0 / 3.0, 0.01);
}

TEST(Manifold, SwissRollSamplesAreUniformInArcLength) {
  const auto m = ManifoldSpec::swiss_roll();
  SeededRng rng(4);
  const std::size_t n = 50000;
  const Swarm sw = sample_uniform(m, n, rng);
  const double total = swiss_roll_arc_length(m, m.roll_t_max);
  std::vector<int> bins(10, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::hypot(sw.positions(i, 0), sw.positions(i, 2));
    const int b = std::min(9, static_cast<int>(10.0 * swiss_roll_arc_length(m, t) / total));
    ++bins[b];
  }
  const double expect = n / 10.0, sd = std::sqrt(n * 0.1 * 0.9);
  for (int c : bins) EXPECT_NEAR(c, expect, 5 * sd);
}

TEST(Manifold, TorusSamplesFollowTheAreaElement) {
  const auto m = ManifoldSpec::torus(2.0, 0.5);
  SeededRng rng(9);
  const std::size_t n = 50000;
  const Swarm sw = sample_uniform(m, n, rng);
  std::size_t outer = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::hypot(sw.positions(i, 0), sw.positions(i, 1)) > 2.0) ++outer;
  const double p = (kPi * 2.0 + 2.0 * 0.5) / (2.0 * kPi * 2.0);
  EXPECT_NEAR(static_cast<double>(outer) / n, p, 5 * std::sqrt(p * (1 - p) / n));
}

TEST(Manifold, SyntheticSampleCovarianceMatchesPopulation) {
  const auto m = ManifoldSpec::synthetic_spectrum({4.0, 2.0, 1.0, 0.5}, 3);
  const Matrix pop = m.population_covariance();
  const auto e = sym_eig(pop);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(e.eigenvalues[i], m.spectrum[i], 1e-12);
  SeededRng rng(2);
  const Swarm sw = sample_uniform(m, 100000, rng);
  EXPECT_LT(max_abs_diff(second_moment(sw.positions), pop), 0.08);
}

TEST(Projection, RadialForCircleAndSphere) {
  const auto c = ManifoldSpec::circle(2.0);
  const std::vector<double> v{3.0, 4.0};
  const auto p = project(c, v);
  EXPECT_NEAR(p[0], 1.2, 1e-15);
  EXPECT_NEAR(p[1], 1.6, 1e-15);
  const std::vector<double> zero{0.0, 0.0, 0.0};
  EXPECT_NEAR(norm2(project(ManifoldSpec::sphere(), zero)), 1.0, 1e-15);
}

TEST(Projection, IdempotentOnManifoldPoints) {
  for (const auto& m : {ManifoldSpec::swiss_roll(), ManifoldSpec::s_curve(), ManifoldSpec::torus(),
                        ManifoldSpec::moebius()}) {
    SeededRng rng(5);
    const Swarm sw = sample_uniform(m, 50, rng);
    for (std::size_t i = 0; i < sw.size(); ++i)
      EXPECT_LT(dist(project(m, sw.positions.row(i)), sw.positions.row(i)), tol::kProjection) << to_string(m.kind);
  }
}

TEST(Projection, SwissRollMatchesBruteForceNearestPoint) {
  const auto m = ManifoldSpec::swiss_roll();
  expect_nearest(m, m.roll_t_min, m.roll_t_max, 20000, -0.5 * m.height, 0.5 * m.height, 210, 0.6, 1);
}

TEST(Projection, SCurveMatchesBruteForceNearestPoint) {
  const auto m = ManifoldSpec::s_curve();
  expect_nearest(m, -1.5 * kPi, 1.5 * kPi, 20000, -0.5 * m.height, 0.5 * m.height, 200, 0.2, 2);
}

TEST(Projection, TorusMatchesBruteForceNearestPoint) {
  expect_nearest(ManifoldSpec::torus(), 0.0, 2 * kPi, 1500, 0.0, 2 * kPi, 600, 0.15, 3);
}

TEST(Projection, MoebiusMatchesBruteForceNearestPoint) {
  const auto m = ManifoldSpec::moebius();
  expect_nearest(m, 0.0, 2 * kPi, 3000, -m.half_width, m.half_width, 300, 0.05, 4);
}

TEST(Projection, SyntheticIsIdentity) {
  const auto m = ManifoldSpec::synthetic_spectrum({2.0, 1.0});
  const std::vector<double> v{0.3, -7.0};
  EXPECT_EQ(project(m, v), v);
}

TEST(Projection, RejectsWrongDimension) {
  const std::vector<double> v{1.0, 2.0, 3.0};
  EXPECT_THROW(project(ManifoldSpec::circle(), v), DimensionError);
}

TEST(Spectrum, PowerlawAndPlateauShapes) {
  const auto p = powerlaw_spectrum(4, 12.0, 1.0);
  EXPECT_DOUBLE_EQ(p[0], 12.0);
  EXPECT_DOUBLE_EQ(p[3], 3.0);
  const auto q = plateau_spectrum(6, 2, 4.0, 1.0);
  EXPECT_DOUBLE_EQ(q[0], 4.0);
  EXPECT_DOUBLE_EQ(q[1], 3.0);
  EXPECT_DOUBLE_EQ(q[2], 1.0);
  EXPECT_DOUBLE_EQ(q[5], 0.5);
  EXPECT_EQ(preset_spectrum("bert768").size(), 768u);
  EXPECT_THROW(preset_spectrum("alexnet"), CapabilityError);
}

TEST(Distances, ChordMatrixIsSymmetricWithZeroDiagonal) {
  SeededRng rng(8);
  const Swarm sw = sample_uniform(ManifoldSpec::sphere(), 20, rng);
  const Matrix d = pairwise_chord_distances(sw);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(d(i, i), 0.0);
    for (std::size_t j = 0; j < 20; ++j) {
      EXPECT_EQ(d(i, j), d(j, i));
      EXPECT_NEAR(d(i, j), dist(sw.positions.row(i), sw.positions.row(j)), 1e-15);
    }
  }
  Swarm one = sample_uniform(ManifoldSpec::sphere(), 1, rng);
  EXPECT_THROW(pairwise_chord_distances(one), DimensionError);
}
