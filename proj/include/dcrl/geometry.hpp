#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcrl/numerics.hpp"

namespace dcrl {

enum class ManifoldKind { Circle, Sphere, SwissRoll, SCurve, Torus, MoebiusStrip, SyntheticSpectrum };

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(const std::string& name);

/// An embedded sampling substrate. Points are stored in ambient coordinates.
/// Curved kinds carry shape parameters; SyntheticSpectrum is a Gaussian
/// N(0, R diag(λ) Rᵀ) with R a seeded random rotation.
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::Circle;
  std::size_t intrinsic_dim = 1;
  std::size_t ambient_dim = 2;

  double radius = 1.0;                  // Circle, Sphere, Moebius centerline
  double major_radius = 2.0;            // Torus
  double minor_radius = 0.5;            // Torus
  double roll_t_min = 4.71238898038469; // SwissRoll angle range, 1.5π
  double roll_t_max = 14.1371669411541; // 4.5π
  double height = 21.0;                 // SwissRoll / SCurve extent along y, centered at 0
  double half_width = 0.5;              // Moebius strip

  std::vector<double> spectrum;         // SyntheticSpectrum, descending
  std::uint64_t rotation_seed = 0;
  Matrix rotation;                      // filled by synthetic_spectrum()

  static ManifoldSpec circle(double r = 1.0);
  static ManifoldSpec sphere(double r = 1.0);
  static ManifoldSpec swiss_roll(double height = 21.0);
  static ManifoldSpec s_curve(double height = 2.0);
  static ManifoldSpec torus(double major = 2.0, double minor = 0.5);
  static ManifoldSpec moebius(double radius = 1.0, double half_width = 0.5);
  static ManifoldSpec synthetic_spectrum(std::vector<double> eigenvalues, std::uint64_t rotation_seed = 0);

  bool curved() const noexcept { return kind != ManifoldKind::SyntheticSpectrum; }
  /// Population covariance R diag(λ) Rᵀ of a SyntheticSpectrum substrate.
  Matrix population_covariance() const;
};

/// λ_k = scale · k^(−alpha), k = 1..n.
std::vector<double> powerlaw_spectrum(std::size_t n, double scale, double alpha);
/// k leading eigenvalues spaced linearly from `high` to 0.75·high, then n−k
/// trailing eigenvalues spaced linearly from `low` to 0.5·low.
std::vector<double> plateau_spectrum(std::size_t n, std::size_t k, double high, double low);
/// Named desk-scale proxies (artifact choices): resnet512, vit768, vgg4096, bert768.
std::vector<double> preset_spectrum(const std::string& name);

struct Swarm {
  Matrix positions;  // N × n
  ManifoldSpec manifold;

  std::size_t size() const noexcept { return positions.rows(); }
};

Swarm sample_uniform(const ManifoldSpec& manifold, std::size_t n_agents, SeededRng& rng);

struct Projection {
  std::vector<double> point;
  std::array<double, 2> params{0.0, 0.0};  // chart coordinates of the result
};

/// Nearest-point retraction Π_M. Identity for SyntheticSpectrum.
/// Throws ProjectionError when the Newton refinement does not settle.
Projection project_with_params(const ManifoldSpec& manifold, std::span<const double> v);
std::vector<double> project(const ManifoldSpec& manifold, std::span<const double> v);

/// Chart point for curved kinds (params as returned by project_with_params).
std::vector<double> embed(const ManifoldSpec& manifold, std::array<double, 2> params);

/// Distance of x from the manifold's implicit constraint set (0 for SyntheticSpectrum).
double constraint_residual(const ManifoldSpec& manifold, std::span<const double> x);

/// Arc length of the Swiss roll spiral from roll_t_min to t.
double swiss_roll_arc_length(const ManifoldSpec& manifold, double t);

Matrix pairwise_chord_distances(const Swarm& swarm);

}  // namespace dcrl
