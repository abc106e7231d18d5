#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dcrl/geometry.hpp"
#include "dcrl/numerics.hpp"

namespace dcrl {

/// Random geometric graph: i ~ j iff 0 < ||x_i − x_j|| ≤ ε.
struct GeometricGraph {
  double epsilon = 0.0;
  std::vector<std::vector<std::size_t>> adjacency;
  std::vector<std::size_t> degrees;

  std::size_t size() const noexcept { return adjacency.size(); }
  std::size_t edge_count() const;
  std::size_t isolated_count() const;
  double mean_degree() const;
};

GeometricGraph build_graph(const Swarm& swarm, double epsilon);

/// N · ε^(d+2) / log N.
double scaling_diagnostic(double n_points, double epsilon, std::size_t intrinsic_dim);

/// Scalar function on ambient points with optional intrinsic derivatives.
/// `gradient` returns the Riemannian gradient as an ambient tangent vector.
struct ScalarField {
  std::string name;
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  std::function<double(std::span<const double>)> laplacian;

  bool has_derivatives() const { return static_cast<bool>(gradient) && static_cast<bool>(laplacian); }
  std::vector<double> evaluate(const Matrix& points) const;
};

ScalarField constant_field(double c);
/// f(x) = a·x. Derivatives available on circles and spheres (first eigenfunctions of Δ).
ScalarField linear_field(std::vector<double> a, const ManifoldSpec& manifold);
/// cos θ on a circle of radius r: Δ cos θ = −cos θ / r².
ScalarField circle_cosine(double radius = 1.0);
/// z / r on a sphere of radius r: Δ(z/r) = −2 (z/r) / r².
ScalarField sphere_height(double radius = 1.0);
/// exp(−||x − c||² / 2σ²). Value only.
ScalarField bump_field(std::vector<double> center, double sigma);

/// Local Gibbs kernel P(x,y) = exp(−β/2 (U(y) − U(x))) / Z(x) over graph neighbors.
struct GibbsChain {
  std::vector<std::vector<std::size_t>> neighbors;  // mirrors the graph adjacency
  std::vector<std::vector<double>> probabilities;   // aligned with neighbors
  std::vector<double> partition;                    // Z(x)
  std::vector<double> potential;                    // U(x)
  double beta = 1.0;
  double diffusion = 1.0;
  double epsilon = 0.0;
  double tau = 0.0;  // 2D(d+2)/ε²

  std::size_t size() const noexcept { return neighbors.size(); }
  Matrix dense_transition() const;
  /// π(x) ∝ Z(x) e^{−βU(x)}, normalized.
  std::vector<double> closed_form_stationary() const;
};

/// Throws TopologyError naming the first isolated node.
GibbsChain build_chain(const GeometricGraph& graph, std::span<const double> potential, double beta, double diffusion,
                       std::size_t intrinsic_dim);
GibbsChain build_chain(const GeometricGraph& graph, const Swarm& swarm, const ScalarField& potential, double beta,
                       double diffusion, std::size_t intrinsic_dim);

/// max over edges of |π(x)P(x,y) − π(y)P(y,x)| with the closed-form π.
double detailed_balance_residual(const GibbsChain& chain);

/// L_N f(x) = τ Σ_y P(x,y)(f(y) − f(x)).
std::vector<double> discrete_generator(const GibbsChain& chain, const ScalarField& f, const Swarm& swarm);
/// L f(x) = −Dβ⟨∇U, ∇f⟩ + D Δf. Throws CapabilityError without analytic derivatives.
std::vector<double> continuous_generator(const ScalarField& f, const ScalarField& potential, double diffusion,
                                         double beta, const Swarm& swarm);
double generator_sup_error(const GibbsChain& chain, const ScalarField& f, const ScalarField& potential,
                           double diffusion, double beta, const Swarm& swarm);

}  // namespace dcrl
