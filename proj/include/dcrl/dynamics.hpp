#pragma once

#include <cstddef>
#include <functional>

#include "dcrl/geometry.hpp"
#include "dcrl/numerics.hpp"

namespace dcrl {

struct DynamicsConfig {
  double eta_x = 1e-4;       // spatial step
  double eta_w = 1e-5;       // plasticity step
  double diffusion = 0.5;    // D
  double beta = 1.0;         // inverse temperature
  double gamma = 1.0;        // plasticity rate of the averaged flow
  double lambda_reg = 1.0;   // capacity rigidity λ
  std::size_t steps = 15000; // K
  bool noise = true;

  double timescale_ratio() const { return eta_x > 0 ? eta_w / eta_x : 0.0; }
  /// Throws InputError on negative or non-finite parameters.
  void validate() const;
};

/// Divergence guard thresholds.
inline constexpr double kDivergenceFrobenius = 1e6;
inline constexpr double kDivergenceLyapunov = 1e12;

struct StepReport {
  std::size_t projection_failures = 0;
};

/// Gaussian W with Frobenius norm `frobenius`.
Matrix random_weights(SeededRng& rng, std::size_t m, std::size_t n, double frobenius);

/// x ← Π_M(x + η_x·D·β·WᵀWx + √(2Dη_x)·ξ) for every agent. Agent i draws its
/// noise from SeededRng::stream(key, i) with key = rng.next_u64(). A failed
/// retraction leaves the agent at its previous position.
StepReport langevin_step(Swarm& swarm, const Matrix& w, const DynamicsConfig& cfg, SeededRng& rng);

/// ΔW = (1/N) Σ_i [(W x_i) x_iᵀ − ||W x_i||² W].
Matrix oja_delta(const Matrix& w, const Matrix& x);
void oja_update(Matrix& w, const Matrix& x, double eta_w);

/// γ(WΣ − Tr(WΣWᵀ) W). Throws InputError when Σ is not symmetric.
Matrix averaged_rhs(const Matrix& w, const Matrix& sigma, double gamma);
Matrix rk4_step(const Matrix& w, const Matrix& sigma, double gamma, double h);
/// Integrates the averaged flow to time `tau` with fixed step h (last step shortened).
/// The observer, when set, sees (τ, W) after every step.
Matrix integrate_averaged(const Matrix& w0, const Matrix& sigma, double gamma, double tau, double h = 1e-3,
                          const std::function<void(double, const Matrix&)>& observer = {});

/// (c_k0 / c_j0)·exp(−γ(λ_j − λ_k)τ). Throws InputError when c_j0 = 0.
double closed_form_ratio(double c_k0, double c_j0, double lambda_j, double lambda_k, double gamma, double tau);

/// Langevin step followed by an Oja update on the post-move swarm.
StepReport coupled_step(Swarm& swarm, Matrix& w, const DynamicsConfig& cfg, SeededRng& rng);

/// True when ||W||_F or V(W) crosses the divergence guard or W is non-finite.
bool diverged(const Matrix& w);

}  // namespace dcrl
