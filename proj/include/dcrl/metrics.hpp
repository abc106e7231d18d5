#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dcrl/numerics.hpp"

namespace dcrl {

/// E = −(1/2N) Tr(X WᵀW Xᵀ) + (λ/4)(||W||²_F − 1)².
double joint_energy(const Matrix& x, const Matrix& w, double lambda_reg);
/// Same energy written through the second moment Σ̂ = XᵀX/N.
double joint_energy_from_covariance(const Matrix& sigma, const Matrix& w, double lambda_reg);
/// ∇_X E = −(1/N) X WᵀW.
Matrix grad_x(const Matrix& x, const Matrix& w);
/// ∇_W E = −(1/N) W XᵀX + λ(||W||²_F − 1) W.
Matrix grad_w(const Matrix& x, const Matrix& w, double lambda_reg);

/// V = ¼(||W||²_F − 1)².
double lyapunov(const Matrix& w);
/// Lie derivative of V along the averaged flow: −γ Tr(WΣWᵀ)(||W||²_F − 1)².
double lyapunov_rate(const Matrix& w, const Matrix& sigma, double gamma);

/// Σ_Y = (1/N) YᵀY with Y = X Wᵀ.
Matrix latent_covariance(const Matrix& x, const Matrix& w);
Matrix latent_covariance_from_covariance(const Matrix& sigma, const Matrix& w);

/// ||offdiag(Σ_Y)||_F / ||Σ_Y||_F; 0 for m = 1 or Σ_Y = 0.
double ortho_error(const Matrix& sigma_y);
/// Participation ratio (Σλ)² / Σλ²; 0 for Σ_Y = 0.
double effective_rank(const Matrix& sigma_y);

struct SpectralReference {
  Matrix sigma;
  Matrix q_m;     // n × m
  Matrix q_perp;  // n × (n − m)
  std::vector<double> lambda;

  static SpectralReference from_covariance(const Matrix& sigma, std::size_t m);
};

struct AngleResult {
  double sin_theta = 1.0;
  bool rank_deficient = false;
};

/// Sine of the largest principal angle between row-space(W) and span(Q_m).
AngleResult subspace_angle(const Matrix& w, const SpectralReference& ref);
/// ||W Q_⊥||_F.
double noise_projection(const Matrix& w, const SpectralReference& ref);
/// ||WΣ − Γ̂W||_F with Γ̂_ii = w_i Σ w_iᵀ / ||w_i||² (row-wise Rayleigh quotient).
double stationarity_residual(const Matrix& w, const Matrix& sigma);

struct MetricsRecord {
  std::size_t step = 0;
  double V = 0.0;
  double dV = 0.0;
  double E = 0.0;
  double frob_W = 0.0;
  double sin_theta = 1.0;
  double ortho_error = 0.0;
  double eff_rank = 0.0;
  double noise_proj = 0.0;
  std::vector<double> latent_eigs;
  bool rank_warning = false;

  static std::string csv_header(std::size_t m);
  std::string csv_row() const;
};

/// First step of the trajectory tail (final 20% of K steps).
std::size_t tail_start(std::size_t steps);
/// Record cadence shared by every runner: multiples of `every`, the tail start and the final step.
bool is_record_step(std::size_t step, std::size_t every, std::size_t steps);

/// Evaluates every diagnostic against the second moment Σ of the current data.
MetricsRecord compute_metrics(std::size_t step, const Matrix& sigma, const Matrix& w, double lambda_reg, double dV);

}  // namespace dcrl
