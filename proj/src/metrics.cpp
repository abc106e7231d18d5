#include "dcrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dcrl/error.hpp"

namespace dcrl {

namespace {

void require_compatible(const Matrix& x, const Matrix& w) {
  if (x.cols() != w.cols()) throw DimensionError("data and weight matrices have different ambient dimensions");
  if (x.rows() == 0) throw DimensionError("empty data matrix");
}

Matrix symmetrize(Matrix a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  return a;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double joint_energy(const Matrix& x, const Matrix& w, double lambda_reg) {
  require_compatible(x, w);
  const Matrix y = matmul_nt(x, w);
  const double v = frobenius_norm_sq(w) - 1.0;
  return -0.5 * frobenius_norm_sq(y) / static_cast<double>(x.rows()) + 0.25 * lambda_reg * v * v;
}

double joint_energy_from_covariance(const Matrix& sigma, const Matrix& w, double lambda_reg) {
  const double v = frobenius_norm_sq(w) - 1.0;
  return -0.5 * trace(latent_covariance_from_covariance(sigma, w)) + 0.25 * lambda_reg * v * v;
}

Matrix grad_x(const Matrix& x, const Matrix& w) {
  require_compatible(x, w);
  Matrix g = matmul(matmul_nt(x, w), w);
  g *= -1.0 / static_cast<double>(x.rows());
  return g;
}

Matrix grad_w(const Matrix& x, const Matrix& w, double lambda_reg) {
  require_compatible(x, w);
  Matrix g = matmul(w, matmul_tn(x, x));
  g *= -1.0 / static_cast<double>(x.rows());
  const double c = lambda_reg * (frobenius_norm_sq(w) - 1.0);
  for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] += c * w.data()[k];
  return g;
}

double lyapunov(const Matrix& w) {
  const double v = frobenius_norm_sq(w) - 1.0;
  return 0.25 * v * v;
}

double lyapunov_rate(const Matrix& w, const Matrix& sigma, double gamma) {
  const double t = trace(latent_covariance_from_covariance(sigma, w));
  const double v = frobenius_norm_sq(w) - 1.0;
  return -gamma * std::max(t, 0.0) * v * v;
}

Matrix latent_covariance(const Matrix& x, const Matrix& w) {
  require_compatible(x, w);
  const Matrix y = matmul_nt(x, w);
  Matrix s = matmul_tn(y, y);
  s *= 1.0 / static_cast<double>(x.rows());
  return s;
}

Matrix latent_covariance_from_covariance(const Matrix& sigma, const Matrix& w) {
  if (sigma.rows() != w.cols() || sigma.cols() != w.cols()) throw DimensionError("covariance must be n×n");
  return symmetrize(matmul_nt(matmul(w, sigma), w));
}

double ortho_error(const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() == 0) throw DimensionError("ortho_error needs a non-empty square matrix");
  const double total = frobenius_norm_sq(s);
  if (total == 0.0) return 0.0;
  double off = 0.0;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j)
      if (i != j) off += s(i, j) * s(i, j);
  return std::sqrt(off / total);
}

double effective_rank(const Matrix& s) {
  const auto eig = sym_eig(s);
  double sum = 0.0, sum_sq = 0.0;
  for (double l : eig.eigenvalues) {
    const double lp = std::max(l, 0.0);
    sum += lp;
    sum_sq += lp * lp;
  }
  return sum_sq == 0.0 ? 0.0 : sum * sum / sum_sq;
}

SpectralReference SpectralReference::from_covariance(const Matrix& sigma, std::size_t m) {
  if (m == 0 || m > sigma.rows()) throw DimensionError("reference subspace dimension out of range");
  const auto eig = sym_eig(sigma);
  const std::size_t n = sigma.rows();
  SpectralReference r;
  r.sigma = sigma;
  r.lambda = eig.eigenvalues;
  r.q_m = Matrix(n, m);
  r.q_perp = Matrix(n, n - m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) r.q_m(i, j) = eig.eigenvectors(i, j);
    for (std::size_t j = m; j < n; ++j) r.q_perp(i, j - m) = eig.eigenvectors(i, j);
  }
  return r;
}

AngleResult subspace_angle(const Matrix& w, const SpectralReference& ref) {
  if (w.cols() != ref.q_m.rows()) throw DimensionError("subspace_angle: dimension mismatch");
  // Row-orthonormalize through WWᵀ = UΛUᵀ, Ŵ = Λ^{-1/2} Uᵀ W.
  const auto gram = sym_eig(symmetrize(matmul_nt(w, w)));
  const double lmax = gram.eigenvalues.front(), lmin = gram.eigenvalues.back();
  if (!(lmax > 0.0) || std::sqrt(std::max(lmin, 0.0) / lmax) < tol::kRankDeficient) return {1.0, true};
  const std::size_t m = w.rows();
  Matrix scaled_ut(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) scaled_ut(i, j) = gram.eigenvectors(j, i) / std::sqrt(gram.eigenvalues[i]);
  const Matrix w_hat = matmul(scaled_ut, w);
  // sin Θ_max = ||Ŵ Q_⊥||₂, which equals √(1 − σ_min(Q_mᵀŴᵀ)²) without the cancellation.
  const Matrix p = matmul(w_hat, ref.q_perp);
  if (p.cols() == 0) return {0.0, false};
  const auto pe = sym_eig(symmetrize(matmul_nt(p, p)));
  return {std::clamp(std::sqrt(std::max(pe.eigenvalues.front(), 0.0)), 0.0, 1.0), false};
}

double noise_projection(const Matrix& w, const SpectralReference& ref) {
  if (ref.q_perp.cols() == 0) return 0.0;
  return frobenius_norm(matmul(w, ref.q_perp));
}

double stationarity_residual(const Matrix& w, const Matrix& sigma) {
  Matrix ws = matmul(w, sigma);
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const double nn = dot(w.row(i), w.row(i));
    const double g = nn > 0.0 ? dot(ws.row(i), w.row(i)) / nn : 0.0;
    auto r = ws.row(i);
    auto wi = w.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= g * wi[k];
  }
  return frobenius_norm(ws);
}

std::string MetricsRecord::csv_header(std::size_t m) {
  std::string h = "step,V,dV,E,frob_W,sin_theta,ortho_error,eff_rank,noise_proj";
  for (std::size_t i = 1; i <= m; ++i) h += ",latent_eig_" + std::to_string(i);
  return h;
}

std::string MetricsRecord::csv_row() const {
  std::string r = std::to_string(step);
  for (double v : {V, dV, E, frob_W, sin_theta, ortho_error, eff_rank, noise_proj}) r += "," + fmt(v);
  for (double v : latent_eigs) r += "," + fmt(v);
  return r;
}

std::size_t tail_start(std::size_t steps) { return steps - steps / 5; }

bool is_record_step(std::size_t step, std::size_t every, std::size_t steps) {
  return (every > 0 && step % every == 0) || step == steps || step == tail_start(steps);
}

MetricsRecord compute_metrics(std::size_t step, const Matrix& sigma, const Matrix& w, double lambda_reg, double dV) {
  MetricsRecord rec;
  rec.step = step;
  rec.dV = dV;
  rec.V = lyapunov(w);
  rec.frob_W = frobenius_norm(w);
  const std::size_t m = w.rows();
  Matrix sy;
  if (w.all_finite() && sigma.all_finite()) sy = latent_covariance_from_covariance(sigma, w);
  if (sy.empty() || !sy.all_finite()) {
    rec.E = std::nan("");
    rec.sin_theta = std::nan("");
    rec.ortho_error = std::nan("");
    rec.eff_rank = std::nan("");
    rec.noise_proj = std::nan("");
    rec.latent_eigs.assign(m, std::nan(""));
    return rec;
  }
  rec.E = joint_energy_from_covariance(sigma, w, lambda_reg);
  rec.ortho_error = ortho_error(sy);
  const auto ly = sym_eig(sy);
  rec.latent_eigs = ly.eigenvalues;
  double sum = 0.0, sum_sq = 0.0;
  for (double l : ly.eigenvalues) {
    const double lp = std::max(l, 0.0);
    sum += lp;
    sum_sq += lp * lp;
  }
  rec.eff_rank = sum_sq == 0.0 ? 0.0 : sum * sum / sum_sq;
  const auto ref = SpectralReference::from_covariance(sigma, m);
  const auto angle = subspace_angle(w, ref);
  rec.sin_theta = angle.sin_theta;
  rec.rank_warning = angle.rank_deficient;
  rec.noise_proj = noise_projection(w, ref);
  return rec;
}

}  // namespace dcrl
