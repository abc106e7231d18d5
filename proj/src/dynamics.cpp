#include "dcrl/dynamics.hpp"

#include <cmath>
#include <string>

#include "dcrl/error.hpp"
#include "dcrl/metrics.hpp"

namespace dcrl {

void DynamicsConfig::validate() const {
  const std::pair<const char*, double> fields[] = {{"eta_x", eta_x}, {"eta_w", eta_w}, {"D", diffusion},
                                                   {"beta", beta},   {"gamma", gamma}, {"lambda", lambda_reg}};
  for (const auto& [name, v] : fields) {
    if (!std::isfinite(v) || v < 0.0) throw InputError(std::string(name) + " must be finite and non-negative");
  }
}

Matrix random_weights(SeededRng& rng, std::size_t m, std::size_t n, double frobenius) {
  if (m > n) throw DimensionError("latent dimension m must not exceed ambient dimension n");
  Matrix w = gauss_matrix(rng, m, n);
  w *= frobenius / frobenius_norm(w);
  return w;
}

StepReport langevin_step(Swarm& swarm, const Matrix& w, const DynamicsConfig& cfg, SeededRng& rng) {
  Matrix& x = swarm.positions;
  if (w.cols() != x.cols()) throw DimensionError("weight matrix and swarm dimensions differ");
  StepReport report;
  const std::uint64_t key = rng.next_u64();
  if (cfg.eta_x == 0.0 || cfg.diffusion == 0.0) return report;
  const double drift = cfg.eta_x * cfg.diffusion * cfg.beta;
  const double sigma = cfg.noise ? std::sqrt(2.0 * cfg.diffusion * cfg.eta_x) : 0.0;
  const std::size_t n = x.cols(), m = w.rows();
  std::vector<double> y(m), v(n);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    for (std::size_t r = 0; r < m; ++r) y[r] = dot(w.row(r), xi);
    for (std::size_t k = 0; k < n; ++k) v[k] = xi[k];
    for (std::size_t r = 0; r < m; ++r) {
      auto wr = w.row(r);
      const double c = drift * y[r];
      for (std::size_t k = 0; k < n; ++k) v[k] += c * wr[k];
    }
    if (sigma > 0.0) {
      SeededRng agent = SeededRng::stream(key, i);
      for (std::size_t k = 0; k < n; ++k) v[k] += sigma * agent.normal();
    }
    if (!swarm.manifold.curved()) {
      std::copy(v.begin(), v.end(), xi.begin());
      continue;
    }
    try {
      const auto p = project(swarm.manifold, v);
      std::copy(p.begin(), p.end(), xi.begin());
    } catch (const ProjectionError&) {
      ++report.projection_failures;
    }
  }
  return report;
}

Matrix oja_delta(const Matrix& w, const Matrix& x) {
  if (w.cols() != x.cols()) throw DimensionError("oja: weight and data dimensions differ");
  if (x.rows() == 0) throw DimensionError("oja: empty sample");
  const Matrix y = matmul_nt(x, w);  // N × m
  Matrix delta = matmul_tn(y, x);    // m × n
  const double energy = frobenius_norm_sq(y);
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (std::size_t k = 0; k < delta.size(); ++k) delta.data()[k] = inv_n * (delta.data()[k] - energy * w.data()[k]);
  return delta;
}

void oja_update(Matrix& w, const Matrix& x, double eta_w) {
  if (eta_w == 0.0) return;
  Matrix d = oja_delta(w, x);
  d *= eta_w;
  w += d;
}

Matrix averaged_rhs(const Matrix& w, const Matrix& sigma, double gamma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != w.cols())
    throw DimensionError("averaged_rhs: covariance must be n×n");
  if (asymmetry(sigma) > tol::kSymmetry) throw InputError("averaged_rhs: covariance is not symmetric");
  Matrix ws = matmul(w, sigma);
  const double t = dot(ws.data(), w.data());  // Tr(WΣWᵀ)
  for (std::size_t k = 0; k < ws.size(); ++k) ws.data()[k] = gamma * (ws.data()[k] - t * w.data()[k]);
  return ws;
}

Matrix rk4_step(const Matrix& w, const Matrix& sigma, double gamma, double h) {
  const Matrix k1 = averaged_rhs(w, sigma, gamma);
  const Matrix k2 = averaged_rhs(w + (0.5 * h) * k1, sigma, gamma);
  const Matrix k3 = averaged_rhs(w + (0.5 * h) * k2, sigma, gamma);
  const Matrix k4 = averaged_rhs(w + h * k3, sigma, gamma);
  Matrix out = w;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.data()[k] += h / 6.0 * (k1.data()[k] + 2.0 * k2.data()[k] + 2.0 * k3.data()[k] + k4.data()[k]);
  }
  return out;
}

Matrix integrate_averaged(const Matrix& w0, const Matrix& sigma, double gamma, double tau, double h,
                          const std::function<void(double, const Matrix&)>& observer) {
  if (!(h > 0.0)) throw InputError("integration step must be positive");
  Matrix w = w0;
  const auto steps = static_cast<std::size_t>(std::floor(tau / h + 1e-9));
  double t = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    w = rk4_step(w, sigma, gamma, h);
    t = static_cast<double>(k + 1) * h;
    if (observer) observer(t, w);
  }
  const double rest = tau - t;
  if (rest > 1e-12 * std::max(1.0, tau)) {
    w = rk4_step(w, sigma, gamma, rest);
    if (observer) observer(tau, w);
  }
  return w;
}

double closed_form_ratio(double c_k0, double c_j0, double lambda_j, double lambda_k, double gamma, double tau) {
  if (c_j0 == 0.0) throw InputError("closed_form_ratio: reference component c_j0 is zero");
  return (c_k0 / c_j0) * std::exp(-gamma * (lambda_j - lambda_k) * tau);
}

StepReport coupled_step(Swarm& swarm, Matrix& w, const DynamicsConfig& cfg, SeededRng& rng) {
  const StepReport r = langevin_step(swarm, w, cfg, rng);
  oja_update(w, swarm.positions, cfg.eta_w);
  return r;
}

bool diverged(const Matrix& w) {
  if (!w.all_finite()) return true;
  const double f = frobenius_norm(w);
  return f > kDivergenceFrobenius || lyapunov(w) > kDivergenceLyapunov || !std::isfinite(f);
}

}  // namespace dcrl
