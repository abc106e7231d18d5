#include "dcrl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dcrl/error.hpp"

namespace dcrl {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

static void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("matmul_tn: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ak = a.row(k);
    auto bk = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      auto ci = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("matmul_nt: column counts differ");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
  return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionError("matvec: dimension mismatch");
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

double frobenius_norm_sq(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return s;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(frobenius_norm_sq(a)); }

double trace(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("trace of non-square matrix");
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

double asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("asymmetry of non-square matrix");
  double scale = 1.0, diff = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      scale = std::max(scale, std::abs(a(i, j)));
      if (j > i) diff = std::max(diff, std::abs(a(i, j) - a(j, i)));
    }
  }
  return diff / scale;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Matrix second_moment(const Matrix& x) {
  if (x.rows() == 0) throw DimensionError("second_moment of empty sample");
  Matrix s = matmul_tn(x, x);
  s *= 1.0 / static_cast<double>(x.rows());
  return s;
}

Matrix gauss_matrix(SeededRng& rng, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw DimensionError("gauss_matrix: zero dimension");
  Matrix g(rows, cols);
  for (auto& v : g.data()) v = rng.normal();
  return g;
}

Matrix random_orthogonal(SeededRng& rng, std::size_t n) {
  Matrix q = gauss_matrix(rng, n, n);
  // Gram-Schmidt on the columns, twice for numerical orthogonality.
  for (std::size_t j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double p = 0.0;
        for (std::size_t i = 0; i < n; ++i) p += q(i, k) * q(i, j);
        for (std::size_t i = 0; i < n; ++i) q(i, j) -= p * q(i, k);
      }
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += q(i, j) * q(i, j);
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) q(i, j) /= nrm;
  }
  return q;
}

SymEigResult sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("sym_eig: matrix is not square");
  if (!a.all_finite()) throw InputError("sym_eig: non-finite entries");
  if (asymmetry(a) > tol::kSymmetry) throw SymmetryError("sym_eig: matrix is not symmetric");
  const std::size_t n = a.rows();
  Matrix m = a;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = 0.5 * (a(i, j) + a(j, i));
  Matrix v = Matrix::identity(n);

  const double total = std::max(frobenius_norm(m), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    if (std::sqrt(off) <= 1e-15 * total) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return m(i, i) > m(j, j); });

  SymEigResult r;
  r.eigenvalues.resize(n);
  r.eigenvectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    r.eigenvalues[c] = m(order[c], order[c]);
    for (std::size_t k = 0; k < n; ++k) r.eigenvectors(k, c) = v(k, order[c]);
  }
  return r;
}

static bool strongly_connected(const Matrix& p) {
  const std::size_t n = p.rows();
  auto reach_all = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        const double w = transpose ? p(j, i) : p(i, j);
        if (w > 0.0 && !seen[j]) {
          seen[j] = 1;
          ++count;
          stack.push_back(j);
        }
      }
    }
    return count == n;
  };
  return reach_all(false) && reach_all(true);
}

std::vector<double> power_stationary(const Matrix& p, double tol, std::size_t max_iter) {
  if (p.rows() != p.cols() || p.rows() == 0) throw DimensionError("power_stationary: P must be square");
  const std::size_t n = p.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (p(i, j) < 0.0) throw InputError("power_stationary: negative transition probability");
      s += p(i, j);
    }
    if (std::abs(s - 1.0) > tol::kRowStochastic)
      throw InputError("power_stationary: row " + std::to_string(i) + " does not sum to 1");
  }
  if (!strongly_connected(p)) throw ConvergenceError("power_stationary: chain is reducible (disconnected graph)");

  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  auto residual = [&](const std::vector<double>& v, std::vector<double>& vp) {
    std::fill(vp.begin(), vp.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] == 0.0) continue;
      auto pi_row = p.row(i);
      for (std::size_t j = 0; j < n; ++j) vp[j] += v[i] * pi_row[j];
    }
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) r += std::abs(vp[j] - v[j]);
    return r;
  };

  for (std::size_t it = 0; it < max_iter; ++it) {
    const double r = residual(pi, next);
    if (r <= tol) return pi;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      pi[j] = 0.5 * (pi[j] + next[j]);
      s += pi[j];
    }
    for (auto& v : pi) v /= s;
  }
  throw ConvergenceError("power_stationary: no convergence after " + std::to_string(max_iter) + " iterations");
}

}  // namespace dcrl
