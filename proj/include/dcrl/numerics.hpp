#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace dcrl {

// Numerical tolerances shared by every module.
namespace tol {
inline constexpr double kSymmetry = 1e-10;         // relative asymmetry accepted by sym_eig
inline constexpr double kOrthogonality = 1e-10;    // QᵀQ = I
inline constexpr double kEigResidual = 1e-8;       // ||A − QΛQᵀ||_F / max(1, ||A||_F)
inline constexpr double kRowStochastic = 1e-12;    // chain rows / mixing rows and columns
inline constexpr double kDetailedBalance = 1e-12;
inline constexpr double kStationary = 1e-10;       // π agreement with closed form
inline constexpr double kConstraint = 1e-8;        // swarm rows on their manifold
inline constexpr double kProjection = 1e-10;       // retraction residual
inline constexpr double kPsd = 1e-10;              // negative eigenvalue slack, relative
inline constexpr double kRankDeficient = 1e-10;    // σ_min/σ_max below which W is rank deficient
}  // namespace tol

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double> column(std::size_t j) const;

  Matrix transposed() const;
  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a·bᵀ without forming the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

double frobenius_norm(const Matrix& a);
double frobenius_norm_sq(const Matrix& a);
double trace(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
/// Max |A_ij − A_ji| relative to max(1, max|A_ij|).
double asymmetry(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// Second-moment (uncentered) covariance XᵀX / N of the rows of X.
Matrix second_moment(const Matrix& x);

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Constants:
/// increment 0x9E3779B97F4A7C15, multipliers 0xBF58476D1CE4E5B9 and
/// 0x94D049BB133111EB, shifts 30/27/31.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix64(std::uint64_t x);

/// xoshiro256** seeded by four SplitMix64 outputs of the seed.
/// Uniform doubles take the top 53 bits; normals use the Marsaglia polar
/// method, consuming uniforms in pairs and caching the second variate.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer on [0, n).
  std::size_t below(std::size_t n);
  double normal();

  /// Independent stream for worker `index` under a shared key:
  /// seeded with splitmix64(key) XOR index.
  static SeededRng stream(std::uint64_t key, std::uint64_t index);

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

Matrix gauss_matrix(SeededRng& rng, std::size_t rows, std::size_t cols);
/// Haar-ish random orthogonal matrix: modified Gram–Schmidt on a Gaussian matrix.
Matrix random_orthogonal(SeededRng& rng, std::size_t n);

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition and stationary distributions
// ---------------------------------------------------------------------------

struct SymEigResult {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // columns
};

/// Cyclic Jacobi rotations. Throws DimensionError / SymmetryError.
SymEigResult sym_eig(const Matrix& a);

/// Stationary distribution of a row-stochastic, irreducible chain.
/// Iterates the lazy chain (I+P)/2 until ||πP − π||₁ ≤ tol.
/// Throws ConvergenceError when the chain is reducible or the iteration cap is hit.
std::vector<double> power_stationary(const Matrix& p, double tol, std::size_t max_iter = 2'000'000);

}  // namespace dcrl
