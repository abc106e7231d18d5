#include "dcrl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dcrl/error.hpp"

namespace dcrl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0 ? a + kTwoPi : a;
}

double sq(double v) { return v * v; }

void require_ambient(const ManifoldSpec& m, std::span<const double> v) {
  if (v.size() != m.ambient_dim) {
    throw DimensionError("point has dimension " + std::to_string(v.size()) + ", manifold ambient dimension is " +
                         std::to_string(m.ambient_dim));
  }
  for (double x : v)
    if (!std::isfinite(x)) throw InputError("cannot project a non-finite point");
}

// Swiss roll spiral p(t) = (t cos t, t sin t) in the (x, z) plane.
double roll_arc(double t) { return 0.5 * (t * std::sqrt(1.0 + t * t) + std::asinh(t)); }

double roll_newton(double x, double z, double t, double lo, double hi) {
  for (int it = 0; it < 40; ++it) {
    const double c = std::cos(t), s = std::sin(t);
    const double px = t * c, pz = t * s;
    const double dx = c - t * s, dz = s + t * c;
    const double ddx = -2.0 * s - t * c, ddz = 2.0 * c - t * s;
    const double g = (px - x) * dx + (pz - z) * dz;
    double h = dx * dx + dz * dz + (px - x) * ddx + (pz - z) * ddz;
    if (h < 1e-9) h = dx * dx + dz * dz;
    const double next = std::clamp(t - g / h, lo, hi);
    if (std::abs(next - t) <= 1e-14 * std::max(1.0, std::abs(t))) return next;
    t = next;
  }
  return t;
}

Projection project_swiss_roll(const ManifoldSpec& m, std::span<const double> v) {
  const double x = v[0], z = v[2];
  const double y = std::clamp(v[1], -0.5 * m.height, 0.5 * m.height);
  const double phi = wrap_angle(std::atan2(z, x));
  const double lo = m.roll_t_min, hi = m.roll_t_max;
  double best_t = lo, best_d = INFINITY;
  const int kmin = static_cast<int>(std::floor((lo - kPi - phi) / kTwoPi));
  const int kmax = static_cast<int>(std::ceil((hi + kPi - phi) / kTwoPi));
  for (int k = kmin; k <= kmax; ++k) {
    const double t = roll_newton(x, z, std::clamp(phi + kTwoPi * k, lo, hi), lo, hi);
    const double d = sq(t * std::cos(t) - x) + sq(t * std::sin(t) - z);
    if (d < best_d) {
      best_d = d;
      best_t = t;
    }
  }
  if (!std::isfinite(best_d)) throw ProjectionError("swiss roll projection did not converge");
  return {{best_t * std::cos(best_t), y, best_t * std::sin(best_t)}, {best_t, y}};
}

// S-curve: t ∈ [−3π/2, 3π/2], (x, z) = (sin t, sign(t)(cos t − 1)), i.e. two
// unit-circle arcs centered at (0, −1) for t ≥ 0 and (0, 1) for t < 0.
std::array<double, 2> s_curve_xz(double t) {
  return {std::sin(t), (t >= 0 ? 1.0 : -1.0) * (std::cos(t) - 1.0)};
}

Projection project_s_curve(const ManifoldSpec& m, std::span<const double> v) {
  const double x = v[0], z = v[2];
  const double y = std::clamp(v[1], -0.5 * m.height, 0.5 * m.height);
  const double tmax = 1.5 * kPi;
  double best_t = 0.0, best_d = INFINITY;
  auto consider = [&](double t) {
    const auto p = s_curve_xz(t);
    const double d = sq(p[0] - x) + sq(p[1] - z);
    if (d < best_d) {
      best_d = d;
      best_t = t;
    }
  };
  // Upper arc (t ≥ 0): relative to (0,−1) the point is (sin t, cos t).
  const double a = std::atan2(x, z + 1.0);
  for (double c : {a, a + kTwoPi, a - kTwoPi}) consider(std::clamp(c, 0.0, tmax));
  // Lower arc (t = −u ≤ 0): relative to (0,1) the point is (−sin u, −cos u).
  const double b = std::atan2(-x, -(z - 1.0));
  for (double c : {b, b + kTwoPi, b - kTwoPi}) consider(-std::clamp(c, 0.0, tmax));
  const auto p = s_curve_xz(best_t);
  return {{p[0], y, p[1]}, {best_t, y}};
}

Projection project_torus(const ManifoldSpec& m, std::span<const double> v) {
  const double rho = std::hypot(v[0], v[1]);
  const double u = rho > 0 ? std::atan2(v[1], v[0]) : 0.0;
  const double dr = rho - m.major_radius, dz = v[2];
  const double len = std::hypot(dr, dz);
  const double w = len > 0 ? std::atan2(dz, dr) : 0.0;
  const double rr = m.major_radius + m.minor_radius * std::cos(w);
  return {{rr * std::cos(u), rr * std::sin(u), m.minor_radius * std::sin(w)}, {wrap_angle(u), wrap_angle(w)}};
}

std::vector<double> moebius_point(const ManifoldSpec& m, double u, double s) {
  const double a = m.radius + s * std::cos(0.5 * u);
  return {a * std::cos(u), a * std::sin(u), s * std::sin(0.5 * u)};
}

Projection project_moebius(const ManifoldSpec& m, std::span<const double> v) {
  const double w = m.half_width;
  double u = std::atan2(v[1], v[0]);
  double s;
  {
    const double c = std::cos(0.5 * u), sn = std::sin(0.5 * u);
    const double rx = v[0] - m.radius * std::cos(u), ry = v[1] - m.radius * std::sin(u), rz = v[2];
    s = std::clamp(rx * c * std::cos(u) + ry * c * std::sin(u) + rz * sn, -w, w);
  }
  bool converged = false;
  for (int it = 0; it < 60 && !converged; ++it) {
    const double c = std::cos(0.5 * u), sn = std::sin(0.5 * u);
    const double cu = std::cos(u), su = std::sin(u);
    const double a = m.radius + s * c;
    const double a_u = -0.5 * s * sn, a_s = c, a_uu = -0.25 * s * c, a_us = -0.5 * sn;
    const double r[3] = {a * cu - v[0], a * su - v[1], s * sn - v[2]};
    const double xu[3] = {a_u * cu - a * su, a_u * su + a * cu, 0.5 * s * c};
    const double xs[3] = {c * cu, c * su, sn};
    const double xuu[3] = {a_uu * cu - 2.0 * a_u * su - a * cu, a_uu * su + 2.0 * a_u * cu - a * su, -0.25 * s * sn};
    const double xus[3] = {a_us * cu - a_s * su, a_us * su + a_s * cu, 0.5 * c};
    auto d3 = [](const double* p, const double* q) { return p[0] * q[0] + p[1] * q[1] + p[2] * q[2]; };
    const double gu = d3(r, xu), gs = d3(r, xs);
    double huu = d3(xu, xu) + d3(r, xuu), hus = d3(xu, xs) + d3(r, xus), hss = d3(xs, xs);
    const bool at_lo = s <= -w && gs > 0, at_hi = s >= w && gs < 0;
    double du, ds;
    if (at_lo || at_hi) {
      ds = 0.0;
      du = huu > 1e-12 ? -gu / huu : -gu;
    } else {
      const double det = huu * hss - hus * hus;
      if (huu > 1e-12 && det > 1e-12) {
        du = -(hss * gu - hus * gs) / det;
        ds = -(huu * gs - hus * gu) / det;
      } else {
        du = -gu / std::max(d3(xu, xu), 1e-12);
        ds = -gs;
      }
    }
    du = std::clamp(du, -0.5, 0.5);
    const double s_next = std::clamp(s + ds, -w, w);
    converged = std::abs(du) < 1e-13 && std::abs(s_next - s) < 1e-13;
    u += du;
    s = s_next;
  }
  if (!converged) throw ProjectionError("moebius projection did not converge");
  // (u + 2π, −s) is the same point, so an odd number of wraps flips the width coordinate.
  const double turns = std::floor(u / kTwoPi);
  const double su = std::fmod(std::abs(turns), 2.0) == 1.0 ? -s : s;
  return {moebius_point(m, u, s), {u - turns * kTwoPi, su}};
}

}  // namespace

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Circle: return "circle";
    case ManifoldKind::Sphere: return "sphere";
    case ManifoldKind::SwissRoll: return "swiss_roll";
    case ManifoldKind::SCurve: return "s_curve";
    case ManifoldKind::Torus: return "torus";
    case ManifoldKind::MoebiusStrip: return "moebius";
    case ManifoldKind::SyntheticSpectrum: return "synthetic_spectrum";
  }
  return "unknown";
}

ManifoldKind manifold_kind_from_string(const std::string& name) {
  for (auto k : {ManifoldKind::Circle, ManifoldKind::Sphere, ManifoldKind::SwissRoll, ManifoldKind::SCurve,
                 ManifoldKind::Torus, ManifoldKind::MoebiusStrip, ManifoldKind::SyntheticSpectrum}) {
    if (to_string(k) == name) return k;
  }
  throw CapabilityError("unknown manifold kind '" + name + "'");
}

ManifoldSpec ManifoldSpec::circle(double r) {
  ManifoldSpec m;
  m.kind = ManifoldKind::Circle;
  m.intrinsic_dim = 1;
  m.ambient_dim = 2;
  m.radius = r;
  return m;
}

ManifoldSpec ManifoldSpec::sphere(double r) {
  ManifoldSpec m;
  m.kind = ManifoldKind::Sphere;
  m.intrinsic_dim = 2;
  m.ambient_dim = 3;
  m.radius = r;
  return m;
}

ManifoldSpec ManifoldSpec::swiss_roll(double height) {
  ManifoldSpec m;
  m.kind = ManifoldKind::SwissRoll;
  m.intrinsic_dim = 2;
  m.ambient_dim = 3;
  m.height = height;
  return m;
}

ManifoldSpec ManifoldSpec::s_curve(double height) {
  ManifoldSpec m;
  m.kind = ManifoldKind::SCurve;
  m.intrinsic_dim = 2;
  m.ambient_dim = 3;
  m.height = height;
  return m;
}

ManifoldSpec ManifoldSpec::torus(double major, double minor) {
  if (!(major > minor && minor > 0)) throw InputError("torus requires major radius > minor radius > 0");
  ManifoldSpec m;
  m.kind = ManifoldKind::Torus;
  m.intrinsic_dim = 2;
  m.ambient_dim = 3;
  m.major_radius = major;
  m.minor_radius = minor;
  return m;
}

ManifoldSpec ManifoldSpec::moebius(double radius, double half_width) {
  if (!(radius > half_width && half_width > 0)) throw InputError("moebius strip requires radius > half width > 0");
  ManifoldSpec m;
  m.kind = ManifoldKind::MoebiusStrip;
  m.intrinsic_dim = 2;
  m.ambient_dim = 3;
  m.radius = radius;
  m.half_width = half_width;
  return m;
}

ManifoldSpec ManifoldSpec::synthetic_spectrum(std::vector<double> eigenvalues, std::uint64_t rotation_seed) {
  if (eigenvalues.empty()) throw DimensionError("synthetic spectrum needs at least one eigenvalue");
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (!(eigenvalues[i] >= 0.0) || !std::isfinite(eigenvalues[i]))
      throw InputError("synthetic spectrum eigenvalues must be finite and non-negative");
    if (i > 0 && eigenvalues[i] > eigenvalues[i - 1])
      throw InputError("synthetic spectrum eigenvalues must be sorted descending");
  }
  ManifoldSpec m;
  m.kind = ManifoldKind::SyntheticSpectrum;
  m.ambient_dim = eigenvalues.size();
  m.intrinsic_dim = eigenvalues.size();
  m.spectrum = std::move(eigenvalues);
  m.rotation_seed = rotation_seed;
  SeededRng rng(rotation_seed);
  m.rotation = random_orthogonal(rng, m.ambient_dim);
  return m;
}

Matrix ManifoldSpec::population_covariance() const {
  if (kind != ManifoldKind::SyntheticSpectrum)
    throw CapabilityError("population covariance is only available for synthetic spectra");
  const std::size_t n = ambient_dim;
  Matrix rl(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rl(i, j) = rotation(i, j) * spectrum[j];
  Matrix s = matmul_nt(rl, rotation);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s(i, j) = s(j, i) = 0.5 * (s(i, j) + s(j, i));
  return s;
}

std::vector<double> powerlaw_spectrum(std::size_t n, double scale, double alpha) {
  std::vector<double> l(n);
  for (std::size_t k = 0; k < n; ++k) l[k] = scale * std::pow(static_cast<double>(k + 1), -alpha);
  return l;
}

std::vector<double> plateau_spectrum(std::size_t n, std::size_t k, double high, double low) {
  if (k > n) throw InputError("plateau size exceeds dimension");
  std::vector<double> l(n);
  for (std::size_t i = 0; i < k; ++i)
    l[i] = high * (1.0 - 0.25 * (k > 1 ? static_cast<double>(i) / static_cast<double>(k - 1) : 0.0));
  const std::size_t tail = n - k;
  for (std::size_t i = 0; i < tail; ++i)
    l[k + i] = low * (1.0 - 0.5 * (tail > 1 ? static_cast<double>(i) / static_cast<double>(tail - 1) : 0.0));
  return l;
}

std::vector<double> preset_spectrum(const std::string& name) {
  if (name == "resnet512") return powerlaw_spectrum(512, 10.0, 1.0);
  if (name == "vit768") return powerlaw_spectrum(768, 10.0, 0.8);
  if (name == "vgg4096") return powerlaw_spectrum(4096, 10.0, 1.2);
  if (name == "bert768") return plateau_spectrum(768, 16, 10.0, 0.5);
  throw CapabilityError("unknown spectrum preset '" + name + "'");
}

Swarm sample_uniform(const ManifoldSpec& m, std::size_t n_agents, SeededRng& rng) {
  if (n_agents == 0) throw DimensionError("sample_uniform: N must be at least 1");
  Swarm sw{Matrix(n_agents, m.ambient_dim), m};
  Matrix& x = sw.positions;
  switch (m.kind) {
    case ManifoldKind::Circle:
      for (std::size_t i = 0; i < n_agents; ++i) {
        const double a = rng.uniform(0.0, kTwoPi);
        x(i, 0) = m.radius * std::cos(a);
        x(i, 1) = m.radius * std::sin(a);
      }
      break;
    case ManifoldKind::Sphere:
      for (std::size_t i = 0; i < n_agents; ++i) {
        double g[3], nrm = 0.0;
        do {
          for (double& c : g) c = rng.normal();
          nrm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
        } while (nrm < 1e-12);
        for (int c = 0; c < 3; ++c) x(i, c) = m.radius * g[c] / nrm;
      }
      break;
    case ManifoldKind::SwissRoll: {
      // Inverse arc-length sampling: s uniform, then Newton on s(t) = target.
      const double s0 = roll_arc(m.roll_t_min), total = roll_arc(m.roll_t_max) - s0;
      for (std::size_t i = 0; i < n_agents; ++i) {
        const double target = s0 + rng.uniform() * total;
        double t = 0.5 * (m.roll_t_min + m.roll_t_max);
        for (int it = 0; it < 60; ++it) {
          const double step = (roll_arc(t) - target) / std::sqrt(1.0 + t * t);
          t = std::clamp(t - step, m.roll_t_min, m.roll_t_max);
          if (std::abs(step) < 1e-14 * t) break;
        }
        const double h = rng.uniform(-0.5 * m.height, 0.5 * m.height);
        x(i, 0) = t * std::cos(t);
        x(i, 1) = h;
        x(i, 2) = t * std::sin(t);
      }
      break;
    }
    case ManifoldKind::SCurve:
      for (std::size_t i = 0; i < n_agents; ++i) {
        const double t = rng.uniform(-1.5 * kPi, 1.5 * kPi);
        const double h = rng.uniform(-0.5 * m.height, 0.5 * m.height);
        const auto p = s_curve_xz(t);
        x(i, 0) = p[0];
        x(i, 1) = h;
        x(i, 2) = p[1];
      }
      break;
    case ManifoldKind::Torus:
      for (std::size_t i = 0; i < n_agents; ++i) {
        const double u = rng.uniform(0.0, kTwoPi);
        double w;
        do {
          w = rng.uniform(0.0, kTwoPi);
        } while (rng.uniform() * (m.major_radius + m.minor_radius) > m.major_radius + m.minor_radius * std::cos(w));
        const double rr = m.major_radius + m.minor_radius * std::cos(w);
        x(i, 0) = rr * std::cos(u);
        x(i, 1) = rr * std::sin(u);
        x(i, 2) = m.minor_radius * std::sin(w);
      }
      break;
    case ManifoldKind::MoebiusStrip: {
      // Area element of the chart is sqrt((R + s cos(u/2))² + s²/4).
      const double bound = std::sqrt(sq(m.radius + m.half_width) + 0.25 * sq(m.half_width));
      for (std::size_t i = 0; i < n_agents; ++i) {
        double u, s;
        do {
          u = rng.uniform(0.0, kTwoPi);
          s = rng.uniform(-m.half_width, m.half_width);
        } while (rng.uniform() * bound > std::sqrt(sq(m.radius + s * std::cos(0.5 * u)) + 0.25 * s * s));
        const auto p = moebius_point(m, u, s);
        for (int c = 0; c < 3; ++c) x(i, c) = p[c];
      }
      break;
    }
    case ManifoldKind::SyntheticSpectrum: {
      const std::size_t n = m.ambient_dim;
      std::vector<double> z(n);
      for (std::size_t i = 0; i < n_agents; ++i) {
        for (std::size_t k = 0; k < n; ++k) z[k] = std::sqrt(m.spectrum[k]) * rng.normal();
        for (std::size_t r = 0; r < n; ++r) x(i, r) = dot(m.rotation.row(r), z);
      }
      break;
    }
  }
  return sw;
}

Projection project_with_params(const ManifoldSpec& m, std::span<const double> v) {
  require_ambient(m, v);
  switch (m.kind) {
    case ManifoldKind::Circle:
    case ManifoldKind::Sphere: {
      const double nrm = norm2(v);
      Projection p;
      p.point.assign(v.begin(), v.end());
      if (nrm == 0.0) {
        std::fill(p.point.begin(), p.point.end(), 0.0);
        p.point[0] = m.radius;
      } else {
        for (auto& c : p.point) c *= m.radius / nrm;
      }
      if (m.kind == ManifoldKind::Circle) {
        p.params = {wrap_angle(std::atan2(p.point[1], p.point[0])), 0.0};
      } else {
        p.params = {std::acos(std::clamp(p.point[2] / m.radius, -1.0, 1.0)),
                    wrap_angle(std::atan2(p.point[1], p.point[0]))};
      }
      return p;
    }
    case ManifoldKind::SwissRoll: return project_swiss_roll(m, v);
    case ManifoldKind::SCurve: return project_s_curve(m, v);
    case ManifoldKind::Torus: return project_torus(m, v);
    case ManifoldKind::MoebiusStrip: return project_moebius(m, v);
    case ManifoldKind::SyntheticSpectrum: return {std::vector<double>(v.begin(), v.end()), {0.0, 0.0}};
  }
  throw CapabilityError("projection not supported for this manifold");
}

std::vector<double> project(const ManifoldSpec& m, std::span<const double> v) {
  return project_with_params(m, v).point;
}

std::vector<double> embed(const ManifoldSpec& m, std::array<double, 2> q) {
  switch (m.kind) {
    case ManifoldKind::Circle: return {m.radius * std::cos(q[0]), m.radius * std::sin(q[0])};
    case ManifoldKind::Sphere:
      return {m.radius * std::sin(q[0]) * std::cos(q[1]), m.radius * std::sin(q[0]) * std::sin(q[1]),
              m.radius * std::cos(q[0])};
    case ManifoldKind::SwissRoll: return {q[0] * std::cos(q[0]), q[1], q[0] * std::sin(q[0])};
    case ManifoldKind::SCurve: {
      const auto p = s_curve_xz(q[0]);
      return {p[0], q[1], p[1]};
    }
    case ManifoldKind::Torus: {
      const double rr = m.major_radius + m.minor_radius * std::cos(q[1]);
      return {rr * std::cos(q[0]), rr * std::sin(q[0]), m.minor_radius * std::sin(q[1])};
    }
    case ManifoldKind::MoebiusStrip: return moebius_point(m, q[0], q[1]);
    case ManifoldKind::SyntheticSpectrum: break;
  }
  throw CapabilityError("synthetic spectra have no chart");
}

double constraint_residual(const ManifoldSpec& m, std::span<const double> x) {
  switch (m.kind) {
    case ManifoldKind::Circle:
    case ManifoldKind::Sphere: return std::abs(norm2(x) - m.radius);
    case ManifoldKind::Torus:
      return std::abs(std::hypot(std::hypot(x[0], x[1]) - m.major_radius, x[2]) - m.minor_radius);
    case ManifoldKind::SyntheticSpectrum: return 0.0;
    default: {
      const auto p = project(m, x);
      double d = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) d += sq(p[i] - x[i]);
      return std::sqrt(d);
    }
  }
}

double swiss_roll_arc_length(const ManifoldSpec& m, double t) { return roll_arc(t) - roll_arc(m.roll_t_min); }

Matrix pairwise_chord_distances(const Swarm& swarm) {
  const Matrix& x = swarm.positions;
  const std::size_t n = x.rows();
  if (n < 2) throw DimensionError("pairwise distances need at least two agents");
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto xj = x.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < xi.size(); ++k) s += sq(xi[k] - xj[k]);
      d(i, j) = d(j, i) = std::sqrt(s);
    }
  }
  return d;
}

}  // namespace dcrl
