#include "dcrl/substrate.hpp"

#include <algorithm>
#include <cmath>

#include "dcrl/error.hpp"

namespace dcrl {

std::size_t GeometricGraph::edge_count() const {
  std::size_t s = 0;
  for (auto d : degrees) s += d;
  return s / 2;
}

std::size_t GeometricGraph::isolated_count() const {
  return static_cast<std::size_t>(std::count(degrees.begin(), degrees.end(), std::size_t{0}));
}

double GeometricGraph::mean_degree() const {
  if (degrees.empty()) return 0.0;
  return 2.0 * static_cast<double>(edge_count()) / static_cast<double>(degrees.size());
}

GeometricGraph build_graph(const Swarm& swarm, double epsilon) {
  if (!(epsilon > 0.0)) throw InputError("connectivity radius must be positive");
  const Matrix& x = swarm.positions;
  const std::size_t n = x.rows(), dim = x.cols();
  GeometricGraph g;
  g.epsilon = epsilon;
  g.adjacency.assign(n, {});
  const double eps2 = epsilon * epsilon;
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto xj = x.row(j);
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double t = xi[k] - xj[k];
        d2 += t * t;
      }
      if (d2 > 0.0 && d2 <= eps2) {
        g.adjacency[i].push_back(j);
        g.adjacency[j].push_back(i);
      }
    }
  }
  g.degrees.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.degrees[i] = g.adjacency[i].size();
  return g;
}

double scaling_diagnostic(double n_points, double epsilon, std::size_t intrinsic_dim) {
  if (n_points < 3.0) throw InputError("scaling diagnostic needs N >= 3");
  return n_points * std::pow(epsilon, static_cast<double>(intrinsic_dim) + 2.0) / std::log(n_points);
}

std::vector<double> ScalarField::evaluate(const Matrix& points) const {
  std::vector<double> v(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) v[i] = value(points.row(i));
  return v;
}

ScalarField constant_field(double c) {
  return {"constant", [c](std::span<const double>) { return c; },
          [](std::span<const double> x) { return std::vector<double>(x.size(), 0.0); },
          [](std::span<const double>) { return 0.0; }};
}

ScalarField linear_field(std::vector<double> a, const ManifoldSpec& manifold) {
  ScalarField f;
  f.name = "linear";
  f.value = [a](std::span<const double> x) { return dot(a, x); };
  if (manifold.kind == ManifoldKind::Circle || manifold.kind == ManifoldKind::Sphere) {
    const double r = manifold.radius;
    const double d = static_cast<double>(manifold.intrinsic_dim);
    f.gradient = [a, r](std::span<const double> x) {
      const double ax = dot(a, x) / (r * r);
      std::vector<double> g(a);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] -= ax * x[k];
      return g;
    };
    f.laplacian = [a, r, d](std::span<const double> x) { return -d * dot(a, x) / (r * r); };
  }
  return f;
}

ScalarField circle_cosine(double radius) {
  ScalarField f = linear_field({1.0 / radius, 0.0}, ManifoldSpec::circle(radius));
  f.name = "circle_cosine";
  return f;
}

ScalarField sphere_height(double radius) {
  ScalarField f = linear_field({0.0, 0.0, 1.0 / radius}, ManifoldSpec::sphere(radius));
  f.name = "sphere_height";
  return f;
}

ScalarField bump_field(std::vector<double> center, double sigma) {
  ScalarField f;
  f.name = "bump";
  f.value = [center, sigma](std::span<const double> x) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < center.size(); ++k) d2 += (x[k] - center[k]) * (x[k] - center[k]);
    return std::exp(-d2 / (2.0 * sigma * sigma));
  };
  return f;
}

Matrix GibbsChain::dense_transition() const {
  const std::size_t n = size();
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < neighbors[i].size(); ++k) p(i, neighbors[i][k]) += probabilities[i][k];
  return p;
}

std::vector<double> GibbsChain::closed_form_stationary() const {
  std::vector<double> pi(size());
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    pi[i] = partition[i] * std::exp(-beta * potential[i]);
    s += pi[i];
  }
  for (auto& v : pi) v /= s;
  return pi;
}

GibbsChain build_chain(const GeometricGraph& graph, std::span<const double> potential, double beta, double diffusion,
                       std::size_t intrinsic_dim) {
  const std::size_t n = graph.size();
  if (potential.size() != n) throw DimensionError("potential length does not match graph size");
  GibbsChain c;
  c.neighbors = graph.adjacency;
  c.probabilities.resize(n);
  c.partition.resize(n);
  c.potential.assign(potential.begin(), potential.end());
  c.beta = beta;
  c.diffusion = diffusion;
  c.epsilon = graph.epsilon;
  c.tau = 2.0 * diffusion * (static_cast<double>(intrinsic_dim) + 2.0) / (graph.epsilon * graph.epsilon);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nb = graph.adjacency[i];
    if (nb.empty())
      throw TopologyError("node " + std::to_string(i) + " is isolated (graph shattered)", static_cast<long>(i));
    auto& row = c.probabilities[i];
    row.resize(nb.size());
    double z = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) {
      row[k] = std::exp(-0.5 * beta * (potential[nb[k]] - potential[i]));
      z += row[k];
    }
    for (auto& p : row) p /= z;
    c.partition[i] = z;
  }
  return c;
}

GibbsChain build_chain(const GeometricGraph& graph, const Swarm& swarm, const ScalarField& potential, double beta,
                       double diffusion, std::size_t intrinsic_dim) {
  return build_chain(graph, potential.evaluate(swarm.positions), beta, diffusion, intrinsic_dim);
}

double detailed_balance_residual(const GibbsChain& chain) {
  const auto pi = chain.closed_form_stationary();
  double worst = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& nb = chain.neighbors[i];
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const std::size_t j = nb[k];
      if (j < i) continue;
      const auto& back = chain.neighbors[j];
      const auto it = std::find(back.begin(), back.end(), i);
      const double pji = it == back.end() ? 0.0 : chain.probabilities[j][static_cast<std::size_t>(it - back.begin())];
      worst = std::max(worst, std::abs(pi[i] * chain.probabilities[i][k] - pi[j] * pji));
    }
  }
  return worst;
}

std::vector<double> discrete_generator(const GibbsChain& chain, const ScalarField& f, const Swarm& swarm) {
  if (swarm.size() != chain.size()) throw DimensionError("chain and swarm sizes differ");
  const auto fv = f.evaluate(swarm.positions);
  std::vector<double> out(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    double s = 0.0;
    const auto& nb = chain.neighbors[i];
    for (std::size_t k = 0; k < nb.size(); ++k) s += chain.probabilities[i][k] * (fv[nb[k]] - fv[i]);
    out[i] = chain.tau * s;
  }
  return out;
}

std::vector<double> continuous_generator(const ScalarField& f, const ScalarField& potential, double diffusion,
                                         double beta, const Swarm& swarm) {
  if (!f.has_derivatives() || !potential.has_derivatives())
    throw CapabilityError("continuous generator needs analytic gradients and Laplacians");
  std::vector<double> out(swarm.size());
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    auto x = swarm.positions.row(i);
    out[i] = -diffusion * beta * dot(potential.gradient(x), f.gradient(x)) + diffusion * f.laplacian(x);
  }
  return out;
}

double generator_sup_error(const GibbsChain& chain, const ScalarField& f, const ScalarField& potential,
                           double diffusion, double beta, const Swarm& swarm) {
  const auto ln = discrete_generator(chain, f, swarm);
  const auto l = continuous_generator(f, potential, diffusion, beta, swarm);
  double worst = 0.0;
  for (std::size_t i = 0; i < ln.size(); ++i) worst = std::max(worst, std::abs(ln[i] - l[i]));
  return worst;
}

}  // namespace dcrl
