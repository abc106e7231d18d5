#include "dcrl/gossip.hpp"

#include <algorithm>
#include <cmath>

#include "dcrl/error.hpp"

namespace dcrl {

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Ring: return "ring";
    case TopologyKind::Complete: return "complete";
    case TopologyKind::RandomRegular: return "random_regular";
    case TopologyKind::Custom: return "custom";
  }
  return "unknown";
}

TopologyKind topology_kind_from_string(const std::string& name) {
  for (auto k : {TopologyKind::Ring, TopologyKind::Complete, TopologyKind::RandomRegular, TopologyKind::Custom})
    if (to_string(k) == name) return k;
  throw CapabilityError("unknown topology '" + name + "'");
}

GossipTopology build_mixing(const std::vector<std::vector<std::size_t>>& neighbors) {
  const std::size_t n = neighbors.size();
  if (n == 0) throw TopologyError("communication graph has no nodes");
  GossipTopology t;
  t.neighbors = neighbors;
  for (std::size_t i = 0; i < n; ++i) {
    auto& nb = t.neighbors[i];
    std::sort(nb.begin(), nb.end());
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
      throw TopologyError("duplicate edge at node " + std::to_string(i), static_cast<long>(i));
    for (auto j : nb) {
      if (j >= n || j == i) throw TopologyError("invalid neighbor of node " + std::to_string(i), static_cast<long>(i));
      const auto& back = neighbors[j];
      if (std::find(back.begin(), back.end(), i) == back.end())
        throw TopologyError("edge " + std::to_string(i) + "-" + std::to_string(j) + " is not symmetric",
                            static_cast<long>(i));
    }
    t.max_degree = std::max(t.max_degree, nb.size());
  }

  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (auto j : t.neighbors[i])
      if (!seen[j]) {
        seen[j] = 1;
        ++reached;
        stack.push_back(j);
      }
  }
  if (reached != n) {
    const auto first = static_cast<long>(std::find(seen.begin(), seen.end(), 0) - seen.begin());
    throw TopologyError("communication graph is disconnected (node " + std::to_string(first) + " unreachable)", first);
  }

  t.mixing = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (auto j : t.neighbors[i]) {
      const double p = 1.0 / (1.0 + static_cast<double>(std::max(t.neighbors[i].size(), t.neighbors[j].size())));
      t.mixing(i, j) = p;
      off += p;
    }
    t.mixing(i, i) = 1.0 - off;
  }
  return t;
}

GossipTopology ring_topology(std::size_t n) {
  if (n < 2) throw TopologyError("ring needs at least two nodes");
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t next = (i + 1) % n, prev = (i + n - 1) % n;
    nb[i].push_back(next);
    if (prev != next) nb[i].push_back(prev);
  }
  auto t = build_mixing(nb);
  t.kind = TopologyKind::Ring;
  return t;
}

GossipTopology complete_topology(std::size_t n) {
  if (n < 2) throw TopologyError("complete graph needs at least two nodes");
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) nb[i].push_back(j);
  auto t = build_mixing(nb);
  t.kind = TopologyKind::Complete;
  return t;
}

GossipTopology random_regular_topology(std::size_t n, std::size_t degree, SeededRng& rng) {
  if (degree == 0 || degree >= n || (n * degree) % 2 != 0)
    throw TopologyError("no simple " + std::to_string(degree) + "-regular graph on " + std::to_string(n) + " nodes");
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<std::size_t> stubs;
    for (std::size_t i = 0; i < n; ++i) stubs.insert(stubs.end(), degree, i);
    for (std::size_t k = stubs.size(); k > 1; --k) std::swap(stubs[k - 1], stubs[rng.below(k)]);
    std::vector<std::vector<std::size_t>> nb(n);
    bool ok = true;
    for (std::size_t k = 0; k < stubs.size() && ok; k += 2) {
      const auto a = stubs[k], b = stubs[k + 1];
      if (a == b || std::find(nb[a].begin(), nb[a].end(), b) != nb[a].end()) ok = false;
      nb[a].push_back(b);
      nb[b].push_back(a);
    }
    if (!ok) continue;
    try {
      auto t = build_mixing(nb);
      t.kind = TopologyKind::RandomRegular;
      return t;
    } catch (const TopologyError&) {
    }
  }
  throw TopologyError("failed to sample a connected random regular graph");
}

double second_singular_value(const Matrix& p) {
  const auto e = sym_eig(matmul_tn(p, p));
  if (e.eigenvalues.size() < 2) return 0.0;
  return std::sqrt(std::max(e.eigenvalues[1], 0.0));
}

Matrix ReplicaSet::mean() const {
  if (weights.empty()) throw DimensionError("empty replica set");
  Matrix m(weights.front().rows(), weights.front().cols());
  for (const auto& w : weights) m += w;
  m *= 1.0 / static_cast<double>(weights.size());
  return m;
}

AsyncStepReport async_step(ReplicaSet& replicas, const GossipTopology& topo, const DynamicsConfig& cfg,
                           SeededRng& rng) {
  const std::size_t n_agents = replicas.size();
  if (topo.size() != n_agents || replicas.swarm.size() != n_agents)
    throw DimensionError("topology, replicas and swarm sizes differ");
  AsyncStepReport report;
  const std::size_t i = rng.below(n_agents);
  report.agent = i;
  Matrix& wi = replicas.weights[i];

  // Local kinematics.
  auto xi = replicas.swarm.positions.row(i);
  const std::size_t n = xi.size(), m = wi.rows();
  if (cfg.eta_x > 0.0 && cfg.diffusion > 0.0) {
    std::vector<double> v(xi.begin(), xi.end());
    const double drift = cfg.eta_x * cfg.diffusion * cfg.beta;
    for (std::size_t r = 0; r < m; ++r) {
      const double c = drift * dot(wi.row(r), xi);
      for (std::size_t k = 0; k < n; ++k) v[k] += c * wi(r, k);
    }
    if (cfg.noise) {
      const double sigma = std::sqrt(2.0 * cfg.diffusion * cfg.eta_x);
      for (auto& c : v) c += sigma * rng.normal();
    }
    if (replicas.swarm.manifold.curved()) {
      try {
        v = project(replicas.swarm.manifold, v);
        std::copy(v.begin(), v.end(), xi.begin());
      } catch (const ProjectionError&) {
        ++report.projection_failures;
      }
    } else {
      std::copy(v.begin(), v.end(), xi.begin());
    }
  }

  // Local plasticity with the single sample x_i.
  Matrix before_i = wi;
  if (cfg.eta_w != 0.0) {
    Matrix x1(1, n, std::vector<double>(xi.begin(), xi.end()));
    oja_update(wi, x1, cfg.eta_w);
  }
  report.mean_shift = wi - before_i;

  // Neighborhood mixing over S = N_c(i) ∪ {i} using pre-mix values. Mixing
  // preserves the mean over S, so only the plasticity step moves the global mean.
  report.mean_shift *= 1.0 / static_cast<double>(n_agents);
  if (topo.kind == TopologyKind::Complete) {
    // Uniform weights 1/N over the whole network: every replica becomes the mean.
    Matrix avg(m, n);
    for (const auto& w : replicas.weights) avg += w;
    avg *= 1.0 / static_cast<double>(n_agents);
    for (auto& w : replicas.weights) w = avg;
    return report;
  }
  std::vector<std::size_t> s = topo.neighbors[i];
  s.push_back(i);
  std::vector<Matrix> snapshot;
  snapshot.reserve(s.size());
  for (auto j : s) snapshot.push_back(replicas.weights[j]);
  for (std::size_t a = 0; a < s.size(); ++a) {
    const std::size_t j = s[a];
    Matrix& wj = replicas.weights[j];
    for (std::size_t b = 0; b < s.size(); ++b) {
      const double p = topo.mixing(j, s[b]);
      if (b == a || p == 0.0) continue;
      const auto& wl = snapshot[b];
      const auto& wj_old = snapshot[a];
      for (std::size_t k = 0; k < wj.size(); ++k) wj.data()[k] += p * (wl.data()[k] - wj_old.data()[k]);
    }
  }
  return report;
}

void mix_round(ReplicaSet& replicas, const GossipTopology& topo) {
  const std::size_t n = replicas.size();
  if (topo.size() != n) throw DimensionError("topology and replica sizes differ");
  const std::vector<Matrix> old = replicas.weights;
  for (std::size_t j = 0; j < n; ++j) {
    Matrix acc(old[j].rows(), old[j].cols());
    auto add = [&](std::size_t l) {
      const double p = topo.mixing(j, l);
      for (std::size_t k = 0; k < acc.size(); ++k) acc.data()[k] += p * old[l].data()[k];
    };
    add(j);
    for (auto l : topo.neighbors[j]) add(l);
    replicas.weights[j] = std::move(acc);
  }
}

double disagreement(const ReplicaSet& replicas) {
  if (replicas.size() < 2) throw DimensionError("disagreement needs at least two replicas");
  double worst = 0.0;
  for (std::size_t i = 0; i < replicas.size(); ++i)
    for (std::size_t j = i + 1; j < replicas.size(); ++j)
      worst = std::max(worst, frobenius_norm(replicas.weights[i] - replicas.weights[j]));
  return worst;
}

AsyncRun run_async(ReplicaSet initial, const GossipTopology& topo, const DynamicsConfig& cfg, SeededRng& rng,
                   std::size_t steps, std::size_t metrics_every) {
  AsyncRun run;
  run.replicas = std::move(initial);
  Matrix mean = run.replicas.mean();
  double v_prev = lyapunov(mean);
  double dv_max = -INFINITY;

  auto record = [&](std::size_t step) {
    mean = run.replicas.mean();
    const double dv = std::isfinite(dv_max) ? dv_max : 0.0;
    AsyncRecord r;
    r.metrics = compute_metrics(step, second_moment(run.replicas.swarm.positions), mean, cfg.lambda_reg, dv);
    r.disagreement = disagreement(run.replicas);
    run.records.push_back(std::move(r));
    dv_max = -INFINITY;
  };
  record(0);

  for (std::size_t k = 1; k <= steps; ++k) {
    const auto rep = async_step(run.replicas, topo, cfg, rng);
    run.projection_failures += rep.projection_failures;
    mean += rep.mean_shift;
    const double v = lyapunov(mean);
    dv_max = std::max(dv_max, v - v_prev);
    v_prev = v;
    bool blown = diverged(run.replicas.weights[rep.agent]);
    for (auto j : topo.neighbors[rep.agent]) blown = blown || diverged(run.replicas.weights[j]);
    if (blown) {
      run.halted = true;
      record(k);
      break;
    }
    if (is_record_step(k, metrics_every, steps)) {
      record(k);
      v_prev = lyapunov(mean);
    }
  }
  return run;
}

}  // namespace dcrl
