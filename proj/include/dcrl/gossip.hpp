#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dcrl/dynamics.hpp"
#include "dcrl/geometry.hpp"
#include "dcrl/metrics.hpp"
#include "dcrl/numerics.hpp"

namespace dcrl {

enum class TopologyKind { Ring, Complete, RandomRegular, Custom };

std::string to_string(TopologyKind kind);
TopologyKind topology_kind_from_string(const std::string& name);

struct GossipTopology {
  TopologyKind kind = TopologyKind::Custom;
  std::vector<std::vector<std::size_t>> neighbors;
  Matrix mixing;  // doubly stochastic Metropolis weights
  std::size_t max_degree = 0;

  std::size_t size() const noexcept { return neighbors.size(); }
};

/// Metropolis weights p_ij = 1/(1 + max(deg_i, deg_j)) on edges, remainder on the
/// diagonal. Throws TopologyError for a disconnected or malformed graph.
GossipTopology build_mixing(const std::vector<std::vector<std::size_t>>& neighbors);
GossipTopology ring_topology(std::size_t n);
GossipTopology complete_topology(std::size_t n);
GossipTopology random_regular_topology(std::size_t n, std::size_t degree, SeededRng& rng);

/// Second-largest singular value of P (consensus contraction factor).
double second_singular_value(const Matrix& p);

struct ReplicaSet {
  std::vector<Matrix> weights;  // W_i, each m × n
  Swarm swarm;                  // x_i rows

  std::size_t size() const noexcept { return weights.size(); }
  Matrix mean() const;
};

struct AsyncStepReport {
  std::size_t agent = 0;
  std::size_t projection_failures = 0;
  Matrix mean_shift;  // change of the replica mean caused by this activation
};

/// One A-DCRL activation: a uniformly chosen agent i takes a Langevin step and a
/// single-sample Oja step, then every j in S = N_c(i) ∪ {i} mixes
/// W_j ← W_j + Σ_{ℓ∈S} p_jℓ (W_ℓ − W_j) on the values before mixing.
AsyncStepReport async_step(ReplicaSet& replicas, const GossipTopology& topo, const DynamicsConfig& cfg,
                           SeededRng& rng);

/// Global round W ← P W applied to all replicas simultaneously.
void mix_round(ReplicaSet& replicas, const GossipTopology& topo);

/// max over pairs of ||W_i − W_j||_F.
double disagreement(const ReplicaSet& replicas);

struct AsyncRecord {
  MetricsRecord metrics;  // computed on the replica mean
  double disagreement = 0.0;
};

struct AsyncRun {
  ReplicaSet replicas;
  std::vector<AsyncRecord> records;
  bool halted = false;
  std::size_t projection_failures = 0;
};

/// K activations from the given initial replicas. Records are taken at the
/// steps selected by is_record_step; dV is the largest one-activation change of
/// V(W̄) since the previous record. Halts when any replica trips the divergence guard.
AsyncRun run_async(ReplicaSet initial, const GossipTopology& topo, const DynamicsConfig& cfg, SeededRng& rng,
                   std::size_t steps, std::size_t metrics_every);

}  // namespace dcrl
