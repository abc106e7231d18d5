#include "dcrl/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcrl/error.hpp"

namespace dcrl {

double linear_probe(const Matrix& features, const std::vector<int>& labels, const ProbeOptions& opt) {
  const std::size_t n = features.rows(), dim = features.cols();
  if (labels.size() != n) throw DimensionError("linear_probe: one label per row required");
  if (opt.folds < 2) throw InputError("linear_probe: at least two folds required");
  if (n < 10 * opt.folds) throw InputError("linear_probe: need at least 10 samples per fold");
  const int max_label = *std::max_element(labels.begin(), labels.end());
  if (*std::min_element(labels.begin(), labels.end()) < 0) throw InputError("linear_probe: negative label");
  const auto classes = static_cast<std::size_t>(max_label) + 1;
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  const auto present = std::count_if(by_class.begin(), by_class.end(), [](const auto& v) { return !v.empty(); });
  if (present < 2) throw InputError("linear_probe: degenerate labels (single class)");

  // Stratified fold assignment: shuffle within each class, then deal round-robin.
  SeededRng rng(opt.seed);
  std::vector<std::size_t> fold(n);
  for (auto& members : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    for (std::size_t k = 0; k < members.size(); ++k) fold[members[k]] = k % opt.folds;
  }

  const std::size_t d1 = dim + 1;
  double total_acc = 0.0;
  for (std::size_t f = 0; f < opt.folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);

    std::vector<double> mu(dim, 0.0), sd(dim, 0.0);
    for (auto i : train)
      for (std::size_t k = 0; k < dim; ++k) mu[k] += features(i, k);
    for (auto& v : mu) v /= static_cast<double>(train.size());
    for (auto i : train)
      for (std::size_t k = 0; k < dim; ++k) sd[k] += (features(i, k) - mu[k]) * (features(i, k) - mu[k]);
    for (auto& v : sd) v = std::sqrt(v / static_cast<double>(train.size())) + 1e-12;

    Matrix a(n, d1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < dim; ++k) a(i, k) = (features(i, k) - mu[k]) / sd[k];
      a(i, dim) = 1.0;
    }

    Matrix theta(d1, classes), grad(d1, classes);
    std::vector<double> z(classes);
    const double inv_train = 1.0 / static_cast<double>(train.size());
    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
      for (std::size_t k = 0; k < grad.size(); ++k) grad.data()[k] = opt.l2 * theta.data()[k];
      for (auto i : train) {
        auto ai = a.row(i);
        double zmax = -INFINITY;
        for (std::size_t c = 0; c < classes; ++c) {
          double s = 0.0;
          for (std::size_t k = 0; k < d1; ++k) s += ai[k] * theta(k, c);
          z[c] = s;
          zmax = std::max(zmax, s);
        }
        double norm = 0.0;
        for (auto& v : z) norm += (v = std::exp(v - zmax));
        for (std::size_t c = 0; c < classes; ++c) {
          const double r = (z[c] / norm - (labels[i] == static_cast<int>(c) ? 1.0 : 0.0)) * inv_train;
          for (std::size_t k = 0; k < d1; ++k) grad(k, c) += r * ai[k];
        }
      }
      for (std::size_t k = 0; k < theta.size(); ++k) theta.data()[k] -= opt.learning_rate * grad.data()[k];
    }

    std::size_t correct = 0;
    for (auto i : test) {
      auto ai = a.row(i);
      std::size_t best = 0;
      double best_s = -INFINITY;
      for (std::size_t c = 0; c < classes; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < d1; ++k) s += ai[k] * theta(k, c);
        if (s > best_s) {
          best_s = s;
          best = c;
        }
      }
      if (static_cast<int>(best) == labels[i]) ++correct;
    }
    total_acc += static_cast<double>(correct) / static_cast<double>(test.size());
  }
  return total_acc / static_cast<double>(opt.folds);
}

std::vector<int> swiss_roll_band_labels(const Swarm& swarm, int bands) {
  if (swarm.manifold.kind != ManifoldKind::SwissRoll) throw CapabilityError("band labels need a swiss roll swarm");
  if (bands < 1) throw InputError("band count must be positive");
  const double total = swiss_roll_arc_length(swarm.manifold, swarm.manifold.roll_t_max);
  std::vector<int> labels(swarm.size());
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    const auto p = project_with_params(swarm.manifold, swarm.positions.row(i));
    const double s = swiss_roll_arc_length(swarm.manifold, p.params[0]) / total;
    labels[i] = std::min(bands - 1, static_cast<int>(s * bands));
  }
  return labels;
}

}  // namespace dcrl
