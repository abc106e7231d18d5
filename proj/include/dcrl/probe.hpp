#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dcrl/geometry.hpp"
#include "dcrl/numerics.hpp"

namespace dcrl {

struct ProbeOptions {
  std::size_t folds = 5;
  std::size_t epochs = 500;
  double learning_rate = 0.5;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
};

/// Mean held-out accuracy of a multinomial logistic-regression probe over
/// stratified folds. Features are standardized with training-fold statistics.
/// Throws InputError for a single class or N < 10·folds.
double linear_probe(const Matrix& features, const std::vector<int>& labels, const ProbeOptions& options = {});

/// Class index of each agent from equal arc-length bands of the Swiss roll spiral.
std::vector<int> swiss_roll_band_labels(const Swarm& swarm, int bands);

}  // namespace dcrl
