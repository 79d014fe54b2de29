#pragma once

#include <cstdint>
#include <vector>

#include "ocshield/data.hpp"
#include "ocshield/model.hpp"

namespace ocshield::trainer {

enum class Mode {
    Boosting, // stagewise logistic boosting, sum_logistic output
    Forest,   // bagged Gini trees, average_prob output
};

struct TrainConfig {
    std::size_t n_trees = 20;
    std::size_t max_depth = 4; // at most 8 (keeps leaf count within a byte)
    double learning_rate = 0.3;
    Mode mode = Mode::Boosting;
    std::uint64_t seed = 0;
    std::size_t min_samples_leaf = 1;
};

/// Train a small binary-classification ensemble. Exact greedy splits,
/// deterministic under the seed; ties between equal-gain splits go to the
/// lowest feature index, then the lowest threshold.
model::Ensemble train(const Matrix& X, const std::vector<int>& y, const TrainConfig& cfg);

} // namespace ocshield::trainer
