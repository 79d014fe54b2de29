#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ocshield/data.hpp"
#include "ocshield/model.hpp"
#include "ocshield/ocspace.hpp"

namespace ocshield::detectors {

/// Detector output; higher score means more likely adversarial for every
/// detector in this module.
struct DetectorScore {
    std::string name;
    double value = 0.0;
};

/// Minimum OC-space Hamming distance to the reference rows sharing the
/// example's predicted label.
DetectorScore score_ocscore(const model::Ensemble& e, const ocspace::ReferenceSet& r,
                            std::span<const double> x);

/// 1 - |2 p(x) - 1|: maximal at the decision boundary, 0 for certain
/// predictions.
DetectorScore score_ambiguity(const model::Ensemble& e, std::span<const double> x);

/// Population standard deviation of the leave-one-feature-out prediction
/// changes p(x) - p(x with feature k zeroed). Expects min-max normalized
/// features, so 0 is each feature's training minimum.
DetectorScore score_mlloo(const model::Ensemble& e, std::span<const double> x);

/// Isolation forest grown on uniform subsamples with random splits;
/// shallow isolation depth marks anomalies.
class IsolationForest {
public:
    struct Config {
        std::size_t n_trees = 100;
        std::size_t subsample = 256;
        std::uint64_t seed = 0;
    };

    static IsolationForest fit(const Matrix& X, const Config& cfg);

    /// 2^(-E[h(x)] / c(subsample)), in (0, 1); higher is more anomalous.
    double anomaly_score(std::span<const double> x) const;
    DetectorScore score(std::span<const double> x) const;

    std::size_t tree_count() const { return trees_.size(); }
    std::size_t subsample_size() const { return subsample_; }

private:
    struct INode {
        std::int32_t feature = -1; // leaf when negative
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t n = 0; // subsample rows at this node
    };

    double path_length(const std::vector<INode>& tree, std::span<const double> x) const;

    std::vector<std::vector<INode>> trees_;
    std::size_t subsample_ = 0;
    double normalizer_ = 1.0; // c(subsample)
};

/// Average unsuccessful-search path length c(n) = 2 H(n-1) - 2 (n-1)/n,
/// with c(0) = c(1) = 0.
double average_path_length(std::size_t n);

} // namespace ocshield::detectors
