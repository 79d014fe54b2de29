#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ocshield/errors.hpp"

namespace ocshield::model {

constexpr std::size_t kMaxLeavesPerTree = 256; // byte leaf identifiers
constexpr std::size_t kMaxTrees = 255;         // byte mismatch accumulator in the scan kernel

enum class Aggregation {
    SumLogistic, // raw = base_score + sum of leaf values, prob = logistic(raw)
    AverageProb, // raw = prob = mean of leaf values in [0,1]
};

inline double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

/// Flat tree node. Leaves have feature < 0 and carry a value plus the
/// depth-first leaf identifier; internal nodes carry the split.
struct Node {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
    std::uint8_t leaf_id = 0;

    bool is_leaf() const { return feature < 0; }
};

/// Half-open interval [lo, hi). Empty iff lo >= hi.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool empty() const { return !(lo < hi); }
    bool contains(double v) const { return v >= lo && v < hi; }

    // Distance from v to the closure [lo, hi]; 0 when inside.
    double distance(double v) const {
        if (v < lo) return lo - v;
        if (v > hi) return v - hi;
        return 0.0;
    }
};

/// Axis-aligned box of per-feature half-open intervals. The boxes of one
/// tree's leaves partition the input space.
struct LeafBox {
    std::vector<Interval> intervals;

    LeafBox() = default;
    explicit LeafBox(std::size_t n_features) : intervals(n_features) {}

    static LeafBox full(std::size_t n_features) { return LeafBox(n_features); }

    // [lo, hi + ulp) per feature, so values equal to hi are still inside.
    static LeafBox closed_cube(std::size_t n_features, double lo, double hi);

    std::size_t size() const { return intervals.size(); }
    bool empty() const;
    bool contains(std::span<const double> x) const;

    /// Shrink to the intersection with `other`; returns false if any
    /// interval becomes empty (the box contents are then unspecified).
    bool intersect_inplace(const LeafBox& other);

    /// L-infinity distance from x to the closure of the box.
    double distance(std::span<const double> x) const;
};

/// Binary decision tree with axis-parallel splits. Routing rule: go left
/// iff x[feature] < threshold, so a left branch tightens hi and a right
/// branch tightens lo of the leaf box ([lo, hi) semantics).
class Tree {
public:
    /// Takes ownership of a flat node array whose root is index 0,
    /// validates the shape, and assigns depth-first leaf identifiers
    /// (left subtree before right). Throws MalformedModel / LimitExceeded.
    explicit Tree(std::vector<Node> nodes);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const { return leaf_values_.size(); }
    const Node& node(std::size_t i) const { return nodes_[i]; }
    std::int32_t root() const { return 0; }

    /// Index of the leaf node reached by x.
    std::int32_t descend(std::span<const double> x) const;
    std::uint8_t leaf_for(std::span<const double> x) const {
        return nodes_[static_cast<std::size_t>(descend(x))].leaf_id;
    }

    double leaf_value(std::uint8_t leaf_id) const { return leaf_values_[leaf_id]; }
    double min_leaf_value() const { return node_min_[0]; }
    double max_leaf_value() const { return node_max_[0]; }

    /// Smallest / largest leaf value reachable from a node; search code
    /// uses these for branch-and-bound pruning.
    double subtree_min(std::size_t node) const { return node_min_[node]; }
    double subtree_max(std::size_t node) const { return node_max_[node]; }

private:
    std::vector<Node> nodes_;
    std::vector<double> leaf_values_; // indexed by leaf_id
    std::vector<double> node_min_, node_max_;
};

/// Box of every leaf, indexed by leaf_id: the intersection of the split
/// constraints on the root-to-leaf path.
std::vector<LeafBox> leaf_boxes(const Tree& tree, std::size_t n_features);

struct Prediction {
    double raw = 0.0;
    double prob = 0.0;
    int label = 0; // [prob >= 0.5]
};

/// Additive ensemble of binary trees. Immutable after construction; safe
/// for concurrent reads.
class Ensemble {
public:
    Ensemble(std::vector<Tree> trees, double base_score, Aggregation aggregation,
             std::size_t n_features);

    std::size_t tree_count() const { return trees_.size(); }
    const Tree& tree(std::size_t m) const { return trees_[m]; }
    std::size_t n_features() const { return n_features_; }
    double base_score() const { return base_score_; }
    Aggregation aggregation() const { return aggregation_; }

    Prediction evaluate(std::span<const double> x) const;

    /// Byte vector of reached leaf identifiers, one per tree.
    std::vector<std::uint8_t> leaf_path(std::span<const double> x) const;

    /// Prediction implied by a precomputed sum of reached leaf values
    /// (summed in tree order). evaluate() routes through this, so any
    /// caller that reproduces the same sum gets the identical label.
    Prediction predict_from_leaf_sum(double leaf_sum) const;

private:
    void check_input(std::span<const double> x) const;

    std::vector<Tree> trees_;
    double base_score_;
    Aggregation aggregation_;
    std::size_t n_features_;
};

/// Parse the JSON model format:
///   {"aggregation": "sum_logistic"|"average_prob", "base_score": number,
///    "n_features": int, "trees": [node...]}
/// where node is {"feature": int, "threshold": number, "left": node,
/// "right": node} or {"value": number}.
Ensemble parse_model(std::string_view json_text);

/// Inverse of parse_model (modulo whitespace); round-trips to an
/// evaluation-identical ensemble.
std::string serialize_model(const Ensemble& ensemble);

Ensemble load_model_file(const std::string& path);
void save_model_file(const Ensemble& ensemble, const std::string& path);

} // namespace ocshield::model
