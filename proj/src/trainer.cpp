#include "ocshield/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ocshield/rng.hpp"

namespace ocshield::trainer {

namespace {

using model::Node;

constexpr double kMinGain = 1e-12;

struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

// Per-node sample view: for every feature, the node's sample indices
// sorted by that feature's value. Children reuse the parent's order via a
// stable partition, so sorting happens once per tree.
using SortedLists = std::vector<std::vector<std::uint32_t>>;

SortedLists sorted_lists_for(const Matrix& X, const std::vector<std::uint32_t>& samples) {
    SortedLists lists(X.cols);
    for (std::size_t f = 0; f < X.cols; ++f) {
        lists[f] = samples;
        std::stable_sort(lists[f].begin(), lists[f].end(),
                         [&](std::uint32_t a, std::uint32_t b) {
                             return X.at(a, f) < X.at(b, f);
                         });
    }
    return lists;
}

void partition_lists(const Matrix& X, const SortedLists& lists, std::size_t feature,
                     double threshold, SortedLists& left, SortedLists& right) {
    left.assign(lists.size(), {});
    right.assign(lists.size(), {});
    for (std::size_t f = 0; f < lists.size(); ++f) {
        for (std::uint32_t idx : lists[f]) {
            if (X.at(idx, feature) < threshold)
                left[f].push_back(idx);
            else
                right[f].push_back(idx);
        }
    }
}

// Candidate thresholds are midpoints between consecutive distinct values;
// if rounding collapses the midpoint onto the lower value, the upper value
// itself is used (x < t still separates the pair).
double split_point(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return lo < mid ? mid : hi;
}

// ------------------------------------------------------------- boosting

struct BoostTreeBuilder {
    const Matrix& X;
    const std::vector<double>& residual; // y - p
    const std::vector<double>& hessian;  // p (1 - p)
    const TrainConfig& cfg;
    std::vector<Node> nodes;

    Split best_split(const SortedLists& lists) const {
        const auto& any = lists[0];
        const double n = static_cast<double>(any.size());
        double total = 0.0;
        for (std::uint32_t idx : any) total += residual[idx];
        const double parent = total * total / n;

        Split best;
        for (std::size_t f = 0; f < lists.size(); ++f) {
            const auto& order = lists[f];
            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                left_sum += residual[order[i]];
                const double lo = X.at(order[i], f);
                const double hi = X.at(order[i + 1], f);
                if (!(lo < hi)) continue;
                const auto n_left = static_cast<double>(i + 1);
                const double n_right = n - n_left;
                if (n_left < static_cast<double>(cfg.min_samples_leaf) ||
                    n_right < static_cast<double>(cfg.min_samples_leaf))
                    continue;
                const double right_sum = total - left_sum;
                const double gain =
                    left_sum * left_sum / n_left + right_sum * right_sum / n_right - parent;
                if (gain > best.gain + kMinGain && gain > kMinGain) {
                    best = {true, f, split_point(lo, hi), gain};
                }
            }
        }
        return best;
    }

    std::int32_t build(SortedLists lists, std::size_t depth) {
        const auto idx = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();

        Split split;
        if (depth < cfg.max_depth && lists[0].size() >= 2 * cfg.min_samples_leaf)
            split = best_split(lists);

        if (!split.found) {
            double num = 0.0, den = 0.0;
            for (std::uint32_t i : lists[0]) {
                num += residual[i];
                den += hessian[i];
            }
            // Newton step on the logistic loss, lambda = 1 for stability.
            nodes[static_cast<std::size_t>(idx)].value =
                cfg.learning_rate * num / (den + 1.0);
            return idx;
        }

        SortedLists left, right;
        partition_lists(X, lists, split.feature, split.threshold, left, right);
        lists.clear();
        const std::int32_t l = build(std::move(left), depth + 1);
        const std::int32_t r = build(std::move(right), depth + 1);
        Node& n = nodes[static_cast<std::size_t>(idx)];
        n.feature = static_cast<std::int32_t>(split.feature);
        n.threshold = split.threshold;
        n.left = l;
        n.right = r;
        return idx;
    }
};

model::Ensemble train_boosting(const Matrix& X, const std::vector<int>& y,
                               const TrainConfig& cfg) {
    const std::size_t n = X.rows;
    std::vector<double> raw(n, 0.0), residual(n), hessian(n);
    std::vector<std::uint32_t> all(n);
    std::iota(all.begin(), all.end(), 0);

    std::vector<model::Tree> trees;
    trees.reserve(cfg.n_trees);
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = model::logistic(raw[i]);
            residual[i] = static_cast<double>(y[i]) - p;
            hessian[i] = p * (1.0 - p);
        }
        BoostTreeBuilder builder{X, residual, hessian, cfg, {}};
        builder.build(sorted_lists_for(X, all), 0);
        trees.emplace_back(std::move(builder.nodes));
        const model::Tree& tree = trees.back();
        for (std::size_t i = 0; i < n; ++i)
            raw[i] += tree.node(static_cast<std::size_t>(tree.descend(X.row(i)))).value;
    }
    return model::Ensemble(std::move(trees), 0.0, model::Aggregation::SumLogistic,
                           X.cols);
}

// --------------------------------------------------------------- forest

struct GiniTreeBuilder {
    const Matrix& X;
    const std::vector<int>& y;
    const TrainConfig& cfg;
    std::vector<Node> nodes;

    Split best_split(const SortedLists& lists) const {
        const auto& any = lists[0];
        const double n = static_cast<double>(any.size());
        double total_pos = 0.0;
        for (std::uint32_t idx : any) total_pos += y[idx];
        const double total_neg = n - total_pos;
        if (total_pos == 0.0 || total_neg == 0.0) return {}; // pure node
        const double parent = (total_pos * total_pos + total_neg * total_neg) / n;

        Split best;
        for (std::size_t f = 0; f < lists.size(); ++f) {
            const auto& order = lists[f];
            double left_pos = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                left_pos += y[order[i]];
                const double lo = X.at(order[i], f);
                const double hi = X.at(order[i + 1], f);
                if (!(lo < hi)) continue;
                const auto n_left = static_cast<double>(i + 1);
                const double n_right = n - n_left;
                if (n_left < static_cast<double>(cfg.min_samples_leaf) ||
                    n_right < static_cast<double>(cfg.min_samples_leaf))
                    continue;
                const double left_neg = n_left - left_pos;
                const double right_pos = total_pos - left_pos;
                const double right_neg = n_right - right_pos;
                // Equivalent to the Gini impurity decrease up to the
                // constant parent term.
                const double gain =
                    (left_pos * left_pos + left_neg * left_neg) / n_left +
                    (right_pos * right_pos + right_neg * right_neg) / n_right - parent;
                if (gain > best.gain + kMinGain && gain > kMinGain) {
                    best = {true, f, split_point(lo, hi), gain};
                }
            }
        }
        return best;
    }

    std::int32_t build(SortedLists lists, std::size_t depth) {
        const auto idx = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();

        Split split;
        if (depth < cfg.max_depth && lists[0].size() >= 2 * cfg.min_samples_leaf)
            split = best_split(lists);

        if (!split.found) {
            double pos = 0.0;
            for (std::uint32_t i : lists[0]) pos += y[i];
            nodes[static_cast<std::size_t>(idx)].value =
                pos / static_cast<double>(lists[0].size());
            return idx;
        }

        SortedLists left, right;
        partition_lists(X, lists, split.feature, split.threshold, left, right);
        lists.clear();
        const std::int32_t l = build(std::move(left), depth + 1);
        const std::int32_t r = build(std::move(right), depth + 1);
        Node& n = nodes[static_cast<std::size_t>(idx)];
        n.feature = static_cast<std::int32_t>(split.feature);
        n.threshold = split.threshold;
        n.left = l;
        n.right = r;
        return idx;
    }
};

model::Ensemble train_forest(const Matrix& X, const std::vector<int>& y,
                             const TrainConfig& cfg) {
    const std::size_t n = X.rows;
    std::vector<model::Tree> trees;
    trees.reserve(cfg.n_trees);
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        auto rng = make_rng(derive_seed(cfg.seed, t)); // per-tree seed split
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::uint32_t> bootstrap(n);
        for (auto& idx : bootstrap) idx = static_cast<std::uint32_t>(pick(rng));
        std::sort(bootstrap.begin(), bootstrap.end());

        GiniTreeBuilder builder{X, y, cfg, {}};
        builder.build(sorted_lists_for(X, bootstrap), 0);
        trees.emplace_back(std::move(builder.nodes));
    }
    return model::Ensemble(std::move(trees), 0.0, model::Aggregation::AverageProb,
                           X.cols);
}

} // namespace

model::Ensemble train(const Matrix& X, const std::vector<int>& y, const TrainConfig& cfg) {
    if (X.rows != y.size())
        raise(ErrorCode::DimensionMismatch, "X rows and y length differ");
    if (cfg.n_trees == 0 || cfg.n_trees > model::kMaxTrees)
        raise(ErrorCode::ConfigLimit, "n_trees must be in 1..255");
    if (cfg.max_depth == 0 || cfg.max_depth > 8)
        raise(ErrorCode::ConfigLimit, "max_depth must be in 1..8");
    if (cfg.min_samples_leaf == 0)
        raise(ErrorCode::ConfigLimit, "min_samples_leaf must be positive");

    std::size_t per_class[2] = {0, 0};
    for (int label : y) {
        if (label != 0 && label != 1)
            raise(ErrorCode::InvalidArgument, "labels must be binary");
        ++per_class[label];
    }
    if (per_class[0] < 2 || per_class[1] < 2)
        raise(ErrorCode::DegenerateLabels, "need at least 2 examples per class");

    return cfg.mode == Mode::Boosting ? train_boosting(X, y, cfg)
                                      : train_forest(X, y, cfg);
}

} // namespace ocshield::trainer
