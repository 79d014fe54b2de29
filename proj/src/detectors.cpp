#include "ocshield/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ocshield/rng.hpp"

namespace ocshield::detectors {

DetectorScore score_ocscore(const model::Ensemble& e, const ocspace::ReferenceSet& r,
                            std::span<const double> x) {
    const model::Prediction pred = e.evaluate(x);
    const ocspace::OutputConfig oc(e.leaf_path(x));
    return {"ocscore", static_cast<double>(ocspace::oc_score_simd(r, oc, pred.label))};
}

DetectorScore score_ambiguity(const model::Ensemble& e, std::span<const double> x) {
    const double p = e.evaluate(x).prob;
    return {"ambig", 1.0 - std::abs(2.0 * p - 1.0)};
}

DetectorScore score_mlloo(const model::Ensemble& e, std::span<const double> x) {
    const double p = e.evaluate(x).prob;
    std::vector<double> attribution(x.size());
    std::vector<double> probe(x.begin(), x.end());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double saved = probe[k];
        probe[k] = 0.0;
        attribution[k] = p - e.evaluate(probe).prob;
        probe[k] = saved;
    }
    const double n = static_cast<double>(attribution.size());
    const double mean = std::accumulate(attribution.begin(), attribution.end(), 0.0) / n;
    double var = 0.0;
    for (double a : attribution) var += (a - mean) * (a - mean);
    return {"mlloo", std::sqrt(var / n)}; // population std
}

// ---------------------------------------------------------------- iforest

double average_path_length(std::size_t n) {
    if (n <= 1) return 0.0;
    // exact harmonic number; subsample sizes are small
    double harmonic = 0.0;
    for (std::size_t i = 1; i < n; ++i) harmonic += 1.0 / static_cast<double>(i);
    const double dn = static_cast<double>(n);
    return 2.0 * harmonic - 2.0 * (dn - 1.0) / dn;
}

IsolationForest IsolationForest::fit(const Matrix& X, const Config& cfg) {
    if (X.rows < 2)
        raise(ErrorCode::TooFewExamples, "isolation forest needs at least 2 rows");
    if (cfg.n_trees == 0)
        raise(ErrorCode::InvalidArgument, "n_trees must be positive");

    bool any_distinct = false;
    for (std::size_t i = 1; i < X.rows && !any_distinct; ++i)
        for (std::size_t f = 0; f < X.cols; ++f)
            if (X.at(i, f) != X.at(0, f)) {
                any_distinct = true;
                break;
            }
    if (!any_distinct)
        raise(ErrorCode::DegenerateData, "all rows identical");

    IsolationForest forest;
    forest.subsample_ = std::min(cfg.subsample, X.rows);
    forest.normalizer_ = average_path_length(forest.subsample_);
    const auto depth_cap = static_cast<std::size_t>(
        std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(forest.subsample_, 2)))));

    forest.trees_.resize(cfg.n_trees);
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        auto rng = make_rng(derive_seed(cfg.seed, t)); // per-tree seed split

        // uniform subsample without replacement (partial Fisher-Yates)
        std::vector<std::uint32_t> pool(X.rows);
        std::iota(pool.begin(), pool.end(), 0);
        for (std::size_t i = 0; i < forest.subsample_; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        pool.resize(forest.subsample_);

        std::vector<INode>& tree = forest.trees_[t];
        auto grow = [&](auto&& self, std::vector<std::uint32_t> rows,
                        std::size_t depth) -> std::int32_t {
            const auto idx = static_cast<std::int32_t>(tree.size());
            tree.emplace_back();
            tree.back().n = static_cast<std::uint32_t>(rows.size());
            if (rows.size() <= 1 || depth >= depth_cap) return idx;

            // Draw a feature with a non-constant range; constant draws
            // are rejected and redrawn. If every feature is constant the
            // node becomes a leaf.
            std::vector<std::size_t> candidates(X.cols);
            std::iota(candidates.begin(), candidates.end(), 0);
            std::size_t feature = 0;
            double lo = 0.0, hi = 0.0;
            bool found = false;
            while (!candidates.empty()) {
                std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
                const std::size_t slot = pick(rng);
                feature = candidates[slot];
                lo = hi = X.at(rows[0], feature);
                for (std::uint32_t r : rows) {
                    lo = std::min(lo, X.at(r, feature));
                    hi = std::max(hi, X.at(r, feature));
                }
                if (lo < hi) {
                    found = true;
                    break;
                }
                candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(slot));
            }
            if (!found) return idx;

            std::uniform_real_distribution<double> split(lo, hi);
            const double threshold = split(rng);
            std::vector<std::uint32_t> left_rows, right_rows;
            for (std::uint32_t r : rows)
                (X.at(r, feature) < threshold ? left_rows : right_rows).push_back(r);
            if (left_rows.empty() || right_rows.empty()) return idx; // degenerate draw
            rows.clear();

            const std::int32_t l = self(self, std::move(left_rows), depth + 1);
            const std::int32_t rgt = self(self, std::move(right_rows), depth + 1);
            tree[static_cast<std::size_t>(idx)].feature = static_cast<std::int32_t>(feature);
            tree[static_cast<std::size_t>(idx)].threshold = threshold;
            tree[static_cast<std::size_t>(idx)].left = l;
            tree[static_cast<std::size_t>(idx)].right = rgt;
            return idx;
        };
        grow(grow, pool, 0);
    }
    return forest;
}

double IsolationForest::path_length(const std::vector<INode>& tree,
                                    std::span<const double> x) const {
    std::int32_t idx = 0;
    double depth = 0.0;
    while (tree[static_cast<std::size_t>(idx)].feature >= 0) {
        const INode& n = tree[static_cast<std::size_t>(idx)];
        idx = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
        depth += 1.0;
    }
    // external node holding n > 1 rows contributes the average subtree depth
    return depth + average_path_length(tree[static_cast<std::size_t>(idx)].n);
}

double IsolationForest::anomaly_score(std::span<const double> x) const {
    double total = 0.0;
    for (const auto& tree : trees_) total += path_length(tree, x);
    const double mean_path = total / static_cast<double>(trees_.size());
    return std::exp2(-mean_path / normalizer_);
}

DetectorScore IsolationForest::score(std::span<const double> x) const {
    return {"iforest", anomaly_score(x)};
}

} // namespace ocshield::detectors
