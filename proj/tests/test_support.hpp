#pragma once

// Shared fixtures and independent oracles for the test suites. The
// oracles deliberately avoid the library code paths they are used to
// check (naive loops, exhaustive grid scans, pairwise counting).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "ocshield/attack.hpp"
#include "ocshield/harness.hpp"
#include "ocshield/model.hpp"
#include "ocshield/ocspace.hpp"

namespace testsupport {

using ocshield::Matrix;
namespace model = ocshield::model;
namespace ocspace = ocshield::ocspace;

// Two trees on three features; tree 0's leaves 0 and 1 need f0 < 3 while
// tree 1's leaves 2 and 3 need f0 >= 4, so exactly the four cross pairs
// are infeasible (12 - 4 = 8 feasible configurations).
inline constexpr const char* kDemoModelJson = R"json({
  "aggregation": "sum_logistic",
  "base_score": 0.0,
  "n_features": 3,
  "trees": [
    {"feature": 0, "threshold": 3.0,
     "left": {"feature": 1, "threshold": 2.0,
              "left": {"value": 0.8}, "right": {"value": -0.6}},
     "right": {"value": 0.4}},
    {"feature": 0, "threshold": 4.0,
     "left": {"feature": 2, "threshold": 9.0,
              "left": {"value": -0.5}, "right": {"value": 0.7}},
     "right": {"feature": 2, "threshold": 5.0,
               "left": {"value": -0.9}, "right": {"value": 0.3}}}
  ]
})json";

inline model::Ensemble demo_model() { return model::parse_model(kDemoModelJson); }

inline model::Ensemble constant_model(double value, std::size_t n_trees,
                                      std::size_t n_features,
                                      model::Aggregation agg = model::Aggregation::SumLogistic) {
    std::vector<model::Tree> trees;
    for (std::size_t m = 0; m < n_trees; ++m) {
        model::Node leaf;
        leaf.value = value;
        trees.emplace_back(std::vector<model::Node>{leaf});
    }
    return model::Ensemble(std::move(trees), 0.0, agg, n_features);
}

// Random tree whose thresholds are multiples of `step` strictly inside
// (0,1); grid oracles rely on that alignment. Thresholds are drawn
// inside the path's remaining tick interval, so no branch is dead and
// every leaf region within the unit cube is at least one grid cell wide.
inline std::vector<model::Node> random_tree_nodes(std::mt19937_64& rng, std::size_t d,
                                                  std::size_t max_depth,
                                                  double step = 1e-3) {
    const auto ticks = static_cast<long>(std::llround(1.0 / step));
    std::vector<std::pair<long, long>> bounds(d, {0, ticks});
    std::vector<model::Node> nodes;
    auto grow = [&](auto&& self, std::size_t depth) -> std::int32_t {
        const auto idx = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();
        std::vector<std::size_t> candidates;
        for (std::size_t f = 0; f < d; ++f)
            if (bounds[f].second - bounds[f].first >= 2) candidates.push_back(f);
        std::bernoulli_distribution make_leaf(depth == 0 ? 0.1 : 0.3);
        if (depth >= max_depth || candidates.empty() || make_leaf(rng)) {
            std::uniform_real_distribution<double> value(-1.0, 1.0);
            nodes[static_cast<std::size_t>(idx)].value = value(rng);
            return idx;
        }
        std::uniform_int_distribution<std::size_t> feat(0, candidates.size() - 1);
        const std::size_t feature = candidates[feat(rng)];
        std::uniform_int_distribution<long> tick(bounds[feature].first + 1,
                                                 bounds[feature].second - 1);
        const long t = tick(rng);
        // same division the grid oracles use, so thresholds and grid
        // points are bit-identical doubles
        const double threshold = static_cast<double>(t) / static_cast<double>(ticks);

        const auto saved = bounds[feature];
        bounds[feature].second = t;
        const std::int32_t left = self(self, depth + 1);
        bounds[feature] = {t, saved.second};
        const std::int32_t right = self(self, depth + 1);
        bounds[feature] = saved;

        model::Node& n = nodes[static_cast<std::size_t>(idx)];
        n.feature = static_cast<std::int32_t>(feature);
        n.threshold = threshold;
        n.left = left;
        n.right = right;
        return idx;
    };
    grow(grow, 0);
    return nodes;
}

inline model::Ensemble random_grid_ensemble(std::mt19937_64& rng, std::size_t d,
                                            std::size_t n_trees, std::size_t max_depth,
                                            double step = 1e-3) {
    std::vector<model::Tree> trees;
    for (std::size_t m = 0; m < n_trees; ++m)
        trees.emplace_back(random_tree_nodes(rng, d, max_depth, step));
    return model::Ensemble(std::move(trees), 0.0, model::Aggregation::SumLogistic, d);
}

// ------------------------------------------------------------- oracles

inline std::uint32_t naive_hamming(std::span<const std::uint8_t> a,
                                   std::span<const std::uint8_t> b) {
    std::uint32_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i] ? 1 : 0;
    return n;
}

// O(n^2) pairwise comparison: P(adv > normal) + 0.5 P(tie).
inline double pairwise_auc(std::span<const std::pair<double, bool>> scores) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (const auto& [sa, aa] : scores) {
        if (!aa) continue;
        for (const auto& [sn, an] : scores) {
            if (an) continue;
            ++pairs;
            if (sa > sn)
                wins += 1.0;
            else if (sa == sn)
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// Full pass over the {0, step, ..., 1} grid: the distinct leaf paths and,
// when `from` is given (grid indices), the minimal grid distance (in
// steps) to a point whose predicted label differs from the label at
// `from`. Uses only evaluate/leaf_path.
struct GridScanResult {
    std::set<std::vector<std::uint8_t>> paths;
    long min_flip_steps = -1; // -1: no flip on the grid
};

inline GridScanResult scan_grid(const model::Ensemble& e, long steps,
                                const std::vector<long>* from = nullptr) {
    const std::size_t d = e.n_features();
    const std::size_t m = e.tree_count();
    const double denom = static_cast<double>(steps);
    GridScanResult out;

    std::vector<long> idx(d, 0);
    std::vector<double> x(d, 0.0);
    int from_label = 0;
    if (from) {
        for (std::size_t f = 0; f < d; ++f) x[f] = static_cast<double>((*from)[f]) / denom;
        from_label = e.evaluate(x).label;
    }

    // inline descend into a reusable buffer; consecutive grid points
    // usually share a configuration, so only changes hit the set
    std::vector<std::uint8_t> oc(m, 0), last;
    for (;;) {
        for (std::size_t f = 0; f < d; ++f) x[f] = static_cast<double>(idx[f]) / denom;
        double sum = 0.0;
        for (std::size_t t = 0; t < m; ++t) {
            const auto& tree = e.tree(t);
            std::int32_t node = 0;
            while (!tree.node(static_cast<std::size_t>(node)).is_leaf()) {
                const auto& n = tree.node(static_cast<std::size_t>(node));
                node = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                            : n.right;
            }
            oc[t] = tree.node(static_cast<std::size_t>(node)).leaf_id;
            sum += tree.node(static_cast<std::size_t>(node)).value;
        }
        if (oc != last) {
            out.paths.insert(oc);
            last = oc;
        }
        if (from && e.predict_from_leaf_sum(sum).label != from_label) {
            long dist = 0;
            for (std::size_t f = 0; f < d; ++f)
                dist = std::max(dist, std::abs(idx[f] - (*from)[f]));
            if (out.min_flip_steps < 0 || dist < out.min_flip_steps)
                out.min_flip_steps = dist;
        }
        std::size_t f = 0;
        while (f < d && ++idx[f] > steps) idx[f++] = 0;
        if (f == d) break;
    }
    return out;
}

inline std::vector<double> grid_point(const std::vector<long>& idx, long steps) {
    std::vector<double> x(idx.size());
    for (std::size_t f = 0; f < idx.size(); ++f)
        x[f] = static_cast<double>(idx[f]) / static_cast<double>(steps);
    return x;
}

// Trapezoid area under the ROC implied by a coverage/detection curve:
// x = 1 - coverage (false positive rate), y = detection rate.
inline double trapezoid_roc_area(std::span<const ocshield::harness::CurvePoint> curve) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(curve.size());
    for (const auto& p : curve) pts.emplace_back(1.0 - p.coverage, p.detection_rate);
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        area += (pts[i].first - pts[i - 1].first) * 0.5 *
                (pts[i].second + pts[i - 1].second);
    return area;
}

} // namespace testsupport
