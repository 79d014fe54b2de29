#include "ocshield/attack.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace ocshield::attack {

using model::Ensemble;
using model::Interval;
using model::LeafBox;
using model::Node;
using model::Tree;
using ocspace::OutputConfig;

const char* to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::Closest: return "closest";
        case AttackKind::Budget2x: return "x2";
        case AttackKind::Budget5x: return "x5";
    }
    return "?";
}

namespace {

constexpr double kBoundSlack = 1e-9; // pruning bounds only; emits are exact
constexpr double kInf = std::numeric_limits<double>::infinity();

// Leaf-value sum at which the predicted label becomes 1.
double flip_sum_threshold(const Ensemble& e) {
    if (e.aggregation() == model::Aggregation::SumLogistic) return -e.base_score();
    return 0.5 * static_cast<double>(e.tree_count());
}

// Leaf-value sum recomputed in original tree order, matching evaluate()'s
// accumulation exactly.
double leaf_sum_for(const Ensemble& e, const std::vector<std::uint8_t>& oc) {
    double sum = 0.0;
    for (std::size_t m = 0; m < e.tree_count(); ++m)
        sum += e.tree(m).leaf_value(oc[m]);
    return sum;
}

// Depth-first product over the trees with a mutable running box.
// Branches are dropped as soon as the running intersection empties.
// Before walking, each tree's per-node leaf-value range is recomputed
// against the search region, so trees the region pins down contribute
// constants to the sum bounds; the policy can prune on the tightened
// interval or on those bounds, and can reorder the two children of a
// split to reach strong incumbents early. Emitted configurations are
// independent of both the tree order and the child order.
template <class Policy>
class Walker {
public:
    Walker(const Ensemble& e, Policy& policy, std::uint64_t cap)
        : ens_(e), policy_(policy), cap_(cap) {}

    void run(const LeafBox* within) {
        box_ = LeafBox::full(ens_.n_features());
        if (within && !box_.intersect_inplace(*within)) return;

        const std::size_t m = ens_.tree_count();
        reach_min_.assign(m, {});
        reach_max_.assign(m, {});
        for (std::size_t t = 0; t < m; ++t) fill_reach(t);

        order_.resize(m);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        if (policy_.order_by_spread()) {
            // widest in-region value range first, so bounds tighten early
            std::stable_sort(order_.begin(), order_.end(),
                             [&](std::size_t a, std::size_t b) {
                                 return reach_max_[a][0] - reach_min_[a][0] >
                                        reach_max_[b][0] - reach_min_[b][0];
                             });
        } else {
            std::stable_sort(order_.begin(), order_.end(),
                             [&](std::size_t a, std::size_t b) {
                                 return ens_.tree(a).leaf_count() <
                                        ens_.tree(b).leaf_count();
                             });
        }

        suffix_min_.assign(m + 1, 0.0);
        suffix_max_.assign(m + 1, 0.0);
        for (std::size_t k = m; k-- > 0;) {
            suffix_min_[k] = suffix_min_[k + 1] + reach_min_[order_[k]][0];
            suffix_max_[k] = suffix_max_[k + 1] + reach_max_[order_[k]][0];
        }

        oc_.assign(m, 0);
        walk_level(0, 0.0);
    }

private:
    // Per-node min/max leaf value among leaves whose path is compatible
    // with the region box. Unreachable nodes keep +inf/-inf sentinels
    // (the walk never descends into them; an empty interval cuts first).
    void fill_reach(std::size_t t) {
        const Tree& tree = ens_.tree(t);
        auto& rmin = reach_min_[t];
        auto& rmax = reach_max_[t];
        rmin.assign(tree.node_count(), kInf);
        rmax.assign(tree.node_count(), -kInf);
        auto walk = [&](auto&& self, std::int32_t idx) -> void {
            const Node& n = tree.node(static_cast<std::size_t>(idx));
            const auto i = static_cast<std::size_t>(idx);
            if (n.is_leaf()) {
                rmin[i] = rmax[i] = n.value;
                return;
            }
            const auto f = static_cast<std::size_t>(n.feature);
            Interval& iv = box_.intervals[f];
            const Interval saved = iv;
            iv.hi = std::min(saved.hi, n.threshold);
            if (!iv.empty()) self(self, n.left);
            iv = saved;
            iv.lo = std::max(saved.lo, n.threshold);
            if (!iv.empty()) self(self, n.right);
            iv = saved;
            rmin[i] = std::min(rmin[static_cast<std::size_t>(n.left)],
                               rmin[static_cast<std::size_t>(n.right)]);
            rmax[i] = std::max(rmax[static_cast<std::size_t>(n.left)],
                               rmax[static_cast<std::size_t>(n.right)]);
        };
        walk(walk, 0);
    }

    void walk_level(std::size_t level, double sum) {
        if (level == ens_.tree_count()) {
            if (++emitted_ > cap_)
                raise(ErrorCode::EnumerationCapExceeded,
                      "feasible enumeration exceeded cap of " + std::to_string(cap_));
            policy_.emit(oc_, box_, sum);
            return;
        }
        const std::size_t t = order_[level];
        if (policy_.prune_bounds(sum + reach_min_[t][0] + suffix_min_[level + 1],
                                 sum + reach_max_[t][0] + suffix_max_[level + 1], box_))
            return;
        walk_node(level, 0, sum);
    }

    void walk_node(std::size_t level, std::int32_t node_idx, double sum) {
        const std::size_t t = order_[level];
        const Tree& tree = ens_.tree(t);
        const Node& n = tree.node(static_cast<std::size_t>(node_idx));
        if (n.is_leaf()) {
            oc_[t] = n.leaf_id;
            walk_level(level + 1, sum + n.value);
            return;
        }
        const auto f = static_cast<std::size_t>(n.feature);
        Interval& iv = box_.intervals[f];
        const Interval saved = iv;

        const Interval left_iv{saved.lo, std::min(saved.hi, n.threshold)};
        const Interval right_iv{std::max(saved.lo, n.threshold), saved.hi};

        struct Candidate {
            std::int32_t node = -1;
            Interval iv;
            double priority = 0.0;
        };
        const Candidate options[2] = {{n.left, left_iv, 0.0}, {n.right, right_iv, 0.0}};
        Candidate live[2];
        int n_live = 0;
        for (Candidate cand : options) {
            if (cand.iv.empty() || policy_.prune_interval(f, cand.iv)) continue;
            const auto child = static_cast<std::size_t>(cand.node);
            iv = cand.iv; // bounds check sees the box with this child applied
            const bool pruned = policy_.prune_bounds(
                sum + reach_min_[t][child] + suffix_min_[level + 1],
                sum + reach_max_[t][child] + suffix_max_[level + 1], box_);
            iv = saved;
            if (pruned) continue;
            cand.priority = policy_.child_priority(f, cand.iv, reach_min_[t][child],
                                                   reach_max_[t][child]);
            live[n_live++] = cand;
        }
        if (n_live == 2 && live[1].priority > live[0].priority) std::swap(live[0], live[1]);

        for (int k = 0; k < n_live; ++k) {
            iv = live[k].iv;
            walk_node(level, live[k].node, sum);
            iv = saved;
        }
    }

    const Ensemble& ens_;
    Policy& policy_;
    std::uint64_t cap_;
    std::uint64_t emitted_ = 0;
    std::vector<std::size_t> order_;
    std::vector<std::vector<double>> reach_min_, reach_max_;
    std::vector<double> suffix_min_, suffix_max_;
    LeafBox box_;
    std::vector<std::uint8_t> oc_;
};

struct CollectPolicy {
    const Ensemble& ens;
    const std::function<void(FeasibleOC&&)>& sink;

    bool order_by_spread() const { return false; }
    bool prune_interval(std::size_t, const Interval&) const { return false; }
    bool prune_bounds(double, double, const LeafBox&) const { return false; }
    double child_priority(std::size_t, const Interval&, double, double) const {
        return 0.0;
    }

    void emit(const std::vector<std::uint8_t>& oc, const LeafBox& box, double) const {
        FeasibleOC out;
        out.oc = OutputConfig(oc);
        out.box = box;
        out.raw = ens.predict_from_leaf_sum(leaf_sum_for(ens, oc)).raw;
        sink(std::move(out));
    }
};

// Minimum-distance flipped configuration. Admission invariant: a branch
// survives only while every tightened interval stays within best_d of x,
// so checking just the changed feature is enough.
struct ClosestPolicy {
    ClosestPolicy(const Ensemble& e, std::span<const double> point, int target,
                  double threshold)
        : ens(e), x(point), target_label(target), flip_threshold(threshold) {}

    const Ensemble& ens;
    std::span<const double> x;
    int target_label;
    double flip_threshold;

    bool found = false;
    double best_d = kInf;
    std::vector<std::uint8_t> best_oc;
    LeafBox best_box;

    bool order_by_spread() const { return true; }

    bool prune_interval(std::size_t f, const Interval& iv) const {
        return iv.distance(x[f]) > best_d;
    }

    bool prune_bounds(double min_sum, double max_sum, const LeafBox&) const {
        if (target_label == 1) return max_sum < flip_threshold - kBoundSlack;
        return min_sum >= flip_threshold + kBoundSlack;
    }

    // stay near x first so the incumbent distance drops quickly
    double child_priority(std::size_t f, const Interval& iv, double, double) const {
        return -iv.distance(x[f]);
    }

    void emit(const std::vector<std::uint8_t>& oc, const LeafBox& box, double) {
        const double sum = leaf_sum_for(ens, oc);
        if (ens.predict_from_leaf_sum(sum).label != target_label) return;
        const double d = box.distance(x);
        if (d < best_d || (d == best_d && (!found || std::lexicographical_compare(
                                                         oc.begin(), oc.end(),
                                                         best_oc.begin(), best_oc.end())))) {
            found = true;
            best_d = d;
            best_oc = oc;
            best_box = box;
        }
    }
};

// Most extreme wrong-class output within the search region. The score is
// the leaf-value sum, negated for target label 0 so that larger is always
// more confidently flipped.
struct ConfidencePolicy {
    ConfidencePolicy(const Ensemble& e, std::span<const double> point, int target,
                     double threshold)
        : ens(e), x(point), target_label(target), flip_threshold(threshold) {}

    const Ensemble& ens;
    std::span<const double> x;
    int target_label;
    double flip_threshold;

    bool found = false;
    double best_score = -kInf;
    double best_d = kInf;
    std::vector<std::uint8_t> best_oc;
    LeafBox best_box;

    bool order_by_spread() const { return true; }

    bool prune_interval(std::size_t, const Interval&) const { return false; }

    bool prune_bounds(double min_sum, double max_sum, const LeafBox& box) const {
        if (target_label == 1 && max_sum < flip_threshold - kBoundSlack) return true;
        if (target_label == 0 && min_sum >= flip_threshold + kBoundSlack) return true;
        if (!found) return false;
        const double achievable = target_label == 1 ? max_sum : -min_sum;
        if (achievable < best_score - kBoundSlack) return true;
        // Forests produce many exactly tied optima (pure leaves); a branch
        // that can at most tie the incumbent only matters if it could win
        // the smaller-distance tie-break.
        if (achievable <= best_score && box.distance(x) > best_d) return true;
        return false;
    }

    // dive toward the most confidently flipped leaves first
    double child_priority(std::size_t, const Interval&, double subtree_min,
                          double subtree_max) const {
        return target_label == 1 ? subtree_max : -subtree_min;
    }

    void emit(const std::vector<std::uint8_t>& oc, const LeafBox& box, double) {
        const double sum = leaf_sum_for(ens, oc);
        if (ens.predict_from_leaf_sum(sum).label != target_label) return;
        const double score = target_label == 1 ? sum : -sum;
        const double d = box.distance(x);
        const bool better =
            !found || score > best_score ||
            (score == best_score &&
             (d < best_d || (d == best_d &&
                             std::lexicographical_compare(oc.begin(), oc.end(),
                                                          best_oc.begin(), best_oc.end()))));
        if (better) {
            found = true;
            best_score = score;
            best_d = d;
            best_oc = oc;
            best_box = box;
        }
    }
};

// Closed L-inf ball of radius r around x as a half-open box: the upper
// bound steps one ulp above x+r so the closed ball is covered.
LeafBox ball_box(std::span<const double> x, double r) {
    LeafBox box(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) {
        box.intervals[f].lo = x[f] - r;
        box.intervals[f].hi = std::nextafter(x[f] + r, kInf);
    }
    return box;
}

// Nearest point of the box to x: clamp each coordinate, stepping one
// representable value below an open upper bound.
std::vector<double> make_witness(std::span<const double> x, const LeafBox& box) {
    std::vector<double> w(x.begin(), x.end());
    for (std::size_t f = 0; f < x.size(); ++f) {
        const Interval& iv = box.intervals[f];
        if (x[f] < iv.lo)
            w[f] = iv.lo;
        else if (x[f] >= iv.hi)
            w[f] = std::nextafter(iv.hi, -kInf);
    }
    return w;
}

AdversarialExample finish_attack(const Ensemble& e, std::span<const double> x,
                                 int source_label, AttackKind kind,
                                 const std::vector<std::uint8_t>& oc,
                                 const LeafBox& box) {
    AdversarialExample adv;
    adv.original.assign(x.begin(), x.end());
    adv.perturbed = make_witness(x, box);
    adv.source_label = source_label;
    adv.kind = kind;

    const model::Prediction pred = e.evaluate(adv.perturbed);
    assert(pred.label != source_label);
    assert(e.leaf_path(adv.perturbed) == oc);
    (void)oc;
    adv.flipped_prob = pred.prob;

    for (std::size_t f = 0; f < x.size(); ++f) {
        const double delta = std::abs(adv.perturbed[f] - x[f]);
        adv.linf = std::max(adv.linf, delta);
        adv.l0 += adv.perturbed[f] != x[f];
    }
    return adv;
}

} // namespace

void for_each_feasible(const Ensemble& e, const LeafBox* within, std::uint64_t cap,
                       const std::function<void(FeasibleOC&&)>& emit) {
    CollectPolicy policy{e, emit};
    Walker<CollectPolicy> walker(e, policy, cap);
    walker.run(within);
}

std::vector<FeasibleOC> enumerate_feasible(const Ensemble& e,
                                           std::optional<LeafBox> within,
                                           std::uint64_t cap) {
    std::vector<FeasibleOC> out;
    for_each_feasible(e, within ? &*within : nullptr, cap,
                      [&](FeasibleOC&& oc) { out.push_back(std::move(oc)); });
    return out;
}

std::uint64_t count_feasible(const Ensemble& e, std::uint64_t cap) {
    std::uint64_t count = 0;
    struct CountPolicy {
        std::uint64_t& count;
        bool order_by_spread() const { return false; }
        bool prune_interval(std::size_t, const Interval&) const { return false; }
        bool prune_bounds(double, double, const LeafBox&) const { return false; }
        double child_priority(std::size_t, const Interval&, double, double) const {
            return 0.0;
        }
        void emit(const std::vector<std::uint8_t>&, const LeafBox&, double) { ++count; }
    } policy{count};
    Walker<CountPolicy> walker(e, policy, cap);
    walker.run(nullptr);
    return count;
}

AdversarialExample closest_adversarial(const Ensemble& e, std::span<const double> x,
                                       const LeafBox& domain, std::uint64_t cap) {
    if (domain.size() != e.n_features())
        raise(ErrorCode::DimensionMismatch, "domain has wrong number of features");
    const model::Prediction pred = e.evaluate(x);
    const int target = 1 - pred.label;

    // Radius needed for the ball to cover the whole domain from x.
    double cover_r = 0.0;
    double extent = 0.0;
    for (std::size_t f = 0; f < x.size(); ++f) {
        const Interval& iv = domain.intervals[f];
        cover_r = std::max(cover_r, std::max(x[f] - iv.lo, iv.hi - x[f]));
        if (std::isfinite(iv.lo) && std::isfinite(iv.hi))
            extent = std::max(extent, iv.hi - iv.lo);
    }
    if (!std::isfinite(cover_r)) cover_r = kInf;
    if (extent <= 0.0) extent = 1.0;

    // Expanding-ball search. Every configuration within distance r of x
    // intersects the r-ball, so a flip found at distance <= r is the
    // global minimum; otherwise grow the ball until it covers the domain.
    // Each radius runs two phases: a confidence-guided probe that finds
    // some flip cheaply (or proves the ball has none), then the exact
    // minimum-distance search seeded with that incumbent and restricted
    // to its distance.
    const double threshold = flip_sum_threshold(e);
    double r = std::max(extent / 64.0, 1e-9);
    for (;;) {
        r = std::min(r, cover_r);
        bool full_scan = r >= cover_r;
        LeafBox region = ball_box(x, r);
        if (full_scan || !region.intersect_inplace(domain)) {
            full_scan = true;
            region = domain;
        }

        ConfidencePolicy probe(e, x, target, threshold);
        Walker<ConfidencePolicy> probe_walker(e, probe, cap);
        probe_walker.run(&region);

        if (probe.found) {
            double best_d = probe.best_box.distance(x);
            std::vector<std::uint8_t> best_oc = probe.best_oc;
            LeafBox best_box = probe.best_box;

            // Tighten the certification radius first: probes are cheap
            // compared to an exact scan of an oversized ball. `lo` is a
            // radius already proven flip-free.
            double lo = full_scan ? 0.0 : r / 4.0;
            for (int iter = 0; iter < 8 && best_d > 1.3 * lo + 1e-12; ++iter) {
                const double mid =
                    lo <= 1e-12 ? best_d / 4.0 : std::sqrt(lo * best_d);
                if (!(mid < best_d) || mid <= lo) break;
                LeafBox mid_region = ball_box(x, mid);
                if (!mid_region.intersect_inplace(domain)) break;
                ConfidencePolicy mid_probe(e, x, target, threshold);
                Walker<ConfidencePolicy> mid_walker(e, mid_probe, cap);
                mid_walker.run(&mid_region);
                if (mid_probe.found) {
                    const double d = mid_probe.best_box.distance(x);
                    if (d < best_d) {
                        best_d = d;
                        best_oc = mid_probe.best_oc;
                        best_box = mid_probe.best_box;
                    }
                } else {
                    lo = mid;
                }
            }

            ClosestPolicy policy(e, x, target, threshold);
            policy.found = true;
            policy.best_d = best_d;
            policy.best_oc = std::move(best_oc);
            policy.best_box = std::move(best_box);

            LeafBox inner = ball_box(x, policy.best_d);
            if (!inner.intersect_inplace(domain)) inner = domain;
            Walker<ClosestPolicy> walker(e, policy, cap);
            walker.run(&inner);
            return finish_attack(e, x, pred.label, AttackKind::Closest, policy.best_oc,
                                 policy.best_box);
        }
        if (full_scan)
            raise(ErrorCode::NoAdversarialExists,
                  "no label flip is reachable inside the domain");
        r = r * 4.0;
    }
}

AdversarialExample budgeted_adversarial(const Ensemble& e, std::span<const double> x,
                                        double budget, const LeafBox& domain,
                                        AttackKind kind, std::uint64_t cap) {
    if (domain.size() != e.n_features())
        raise(ErrorCode::DimensionMismatch, "domain has wrong number of features");
    if (!(budget > 0.0))
        raise(ErrorCode::InvalidArgument, "attack budget must be positive");
    const model::Prediction pred = e.evaluate(x);
    const int target = 1 - pred.label;

    LeafBox region = ball_box(x, budget);
    if (!region.intersect_inplace(domain))
        raise(ErrorCode::NoAdversarialExists, "budget ball does not meet the domain");

    ConfidencePolicy policy{e, x, target, flip_sum_threshold(e)};
    Walker<ConfidencePolicy> walker(e, policy, cap);
    walker.run(&region);

    if (!policy.found)
        raise(ErrorCode::NoAdversarialExists,
              "no label flip within budget " + std::to_string(budget));
    return finish_attack(e, x, pred.label, kind, policy.best_oc, policy.best_box);
}

double median_delta(std::span<const AdversarialExample> attacks) {
    if (attacks.empty())
        raise(ErrorCode::EmptyList, "median of an empty attack list");
    std::vector<double> deltas;
    deltas.reserve(attacks.size());
    for (const AdversarialExample& a : attacks) deltas.push_back(a.linf);
    std::sort(deltas.begin(), deltas.end());
    const std::size_t n = deltas.size();
    if (n % 2 == 1) return deltas[n / 2];
    return 0.5 * (deltas[n / 2 - 1] + deltas[n / 2]);
}

} // namespace ocshield::attack
