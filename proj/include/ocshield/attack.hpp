#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ocshield/model.hpp"
#include "ocshield/ocspace.hpp"

namespace ocshield::attack {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// One reachable output configuration: the per-tree leaf ids, the input
/// region that produces it (intersection of the leaf boxes, clipped to
/// the search region), and the ensemble's raw output for it.
struct FeasibleOC {
    ocspace::OutputConfig oc;
    model::LeafBox box;
    double raw = 0.0;
};

enum class AttackKind { Closest, Budget2x, Budget5x };

const char* to_string(AttackKind kind);

struct AdversarialExample {
    std::vector<double> original;
    std::vector<double> perturbed;
    double linf = 0.0;
    std::uint32_t l0 = 0;
    int source_label = 0;
    AttackKind kind = AttackKind::Closest;
    double flipped_prob = 0.0; // ensemble probability at the perturbed point
};

/// Depth-first product over the trees, carrying the running box
/// intersection and pruning any branch whose intersection (with `within`,
/// when given) is empty. Every feasible configuration is visited exactly
/// once. Throws EnumerationCapExceeded past `cap` emissions.
void for_each_feasible(const model::Ensemble& e, const model::LeafBox* within,
                       std::uint64_t cap, const std::function<void(FeasibleOC&&)>& emit);

std::vector<FeasibleOC> enumerate_feasible(const model::Ensemble& e,
                                           std::optional<model::LeafBox> within = {},
                                           std::uint64_t cap = kDefaultEnumerationCap);

std::uint64_t count_feasible(const model::Ensemble& e,
                             std::uint64_t cap = kDefaultEnumerationCap);

/// L-infinity-minimal label flip: among the feasible configurations
/// inside `domain` whose predicted label differs from the label at x,
/// the one whose box is closest to x. The perturbed point clamps x into
/// that box, stepping one representable value below any open upper
/// bound, so its norm is within one ulp of the reported infimum.
AdversarialExample closest_adversarial(const model::Ensemble& e,
                                       std::span<const double> x,
                                       const model::LeafBox& domain,
                                       std::uint64_t cap = kDefaultEnumerationCap);

/// Most confident label flip within an L-infinity ball of radius
/// `budget`: selects the flipped configuration with the most extreme
/// wrong-class output (ties: smaller distance, then lexicographically
/// smaller configuration).
AdversarialExample budgeted_adversarial(const model::Ensemble& e,
                                        std::span<const double> x, double budget,
                                        const model::LeafBox& domain,
                                        AttackKind kind = AttackKind::Budget2x,
                                        std::uint64_t cap = kDefaultEnumerationCap);

/// Median of the linf perturbations (mean of the middle pair when even).
double median_delta(std::span<const AdversarialExample> attacks);

} // namespace ocshield::attack
