#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ocshield/attack.hpp"
#include "ocshield/data.hpp"
#include "ocshield/detectors.hpp"
#include "ocshield/model.hpp"
#include "ocshield/ocspace.hpp"
#include "ocshield/trainer.hpp"

namespace ocshield::harness {

struct Dataset {
    Matrix X;
    std::vector<int> y;
    // per-feature (min, max) of the fitting rows; set by MinMaxScaler
    std::vector<std::pair<double, double>> feature_ranges;
};

/// Built-in synthetic benchmarks. Deterministic for a fixed seed.
Dataset make_two_clusters(std::size_t n, std::uint64_t seed); // 2 features, interleaved arcs
Dataset make_xor_grid(std::size_t n, std::uint64_t seed);     // 8 features, XOR on the first two
Dataset make_dataset(const std::string& name_or_csv, std::size_t n, std::uint64_t seed);

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified k-fold: disjoint test folds cover all rows and per-fold
/// class counts differ from an even split by at most one example.
std::vector<Fold> kfold_split(const std::vector<int>& y, std::size_t k,
                              std::uint64_t seed);

/// Per-feature min-max normalization fitted on training rows only.
/// transform() maps into [0,1]; out-of-range test values clamp.
struct MinMaxScaler {
    std::vector<std::pair<double, double>> ranges;

    static MinMaxScaler fit(const Matrix& X, std::span<const std::size_t> rows);
    Matrix transform(const Matrix& X, std::span<const std::size_t> rows,
                     bool clamp) const;
    double denormalize(std::size_t feature, double v) const;
};

struct EvalRecord {
    std::vector<double> x;
    bool is_adv = false;
    int predicted_label = 0;
    bool correctly_classified = false; // meaningful for normal records
};

struct EvalSet {
    std::vector<EvalRecord> records;
    attack::AttackKind adv_kind = attack::AttackKind::Closest;
    std::size_t n_normal = 0;
    std::size_t n_adv = 0;
};

struct CurvePoint {
    double threshold = 0.0;
    double coverage = 0.0;
    double detection_rate = 0.0;
};

/// Probability that an adversarial example outranks a normal one, ties
/// counted half (rank form of the Mann-Whitney U statistic).
double roc_auc(std::span<const std::pair<double, bool>> scores);

/// Thresholds sweep over the distinct scores (plus a flag-everything
/// endpoint); flagged means score > threshold.
std::vector<CurvePoint> coverage_detection_curve(
    std::span<const std::pair<double, bool>> scores);

struct AdvSets {
    EvalSet closest, x2, x5;
    std::vector<attack::AdversarialExample> closest_attacks, x2_attacks, x5_attacks;
    double delta_med = 0.0;
    std::size_t dropped_closest = 0, dropped_x2 = 0, dropped_x5 = 0;
};

/// The adversarial-set protocol: sample correctly classified test
/// examples, compute closest attacks, derive the median perturbation,
/// rerun at 2x and 5x budgets, and mix each attack set with normal test
/// examples at `normal_ratio` normals per adversarial example.
AdvSets build_adv_sets(const model::Ensemble& e, const Matrix& test_X,
                       const std::vector<int>& test_y, std::size_t n_attacks,
                       std::uint64_t seed, double normal_ratio = 5.0,
                       std::uint64_t cap = attack::kDefaultEnumerationCap);

struct SweepRow {
    double fraction = 0.0;
    double auc = 0.0;
    double mean_ms = 0.0;
};

/// Subsample the reference rows per class at each fraction, rebuild the
/// padded partitions, and recompute the OC-score AUC and mean per-example
/// scan time on the evaluation set.
std::vector<SweepRow> refset_sweep(const model::Ensemble& e,
                                   const ocspace::ReferenceSet& full,
                                   const EvalSet& evalset,
                                   std::span<const double> fractions,
                                   std::uint64_t seed);

struct PairedDistances {
    std::vector<double> adversarial; // hamming(OC(x), OC(x_adv)) / M
    std::vector<double> random;      // same for a norm-matched random perturbation
};

/// For each attack, draw a random perturbation of the original with the
/// same L-infinity magnitude and the same number of affected features
/// (random coordinates, random signs, clamped to [0,1]).
PairedDistances adv_vs_random_distributions(const model::Ensemble& e,
                                            std::span<const attack::AdversarialExample> attacks,
                                            std::uint64_t seed);

// ------------------------------------------------------- full pipeline

struct ModelSpec {
    std::string name; // "boosting" | "forest"
    trainer::TrainConfig cfg;
};

struct EvalConfig {
    std::string dataset_name;
    std::size_t folds = 5;
    std::uint64_t seed = 7;
    std::size_t n_attacks = 100;
    double normal_ratio = 5.0;
    std::vector<std::string> detectors = {"ocscore", "ambig", "mlloo", "iforest"};
    std::vector<ModelSpec> models;
    std::vector<double> sweep_fractions = {0.1, 0.2, 0.3, 0.4, 0.5,
                                           0.6, 0.7, 0.8, 0.9, 1.0};
    std::uint64_t enum_cap = attack::kDefaultEnumerationCap;
};

struct AucRow {
    std::string dataset, model, detector;
    attack::AttackKind kind;
    std::size_t fold;
    double auc;
};

struct CurveRow {
    std::string dataset, model, detector;
    double threshold, coverage, detection_rate;
};

struct TimingRow {
    std::string detector;
    double mean_ms, std_ms;
};

struct DistRow {
    std::string model;
    attack::AttackKind kind;
    double adv_mean, rand_mean;
    std::size_t n;
};

struct EvalResult {
    std::vector<AucRow> auc;
    std::vector<CurveRow> curve;     // pooled over folds and attack sets
    std::vector<TimingRow> timings;  // pooled over everything
    std::vector<SweepRow> sweep;     // first model, averaged over folds
    std::vector<DistRow> distributions;
    std::size_t dropped_attacks = 0;
};

EvalResult run_evaluation(const Dataset& ds, const EvalConfig& cfg);

/// Write auc.csv, curve.csv, timings.csv and refsweep.csv with
/// deterministic row ordering.
void write_results(const EvalResult& result, const std::string& out_dir);

/// Default per-dataset model settings: two-clusters uses 20 trees of
/// depth 4, xor-grid 50 trees of depth 5, anything else 30 trees of
/// depth 5.
std::vector<ModelSpec> default_models(const std::string& dataset_name,
                                      std::uint64_t seed);

} // namespace ocshield::harness
