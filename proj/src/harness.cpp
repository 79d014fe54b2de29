#include "ocshield/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>

#include "ocshield/csv.hpp"
#include "ocshield/parallel.hpp"
#include "ocshield/rng.hpp"

namespace ocshield::harness {

using attack::AttackKind;
using Clock = std::chrono::steady_clock;

namespace {

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

constexpr double kPi = 3.14159265358979323846;

} // namespace

// ---------------------------------------------------------------- datasets

Dataset make_two_clusters(std::size_t n, std::uint64_t seed) {
    auto rng = make_rng(derive_seed(seed, 0x2C));
    std::uniform_real_distribution<double> arc(0.0, kPi);
    std::normal_distribution<double> noise(0.0, 0.12);

    Dataset ds;
    ds.X = Matrix(n, 2);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int cls = static_cast<int>(i % 2);
        const double t = arc(rng);
        double x0, x1;
        if (cls == 0) {
            x0 = std::cos(t);
            x1 = std::sin(t);
        } else {
            x0 = 1.0 - std::cos(t);
            x1 = 0.5 - std::sin(t);
        }
        ds.X.at(i, 0) = x0 + noise(rng);
        ds.X.at(i, 1) = x1 + noise(rng);
        ds.y[i] = cls;
    }
    return ds;
}

Dataset make_xor_grid(std::size_t n, std::uint64_t seed) {
    auto rng = make_rng(derive_seed(seed, 0x708));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Dataset ds;
    ds.X = Matrix(n, 8);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < 8; ++f) ds.X.at(i, f) = unit(rng);
        ds.y[i] = (ds.X.at(i, 0) > 0.5) != (ds.X.at(i, 1) > 0.5) ? 1 : 0;
    }
    return ds;
}

Dataset make_dataset(const std::string& name_or_csv, std::size_t n, std::uint64_t seed) {
    if (name_or_csv == "two-clusters") return make_two_clusters(n, seed);
    if (name_or_csv == "xor-grid") return make_xor_grid(n, seed);
    Dataset ds;
    csv::read_labeled(name_or_csv, ds.X, ds.y);
    return ds;
}

// ------------------------------------------------------------------ folds

std::vector<Fold> kfold_split(const std::vector<int>& y, std::size_t k,
                              std::uint64_t seed) {
    if (k < 2) raise(ErrorCode::InvalidArgument, "k must be at least 2");
    if (y.size() < k)
        raise(ErrorCode::TooFewExamples, "fewer examples than folds");

    // shuffle each class separately, then deal round-robin
    std::vector<std::size_t> fold_of(y.size());
    for (int cls : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == cls) members.push_back(i);
        auto rng = make_rng(derive_seed(seed, 0x51 + static_cast<std::uint64_t>(cls)));
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t j = 0; j < members.size(); ++j)
            fold_of[members[j]] = j % k;
    }

    std::vector<Fold> folds(k);
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t f = 0; f < k; ++f) {
            if (fold_of[i] == f)
                folds[f].test.push_back(i);
            else
                folds[f].train.push_back(i);
        }
    }
    for (const Fold& f : folds)
        if (f.test.empty() || f.train.empty())
            raise(ErrorCode::TooFewExamples, "a fold ended up empty");
    return folds;
}

// ----------------------------------------------------------------- scaler

MinMaxScaler MinMaxScaler::fit(const Matrix& X, std::span<const std::size_t> rows) {
    if (rows.empty()) raise(ErrorCode::TooFewExamples, "no rows to fit scaler");
    MinMaxScaler s;
    s.ranges.assign(X.cols, {0.0, 0.0});
    for (std::size_t f = 0; f < X.cols; ++f) {
        double lo = X.at(rows[0], f), hi = lo;
        for (std::size_t r : rows) {
            lo = std::min(lo, X.at(r, f));
            hi = std::max(hi, X.at(r, f));
        }
        s.ranges[f] = {lo, hi};
    }
    return s;
}

Matrix MinMaxScaler::transform(const Matrix& X, std::span<const std::size_t> rows,
                               bool clamp) const {
    Matrix out(rows.size(), X.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t f = 0; f < X.cols; ++f) {
            const auto [lo, hi] = ranges[f];
            double v = hi > lo ? (X.at(rows[i], f) - lo) / (hi - lo) : 0.0;
            if (clamp) v = std::clamp(v, 0.0, 1.0);
            out.at(i, f) = v;
        }
    }
    return out;
}

double MinMaxScaler::denormalize(std::size_t feature, double v) const {
    const auto [lo, hi] = ranges[feature];
    return lo + v * (hi - lo);
}

// ---------------------------------------------------------------- metrics

double roc_auc(std::span<const std::pair<double, bool>> scores) {
    std::size_t n_pos = 0, n_neg = 0;
    for (const auto& [s, adv] : scores) (adv ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        raise(ErrorCode::SingleClass, "roc_auc needs both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a].first < scores[b].first;
    });

    // tie groups share the average rank (1-based)
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]].first == scores[order[i]].first) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j); // mean of i+1..j
        for (std::size_t t = i; t < j; ++t)
            if (scores[order[t]].second) rank_sum_pos += avg_rank;
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_neg));
}

std::vector<CurvePoint> coverage_detection_curve(
    std::span<const std::pair<double, bool>> scores) {
    std::vector<double> normal, adv, distinct;
    distinct.reserve(scores.size());
    for (const auto& [s, is_adv] : scores) {
        (is_adv ? adv : normal).push_back(s);
        distinct.push_back(s);
    }
    if (normal.empty() || adv.empty())
        raise(ErrorCode::SingleClass, "curve needs both classes");
    std::sort(normal.begin(), normal.end());
    std::sort(adv.begin(), adv.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> thresholds;
    thresholds.push_back(-std::numeric_limits<double>::infinity()); // flag everything
    thresholds.insert(thresholds.end(), distinct.begin(), distinct.end());

    std::vector<CurvePoint> curve;
    curve.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto n_cov = static_cast<double>(
            std::upper_bound(normal.begin(), normal.end(), t) - normal.begin());
        const auto n_det = static_cast<double>(
            adv.end() - std::upper_bound(adv.begin(), adv.end(), t));
        curve.push_back({t, n_cov / static_cast<double>(normal.size()),
                         n_det / static_cast<double>(adv.size())});
    }
    return curve;
}

// --------------------------------------------------------- adversarial sets

namespace {

EvalSet mix_eval_set(const model::Ensemble& e, const Matrix& test_X,
                     const std::vector<int>& test_y,
                     const std::vector<attack::AdversarialExample>& attacks,
                     AttackKind kind, double normal_ratio, std::uint64_t seed) {
    EvalSet set;
    set.adv_kind = kind;
    set.n_adv = attacks.size();
    const auto wanted =
        static_cast<std::size_t>(std::llround(normal_ratio * static_cast<double>(set.n_adv)));
    set.n_normal = std::min(wanted, test_X.rows);

    std::vector<std::size_t> pool(test_X.rows);
    std::iota(pool.begin(), pool.end(), 0);
    auto rng = make_rng(seed);
    for (std::size_t i = 0; i < set.n_normal; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }

    set.records.reserve(set.n_normal + set.n_adv);
    for (std::size_t i = 0; i < set.n_normal; ++i) {
        const std::size_t row = pool[i];
        EvalRecord rec;
        const auto x = test_X.row(row);
        rec.x.assign(x.begin(), x.end());
        rec.predicted_label = e.evaluate(x).label;
        rec.correctly_classified = rec.predicted_label == test_y[row];
        set.records.push_back(std::move(rec));
    }
    for (const attack::AdversarialExample& a : attacks) {
        EvalRecord rec;
        rec.x = a.perturbed;
        rec.is_adv = true;
        rec.predicted_label = e.evaluate(rec.x).label;
        rec.correctly_classified = false;
        set.records.push_back(std::move(rec));
    }
    return set;
}

} // namespace

AdvSets build_adv_sets(const model::Ensemble& e, const Matrix& test_X,
                       const std::vector<int>& test_y, std::size_t n_attacks,
                       std::uint64_t seed, double normal_ratio, std::uint64_t cap) {
    if (test_X.rows != test_y.size())
        raise(ErrorCode::DimensionMismatch, "test X rows and y length differ");

    std::vector<std::size_t> correct;
    for (std::size_t i = 0; i < test_X.rows; ++i)
        if (e.evaluate(test_X.row(i)).label == test_y[i]) correct.push_back(i);
    if (correct.size() < n_attacks)
        raise(ErrorCode::InsufficientCorrect,
              "only " + std::to_string(correct.size()) +
                  " correctly classified test examples for " +
                  std::to_string(n_attacks) + " attacks");

    auto rng = make_rng(derive_seed(seed, 0xA77));
    for (std::size_t i = 0; i < n_attacks; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, correct.size() - 1);
        std::swap(correct[i], correct[pick(rng)]);
    }
    correct.resize(n_attacks);

    const model::LeafBox domain = model::LeafBox::closed_cube(e.n_features(), 0.0, 1.0);

    AdvSets out;
    std::vector<std::optional<attack::AdversarialExample>> slots(n_attacks);
    parallel_for(n_attacks, [&](std::size_t i) {
        try {
            slots[i] = attack::closest_adversarial(e, test_X.row(correct[i]), domain, cap);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::NoAdversarialExists) throw;
        }
    });
    for (auto& slot : slots) {
        if (slot)
            out.closest_attacks.push_back(std::move(*slot));
        else
            ++out.dropped_closest;
    }
    out.delta_med = attack::median_delta(out.closest_attacks);

    const double budgets[2] = {2.0 * out.delta_med, 5.0 * out.delta_med};
    const AttackKind kinds[2] = {AttackKind::Budget2x, AttackKind::Budget5x};
    std::vector<attack::AdversarialExample>* lists[2] = {&out.x2_attacks, &out.x5_attacks};
    std::size_t* drops[2] = {&out.dropped_x2, &out.dropped_x5};
    for (int b = 0; b < 2; ++b) {
        std::vector<std::optional<attack::AdversarialExample>> bslots(n_attacks);
        parallel_for(n_attacks, [&](std::size_t i) {
            try {
                bslots[i] = attack::budgeted_adversarial(e, test_X.row(correct[i]),
                                                         budgets[b], domain, kinds[b], cap);
            } catch (const Error& err) {
                if (err.code() != ErrorCode::NoAdversarialExists) throw;
            }
        });
        for (auto& slot : bslots) {
            if (slot)
                lists[b]->push_back(std::move(*slot));
            else
                ++(*drops[b]);
        }
    }

    out.closest = mix_eval_set(e, test_X, test_y, out.closest_attacks, AttackKind::Closest,
                               normal_ratio, derive_seed(seed, 0xE0));
    out.x2 = mix_eval_set(e, test_X, test_y, out.x2_attacks, AttackKind::Budget2x,
                          normal_ratio, derive_seed(seed, 0xE1));
    out.x5 = mix_eval_set(e, test_X, test_y, out.x5_attacks, AttackKind::Budget5x,
                          normal_ratio, derive_seed(seed, 0xE2));
    return out;
}

// -------------------------------------------------------------- ref sweep

std::vector<SweepRow> refset_sweep(const model::Ensemble& e,
                                   const ocspace::ReferenceSet& full,
                                   const EvalSet& evalset,
                                   std::span<const double> fractions,
                                   std::uint64_t seed) {
    // encode queries once
    std::vector<ocspace::OutputConfig> ocs;
    std::vector<int> labels;
    std::vector<bool> is_adv;
    ocs.reserve(evalset.records.size());
    for (const EvalRecord& rec : evalset.records) {
        ocs.emplace_back(e.leaf_path(rec.x));
        labels.push_back(rec.predicted_label);
        is_adv.push_back(rec.is_adv);
    }

    std::vector<SweepRow> rows;
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        const double fraction = fractions[fi];
        if (!(fraction > 0.0) || fraction > 1.0)
            raise(ErrorCode::InvalidArgument, "sweep fractions must lie in (0,1]");

        std::vector<ocspace::OutputConfig> by_class[2];
        auto rng = make_rng(derive_seed(seed, fi));
        for (int cls : {0, 1}) {
            const auto& part = full.partition(cls);
            const auto keep = std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::llround(fraction * static_cast<double>(part.rows))));
            std::vector<std::size_t> pool(part.rows);
            std::iota(pool.begin(), pool.end(), 0);
            for (std::size_t i = 0; i < keep; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
                std::swap(pool[i], pool[pick(rng)]);
            }
            for (std::size_t i = 0; i < keep; ++i)
                by_class[cls].push_back(part.row(pool[i], full.n_trees()));
        }
        const ocspace::ReferenceSet sub =
            ocspace::ReferenceSet::from_rows(full.n_trees(), by_class[0], by_class[1]);

        std::vector<std::pair<double, bool>> scored(ocs.size());
        const auto t0 = Clock::now();
        for (std::size_t i = 0; i < ocs.size(); ++i)
            scored[i] = {static_cast<double>(ocspace::oc_score_simd(sub, ocs[i], labels[i])),
                         is_adv[i]};
        const double mean_ms = elapsed_ms(t0) / static_cast<double>(ocs.size());
        rows.push_back({fraction, roc_auc(scored), mean_ms});
    }
    return rows;
}

// ------------------------------------------------- perturbation contrast

PairedDistances adv_vs_random_distributions(const model::Ensemble& e,
                                            std::span<const attack::AdversarialExample> attacks,
                                            std::uint64_t seed) {
    PairedDistances out;
    auto rng = make_rng(derive_seed(seed, 0xD15));
    const double m = static_cast<double>(e.tree_count());

    for (const attack::AdversarialExample& a : attacks) {
        const ocspace::OutputConfig oc0(e.leaf_path(a.original));
        const ocspace::OutputConfig oc_adv(e.leaf_path(a.perturbed));
        out.adversarial.push_back(static_cast<double>(hamming(oc0, oc_adv)) / m);

        // random perturbation with identical linf magnitude and support size
        std::vector<double> random_point = a.original;
        std::vector<std::size_t> coords(a.original.size());
        std::iota(coords.begin(), coords.end(), 0);
        for (std::size_t i = 0; i < a.l0 && i < coords.size(); ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, coords.size() - 1);
            std::swap(coords[i], coords[pick(rng)]);
            std::bernoulli_distribution flip(0.5);
            const double delta = flip(rng) ? a.linf : -a.linf;
            const std::size_t f = coords[i];
            random_point[f] = std::clamp(a.original[f] + delta, 0.0, 1.0);
        }
        const ocspace::OutputConfig oc_rand(e.leaf_path(random_point));
        out.random.push_back(static_cast<double>(hamming(oc0, oc_rand)) / m);
    }
    return out;
}

// ----------------------------------------------------------- full pipeline

namespace {

struct FoldContext {
    const model::Ensemble& ens;
    const ocspace::ReferenceSet& ref;
    const detectors::IsolationForest& iforest;
};

double score_with(const FoldContext& ctx, const std::string& name,
                  std::span<const double> x) {
    if (name == "ocscore") return detectors::score_ocscore(ctx.ens, ctx.ref, x).value;
    if (name == "ambig") return detectors::score_ambiguity(ctx.ens, x).value;
    if (name == "mlloo") return detectors::score_mlloo(ctx.ens, x).value;
    if (name == "iforest") return ctx.iforest.anomaly_score(x);
    raise(ErrorCode::InvalidArgument, "unknown detector: " + name);
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

} // namespace

std::vector<ModelSpec> default_models(const std::string& dataset_name,
                                      std::uint64_t seed) {
    trainer::TrainConfig boost, forest;
    boost.mode = trainer::Mode::Boosting;
    forest.mode = trainer::Mode::Forest;
    std::size_t trees = 30, depth = 5;
    if (dataset_name == "two-clusters") {
        trees = 20;
        depth = 4;
    } else if (dataset_name == "xor-grid") {
        trees = 50;
        depth = 5;
    }
    boost.n_trees = forest.n_trees = trees;
    boost.max_depth = forest.max_depth = depth;
    boost.learning_rate = 0.3;
    boost.seed = forest.seed = seed;
    return {{"boosting", boost}, {"forest", forest}};
}

EvalResult run_evaluation(const Dataset& ds, const EvalConfig& cfg) {
    if (cfg.models.empty())
        raise(ErrorCode::InvalidArgument, "no models configured");
    for (const std::string& d : cfg.detectors)
        if (d != "ocscore" && d != "ambig" && d != "mlloo" && d != "iforest")
            raise(ErrorCode::InvalidArgument, "unknown detector: " + d);

    EvalResult out;
    const auto folds = kfold_split(ds.y, cfg.folds, derive_seed(cfg.seed, 0xF0));

    // pooled accumulators
    std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, bool>>>
        pooled_scores;
    std::map<std::string, std::vector<double>> pooled_timings;
    struct DistAcc {
        double adv_sum = 0.0, rand_sum = 0.0;
        std::size_t n = 0;
    };
    std::map<std::pair<std::string, int>, DistAcc> dist_acc;
    std::map<std::size_t, std::vector<SweepRow>> sweep_acc; // fraction idx -> per-fold rows

    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
        const ModelSpec& spec = cfg.models[mi];
        const std::uint64_t model_seed = derive_seed(cfg.seed, 0x100 + mi);

        for (std::size_t fi = 0; fi < folds.size(); ++fi) {
            const Fold& fold = folds[fi];
            const std::uint64_t fold_seed = derive_seed(model_seed, fi);

            const MinMaxScaler scaler = MinMaxScaler::fit(ds.X, fold.train);
            const Matrix x_train = scaler.transform(ds.X, fold.train, false);
            const Matrix x_test = scaler.transform(ds.X, fold.test, true);
            std::vector<int> y_train, y_test;
            for (std::size_t r : fold.train) y_train.push_back(ds.y[r]);
            for (std::size_t r : fold.test) y_test.push_back(ds.y[r]);

            trainer::TrainConfig tcfg = spec.cfg;
            tcfg.seed = derive_seed(fold_seed, 1);
            const model::Ensemble ens = trainer::train(x_train, y_train, tcfg);
            const ocspace::ReferenceSet ref = ocspace::build_reference(ens, x_train, y_train);
            const detectors::IsolationForest iforest = detectors::IsolationForest::fit(
                x_train, {100, 256, derive_seed(fold_seed, 2)});
            const FoldContext ctx{ens, ref, iforest};

            const AdvSets adv = build_adv_sets(ens, x_test, y_test, cfg.n_attacks,
                                               derive_seed(fold_seed, 3), cfg.normal_ratio,
                                               cfg.enum_cap);
            out.dropped_attacks += adv.dropped_closest + adv.dropped_x2 + adv.dropped_x5;

            const EvalSet* sets[3] = {&adv.closest, &adv.x2, &adv.x5};
            const std::vector<attack::AdversarialExample>* attack_lists[3] = {
                &adv.closest_attacks, &adv.x2_attacks, &adv.x5_attacks};

            for (const EvalSet* set : sets) {
                for (const std::string& det : cfg.detectors) {
                    std::vector<std::pair<double, bool>> scored;
                    scored.reserve(set->records.size());
                    auto& times = pooled_timings[det];
                    for (const EvalRecord& rec : set->records) {
                        const auto t0 = Clock::now();
                        const double s = score_with(ctx, det, rec.x);
                        times.push_back(elapsed_ms(t0));
                        scored.emplace_back(s, rec.is_adv);
                    }
                    out.auc.push_back({cfg.dataset_name, spec.name, det, set->adv_kind,
                                       fi, roc_auc(scored)});
                    auto& pool = pooled_scores[{spec.name, det}];
                    pool.insert(pool.end(), scored.begin(), scored.end());
                }
            }

            for (int k = 0; k < 3; ++k) {
                const PairedDistances pd = adv_vs_random_distributions(
                    ens, *attack_lists[k], derive_seed(fold_seed, 40 + k));
                DistAcc& acc = dist_acc[{spec.name, k}];
                for (double v : pd.adversarial) acc.adv_sum += v;
                for (double v : pd.random) acc.rand_sum += v;
                acc.n += pd.adversarial.size();
            }

            if (mi == 0) {
                EvalSet merged;
                merged.adv_kind = AttackKind::Closest;
                for (const EvalSet* set : sets)
                    merged.records.insert(merged.records.end(), set->records.begin(),
                                          set->records.end());
                const auto rows = refset_sweep(ens, ref, merged, cfg.sweep_fractions,
                                               derive_seed(fold_seed, 5));
                for (std::size_t i = 0; i < rows.size(); ++i)
                    sweep_acc[i].push_back(rows[i]);
            }
        }
    }

    // curves pooled over folds and attack sets, in configuration order
    for (const ModelSpec& spec : cfg.models) {
        for (const std::string& det : cfg.detectors) {
            const auto& pool = pooled_scores[{spec.name, det}];
            for (const CurvePoint& pt : coverage_detection_curve(pool))
                out.curve.push_back({cfg.dataset_name, spec.name, det, pt.threshold,
                                     pt.coverage, pt.detection_rate});
        }
    }

    for (const std::string& det : cfg.detectors) {
        const auto& times = pooled_timings[det];
        out.timings.push_back({det, mean_of(times), std_of(times)});
    }

    for (const auto& [idx, rows] : sweep_acc) {
        SweepRow avg{rows[0].fraction, 0.0, 0.0};
        for (const SweepRow& r : rows) {
            avg.auc += r.auc;
            avg.mean_ms += r.mean_ms;
        }
        avg.auc /= static_cast<double>(rows.size());
        avg.mean_ms /= static_cast<double>(rows.size());
        out.sweep.push_back(avg);
    }

    for (const ModelSpec& spec : cfg.models) {
        for (int k = 0; k < 3; ++k) {
            const auto it = dist_acc.find({spec.name, k});
            if (it == dist_acc.end() || it->second.n == 0) continue;
            const DistAcc& acc = it->second;
            const double n = static_cast<double>(acc.n);
            out.distributions.push_back({spec.name,
                                         static_cast<AttackKind>(k),
                                         acc.adv_sum / n, acc.rand_sum / n, acc.n});
        }
    }
    return out;
}

void write_results(const EvalResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) raise(ErrorCode::IoError, "cannot create output dir: " + out_dir);

    {
        csv::Writer w(out_dir + "/auc.csv");
        w.row({"dataset", "model", "detector", "adv_kind", "fold", "auc"});
        for (const AucRow& r : result.auc)
            w.row({r.dataset, r.model, r.detector, attack::to_string(r.kind),
                   std::to_string(r.fold), csv::format_double(r.auc)});
        w.close();
    }
    {
        csv::Writer w(out_dir + "/curve.csv");
        w.row({"dataset", "model", "detector", "threshold", "coverage", "detection_rate"});
        for (const CurveRow& r : result.curve)
            w.row({r.dataset, r.model, r.detector, csv::format_double(r.threshold),
                   csv::format_double(r.coverage), csv::format_double(r.detection_rate)});
        w.close();
    }
    {
        csv::Writer w(out_dir + "/timings.csv");
        w.row({"detector", "mean_ms", "std_ms"});
        for (const TimingRow& r : result.timings)
            w.row({r.detector, csv::format_double(r.mean_ms), csv::format_double(r.std_ms)});
        w.close();
    }
    {
        csv::Writer w(out_dir + "/refsweep.csv");
        w.row({"fraction", "auc", "mean_ms"});
        for (const SweepRow& r : result.sweep)
            w.row({csv::format_double(r.fraction), csv::format_double(r.auc),
                   csv::format_double(r.mean_ms)});
        w.close();
    }
}

} // namespace ocshield::harness
