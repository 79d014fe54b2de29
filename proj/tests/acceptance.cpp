// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Heavier randomized settings than the unit tests; expected to run in a
// few minutes in a release build.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <vector>

#include "ocshield/attack.hpp"
#include "ocshield/detectors.hpp"
#include "ocshield/harness.hpp"
#include "ocshield/model.hpp"
#include "ocshield/ocspace.hpp"
#include "ocshield/trainer.hpp"
#include "test_support.hpp"

using namespace ocshield;
using namespace testsupport;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

ocspace::OutputConfig random_oc(std::mt19937_64& rng, std::size_t m, int max_id) {
    std::uniform_int_distribution<int> id(0, max_id);
    std::vector<std::uint8_t> ids(m);
    for (auto& v : ids) v = static_cast<std::uint8_t>(id(rng));
    return ocspace::OutputConfig(std::move(ids));
}

std::vector<ocspace::OutputConfig> random_rows(std::mt19937_64& rng, std::size_t n,
                                               std::size_t m, int max_id) {
    std::vector<ocspace::OutputConfig> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rows.push_back(random_oc(rng, m, max_id));
    return rows;
}

// ------------------------------------------------------------ criterion 1

void criterion_simd_equivalence() {
    std::mt19937_64 rng(0xC1);
    const auto t0 = Clock::now();
    std::size_t mismatches = 0;
    for (int round = 0; round < 1000; ++round) {
        std::uniform_int_distribution<std::size_t> mlen(1, 255), nrows(32, 4096);
        const std::size_t m = mlen(rng);
        const auto r = ocspace::ReferenceSet::from_rows(
            m, random_rows(rng, nrows(rng), m, 255), random_rows(rng, nrows(rng), m, 255));
        const auto oc = random_oc(rng, m, 255);
        const int label = round % 2;
        if (ocspace::oc_score_simd(r, oc, label) != ocspace::oc_score(r, oc, label))
            ++mismatches;
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(1, mismatches == 0 && secs < 60.0, "SIMD/scalar bit-exact equivalence",
           "1000 cases, " + std::to_string(mismatches) + " mismatches, " +
               std::to_string(secs) + "s");
}

// ------------------------------------------------------------ criterion 2

void criterion_metric_properties() {
    std::mt19937_64 rng(0xC2);
    bool ok = true;

    // Hamming metric axioms on 10k random triples
    for (int i = 0; i < 10000 && ok; ++i) {
        std::uniform_int_distribution<std::size_t> mlen(1, 64);
        const std::size_t m = mlen(rng);
        const auto a = random_oc(rng, m, 3), b = random_oc(rng, m, 3),
                   c = random_oc(rng, m, 3);
        const auto dab = ocspace::hamming(a, b);
        ok = ok && dab == ocspace::hamming(b, a);
        ok = ok && ((dab == 0) == (a == b));
        ok = ok && dab <= ocspace::hamming(a, c) + ocspace::hamming(c, b);
        ok = ok && dab <= m;
    }

    // every reference example scores 0 against its own partition
    const auto e = random_grid_ensemble(rng, 3, 12, 4);
    Matrix X(500, 3);
    std::vector<int> y(500);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < X.rows; ++i) {
        for (std::size_t f = 0; f < 3; ++f) X.at(i, f) = u(rng);
        y[i] = e.evaluate(X.row(i)).label;
    }
    const auto ref = ocspace::build_reference(e, X, y);
    for (std::size_t i = 0; i < X.rows && ok; ++i)
        ok = ocspace::oc_score_simd(ref, ocspace::encode(e, X.row(i)), y[i]) == 0;

    // adding a reference row never increases a score (100 cases)
    for (int round = 0; round < 100 && ok; ++round) {
        const std::size_t m = 24;
        auto rows0 = random_rows(rng, 30, m, 3);
        const auto rows1 = random_rows(rng, 30, m, 3);
        const auto oc = random_oc(rng, m, 3);
        const auto before = ocspace::oc_score_simd(
            ocspace::ReferenceSet::from_rows(m, rows0, rows1), oc, 0);
        rows0.push_back(random_oc(rng, m, 3));
        const auto after = ocspace::oc_score_simd(
            ocspace::ReferenceSet::from_rows(m, rows0, rows1), oc, 0);
        ok = after <= before;
    }
    report(2, ok, "Hamming metric axioms, zero self-scores, monotonicity", "exact");
}

// ------------------------------------------------- criteria 3 and 4 shared

void criteria_attack_and_feasibility() {
    std::mt19937_64 rng(0xC3);
    const long steps = 1000;
    bool ok3 = true, ok4 = true;
    std::string detail3, detail4;
    const auto t0 = Clock::now();

    int done = 0;
    const int plan[3] = {22, 22, 6}; // cases per dimensionality 1..3
    for (int d = 1; d <= 3; ++d) {
        for (int round = 0; round < plan[d - 1]; ++round) {
            std::uniform_int_distribution<std::size_t> tcount(1, 3), tdepth(1, 3);
            const auto e = random_grid_ensemble(rng, static_cast<std::size_t>(d),
                                                tcount(rng), tdepth(rng), 1.0 / steps);
            std::uniform_int_distribution<long> cell(0, steps);
            std::vector<long> gx(static_cast<std::size_t>(d));
            for (auto& v : gx) v = cell(rng);
            const auto x = grid_point(gx, steps);

            const auto scan = scan_grid(e, steps, &gx);
            const auto domain =
                model::LeafBox::closed_cube(static_cast<std::size_t>(d), 0.0, 1.0);

            // criterion 3: closest attack distance vs the grid minimum
            if (scan.min_flip_steps < 0) {
                try {
                    attack::closest_adversarial(e, x, domain);
                    ok3 = false;
                    detail3 = "found a flip the grid scan excludes";
                } catch (const Error& err) {
                    if (err.code() != ErrorCode::NoAdversarialExists) {
                        ok3 = false;
                        detail3 = err.what();
                    }
                }
            } else {
                const auto adv = attack::closest_adversarial(e, x, domain);
                const double grid_min = static_cast<double>(scan.min_flip_steps) /
                                        static_cast<double>(steps);
                if (std::abs(adv.linf - grid_min) >
                    1.0 / static_cast<double>(steps) + 1e-9) {
                    ok3 = false;
                    detail3 = "linf " + std::to_string(adv.linf) + " vs grid " +
                              std::to_string(grid_min);
                }
            }

            // criterion 4: feasible set equals the grid-reachable set
            std::set<std::vector<std::uint8_t>> emitted;
            for (const auto& f : attack::enumerate_feasible(e, domain))
                emitted.insert(f.oc.ids);
            if (emitted != scan.paths) {
                ok4 = false;
                detail4 = "feasible set mismatch at case " + std::to_string(done);
            }
            ++done;
        }
    }

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs >= 300.0) ok3 = false;
    report(3, ok3, "closest-attack distances match dense-grid brute force",
           detail3.empty() ? std::to_string(done) + " ensembles, " +
                                 std::to_string(secs) + "s"
                           : detail3);

    // demo model: exactly the box-infeasible pairs are excluded
    const auto demo = demo_model();
    std::set<std::vector<std::uint8_t>> emitted;
    for (const auto& f : attack::enumerate_feasible(demo)) emitted.insert(f.oc.ids);
    const auto boxes0 = model::leaf_boxes(demo.tree(0), 3);
    const auto boxes1 = model::leaf_boxes(demo.tree(1), 3);
    for (std::uint8_t a = 0; a < boxes0.size() && ok4; ++a) {
        for (std::uint8_t b = 0; b < boxes1.size(); ++b) {
            model::LeafBox inter = boxes0[a];
            const bool feasible = inter.intersect_inplace(boxes1[b]);
            if (emitted.contains({a, b}) != feasible) {
                ok4 = false;
                detail4 = "demo model pair mismatch";
                break;
            }
        }
    }
    report(4, ok4, "feasible enumeration equals the grid-reachable set",
           detail4.empty() ? "exact, incl. demo model conflict pairs" : detail4);
}

// --------------------------------------------- criteria 5-7 (benchmarks)

struct BenchmarkRun {
    harness::EvalResult result;
};

BenchmarkRun run_benchmark(const std::string& name) {
    const harness::Dataset ds = harness::make_dataset(name, 4000, 7);
    harness::EvalConfig cfg;
    cfg.dataset_name = name;
    cfg.folds = 5;
    cfg.seed = 7;
    cfg.n_attacks = 100;
    cfg.models = harness::default_models(name, 7);
    return {harness::run_evaluation(ds, cfg)};
}

double mean_auc(const harness::EvalResult& r, const std::string& model,
                const std::string& detector, attack::AttackKind kind) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& row : r.auc) {
        if (row.model != model || row.detector != detector || row.kind != kind) continue;
        total += row.auc;
        ++n;
    }
    return n > 0 ? total / static_cast<double>(n) : -1.0;
}

void criterion_perturbation_distributions(const BenchmarkRun& xor_run) {
    double gaps[3] = {0, 0, 0};
    bool have[3] = {false, false, false};
    for (const auto& row : xor_run.result.distributions) {
        if (row.model != "boosting") continue;
        const int k = static_cast<int>(row.kind);
        gaps[k] = row.adv_mean - row.rand_mean;
        have[k] = true;
    }
    const bool ok = have[0] && have[1] && have[2] && gaps[0] >= 0.1 &&
                    gaps[1] >= gaps[0] && gaps[2] >= gaps[1];
    char buf[160];
    std::snprintf(buf, sizeof(buf), "gaps closest=%.3f x2=%.3f x5=%.3f", gaps[0],
                  gaps[1], gaps[2]);
    report(5, ok, "adversarial OC displacement exceeds norm-matched random", buf);
}

void criterion_detection_ordering(const BenchmarkRun& clusters,
                                  const BenchmarkRun& xorg) {
    bool ok = true;
    std::string detail;
    const struct {
        const char* name;
        const BenchmarkRun* run;
    } runs[2] = {{"two-clusters", &clusters}, {"xor-grid", &xorg}};
    for (const auto& [name, run] : runs) {
        for (const char* mdl : {"boosting", "forest"}) {
            const double oc = mean_auc(run->result, mdl, "ocscore",
                                       attack::AttackKind::Budget5x);
            const double amb = mean_auc(run->result, mdl, "ambig",
                                        attack::AttackKind::Budget5x);
            char buf[120];
            std::snprintf(buf, sizeof(buf), " %s/%s oc=%.3f ambig=%.3f", name, mdl, oc,
                          amb);
            detail += buf;
            if (oc < 0.85 || oc < amb) ok = false;
        }
    }
    report(6, ok, "x5 detection: OC-score >= 0.85 and >= ambiguity", detail);
}

void criterion_refsweep(const BenchmarkRun& clusters, const BenchmarkRun& xorg) {
    bool ok = true;
    std::string detail;
    const struct {
        const char* name;
        const BenchmarkRun* run;
    } runs[2] = {{"two-clusters", &clusters}, {"xor-grid", &xorg}};
    for (const auto& [name, run] : runs) {
        double auc_half = -1.0, auc_full = -1.0;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const auto& sweep = run->result.sweep;
        for (const auto& row : sweep) {
            if (row.fraction == 0.5) auc_half = row.auc;
            if (row.fraction == 1.0) auc_full = row.auc;
            sx += row.fraction;
            sy += row.mean_ms;
            sxx += row.fraction * row.fraction;
            sxy += row.fraction * row.mean_ms;
        }
        const double n = static_cast<double>(sweep.size());
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        char buf[160];
        std::snprintf(buf, sizeof(buf), " %s auc(0.5)=%.3f auc(1.0)=%.3f slope=%.2e",
                      name, auc_half, auc_full, slope);
        detail += buf;
        if (auc_half < 0 || auc_full < 0 || std::abs(auc_half - auc_full) > 0.05 ||
            slope <= 0.0)
            ok = false;
    }
    report(7, ok, "reference-sweep AUC stability and linear scan time", detail);
}

// ------------------------------------------------------------ criterion 8

void criterion_throughput() {
    std::mt19937_64 rng(0xC8);
    const std::size_t rows = 100000, m = 50;
    const auto r = ocspace::ReferenceSet::from_rows(m, random_rows(rng, rows, m, 31),
                                                    random_rows(rng, rows, m, 31));
    const int queries = 64;
    std::vector<ocspace::OutputConfig> ocs;
    for (int q = 0; q < queries; ++q) ocs.push_back(random_oc(rng, m, 31));

    volatile std::uint32_t sink = 0;
    const auto t_simd = Clock::now();
    for (int q = 0; q < queries; ++q) sink = ocspace::oc_score_simd(r, ocs[q], q % 2);
    const double simd_ms = std::chrono::duration<double, std::milli>(Clock::now() - t_simd)
                               .count() /
                           queries;
    const int scalar_queries = 8;
    const auto t_scalar = Clock::now();
    for (int q = 0; q < scalar_queries; ++q) sink = ocspace::oc_score(r, ocs[q], q % 2);
    const double scalar_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - t_scalar).count() /
        scalar_queries;
    (void)sink;

    const bool wide_path = ocspace::detail::avx2_available();
    const bool ok = wide_path && simd_ms <= 1.0 && scalar_ms / simd_ms >= 3.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "simd=%.4fms scalar=%.4fms speedup=%.1fx avx2=%d",
                  simd_ms, scalar_ms, scalar_ms / simd_ms, wide_path ? 1 : 0);
    report(8, ok, "100k-row scan under 1 ms and >= 3x over scalar", buf);
}

// ------------------------------------------------------------ criterion 9

void criterion_harness_consistency() {
    std::mt19937_64 rng(0xC9);
    bool ok = true;
    std::string detail = "exact";

    for (int round = 0; round < 100 && ok; ++round) {
        std::uniform_int_distribution<int> score(0, 12);
        std::vector<std::pair<double, bool>> scores;
        bool pos = false, neg = false;
        for (int i = 0; i < 80; ++i) {
            const bool adv = i % 3 == 0;
            scores.emplace_back(score(rng), adv);
            (adv ? pos : neg) = true;
        }
        if (!pos || !neg) continue;
        const double auc = harness::roc_auc(scores);
        if (std::abs(auc - pairwise_auc(scores)) > 1e-12) {
            ok = false;
            detail = "pairwise oracle mismatch";
        }
        const auto curve = harness::coverage_detection_curve(scores);
        if (std::abs(trapezoid_roc_area(curve) - auc) > 1e-9) {
            ok = false;
            detail = "trapezoid mismatch";
        }
    }

    // byte-determinism of the evaluation pipeline (timing columns excluded
    // by nature; auc.csv and curve.csv must match exactly)
    namespace fs = std::filesystem;
    const auto ds = harness::make_two_clusters(600, 3);
    harness::EvalConfig cfg;
    cfg.dataset_name = "two-clusters";
    cfg.folds = 2;
    cfg.seed = 11;
    cfg.n_attacks = 10;
    trainer::TrainConfig tcfg;
    tcfg.n_trees = 10;
    tcfg.max_depth = 3;
    cfg.models = {{"boosting", tcfg}};
    cfg.sweep_fractions = {0.5, 1.0};

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string{std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>()};
    };
    const auto dir_a = fs::temp_directory_path() / "ocshield_acc_a";
    const auto dir_b = fs::temp_directory_path() / "ocshield_acc_b";
    harness::write_results(harness::run_evaluation(ds, cfg), dir_a.string());
    harness::write_results(harness::run_evaluation(ds, cfg), dir_b.string());
    for (const char* name : {"auc.csv", "curve.csv"}) {
        if (slurp(dir_a / name) != slurp(dir_b / name)) {
            ok = false;
            detail = std::string("nondeterministic ") + name;
        }
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    report(9, ok, "AUC oracles agree and evaluation is byte-deterministic", detail);
}

} // namespace

int main() {
    criterion_simd_equivalence();
    criterion_metric_properties();
    criteria_attack_and_feasibility();

    std::printf("-- running two-clusters benchmark --\n");
    std::fflush(stdout);
    const BenchmarkRun clusters = run_benchmark("two-clusters");
    std::printf("-- running xor-grid benchmark --\n");
    std::fflush(stdout);
    const BenchmarkRun xorg = run_benchmark("xor-grid");

    criterion_perturbation_distributions(xorg);
    criterion_detection_ordering(clusters, xorg);
    criterion_refsweep(clusters, xorg);
    criterion_throughput();
    criterion_harness_consistency();

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
