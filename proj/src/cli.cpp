#include "ocshield/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "ocshield/attack.hpp"
#include "ocshield/csv.hpp"
#include "ocshield/detectors.hpp"
#include "ocshield/harness.hpp"
#include "ocshield/model.hpp"
#include "ocshield/ocspace.hpp"
#include "ocshield/rng.hpp"
#include "ocshield/trainer.hpp"

namespace ocshield::cli {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::string> split_list(const std::string& csv_list) {
    std::vector<std::string> out;
    std::stringstream ss(csv_list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
    std::string data, mode = "boosting", out;
    std::size_t trees = 20, depth = 4, min_leaf = 1;
    double lr = 0.3;
    std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& a) {
    Matrix X;
    std::vector<int> y;
    csv::read_labeled(a.data, X, y);

    trainer::TrainConfig cfg;
    cfg.n_trees = a.trees;
    cfg.max_depth = a.depth;
    cfg.learning_rate = a.lr;
    cfg.min_samples_leaf = a.min_leaf;
    cfg.seed = a.seed;
    if (a.mode == "boosting")
        cfg.mode = trainer::Mode::Boosting;
    else if (a.mode == "forest")
        cfg.mode = trainer::Mode::Forest;
    else
        raise(ErrorCode::InvalidArgument, "mode must be boosting or forest");

    const model::Ensemble ens = trainer::train(X, y, cfg);
    model::save_model_file(ens, a.out);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < X.rows; ++i)
        correct += ens.evaluate(X.row(i)).label == y[i];
    std::cout << "trained " << a.mode << " model: " << ens.tree_count() << " trees, "
              << "training accuracy "
              << csv::format_double(static_cast<double>(correct) /
                                    static_cast<double>(X.rows))
              << "\n";
    return 0;
}

// ------------------------------------------------------------------ score

struct ScoreArgs {
    std::string model, refset, train_data, input, out, save_refset;
    std::string detectors = "ocscore";
    bool no_simd = false;
    std::uint64_t seed = 0;
};

int cmd_score(const ScoreArgs& a) {
    ocspace::set_simd_enabled(!a.no_simd);
    const model::Ensemble ens = model::load_model_file(a.model);
    const std::vector<std::string> detector_names = split_list(a.detectors);
    if (detector_names.empty())
        raise(ErrorCode::InvalidArgument, "no detectors requested");

    std::optional<ocspace::ReferenceSet> ref;
    std::optional<detectors::IsolationForest> iforest;
    Matrix train_X;
    std::vector<int> train_y;
    const bool have_train = !a.train_data.empty();
    if (have_train) csv::read_labeled(a.train_data, train_X, train_y);

    const bool need_ref =
        !a.save_refset.empty() ||
        std::find(detector_names.begin(), detector_names.end(), "ocscore") !=
            detector_names.end();
    if (need_ref) {
        if (!a.refset.empty())
            ref = ocspace::ReferenceSet::load_file(a.refset);
        else if (have_train)
            ref = ocspace::build_reference(ens, train_X, train_y);
        else
            raise(ErrorCode::InvalidArgument, "ocscore needs --refset or --train-data");
        if (!a.save_refset.empty()) ref->save_file(a.save_refset);
    }
    for (const std::string& d : detector_names) {
        if (d == "ocscore") {
            // reference prepared above
        } else if (d == "iforest") {
            if (!have_train)
                raise(ErrorCode::InvalidArgument, "iforest needs --train-data");
            iforest = detectors::IsolationForest::fit(train_X, {100, 256, a.seed});
        } else if (d != "ambig" && d != "mlloo") {
            raise(ErrorCode::InvalidArgument, "unknown detector: " + d);
        }
    }

    const Matrix inputs = csv::read_matrix(a.input);
    std::ostringstream body;
    body << "example_id,predicted_label,prob";
    for (const std::string& d : detector_names) body << ',' << d;
    body << '\n';
    for (std::size_t i = 0; i < inputs.rows; ++i) {
        const auto x = inputs.row(i);
        const model::Prediction pred = ens.evaluate(x);
        body << i << ',' << pred.label << ',' << csv::format_double(pred.prob);
        for (const std::string& d : detector_names) {
            double v = 0.0;
            if (d == "ocscore")
                v = detectors::score_ocscore(ens, *ref, x).value;
            else if (d == "ambig")
                v = detectors::score_ambiguity(ens, x).value;
            else if (d == "mlloo")
                v = detectors::score_mlloo(ens, x).value;
            else
                v = iforest->anomaly_score(x);
            body << ',' << csv::format_double(v);
        }
        body << '\n';
    }

    if (a.out.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(a.out);
        if (!out) raise(ErrorCode::IoError, "cannot write " + a.out);
        out << body.str();
    }
    return 0;
}

// ----------------------------------------------------------------- attack

struct AttackArgs {
    std::string model, input, out, witness_out;
    std::string kind = "closest";
    double budget = 0.0; // base perturbation; 0 = derive from closest attacks
    double domain_lo = 0.0, domain_hi = 1.0;
    std::uint64_t cap = attack::kDefaultEnumerationCap;
};

int cmd_attack(const AttackArgs& a) {
    const model::Ensemble ens = model::load_model_file(a.model);
    Matrix X;
    std::vector<int> y;
    csv::read_labeled(a.input, X, y);

    attack::AttackKind kind;
    double multiplier = 0.0;
    if (a.kind == "closest") {
        kind = attack::AttackKind::Closest;
    } else if (a.kind == "x2") {
        kind = attack::AttackKind::Budget2x;
        multiplier = 2.0;
    } else if (a.kind == "x5") {
        kind = attack::AttackKind::Budget5x;
        multiplier = 5.0;
    } else {
        raise(ErrorCode::InvalidArgument, "kind must be closest, x2 or x5");
    }

    const model::LeafBox domain =
        model::LeafBox::closed_cube(ens.n_features(), a.domain_lo, a.domain_hi);

    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < X.rows; ++i)
        if (ens.evaluate(X.row(i)).label == y[i]) eligible.push_back(i);
    if (eligible.empty())
        raise(ErrorCode::InsufficientCorrect, "no correctly classified inputs");

    double base_delta = a.budget;
    if (kind != attack::AttackKind::Closest && base_delta <= 0.0) {
        // no explicit budget: derive the median closest perturbation first
        std::vector<attack::AdversarialExample> closest;
        for (std::size_t i : eligible) {
            try {
                closest.push_back(attack::closest_adversarial(ens, X.row(i), domain, a.cap));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoAdversarialExists) throw;
            }
        }
        base_delta = attack::median_delta(closest);
    }

    std::vector<std::pair<std::size_t, attack::AdversarialExample>> results;
    std::size_t failed = 0;
    for (std::size_t i : eligible) {
        try {
            if (kind == attack::AttackKind::Closest)
                results.emplace_back(i, attack::closest_adversarial(ens, X.row(i), domain,
                                                                    a.cap));
            else
                results.emplace_back(
                    i, attack::budgeted_adversarial(ens, X.row(i), multiplier * base_delta,
                                                    domain, kind, a.cap));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoAdversarialExists) throw;
            ++failed;
        }
    }

    std::ostringstream body;
    body << "example_id,kind,linf,l0,source_label,flipped_prob\n";
    for (const auto& [idx, adv] : results) {
        body << idx << ',' << attack::to_string(adv.kind) << ','
             << csv::format_double(adv.linf) << ',' << adv.l0 << ',' << adv.source_label
             << ',' << csv::format_double(adv.flipped_prob) << '\n';
    }
    if (a.out.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(a.out);
        if (!out) raise(ErrorCode::IoError, "cannot write " + a.out);
        out << body.str();
    }

    std::string witness_path = a.witness_out;
    if (witness_path.empty() && !a.out.empty()) witness_path = a.out + ".witness.csv";
    if (!witness_path.empty()) {
        csv::Writer w(witness_path);
        std::vector<std::string> header{"example_id"};
        for (std::size_t f = 0; f < ens.n_features(); ++f)
            header.push_back("f" + std::to_string(f));
        w.row(header);
        for (const auto& [idx, adv] : results) {
            std::vector<std::string> cells{std::to_string(idx)};
            for (double v : adv.perturbed) cells.push_back(csv::format_double(v));
            w.row(cells);
        }
        w.close();
    }
    std::cerr << "attacked " << results.size() << "/" << eligible.size()
              << " eligible examples (" << failed << " without a flip in range)\n";
    return 0;
}

// -------------------------------------------------------------- count-ocs

int cmd_count_ocs(const std::string& model_path, std::uint64_t cap) {
    const model::Ensemble ens = model::load_model_file(model_path);
    std::cout << attack::count_feasible(ens, cap) << "\n";
    return 0;
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string dataset, out_dir;
    std::string models = "boosting,forest";
    std::string detectors = "ocscore,ambig,mlloo,iforest";
    std::size_t folds = 5, n = 4000, attacks = 100;
    std::size_t trees = 0, depth = 0; // 0 = per-dataset default
    double normal_ratio = 5.0;
    std::uint64_t seed = 7;
    bool no_simd = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
    ocspace::set_simd_enabled(!a.no_simd);
    const harness::Dataset ds = harness::make_dataset(a.dataset, a.n, a.seed);

    harness::EvalConfig cfg;
    cfg.dataset_name = a.dataset;
    cfg.folds = a.folds;
    cfg.seed = a.seed;
    cfg.n_attacks = a.attacks;
    cfg.normal_ratio = a.normal_ratio;
    cfg.detectors = split_list(a.detectors);

    const auto wanted = split_list(a.models);
    for (harness::ModelSpec& spec : harness::default_models(a.dataset, a.seed)) {
        if (std::find(wanted.begin(), wanted.end(), spec.name) == wanted.end()) continue;
        if (a.trees > 0) spec.cfg.n_trees = a.trees;
        if (a.depth > 0) spec.cfg.max_depth = a.depth;
        cfg.models.push_back(spec);
    }
    if (cfg.models.empty())
        raise(ErrorCode::InvalidArgument, "no valid model names in --models");

    const harness::EvalResult result = harness::run_evaluation(ds, cfg);
    harness::write_results(result, a.out_dir);
    std::cout << "wrote auc.csv curve.csv timings.csv refsweep.csv to " << a.out_dir
              << " (dropped attacks: " << result.dropped_attacks << ")\n";
    return 0;
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
    std::string model, refset;
    std::size_t queries = 100, repeats = 5;
    std::uint64_t seed = 1;
};

int cmd_bench(const BenchArgs& a) {
    const model::Ensemble ens = model::load_model_file(a.model);
    const ocspace::ReferenceSet ref = ocspace::ReferenceSet::load_file(a.refset);
    if (ref.n_trees() != ens.tree_count())
        raise(ErrorCode::LengthMismatch, "reference set does not match the model");
    if (!ocspace::detail::avx2_available())
        std::cerr << "note: AVX2 unavailable, both paths use the scalar kernel\n";

    // random but valid query configurations
    auto rng = make_rng(a.seed);
    std::vector<ocspace::OutputConfig> queries(a.queries);
    std::vector<int> labels(a.queries);
    for (std::size_t q = 0; q < a.queries; ++q) {
        std::vector<std::uint8_t> ids(ens.tree_count());
        for (std::size_t m = 0; m < ens.tree_count(); ++m) {
            std::uniform_int_distribution<std::size_t> pick(0, ens.tree(m).leaf_count() - 1);
            ids[m] = static_cast<std::uint8_t>(pick(rng));
        }
        queries[q] = ocspace::OutputConfig(std::move(ids));
        labels[q] = static_cast<int>(q % 2);
    }

    auto time_path = [&](bool simd) {
        std::vector<double> per_query(a.queries);
        for (std::size_t q = 0; q < a.queries; ++q) {
            const auto t0 = Clock::now();
            volatile std::uint32_t sink = 0;
            for (std::size_t rep = 0; rep < a.repeats; ++rep)
                sink = simd ? ocspace::oc_score_simd(ref, queries[q], labels[q])
                            : ocspace::oc_score(ref, queries[q], labels[q]);
            (void)sink;
            per_query[q] = std::chrono::duration<double, std::milli>(Clock::now() - t0)
                               .count() /
                           static_cast<double>(a.repeats);
        }
        std::sort(per_query.begin(), per_query.end());
        return per_query[per_query.size() / 2]; // median
    };

    ocspace::set_simd_enabled(true);
    const double simd_ms = time_path(true);
    const double scalar_ms = time_path(false);
    std::cout << "queries=" << a.queries << " repeats=" << a.repeats
              << " rows0=" << ref.partition(0).physical_rows
              << " rows1=" << ref.partition(1).physical_rows << " trees=" << ref.n_trees()
              << "\n";
    std::cout << "simd_ms_per_query=" << csv::format_double(simd_ms) << "\n";
    std::cout << "scalar_ms_per_query=" << csv::format_double(scalar_ms) << "\n";
    std::cout << "speedup=" << csv::format_double(scalar_ms / simd_ms) << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"output-configuration adversarial-example detection for tree ensembles"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a toy ensemble from a labeled CSV");
    train->add_option("--data", train_args.data, "labeled CSV (label column or last)")
        ->required();
    train->add_option("--mode", train_args.mode, "boosting|forest");
    train->add_option("--trees", train_args.trees, "number of trees");
    train->add_option("--depth", train_args.depth, "maximum tree depth (<=8)");
    train->add_option("--lr", train_args.lr, "boosting learning rate");
    train->add_option("--min-leaf", train_args.min_leaf, "minimum samples per leaf");
    train->add_option("--seed", train_args.seed, "rng seed");
    train->add_option("--out", train_args.out, "output model JSON")->required();

    ScoreArgs score_args;
    auto* score = app.add_subcommand("score", "score examples with the detectors");
    score->add_option("--model", score_args.model, "model JSON")->required();
    score->add_option("--refset", score_args.refset, "binary reference set file");
    score->add_option("--train-data", score_args.train_data,
                      "labeled CSV to build the reference set / fit iforest");
    score->add_option("--input", score_args.input, "feature CSV to score")->required();
    score->add_option("--detectors", score_args.detectors,
                      "comma list: ocscore,ambig,mlloo,iforest");
    score->add_option("--out", score_args.out, "output CSV (default stdout)");
    score->add_option("--save-refset", score_args.save_refset,
                      "write the built reference set to a binary file");
    score->add_option("--seed", score_args.seed, "rng seed (iforest)");
    score->add_flag("--no-simd", score_args.no_simd, "force the scalar scan kernel");

    AttackArgs attack_args;
    auto* atk = app.add_subcommand("attack", "generate adversarial examples");
    atk->add_option("--model", attack_args.model, "model JSON")->required();
    atk->add_option("--input", attack_args.input, "labeled CSV of originals")->required();
    atk->add_option("--kind", attack_args.kind, "closest|x2|x5");
    atk->add_option("--budget", attack_args.budget,
                    "base perturbation for x2/x5 (default: median closest)");
    atk->add_option("--domain-lo", attack_args.domain_lo, "domain lower bound");
    atk->add_option("--domain-hi", attack_args.domain_hi, "domain upper bound");
    atk->add_option("--cap", attack_args.cap, "feasible enumeration cap");
    atk->add_option("--out", attack_args.out, "attacks CSV (default stdout)");
    atk->add_option("--witness-out", attack_args.witness_out,
                    "perturbed-point sidecar CSV");

    std::string count_model;
    std::uint64_t count_cap = attack::kDefaultEnumerationCap;
    auto* count = app.add_subcommand("count-ocs", "count feasible output configurations");
    count->add_option("--model", count_model, "model JSON")->required();
    count->add_option("--cap", count_cap, "enumeration cap");

    EvaluateArgs eval_args;
    auto* eval = app.add_subcommand("evaluate", "run the full detection benchmark");
    eval->add_option("--dataset", eval_args.dataset,
                     "two-clusters | xor-grid | labeled CSV path")
        ->required();
    eval->add_option("--out-dir", eval_args.out_dir, "directory for the result CSVs")
        ->required();
    eval->add_option("--folds", eval_args.folds, "cross-validation folds");
    eval->add_option("--seed", eval_args.seed, "root rng seed");
    eval->add_option("--n", eval_args.n, "rows for the builtin datasets");
    eval->add_option("--attacks", eval_args.attacks, "attacks per fold");
    eval->add_option("--normal-ratio", eval_args.normal_ratio,
                     "normal examples per adversarial example");
    eval->add_option("--models", eval_args.models, "comma list: boosting,forest");
    eval->add_option("--detectors", eval_args.detectors,
                     "comma list: ocscore,ambig,mlloo,iforest");
    eval->add_option("--trees", eval_args.trees, "override trees per model");
    eval->add_option("--depth", eval_args.depth, "override max depth");
    eval->add_flag("--no-simd", eval_args.no_simd, "force the scalar scan kernel");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "time the scan kernels on a reference set");
    bench->add_option("--model", bench_args.model, "model JSON")->required();
    bench->add_option("--refset", bench_args.refset, "binary reference set")->required();
    bench->add_option("--queries", bench_args.queries, "number of query configurations");
    bench->add_option("--repeats", bench_args.repeats, "scans per query");
    bench->add_option("--seed", bench_args.seed, "rng seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*train) return cmd_train(train_args);
        if (*score) return cmd_score(score_args);
        if (*atk) return cmd_attack(attack_args);
        if (*count) return cmd_count_ocs(count_model, count_cap);
        if (*eval) return cmd_evaluate(eval_args);
        if (*bench) return cmd_bench(bench_args);
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: Internal: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace ocshield::cli
