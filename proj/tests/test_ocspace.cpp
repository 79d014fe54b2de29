#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "ocshield/ocspace.hpp"
#include "test_support.hpp"

using namespace ocshield;
using namespace testsupport;
using ocspace::OutputConfig;
using ocspace::ReferenceSet;

namespace {

OutputConfig random_oc(std::mt19937_64& rng, std::size_t m, int max_id = 255) {
    std::uniform_int_distribution<int> id(0, max_id);
    std::vector<std::uint8_t> ids(m);
    for (auto& v : ids) v = static_cast<std::uint8_t>(id(rng));
    return OutputConfig(std::move(ids));
}

std::vector<OutputConfig> random_rows(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                      int max_id = 255) {
    std::vector<OutputConfig> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rows.push_back(random_oc(rng, m, max_id));
    return rows;
}

std::uint32_t naive_min_scan(const std::vector<OutputConfig>& rows, const OutputConfig& oc) {
    std::uint32_t best = 255;
    for (const auto& row : rows)
        best = std::min(best, naive_hamming(row.ids, oc.ids));
    return best;
}

} // namespace

TEST_CASE("hamming: identity and single difference") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto oc = random_oc(rng, 17);
        CHECK(ocspace::hamming(oc, oc) == 0);
    }
    const OutputConfig a(std::vector<std::uint8_t>{0, 1, 2});
    const OutputConfig b(std::vector<std::uint8_t>{0, 2, 2});
    CHECK(ocspace::hamming(a, b) == 1);
    CHECK_THROWS_AS(ocspace::hamming(a, random_oc(rng, 4)), Error);
}

TEST_CASE("hamming: naive loop oracle and metric axioms") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 500; ++i) {
        std::uniform_int_distribution<std::size_t> len(1, 64);
        const std::size_t m = len(rng);
        const auto a = random_oc(rng, m, 4);
        const auto b = random_oc(rng, m, 4);
        const auto c = random_oc(rng, m, 4);
        const auto dab = ocspace::hamming(a, b);
        CHECK(dab == naive_hamming(a.ids, b.ids));
        CHECK(dab == ocspace::hamming(b, a));                        // symmetry
        CHECK((dab == 0) == (a == b));                               // indiscernibles
        CHECK(dab <= ocspace::hamming(a, c) + ocspace::hamming(c, b)); // triangle
        CHECK(dab <= m);
    }
}

TEST_CASE("build_reference: empty class partition") {
    const auto never_one = constant_model(-2.0, 1, 2); // always predicts 0
    Matrix X(4, 2);
    const std::vector<int> y{0, 0, 1, 1};
    try {
        ocspace::build_reference(never_one, X, y);
        FAIL("expected EmptyClassPartition");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyClassPartition);
    }
}

TEST_CASE("build_reference: padding arithmetic for one row per class") {
    // one split on f0: left predicts 0, right predicts 1
    const auto e = model::parse_model(
        R"({"aggregation":"sum_logistic","n_features":1,
            "trees":[{"feature":0,"threshold":0.5,
                      "left":{"value":-1},"right":{"value":1}}]})");
    Matrix X(2, 1);
    X.at(0, 0) = 0.1;
    X.at(1, 0) = 0.9;
    const std::vector<int> y{0, 1};
    const auto r = ocspace::build_reference(e, X, y);
    for (int cls : {0, 1}) {
        CHECK(r.partition(cls).rows == 1);
        CHECK(r.partition(cls).physical_rows == 32);
        CHECK(r.partition(cls).padding() == 31);
    }
    CHECK(r.padded_rows() == 62);
}

TEST_CASE("build_reference: stored bytes re-encode their source examples") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution flip(0.3);

    // regenerate until the model predicts both classes over the sample
    Matrix X(300, 2);
    std::vector<int> y(300);
    auto e = random_grid_ensemble(rng, 2, 6, 4);
    for (;;) {
        bool seen[2] = {false, false};
        for (std::size_t i = 0; i < X.rows; ++i) {
            X.at(i, 0) = u(rng);
            X.at(i, 1) = u(rng);
            const int predicted = e.evaluate(X.row(i)).label;
            seen[predicted] = true;
            y[i] = flip(rng) ? 1 - predicted : predicted; // flipped rows are dropped
        }
        if (seen[0] && seen[1]) break;
        e = random_grid_ensemble(rng, 2, 6, 4);
    }
    const auto r = ocspace::build_reference(e, X, y);

    // re-encode: every retained row equals the leaf path of some correctly
    // classified example with that label, and counts line up
    std::vector<OutputConfig> expected[2];
    for (std::size_t i = 0; i < X.rows; ++i)
        if (e.evaluate(X.row(i)).label == y[i])
            expected[y[i]].emplace_back(e.leaf_path(X.row(i)));
    for (int cls : {0, 1}) {
        REQUIRE(r.partition(cls).rows == expected[cls].size());
        for (std::size_t i = 0; i < expected[cls].size(); ++i)
            CHECK(r.partition(cls).row(i, r.n_trees()) == expected[cls][i]);
    }
}

TEST_CASE("oc_score: trivial cases") {
    std::mt19937_64 rng(13);
    const auto rows0 = random_rows(rng, 5, 8, 3);
    const auto rows1 = random_rows(rng, 7, 8, 3);
    const auto r = ReferenceSet::from_rows(8, rows0, rows1);

    CHECK(ocspace::oc_score(r, rows1[3], 1) == 0); // self distance

    // single row partition differing everywhere
    std::vector<std::uint8_t> all1(8, 1), all2(8, 2);
    const auto r2 = ReferenceSet::from_rows(
        8, {OutputConfig(all1)}, {OutputConfig(all2)});
    CHECK(ocspace::oc_score(r2, OutputConfig(all2), 0) == 8);
}

TEST_CASE("oc_score: exhaustive scan oracle") {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 30; ++round) {
        std::uniform_int_distribution<std::size_t> mlen(1, 64), nrows(1, 1024 / 8);
        const std::size_t m = mlen(rng);
        const auto rows0 = random_rows(rng, nrows(rng), m, 7);
        const auto rows1 = random_rows(rng, nrows(rng), m, 7);
        const auto r = ReferenceSet::from_rows(m, rows0, rows1);
        for (int q = 0; q < 10; ++q) {
            const auto oc = random_oc(rng, m, 7);
            CHECK(ocspace::oc_score(r, oc, 0) == naive_min_scan(rows0, oc));
            CHECK(ocspace::oc_score(r, oc, 1) == naive_min_scan(rows1, oc));
        }
    }
}

TEST_CASE("oc_score_simd: equals the scalar kernel") {
    std::mt19937_64 rng(19);
    for (int round = 0; round < 60; ++round) {
        std::uniform_int_distribution<std::size_t> mlen(1, 255), nrows(1, 200);
        const std::size_t m = mlen(rng);
        const auto r = ReferenceSet::from_rows(m, random_rows(rng, nrows(rng), m),
                                               random_rows(rng, nrows(rng), m));
        for (int q = 0; q < 5; ++q) {
            const auto oc = random_oc(rng, m);
            const int label = static_cast<int>(q % 2);
            CHECK(ocspace::oc_score_simd(r, oc, label) == ocspace::oc_score(r, oc, label));
        }
    }
}

TEST_CASE("oc_score_simd: one block of identical rows") {
    std::mt19937_64 rng(21);
    const auto oc = random_oc(rng, 33);
    const std::vector<OutputConfig> rows(32, oc);
    const auto r = ReferenceSet::from_rows(33, rows, random_rows(rng, 32, 33));
    CHECK(r.partition(0).physical_rows == 32);
    CHECK(ocspace::oc_score_simd(r, oc, 0) == 0);
}

TEST_CASE("padding never changes the score") {
    std::mt19937_64 rng(23);
    for (int round = 0; round < 20; ++round) {
        std::uniform_int_distribution<std::size_t> mlen(1, 32), nrows(1, 70);
        const std::size_t m = mlen(rng);
        const auto rows0 = random_rows(rng, nrows(rng), m, 5);
        const auto rows1 = random_rows(rng, nrows(rng), m, 5);
        const auto r = ReferenceSet::from_rows(m, rows0, rows1);
        const auto oc = random_oc(rng, m, 5);
        CHECK(ocspace::oc_score_simd(r, oc, 0) == naive_min_scan(rows0, oc));
        CHECK(ocspace::oc_score_simd(r, oc, 1) == naive_min_scan(rows1, oc));
    }
}

TEST_CASE("monotonicity: adding a row never increases the score") {
    std::mt19937_64 rng(29);
    for (int round = 0; round < 40; ++round) {
        const std::size_t m = 16;
        auto rows0 = random_rows(rng, 20, m, 3);
        const auto rows1 = random_rows(rng, 20, m, 3);
        const auto oc = random_oc(rng, m, 3);

        const auto before =
            ocspace::oc_score_simd(ReferenceSet::from_rows(m, rows0, rows1), oc, 0);
        rows0.push_back(random_oc(rng, m, 3));
        const auto after =
            ocspace::oc_score_simd(ReferenceSet::from_rows(m, rows0, rows1), oc, 0);
        CHECK(after <= before);
    }
}

TEST_CASE("batch_oc_scores: empty, singleton, permutation equivariance") {
    std::mt19937_64 rng(31);
    const std::size_t m = 24;
    const auto r =
        ReferenceSet::from_rows(m, random_rows(rng, 50, m), random_rows(rng, 50, m));

    CHECK(ocspace::batch_oc_scores(r, {}, {}).empty());

    const auto oc = random_oc(rng, m);
    const std::vector<OutputConfig> one{oc};
    const std::vector<int> one_label{1};
    CHECK(ocspace::batch_oc_scores(r, one, one_label) ==
          std::vector<std::uint32_t>{ocspace::oc_score_simd(r, oc, 1)});

    std::vector<OutputConfig> ocs;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        ocs.push_back(random_oc(rng, m));
        labels.push_back(i % 2);
    }
    const auto scores = ocspace::batch_oc_scores(r, ocs, labels);

    std::vector<std::size_t> perm(ocs.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<OutputConfig> shuffled;
    std::vector<int> shuffled_labels;
    for (std::size_t p : perm) {
        shuffled.push_back(ocs[p]);
        shuffled_labels.push_back(labels[p]);
    }
    const auto shuffled_scores = ocspace::batch_oc_scores(r, shuffled, shuffled_labels);
    for (std::size_t i = 0; i < perm.size(); ++i)
        CHECK(shuffled_scores[i] == scores[perm[i]]);
}

TEST_CASE("batch_oc_scores: element errors carry the index") {
    std::mt19937_64 rng(37);
    const std::size_t m = 8;
    const auto r =
        ReferenceSet::from_rows(m, random_rows(rng, 4, m), random_rows(rng, 4, m));
    std::vector<OutputConfig> ocs{random_oc(rng, m), random_oc(rng, m - 1)};
    const std::vector<int> labels{0, 0};
    try {
        ocspace::batch_oc_scores(r, ocs, labels);
        FAIL("expected LengthMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LengthMismatch);
        CHECK(std::string(e.what()).find("element 1") != std::string::npos);
    }
}

TEST_CASE("reference set file round trip") {
    std::mt19937_64 rng(41);
    const std::size_t m = 40;
    const auto r =
        ReferenceSet::from_rows(m, random_rows(rng, 37, m), random_rows(rng, 65, m));
    std::stringstream buf;
    r.save(buf);
    const auto back = ReferenceSet::load(buf);
    CHECK(back.n_trees() == m);
    for (int cls : {0, 1}) {
        CHECK(back.partition(cls).rows == r.partition(cls).rows);
        CHECK(back.partition(cls).physical_rows == r.partition(cls).physical_rows);
        CHECK(back.partition(cls).bytes == r.partition(cls).bytes);
    }
    for (int q = 0; q < 20; ++q) {
        const auto oc = random_oc(rng, m);
        CHECK(ocspace::oc_score_simd(back, oc, q % 2) ==
              ocspace::oc_score_simd(r, oc, q % 2));
    }
}
