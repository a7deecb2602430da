#include <doctest.h>

#include <cmath>

#include "ctikit/error.hpp"
#include "ctikit/relevance.hpp"
#include "ctikit/rng.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace ctikit;
using namespace ctikit::relevance;
namespace oracle = ctikit::testing::oracle;

namespace {

std::vector<LabeledTokenSeq> separable(Rng& rng, std::size_t n) {
    std::vector<LabeledTokenSeq> rows;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledTokenSeq r;
        r.post_id = std::to_string(i);
        r.label = static_cast<int>(i % 2);
        std::size_t len = 3 + rng.below(6);
        for (std::size_t k = 0; k < len; ++k) {
            if (rng.below(3) == 0)
                r.tokens.push_back(r.label ? "aaa" : "bbb");
            else
                r.tokens.push_back(testing::pick(rng, {"common", "word", "tweet", "secur"}));
        }
        r.tokens.push_back(r.label ? "aaa" : "bbb");
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

TEST_CASE("F1 and detection rate on hand-built matrices") {
    CHECK(f1_score({90, 10, 5, 0}) == doctest::Approx(180.0 / 195.0));
    CHECK(detection_rate({90, 10, 5, 0}) == doctest::Approx(90.0 / 95.0));
    CHECK(f1_score({1, 0, 0, 0}) == 1.0);
    CHECK(f1_score({0, 3, 2, 9}) == 0.0);
    CHECK_THROWS_AS(f1_score({0, 0, 0, 7}), Error);
    CHECK_THROWS_AS(detection_rate({0, 4, 0, 0}), Error);
}

TEST_CASE("F1 matches two independent oracles") {
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        ConfusionCounts c{static_cast<std::int64_t>(rng.below(500)), static_cast<std::int64_t>(rng.below(500)),
                          static_cast<std::int64_t>(rng.below(500)), static_cast<std::int64_t>(rng.below(500))};
        if (c.tp + c.fp + c.fn == 0) continue;
        CHECK(f1_score(c) == doctest::Approx(oracle::f1(c.tp, c.fp, c.fn)).epsilon(1e-12));
        if (c.tp > 0)
            CHECK(f1_score(c) == doctest::Approx(oracle::f1_from_precision_recall(c.tp, c.fp, c.fn)).epsilon(1e-12));
        // symmetric in fp and fn
        CHECK(f1_score(c) == f1_score({c.tp, c.fn, c.fp, c.tn}));
        CHECK(f1_score(c) >= 0.0);
        CHECK(f1_score(c) <= 1.0);
        if (c.tp + c.fn > 0) CHECK(detection_rate(c) == doctest::Approx(oracle::detection_rate(c.tp, c.fn)));
    }
}

TEST_CASE("confusion counts") {
    CHECK(confusion({1, 1, 0, 0, 1}, {1, 0, 1, 0, 1}) == ConfusionCounts{2, 1, 1, 1});
    CHECK_THROWS_AS(confusion({1}, {1, 0}), Error);
}

TEST_CASE("split covers every index once") {
    auto s = split_80_10_10(103, 9);
    std::vector<int> seen(103, 0);
    for (auto* part : {&s.train, &s.validation, &s.test})
        for (auto i : *part) ++seen[i];
    for (int c : seen) CHECK(c == 1);
    CHECK(s.train.size() == 82);
    CHECK(s.validation.size() + s.test.size() == 21);
    CHECK(split_80_10_10(103, 9).test == s.test);
    CHECK(split_80_10_10(103, 10).test != s.test);
}

TEST_CASE("text model separates a keyword corpus") {
    Rng rng(5);
    auto rows = separable(rng, 400);
    auto split = split_80_10_10(rows.size(), 1);
    std::vector<LabeledTokenSeq> train, test;
    for (auto i : split.train) train.push_back(rows[i]);
    for (auto i : split.test) test.push_back(rows[i]);
    auto model = train_text(train);
    CHECK(f1_score(evaluate_text(model, test)) >= 0.99);

    auto again = train_text(train);
    CHECK(again.weights == model.weights);
    CHECK(again.bias == model.bias);

    double empty = predict_text(model, {});
    CHECK(empty == doctest::Approx(1.0 / (1.0 + std::exp(-model.bias))));
    CHECK(model.margin({"aaa", "aaa"}) - model.bias ==
          doctest::Approx(2 * (model.margin({"aaa"}) - model.bias)));
}

TEST_CASE("higher thresholds never add positives") {
    Rng rng(6);
    auto rows = separable(rng, 200);
    auto model = train_text(rows);
    std::int64_t prev = -1;
    for (double th = 1.0; th >= 0.0; th -= 0.05) {
        auto c = evaluate_text(model, rows, th);
        std::int64_t positives = c.tp + c.fp;
        CHECK(positives >= prev);
        prev = positives;
    }
}

TEST_CASE("training input validation") {
    CHECK_THROWS_AS(train_text({}), Error);
    CHECK_THROWS_AS(train_text({{"1", {"a"}, 1}, {"2", {"b"}, 1}}), Error);
}

TEST_CASE("model persistence") {
    Rng rng(7);
    auto model = train_text(separable(rng, 60), TrainConfig{1u << 10, 0.1, 5, 1e-6, 3});
    auto copy = TextModel::from_bytes(model.to_bytes());
    CHECK(copy.weights == model.weights);
    CHECK(copy.bias == model.bias);
    CHECK(copy.hash_dimension == 1024);
    auto path = testing::scratch_dir("relevance") / "m.bin";
    model.save(path);
    CHECK(TextModel::load(path).to_bytes() == model.to_bytes());
    CHECK_THROWS_AS(TextModel::from_bytes("garbage"), Error);
    auto bytes = model.to_bytes();
    bytes.resize(bytes.size() - 3);
    CHECK_THROWS_AS(TextModel::from_bytes(bytes), Error);
}

TEST_CASE("feature buckets are stable and in range") {
    CHECK(feature_bucket("malwar", 1024) == feature_bucket("malwar", 1024));
    Rng rng(1);
    for (int i = 0; i < 500; ++i) CHECK(feature_bucket(testing::random_label(rng), 97) < 97);
}
