#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ctikit/error.hpp"
#include "ctikit/explain.hpp"
#include "ctikit/rng.hpp"
#include "generators.hpp"

using namespace ctikit;
using namespace ctikit::explain;

namespace {

// Probability that is exactly linear around the points used below.
class LinearProbability final : public botml::ProbabilityModel {
public:
    explicit LinearProbability(std::vector<double> c) : c_(std::move(c)) {}
    double probability(const Row& x) const override {
        double p = 0.5;
        for (std::size_t j = 0; j < c_.size(); ++j) p += c_[j] * (x[j] - 0.5);
        return p;
    }

private:
    std::vector<double> c_;
};

std::vector<std::string> names(std::size_t d) {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < d; ++j) out.push_back("f" + std::to_string(j));
    return out;
}

}  // namespace

TEST_CASE("linear contributions add up to the margin") {
    Rng rng(70);
    auto data = testing::gaussian_blobs(rng, 60, 60, 8, 3, 1.5);
    botml::Hyperparams hp;
    hp.k = 6;
    auto model = botml::train_classifier(botml::ModelKind::LogisticRegression, data, hp, 1);
    auto scaled = botml::minmax_apply(model.scaler, data.x);
    for (std::size_t i = 0; i < 50; ++i) {
        auto e = linear_contributions(model, scaled[i], scaled, data.ids[i]);
        double total = e.base_value;
        for (const auto& c : e.contributions) total += c.value;
        CHECK(std::abs(total - model.margin(scaled[i])) < 1e-9);
        CHECK(std::abs(e.prediction - model.margin(scaled[i])) < 1e-9);
        CHECK(e.scale == Scale::Margin);
        CHECK(e.contributions.size() == 8);
    }
    auto e = linear_contributions(model, scaled[0], scaled);
    std::size_t zero = 0;
    for (const auto& c : e.contributions) zero += c.value == 0.0;
    CHECK(zero >= 2);  // unselected columns contribute nothing

    auto tree = botml::train_classifier(botml::ModelKind::DecisionTree, data);
    CHECK_THROWS_AS(linear_contributions(tree, scaled[0], scaled), Error);
    CHECK_THROWS_AS(linear_contributions(model, scaled[0], {}), Error);
}

TEST_CASE("LIME recovers a locally linear model") {
    const std::vector<double> coef{0.2, -0.15, 0.0, 0.05, 0.3};
    LinearProbability model(coef);
    Row x{0.5, 0.4, 0.6, 0.5, 0.45};
    LimeOptions opts;
    opts.n_samples = 5000;
    opts.seed = 3;
    auto e = lime_explain(model, x, names(5), opts, "x");
    REQUIRE(e.contributions.size() == 5);
    for (std::size_t j = 0; j < 5; ++j) {
        CAPTURE(j);
        double tol = std::max(0.1 * std::abs(coef[j]), 1e-3);
        CHECK(std::abs(e.contributions[j].value - coef[j]) <= tol);
    }
    CHECK(e.prediction == doctest::Approx(model.probability(x)));
    CHECK(e.scale == Scale::Probability);

    opts.exec = Exec::Serial;
    auto serial = lime_explain(model, x, names(5), opts, "x");
    for (std::size_t j = 0; j < 5; ++j) CHECK(serial.contributions[j].value == e.contributions[j].value);
}

TEST_CASE("permutation importance finds the informative column") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        CAPTURE(seed);
        Rng rng(100 + seed);
        auto data = testing::gaussian_blobs(rng, 150, 150, 6, 1, 3.0);
        auto split = botml::stratified_split(data.y, 0.3, seed);
        botml::Hyperparams hp;
        hp.n_trees = 30;
        auto model = botml::train_classifier(botml::ModelKind::RandomForest, data.subset(split.train), hp, seed);
        auto test = data.subset(split.test);
        auto ranked = permutation_importance(model, botml::minmax_apply(model.scaler, test.x), test.y, names(6), 5,
                                             seed);
        REQUIRE(ranked.size() == 6);
        CHECK(ranked[0].index == 0);
        CHECK(ranked[0].feature == "f0");
        CHECK(ranked[0].mean_drop > 0.2);
        for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].mean_drop >= ranked[i].mean_drop);
    }
}

TEST_CASE("explanation CSV ordering") {
    Explanation e;
    e.contributions = {{0, "a", 0.1}, {1, "b", -0.5}, {2, "c", 0.1}};
    CHECK(to_csv(e) == "feature,contribution\nb,-0.5\na,0.1\nc,0.1\n");
    std::vector<Importance> imp{{2, "c", 0.3, 0.01}};
    CHECK(to_csv(imp).starts_with("feature,"));
}
