#include <benchmark/benchmark.h>

#include "ctikit/botml.hpp"
#include "ctikit/explain.hpp"
#include "ctikit/extract.hpp"
#include "ctikit/features.hpp"
#include "ctikit/preprocess.hpp"
#include "ctikit/rng.hpp"
#include "generators.hpp"

using namespace ctikit;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

std::vector<PostRecord> synthetic_posts(std::size_t n) {
    Rng rng(1);
    std::vector<PostRecord> posts;
    for (std::size_t i = 0; i < n; ++i) {
        PostRecord p;
        p.post_id = std::to_string(i);
        p.author_id = "a" + std::to_string(i % 50);
        p.created_at = Timestamp(1640995200 + static_cast<std::int64_t>(i) * 60);
        p.lang = "en";
        std::string text = "New campaign observed, indicators:";
        for (int k = 0; k < 4; ++k) {
            auto [value, type] = testing::random_ioc(rng);
            text += " " + (rng.below(2) ? testing::random_defang(rng, value) : value);
        }
        p.text = text + " #infosec #threatintel";
        posts.push_back(std::move(p));
    }
    return posts;
}

void BM_preprocess_batch(benchmark::State& state) {
    std::vector<std::string> texts;
    for (auto& p : synthetic_posts(4000)) texts.push_back(p.text);
    for (auto _ : state) benchmark::DoNotOptimize(preprocess::preprocess_batch(texts, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(texts.size()));
}

void BM_extract_batch(benchmark::State& state) {
    auto posts = synthetic_posts(4000);
    for (auto _ : state) benchmark::DoNotOptimize(extract::extract_batch(posts, {}, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(posts.size()));
}

void BM_compute_features(benchmark::State& state) {
    Rng rng(2);
    std::vector<features::Timeline> ts;
    for (int i = 0; i < 200; ++i) ts.push_back(testing::random_timeline(rng, "u" + std::to_string(i), {200}));
    auto sources = features::corpus_sources(ts);
    for (auto _ : state) benchmark::DoNotOptimize(features::compute_batch(ts, sources, {}, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ts.size()));
}

void BM_random_forest(benchmark::State& state) {
    Rng rng(3);
    auto data = testing::gaussian_blobs(rng, 300, 300, 47, 5, 1.0);
    botml::Hyperparams hp;
    hp.n_trees = 50;
    for (auto _ : state)
        benchmark::DoNotOptimize(botml::train_classifier(botml::ModelKind::RandomForest, data, hp, 1, exec_of(state)));
}

void BM_permutation_importance(benchmark::State& state) {
    Rng rng(4);
    auto data = testing::gaussian_blobs(rng, 200, 200, 47, 5, 1.0);
    botml::Hyperparams hp;
    hp.n_trees = 20;
    auto model = botml::train_classifier(botml::ModelKind::RandomForest, data, hp, 1);
    auto scaled = botml::minmax_apply(model.scaler, data.x);
    std::vector<std::string> names(47, "f");
    for (auto _ : state)
        benchmark::DoNotOptimize(
            explain::permutation_importance(model, scaled, data.y, names, 3, 1, 0.5, exec_of(state)));
}

}  // namespace

// Argument 0 runs the serial reference path, 1 the OpenMP path.
BENCHMARK(BM_preprocess_batch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_extract_batch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_compute_features)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_random_forest)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_permutation_importance)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
