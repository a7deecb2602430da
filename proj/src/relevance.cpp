#include "ctikit/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "ctikit/binary_io.hpp"
#include "ctikit/error.hpp"
#include "ctikit/rng.hpp"
#include "ctikit/serialize.hpp"

namespace ctikit::relevance {

namespace {

constexpr std::string_view kMagic = "CTKT";
constexpr std::uint32_t kFormatVersion = 1;

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// Token buckets with multiplicity, grouped so each bucket appears once.
std::vector<std::pair<std::uint32_t, double>> bag(const preprocess::TokenSequence& tokens,
                                                  std::uint32_t dimension) {
    std::vector<std::uint32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(feature_bucket(t, dimension));
    std::sort(ids.begin(), ids.end());
    std::vector<std::pair<std::uint32_t, double>> out;
    for (auto id : ids) {
        if (!out.empty() && out.back().first == id)
            out.back().second += 1.0;
        else
            out.emplace_back(id, 1.0);
    }
    return out;
}

}  // namespace

double f1_score(const ConfusionCounts& c) {
    if (c.tp == 0 && c.fp == 0 && c.fn == 0)
        throw Error(ErrorCode::Domain, "F1 undefined: tp = fp = fn = 0");
    return static_cast<double>(c.tp) /
           (static_cast<double>(c.tp) + 0.5 * static_cast<double>(c.fp + c.fn));
}

double detection_rate(const ConfusionCounts& c) {
    if (c.tp + c.fn == 0) throw Error(ErrorCode::Domain, "detection rate undefined: tp + fn = 0");
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

ConfusionCounts confusion(const std::vector<int>& truth, const std::vector<int>& predicted) {
    if (truth.size() != predicted.size())
        throw Error(ErrorCode::InvalidArgument, "label vectors differ in length");
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1 && predicted[i] == 1) ++c.tp;
        else if (truth[i] == 0 && predicted[i] == 1) ++c.fp;
        else if (truth[i] == 1 && predicted[i] == 0) ++c.fn;
        else ++c.tn;
    }
    return c;
}

std::uint32_t feature_bucket(std::string_view token, std::uint32_t dimension) {
    // FNV-1a, fixed so model files stay valid across builds.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : token) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return static_cast<std::uint32_t>(h % dimension);
}

double TextModel::margin(const preprocess::TokenSequence& tokens) const {
    double z = bias;
    for (const auto& t : tokens) z += weights[feature_bucket(t, hash_dimension)];
    return z;
}

double TextModel::score(const preprocess::TokenSequence& tokens) const { return sigmoid(margin(tokens)); }

double predict_text(const TextClassifier& model, const preprocess::TokenSequence& tokens) {
    return model.score(tokens);
}

TextModel train_text(const std::vector<LabeledTokenSeq>& train, const TrainConfig& config) {
    if (train.empty()) throw Error(ErrorCode::Domain, "empty training set");
    if (config.hash_dimension == 0) throw Error(ErrorCode::Config, "hash dimension must be positive");
    if (config.epochs < 1 || !(config.learning_rate > 0))
        throw Error(ErrorCode::Config, "epochs and learning rate must be positive");
    bool has_pos = false, has_neg = false;
    for (const auto& row : train) {
        if (row.label != 0 && row.label != 1) throw Error(ErrorCode::InvalidArgument, "label not in {0,1}");
        (row.label == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) throw Error(ErrorCode::Domain, "training set has a single class");

    TextModel model;
    model.hash_dimension = config.hash_dimension;
    model.weights.assign(config.hash_dimension, 0.0);
    model.config = config;

    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
    rows.reserve(train.size());
    for (const auto& r : train) rows.push_back(bag(r.tokens, config.hash_dimension));

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(std::span(order));
        for (auto i : order) {
            double z = model.bias;
            for (auto [id, count] : rows[i]) z += model.weights[id] * count;
            double g = sigmoid(z) - train[i].label;
            for (auto [id, count] : rows[i]) {
                double& w = model.weights[id];
                w -= config.learning_rate * (g * count + config.l2 * w);
            }
            model.bias -= config.learning_rate * g;
        }
    }
    return model;
}

Split split_80_10_10(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(std::span(idx));
    std::size_t n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
    std::size_t rest = n - n_train;
    std::size_t n_val = rest / 2;
    Split s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.validation.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                        idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
    return s;
}

ConfusionCounts evaluate_text(const TextClassifier& model, const std::vector<LabeledTokenSeq>& rows,
                              double threshold) {
    std::vector<int> truth, predicted;
    for (const auto& r : rows) {
        truth.push_back(r.label);
        predicted.push_back(label_of(model.score(r.tokens), threshold));
    }
    return confusion(truth, predicted);
}

std::string TextModel::to_bytes() const {
    BinaryWriter w;
    w.raw(kMagic);
    w.u32(kFormatVersion);
    w.u32(hash_dimension);
    w.f64(bias);
    w.f64(config.learning_rate);
    w.u32(static_cast<std::uint32_t>(config.epochs));
    w.f64(config.l2);
    w.u64(config.seed);
    std::uint64_t nonzero = 0;
    for (double x : weights)
        if (x != 0.0) ++nonzero;
    w.u64(nonzero);
    for (std::uint32_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        w.u32(i);
        w.f64(weights[i]);
    }
    return w.bytes();
}

TextModel TextModel::from_bytes(std::string_view bytes) {
    BinaryReader r(bytes);
    r.expect_raw(kMagic);
    auto version = r.u32();
    if (version != kFormatVersion)
        throw Error(ErrorCode::Parse, "unsupported text model version " + std::to_string(version));
    TextModel m;
    m.hash_dimension = r.u32();
    if (m.hash_dimension == 0) throw Error(ErrorCode::Parse, "text model has zero dimension");
    m.config.hash_dimension = m.hash_dimension;
    m.bias = r.f64();
    m.config.learning_rate = r.f64();
    m.config.epochs = static_cast<int>(r.u32());
    m.config.l2 = r.f64();
    m.config.seed = r.u64();
    m.weights.assign(m.hash_dimension, 0.0);
    auto nonzero = r.u64();
    for (std::uint64_t k = 0; k < nonzero; ++k) {
        auto i = r.u32();
        if (i >= m.hash_dimension) throw Error(ErrorCode::Parse, "weight index out of range");
        m.weights[i] = r.f64();
    }
    if (!r.at_end()) throw Error(ErrorCode::Parse, "trailing bytes in text model");
    return m;
}

void TextModel::save(const std::filesystem::path& path) const { write_file_atomic(path, to_bytes()); }

TextModel TextModel::load(const std::filesystem::path& path) { return from_bytes(read_file(path)); }

}  // namespace ctikit::relevance
