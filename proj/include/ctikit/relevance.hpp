#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ctikit/preprocess.hpp"

namespace ctikit::relevance {

struct LabeledTokenSeq {
    std::string post_id;
    preprocess::TokenSequence tokens;
    int label = 0;  // 1 = carries an indicator
};

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    bool operator==(const ConfusionCounts&) const = default;
};

/// tp / (tp + (fp + fn) / 2). Throws Error(Domain) when tp = fp = fn = 0.
double f1_score(const ConfusionCounts& c);

/// tp / (tp + fn). Throws Error(Domain) when tp + fn = 0.
double detection_rate(const ConfusionCounts& c);

ConfusionCounts confusion(const std::vector<int>& truth, const std::vector<int>& predicted);

/// Anything that maps a token sequence to P(relevant).
class TextClassifier {
public:
    virtual ~TextClassifier() = default;
    virtual double score(const preprocess::TokenSequence& tokens) const = 0;
};

struct TrainConfig {
    std::uint32_t hash_dimension = 1u << 18;
    double learning_rate = 0.1;
    int epochs = 20;
    double l2 = 1e-6;
    std::uint64_t seed = 42;
};

/// Logistic regression over hashed unigram counts.
struct TextModel final : TextClassifier {
    std::uint32_t hash_dimension = 1u << 18;
    std::vector<double> weights;
    double bias = 0.0;
    TrainConfig config;

    double margin(const preprocess::TokenSequence& tokens) const;
    double score(const preprocess::TokenSequence& tokens) const override;

    void save(const std::filesystem::path& path) const;
    static TextModel load(const std::filesystem::path& path);
    std::string to_bytes() const;
    static TextModel from_bytes(std::string_view bytes);
};

std::uint32_t feature_bucket(std::string_view token, std::uint32_t dimension);

/// Shuffled SGD, deterministic per seed. Throws Error(Domain) on empty or
/// single-class input.
TextModel train_text(const std::vector<LabeledTokenSeq>& train, const TrainConfig& config = {});

/// Sigmoid score in [0, 1].
double predict_text(const TextClassifier& model, const preprocess::TokenSequence& tokens);

inline constexpr double kDecisionThreshold = 0.5;
inline int label_of(double score, double threshold = kDecisionThreshold) {
    return score >= threshold ? 1 : 0;
}

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Seeded shuffle, 80% train, remainder halved into validation and test.
Split split_80_10_10(std::size_t n, std::uint64_t seed);

ConfusionCounts evaluate_text(const TextClassifier& model, const std::vector<LabeledTokenSeq>& rows,
                              double threshold = kDecisionThreshold);

}  // namespace ctikit::relevance
