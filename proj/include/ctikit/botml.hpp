#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ctikit/features.hpp"
#include "ctikit/parallel.hpp"
#include "ctikit/relevance.hpp"

namespace ctikit::botml {

using Row = std::vector<double>;

struct LabeledFeatures {
    std::string author_id;
    features::FeatureVector features;
    int label = 0;  // 1 = bot
};

inline constexpr double kBotnessThreshold = 0.95;

/// label = 1 iff score >= threshold. Throws Error(Domain) for an author without a
/// score and Error(InvalidArgument) for a threshold outside [0, 1].
std::vector<LabeledFeatures> label_accounts(const std::vector<features::FeatureVector>& rows,
                                            const std::map<std::string, double>& scores,
                                            double threshold = kBotnessThreshold);

/// CSV "author_id,botness"; header optional.
std::map<std::string, double> parse_scores_csv(std::string_view contents);
std::map<std::string, double> read_scores_csv(const std::filesystem::path& path);

struct Dataset {
    std::vector<std::string> ids;
    std::vector<Row> x;
    std::vector<int> y;

    std::size_t size() const { return x.size(); }
    std::size_t dimension() const { return x.empty() ? 0 : x.front().size(); }
    Dataset subset(const std::vector<std::size_t>& rows) const;
};

Dataset to_dataset(const std::vector<LabeledFeatures>& rows);

struct ScalerState {
    std::vector<double> min;
    std::vector<double> max;

    Row apply(const Row& x) const;
};

ScalerState minmax_fit(const std::vector<Row>& train);
std::vector<Row> minmax_apply(const ScalerState& state, const std::vector<Row>& rows);
std::pair<ScalerState, std::vector<Row>> minmax_fit_transform(const std::vector<Row>& train);

/// One-way ANOVA F per column. Zero between-class spread gives 0; zero
/// within-class spread with nonzero between-class spread gives +inf.
std::vector<double> anova_f(const std::vector<Row>& x, const std::vector<int>& y);

struct FeatureScore {
    std::size_t index = 0;
    double f = 0.0;
};

/// Top k columns by descending F, ties to the lower index.
std::vector<FeatureScore> select_k_best(const std::vector<Row>& x, const std::vector<int>& y, std::size_t k);

enum class ModelKind : std::uint8_t { LogisticRegression, DecisionTree, RandomForest };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct Hyperparams {
    // logistic regression: Newton steps with backtracking from `learning_rate`
    double learning_rate = 1.0;
    int epochs = 100;   // Newton iteration cap
    double l2 = 1e-4;
    // trees
    int max_depth = 20;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    int max_features = 0;  // 0: all columns for a tree, sqrt(d) for a forest
    int n_trees = 100;
    bool bootstrap = true;
    // columns kept by select_k_best; 0 keeps every column
    std::size_t k = 0;
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // go left when x[feature] <= threshold
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double probability = 0.0;   // share of positives reaching the node

    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(const Row& x) const;
    bool operator==(const Tree&) const = default;
};

/// Fits one CART tree on rows[i] for i in `sample` (repeats allowed).
Tree fit_tree(const std::vector<Row>& x, const std::vector<int>& y, const std::vector<std::size_t>& sample,
              const Hyperparams& hp, int max_features, std::uint64_t seed);

struct LogisticParams {
    std::vector<double> weights;
    double bias = 0.0;

    double margin(const Row& x) const;
};

/// Mean log-loss (+ l2/2 |w|^2) and its gradient at (w, b).
struct LossGradient {
    double loss = 0.0;
    std::vector<double> dw;
    double db = 0.0;
};
LossGradient logistic_loss_gradient(const LogisticParams& p, const std::vector<Row>& x, const std::vector<int>& y,
                                    double l2);

LogisticParams fit_logistic(const std::vector<Row>& x, const std::vector<int>& y, const Hyperparams& hp);

/// Maps a scaled feature row to P(label = 1).
class ProbabilityModel {
public:
    virtual ~ProbabilityModel() = default;
    virtual double probability(const Row& scaled) const = 0;
};

struct TrainedModel final : ProbabilityModel {
    ModelKind kind = ModelKind::LogisticRegression;
    Hyperparams hyperparams;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;  // one per input column
    ScalerState scaler;
    std::vector<std::size_t> selected;       // input columns the classifier sees
    LogisticParams logistic;
    std::vector<Tree> trees;

    /// Input: a full-width row already passed through `scaler`.
    double probability(const Row& scaled) const override;
    /// Pre-sigmoid margin on a scaled row; logistic regression only.
    double margin(const Row& scaled) const;
    /// Input: a raw full-width row.
    double predict_proba(const Row& raw) const { return probability(scaler.apply(raw)); }
    int predict(const Row& raw, double threshold = 0.5) const { return predict_proba(raw) >= threshold ? 1 : 0; }

    std::string to_bytes() const;
    static TrainedModel from_bytes(std::string_view bytes);
    void save(const std::filesystem::path& path) const;
    static TrainedModel load(const std::filesystem::path& path);
};

/// Fits the scaler on `train`, keeps the hp.k best columns, then fits the
/// classifier. Throws Error(Domain) on empty or single-class input.
TrainedModel train_classifier(ModelKind kind, const Dataset& train, const Hyperparams& hp = {},
                              std::uint64_t seed = 0, Exec exec = Exec::Parallel);

/// F1 with the convention F1 = 0 whenever tp = 0.
double f1_or_zero(const relevance::ConfusionCounts& c);

struct Evaluation {
    relevance::ConfusionCounts counts;
    double f1 = 0.0;
};

/// Rows are raw (unscaled). Throws Error(Domain) on empty input.
Evaluation evaluate(const TrainedModel& model, const Dataset& rows, double threshold = 0.5);

struct TrainTestSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per class: seeded shuffle, llround(n_class * test_ratio) rows to test.
TrainTestSplit stratified_split(const std::vector<int>& y, double test_ratio, std::uint64_t seed);

}  // namespace ctikit::botml
