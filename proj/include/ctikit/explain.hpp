#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctikit/botml.hpp"
#include "ctikit/parallel.hpp"

namespace ctikit::explain {

using botml::Row;

/// Units of the contributions: pre-sigmoid margin, probability, or metric drop.
enum class Scale { Margin, Probability, MetricDrop };
std::string_view to_string(Scale scale);

struct Contribution {
    std::size_t index = 0;
    std::string feature;
    double value = 0.0;
};

struct Explanation {
    std::string instance_id;
    std::vector<Contribution> contributions;  // input column order
    double base_value = 0.0;
    double prediction = 0.0;
    Scale scale = Scale::Margin;
    bool ridge_fallback = false;  // LIME only
};

/// contribution_j = w_j (x_j - mean_j) on the margin, so
/// base_value + sum(contributions) == prediction == margin(x).
/// Rows are scaled full-width rows. Throws Error(InvalidArgument) for tree models
/// and Error(Domain) for an empty background.
Explanation linear_contributions(const botml::TrainedModel& model, const Row& x, const std::vector<Row>& background,
                                 const std::string& instance_id = {});

struct LimeOptions {
    std::size_t n_samples = 5000;
    double kernel_width = 0.0;  // 0 selects 0.75 * sqrt(dimension)
    double noise_sd = 0.1;
    std::uint64_t seed = 0;
    Exec exec = Exec::Parallel;
};

/// Weighted least-squares linear surrogate fitted to the model's probabilities on
/// Gaussian perturbations of x. Contributions are the surrogate slopes; base_value
/// is the mean sampled probability and prediction is the model's value at x.
Explanation lime_explain(const botml::ProbabilityModel& model, const Row& x, const std::vector<std::string>& names,
                         const LimeOptions& options = {}, const std::string& instance_id = {});

struct Importance {
    std::size_t index = 0;
    std::string feature;
    double mean_drop = 0.0;
    double sd_drop = 0.0;
};

/// F1 on the original rows minus mean F1 with one column shuffled, per column;
/// ranked by descending mean drop, ties to the lower index.
std::vector<Importance> permutation_importance(const botml::ProbabilityModel& model, const std::vector<Row>& x,
                                               const std::vector<int>& y, const std::vector<std::string>& names,
                                               int repeats = 10, std::uint64_t seed = 0, double threshold = 0.5,
                                               Exec exec = Exec::Parallel);

/// "feature,contribution" sorted by |contribution| descending, ties by column.
std::string to_csv(const Explanation& e);
std::string to_csv(const std::vector<Importance>& ranked);

}  // namespace ctikit::explain
