#include "ctikit/explain.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <span>

#include "ctikit/error.hpp"
#include "ctikit/rng.hpp"

namespace ctikit::explain {

namespace {

std::string fmt(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

std::string name_of(const std::vector<std::string>& names, std::size_t j) {
    return j < names.size() ? names[j] : "f" + std::to_string(j);
}

double f1_at(const botml::ProbabilityModel& model, const std::vector<Row>& x, const std::vector<int>& y,
             double threshold) {
    std::vector<int> predicted;
    predicted.reserve(x.size());
    for (const auto& r : x) predicted.push_back(model.probability(r) >= threshold ? 1 : 0);
    return botml::f1_or_zero(relevance::confusion(y, predicted));
}

}  // namespace

std::string_view to_string(Scale scale) {
    switch (scale) {
        case Scale::Margin: return "margin";
        case Scale::Probability: return "probability";
        case Scale::MetricDrop: return "f1_drop";
    }
    return "?";
}

Explanation linear_contributions(const botml::TrainedModel& model, const Row& x, const std::vector<Row>& background,
                                 const std::string& instance_id) {
    if (model.kind != botml::ModelKind::LogisticRegression)
        throw Error(ErrorCode::InvalidArgument, "exact contributions need a logistic regression model");
    if (background.empty()) throw Error(ErrorCode::Domain, "empty background set");
    const std::size_t d = x.size();
    Row mean(d, 0.0);
    for (const auto& r : background) {
        if (r.size() != d) throw Error(ErrorCode::InvalidArgument, "background row width differs");
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
    }
    for (double& m : mean) m /= static_cast<double>(background.size());

    Explanation e;
    e.instance_id = instance_id;
    e.scale = Scale::Margin;
    e.base_value = model.margin(mean);
    e.prediction = model.margin(x);
    for (std::size_t j = 0; j < d; ++j) e.contributions.push_back({j, name_of(model.feature_names, j), 0.0});
    for (std::size_t s = 0; s < model.selected.size(); ++s) {
        auto j = model.selected[s];
        e.contributions[j].value = model.logistic.weights[s] * (x[j] - mean[j]);
    }
    return e;
}

Explanation lime_explain(const botml::ProbabilityModel& model, const Row& x, const std::vector<std::string>& names,
                         const LimeOptions& options, const std::string& instance_id) {
    if (options.n_samples < 50) throw Error(ErrorCode::InvalidArgument, "LIME needs at least 50 samples");
    const std::size_t d = x.size();
    const std::size_t n = options.n_samples;
    const double kw = options.kernel_width > 0 ? options.kernel_width : 0.75 * std::sqrt(static_cast<double>(d));

    // Noise drawn serially so the sample set does not depend on thread count.
    Rng rng(options.seed);
    std::vector<Row> samples(n, Row(d));
    for (auto& z : samples)
        for (std::size_t j = 0; j < d; ++j) z[j] = x[j] + rng.normal(0.0, options.noise_sd);
    std::vector<double> f(n);
    for_each_index(options.exec, n, [&](std::size_t i) { f[i] = model.probability(samples[i]); });

    Eigen::MatrixXd a(n, d + 1);
    Eigen::VectorXd b(n);
    double mean_f = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dist2 = 0;
        for (std::size_t j = 0; j < d; ++j) dist2 += (samples[i][j] - x[j]) * (samples[i][j] - x[j]);
        double w = std::sqrt(std::exp(-dist2 / (kw * kw)));
        a(static_cast<Eigen::Index>(i), 0) = w;
        for (std::size_t j = 0; j < d; ++j)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = w * (samples[i][j] - x[j]);
        b(static_cast<Eigen::Index>(i)) = w * f[i];
        mean_f += f[i];
    }

    Explanation e;
    e.instance_id = instance_id;
    e.scale = Scale::Probability;
    e.base_value = mean_f / static_cast<double>(n);
    e.prediction = model.probability(x);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::VectorXd coef;
    if (qr.rank() == static_cast<Eigen::Index>(d + 1)) {
        coef = qr.solve(b);
    } else {
        e.ridge_fallback = true;
        Eigen::MatrixXd ata = a.transpose() * a;
        ata.diagonal().array() += 1e-6;
        coef = ata.ldlt().solve(a.transpose() * b);
    }
    for (std::size_t j = 0; j < d; ++j)
        e.contributions.push_back({j, name_of(names, j), coef(static_cast<Eigen::Index>(j + 1))});
    return e;
}

std::vector<Importance> permutation_importance(const botml::ProbabilityModel& model, const std::vector<Row>& x,
                                               const std::vector<int>& y, const std::vector<std::string>& names,
                                               int repeats, std::uint64_t seed, double threshold, Exec exec) {
    if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be at least 1");
    if (x.empty() || x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "need labeled rows");
    const std::size_t d = x.front().size();
    const double baseline = f1_at(model, x, y, threshold);
    std::vector<Importance> out(d);
    for_each_index(exec, d, [&](std::size_t j) {
        Rng rng = Rng::derived(seed, j);
        std::vector<Row> shuffled = x;
        std::vector<double> column(x.size());
        std::vector<double> drops;
        for (int r = 0; r < repeats; ++r) {
            for (std::size_t i = 0; i < x.size(); ++i) column[i] = x[i][j];
            rng.shuffle(std::span(column));
            for (std::size_t i = 0; i < x.size(); ++i) shuffled[i][j] = column[i];
            drops.push_back(baseline - f1_at(model, shuffled, y, threshold));
        }
        double mean = std::accumulate(drops.begin(), drops.end(), 0.0) / repeats;
        double ss = 0;
        for (double v : drops) ss += (v - mean) * (v - mean);
        out[j] = Importance{j, name_of(names, j), mean, std::sqrt(ss / repeats)};
    });
    std::stable_sort(out.begin(), out.end(),
                     [](const Importance& a, const Importance& b) { return a.mean_drop > b.mean_drop; });
    return out;
}

std::string to_csv(const Explanation& e) {
    auto rows = e.contributions;
    std::stable_sort(rows.begin(), rows.end(), [](const Contribution& a, const Contribution& b) {
        return std::abs(a.value) > std::abs(b.value);
    });
    std::string out = "feature,contribution\n";
    for (const auto& c : rows) out += c.feature + "," + fmt(c.value) + "\n";
    return out;
}

std::string to_csv(const std::vector<Importance>& ranked) {
    std::string out = "feature,importance,sd\n";
    for (const auto& r : ranked) out += r.feature + "," + fmt(r.mean_drop) + "," + fmt(r.sd_drop) + "\n";
    return out;
}

}  // namespace ctikit::explain
