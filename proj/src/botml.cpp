#include "ctikit/botml.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>

#include <Eigen/Dense>

#include "ctikit/binary_io.hpp"
#include "ctikit/error.hpp"
#include "ctikit/rng.hpp"
#include "ctikit/serialize.hpp"
#include "ctikit/text.hpp"

namespace ctikit::botml {

namespace {

constexpr std::string_view kMagic = "CTKM";
constexpr std::uint32_t kFormatVersion = 1;

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

void require_two_classes(const std::vector<int>& y) {
    if (y.empty()) throw Error(ErrorCode::Domain, "no training rows");
    bool pos = false, neg = false;
    for (int v : y) {
        if (v != 0 && v != 1) throw Error(ErrorCode::InvalidArgument, "label not in {0,1}");
        (v ? pos : neg) = true;
    }
    if (!pos || !neg) throw Error(ErrorCode::Domain, "training rows hold a single class");
}

double gini(double pos, double n) {
    if (n <= 0) return 0.0;
    double p = pos / n;
    return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
public:
    TreeBuilder(const std::vector<Row>& x, const std::vector<int>& y, const Hyperparams& hp, int max_features,
                std::uint64_t seed)
        : x_(x), y_(y), hp_(hp), rng_(seed) {
        d_ = x.empty() ? 0 : x.front().size();
        max_features_ = max_features <= 0 || static_cast<std::size_t>(max_features) > d_
                            ? d_
                            : static_cast<std::size_t>(max_features);
    }

    Tree build(std::vector<std::size_t> sample) {
        grow(std::move(sample), 0);
        return std::move(tree_);
    }

private:
    std::uint32_t grow(std::vector<std::size_t> sample, int depth) {
        const auto id = static_cast<std::uint32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        double n = static_cast<double>(sample.size());
        double pos = 0;
        for (auto i : sample) pos += y_[i];
        tree_.nodes[id].probability = n > 0 ? pos / n : 0.0;

        if (pos == 0 || pos == n || depth >= hp_.max_depth ||
            static_cast<int>(sample.size()) < hp_.min_samples_split)
            return id;

        const double parent = gini(pos, n);
        double best = parent;
        std::int32_t best_feature = -1;
        double best_threshold = 0;

        std::vector<std::pair<double, int>> column(sample.size());
        for (auto f : candidate_features()) {
            for (std::size_t r = 0; r < sample.size(); ++r) column[r] = {x_[sample[r]][f], y_[sample[r]]};
            std::sort(column.begin(), column.end());
            double left_n = 0, left_pos = 0;
            for (std::size_t r = 0; r + 1 < column.size(); ++r) {
                left_n += 1;
                left_pos += column[r].second;
                if (column[r].first == column[r + 1].first) continue;
                if (left_n < hp_.min_samples_leaf || n - left_n < hp_.min_samples_leaf) continue;
                double impurity = (left_n * gini(left_pos, left_n) + (n - left_n) * gini(pos - left_pos, n - left_n)) / n;
                if (impurity < best) {
                    best = impurity;
                    best_feature = static_cast<std::int32_t>(f);
                    double mid = column[r].first + (column[r + 1].first - column[r].first) / 2.0;
                    best_threshold = mid < column[r + 1].first ? mid : column[r].first;
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (auto i : sample) (x_[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(i);
        sample.clear();
        sample.shrink_to_fit();
        auto l = grow(std::move(left), depth + 1);
        auto r = grow(std::move(right), depth + 1);
        auto& node = tree_.nodes[id];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    std::vector<std::size_t> candidate_features() {
        std::vector<std::size_t> all(d_);
        std::iota(all.begin(), all.end(), 0);
        if (max_features_ >= d_) return all;
        for (std::size_t i = 0; i < max_features_; ++i) {
            auto j = i + static_cast<std::size_t>(rng_.below(d_ - i));
            std::swap(all[i], all[j]);
        }
        all.resize(max_features_);
        std::sort(all.begin(), all.end());
        return all;
    }

    const std::vector<Row>& x_;
    const std::vector<int>& y_;
    const Hyperparams& hp_;
    Rng rng_;
    std::size_t d_ = 0;
    std::size_t max_features_ = 0;
    Tree tree_;
};

std::vector<Row> project(const std::vector<Row>& rows, const std::vector<std::size_t>& columns) {
    std::vector<Row> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        Row p;
        p.reserve(columns.size());
        for (auto c : columns) p.push_back(r[c]);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace

std::vector<LabeledFeatures> label_accounts(const std::vector<features::FeatureVector>& rows,
                                            const std::map<std::string, double>& scores, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "botness threshold must lie in [0, 1]");
    std::vector<LabeledFeatures> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        auto it = scores.find(r.author_id);
        if (it == scores.end()) throw Error(ErrorCode::Domain, "no botness score for author '" + r.author_id + "'");
        out.push_back(LabeledFeatures{r.author_id, r, it->second >= threshold ? 1 : 0});
    }
    return out;
}

std::map<std::string, double> parse_scores_csv(std::string_view contents) {
    std::map<std::string, double> out;
    std::istringstream in{std::string(contents)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError(line_no, line.substr(0, 40), "expected author_id,botness");
        std::string id = line.substr(0, comma);
        std::string value = line.substr(comma + 1);
        if (line_no == 1 && id == "author_id") continue;
        double v = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || ptr != value.data() + value.size())
            throw ParseError(line_no, value, "botness is not a number");
        if (!(v >= 0.0 && v <= 1.0)) throw ParseError(line_no, value, "botness outside [0, 1]");
        if (!out.emplace(id, v).second) throw ParseError(line_no, id, "duplicate author");
    }
    return out;
}

std::map<std::string, double> read_scores_csv(const std::filesystem::path& path) {
    return parse_scores_csv(read_file(path));
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    Dataset d;
    for (auto i : rows) {
        if (!ids.empty()) d.ids.push_back(ids[i]);
        d.x.push_back(x[i]);
        d.y.push_back(y[i]);
    }
    return d;
}

Dataset to_dataset(const std::vector<LabeledFeatures>& rows) {
    Dataset d;
    for (const auto& r : rows) {
        d.ids.push_back(r.author_id);
        d.x.emplace_back(r.features.values.begin(), r.features.values.end());
        d.y.push_back(r.label);
    }
    return d;
}

Row ScalerState::apply(const Row& x) const {
    if (x.size() != min.size()) throw Error(ErrorCode::InvalidArgument, "row width differs from the scaler");
    Row out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        double span = max[j] - min[j];
        out[j] = span > 0 ? std::clamp((x[j] - min[j]) / span, 0.0, 1.0) : 0.0;
    }
    return out;
}

ScalerState minmax_fit(const std::vector<Row>& train) {
    if (train.empty()) throw Error(ErrorCode::Domain, "cannot fit a scaler on zero rows");
    ScalerState s;
    s.min = train.front();
    s.max = train.front();
    for (const auto& r : train) {
        if (r.size() != s.min.size()) throw Error(ErrorCode::InvalidArgument, "ragged rows");
        for (std::size_t j = 0; j < r.size(); ++j) {
            s.min[j] = std::min(s.min[j], r[j]);
            s.max[j] = std::max(s.max[j], r[j]);
        }
    }
    return s;
}

std::vector<Row> minmax_apply(const ScalerState& state, const std::vector<Row>& rows) {
    std::vector<Row> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(state.apply(r));
    return out;
}

std::pair<ScalerState, std::vector<Row>> minmax_fit_transform(const std::vector<Row>& train) {
    auto s = minmax_fit(train);
    return {s, minmax_apply(s, train)};
}

std::vector<double> anova_f(const std::vector<Row>& x, const std::vector<int>& y) {
    require_two_classes(y);
    if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "rows and labels differ in length");
    const std::size_t d = x.front().size();
    const double n = static_cast<double>(x.size());
    double n1 = 0;
    for (int v : y) n1 += v;
    const double n0 = n - n1;
    std::vector<double> f(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double s0 = 0, s1 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) (y[i] ? s1 : s0) += x[i][j];
        double m0 = s0 / n0, m1 = s1 / n1, m = (s0 + s1) / n;
        double between = n0 * (m0 - m) * (m0 - m) + n1 * (m1 - m) * (m1 - m);
        double within = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double c = x[i][j] - (y[i] ? m1 : m0);
            within += c * c;
        }
        // Between-class spread below rounding noise of the data counts as none.
        double scale = std::max(std::abs(m0), std::abs(m1));
        if (between <= n * 1e-24 * scale * scale) {
            f[j] = 0.0;
        } else if (within == 0.0) {
            f[j] = std::numeric_limits<double>::infinity();
        } else {
            f[j] = between / (within / (n - 2.0));
        }
    }
    return f;
}

std::vector<FeatureScore> select_k_best(const std::vector<Row>& x, const std::vector<int>& y, std::size_t k) {
    auto f = anova_f(x, y);
    if (k < 1 || k > f.size()) throw Error(ErrorCode::InvalidArgument, "k must lie in [1, feature count]");
    std::vector<FeatureScore> ranked;
    for (std::size_t j = 0; j < f.size(); ++j) ranked.push_back({j, f[j]});
    std::stable_sort(ranked.begin(), ranked.end(), [](const FeatureScore& a, const FeatureScore& b) { return a.f > b.f; });
    ranked.resize(k);
    return ranked;
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::LogisticRegression: return "lr";
        case ModelKind::DecisionTree: return "dt";
        case ModelKind::RandomForest: return "rf";
    }
    return "?";
}

ModelKind model_kind_from_string(std::string_view name) {
    auto n = text::ascii_lower(name);
    if (n == "lr" || n == "logistic" || n == "logisticregression") return ModelKind::LogisticRegression;
    if (n == "dt" || n == "tree" || n == "decisiontree") return ModelKind::DecisionTree;
    if (n == "rf" || n == "forest" || n == "randomforest") return ModelKind::RandomForest;
    throw Error(ErrorCode::Usage, "unknown model kind '" + std::string(name) + "' (lr, dt, rf)");
}

double Tree::predict(const Row& x) const {
    std::uint32_t i = 0;
    while (nodes[i].feature >= 0)
        i = x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].probability;
}

Tree fit_tree(const std::vector<Row>& x, const std::vector<int>& y, const std::vector<std::size_t>& sample,
              const Hyperparams& hp, int max_features, std::uint64_t seed) {
    if (sample.empty()) throw Error(ErrorCode::Domain, "cannot fit a tree on zero rows");
    return TreeBuilder(x, y, hp, max_features, seed).build(sample);
}

double LogisticParams::margin(const Row& x) const {
    double z = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
    return z;
}

LossGradient logistic_loss_gradient(const LogisticParams& p, const std::vector<Row>& x, const std::vector<int>& y,
                                    double l2) {
    LossGradient g;
    g.dw.assign(p.weights.size(), 0.0);
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = p.margin(x[i]);
        // log(1 + e^z) - y z, evaluated stably
        double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        g.loss += softplus - y[i] * z;
        double r = sigmoid(z) - y[i];
        for (std::size_t j = 0; j < g.dw.size(); ++j) g.dw[j] += r * x[i][j];
        g.db += r;
    }
    g.loss /= n;
    g.db /= n;
    double sq = 0;
    for (std::size_t j = 0; j < g.dw.size(); ++j) {
        g.dw[j] = g.dw[j] / n + l2 * p.weights[j];
        sq += p.weights[j] * p.weights[j];
    }
    g.loss += 0.5 * l2 * sq;
    return g;
}

LogisticParams fit_logistic(const std::vector<Row>& x, const std::vector<int>& y, const Hyperparams& hp) {
    require_two_classes(y);
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto d = static_cast<Eigen::Index>(x.front().size());
    Eigen::MatrixXd a(n, d + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        a(i, d) = 1.0;
    }
    auto unpack = [&](const Eigen::VectorXd& theta) {
        LogisticParams p;
        p.weights.assign(theta.data(), theta.data() + d);
        p.bias = theta(d);
        return p;
    };
    // Damped Newton with backtracking; the bias is not penalized.
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    auto current = logistic_loss_gradient(unpack(theta), x, y, hp.l2);
    for (int it = 0; it < hp.epochs; ++it) {
        Eigen::VectorXd g(d + 1);
        for (Eigen::Index j = 0; j < d; ++j) g(j) = current.dw[static_cast<std::size_t>(j)];
        g(d) = current.db;
        if (g.lpNorm<Eigen::Infinity>() < 1e-10) break;
        Eigen::VectorXd wts(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double pr = sigmoid(a.row(i).dot(theta));
            wts(i) = pr * (1.0 - pr);
        }
        Eigen::MatrixXd h = a.transpose() * wts.asDiagonal() * a / static_cast<double>(n);
        for (Eigen::Index j = 0; j < d; ++j) h(j, j) += hp.l2;
        h.diagonal().array() += 1e-10;
        Eigen::VectorXd step = h.ldlt().solve(g);
        if (!step.allFinite()) step = g;
        double t = hp.learning_rate;
        double slope = g.dot(step);
        bool moved = false;
        for (int k = 0; k < 60; ++k, t *= 0.5) {
            Eigen::VectorXd next = theta - t * step;
            auto trial = logistic_loss_gradient(unpack(next), x, y, hp.l2);
            if (trial.loss <= current.loss - 1e-4 * t * slope) {
                moved = current.loss - trial.loss > 1e-15;
                theta = next;
                current = std::move(trial);
                break;
            }
        }
        if (!moved) break;
    }
    return unpack(theta);
}

double TrainedModel::probability(const Row& scaled) const {
    Row x;
    x.reserve(selected.size());
    for (auto c : selected) x.push_back(scaled.at(c));
    if (kind == ModelKind::LogisticRegression) return sigmoid(logistic.margin(x));
    double sum = 0;
    for (const auto& t : trees) sum += t.predict(x);
    return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
}

double TrainedModel::margin(const Row& scaled) const {
    if (kind != ModelKind::LogisticRegression)
        throw Error(ErrorCode::InvalidArgument, "margin is defined for logistic regression only");
    Row x;
    for (auto c : selected) x.push_back(scaled.at(c));
    return logistic.margin(x);
}

TrainedModel train_classifier(ModelKind kind, const Dataset& train, const Hyperparams& hp, std::uint64_t seed,
                              Exec exec) {
    require_two_classes(train.y);
    if (train.x.size() != train.y.size()) throw Error(ErrorCode::InvalidArgument, "rows and labels differ in length");
    TrainedModel m;
    m.kind = kind;
    m.hyperparams = hp;
    m.seed = seed;
    const std::size_t d = train.dimension();
    if (d == features::kFeatureCount)
        for (auto n : features::kFeatureNames) m.feature_names.emplace_back(n);
    else
        for (std::size_t j = 0; j < d; ++j) m.feature_names.push_back("f" + std::to_string(j));
    auto [scaler, scaled] = minmax_fit_transform(train.x);
    m.scaler = std::move(scaler);
    if (hp.k == 0 || hp.k >= d) {
        m.selected.resize(d);
        std::iota(m.selected.begin(), m.selected.end(), 0);
    } else {
        for (const auto& s : select_k_best(scaled, train.y, hp.k)) m.selected.push_back(s.index);
        std::sort(m.selected.begin(), m.selected.end());
    }
    const auto x = project(scaled, m.selected);
    const auto& y = train.y;

    switch (kind) {
        case ModelKind::LogisticRegression:
            m.logistic = fit_logistic(x, y, hp);
            break;
        case ModelKind::DecisionTree: {
            std::vector<std::size_t> all(x.size());
            std::iota(all.begin(), all.end(), 0);
            m.trees.push_back(fit_tree(x, y, all, hp, hp.max_features, seed));
            break;
        }
        case ModelKind::RandomForest: {
            if (hp.n_trees < 1) throw Error(ErrorCode::Config, "a forest needs at least one tree");
            int mf = hp.max_features > 0
                         ? hp.max_features
                         : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(m.selected.size()))));
            m.trees.resize(static_cast<std::size_t>(hp.n_trees));
            for_each_index(exec, m.trees.size(), [&](std::size_t t) {
                const std::uint64_t tree_seed = seed + t;
                std::vector<std::size_t> sample(x.size());
                if (hp.bootstrap) {
                    Rng rng(tree_seed ^ 0xB0075ULL);
                    for (auto& s : sample) s = static_cast<std::size_t>(rng.below(x.size()));
                } else {
                    std::iota(sample.begin(), sample.end(), 0);
                }
                m.trees[t] = fit_tree(x, y, sample, hp, mf, tree_seed);
            });
            break;
        }
    }
    return m;
}

double f1_or_zero(const relevance::ConfusionCounts& c) {
    if (c.tp == 0) return 0.0;
    return relevance::f1_score(c);
}

Evaluation evaluate(const TrainedModel& model, const Dataset& rows, double threshold) {
    if (rows.size() == 0) throw Error(ErrorCode::Domain, "cannot evaluate on zero rows");
    std::vector<int> predicted;
    predicted.reserve(rows.size());
    for (const auto& r : rows.x) predicted.push_back(model.predict(r, threshold));
    Evaluation e;
    e.counts = relevance::confusion(rows.y, predicted);
    e.f1 = f1_or_zero(e.counts);
    return e;
}

TrainTestSplit stratified_split(const std::vector<int>& y, double test_ratio, std::uint64_t seed) {
    if (!(test_ratio >= 0.0 && test_ratio <= 1.0)) throw Error(ErrorCode::InvalidArgument, "test ratio outside [0, 1]");
    TrainTestSplit s;
    Rng rng(seed);
    for (int label : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == label) idx.push_back(i);
        rng.shuffle(std::span(idx));
        auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * test_ratio));
        s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

std::string TrainedModel::to_bytes() const {
    BinaryWriter w;
    w.raw(kMagic);
    w.u32(kFormatVersion);
    w.u8(static_cast<std::uint8_t>(kind));
    w.u64(seed);
    w.f64(hyperparams.learning_rate);
    w.u32(static_cast<std::uint32_t>(hyperparams.epochs));
    w.f64(hyperparams.l2);
    w.u32(static_cast<std::uint32_t>(hyperparams.max_depth));
    w.u32(static_cast<std::uint32_t>(hyperparams.min_samples_split));
    w.u32(static_cast<std::uint32_t>(hyperparams.min_samples_leaf));
    w.u32(static_cast<std::uint32_t>(hyperparams.max_features));
    w.u32(static_cast<std::uint32_t>(hyperparams.n_trees));
    w.u8(hyperparams.bootstrap ? 1 : 0);
    w.u64(hyperparams.k);
    w.u64(feature_names.size());
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
        w.str(feature_names[j]);
        w.f64(scaler.min[j]);
        w.f64(scaler.max[j]);
    }
    w.u64(selected.size());
    for (auto c : selected) w.u64(c);
    w.u64(logistic.weights.size());
    for (double x : logistic.weights) w.f64(x);
    w.f64(logistic.bias);
    w.u64(trees.size());
    for (const auto& t : trees) {
        w.u64(t.nodes.size());
        for (const auto& n : t.nodes) {
            w.u32(static_cast<std::uint32_t>(n.feature));
            w.f64(n.threshold);
            w.u32(n.left);
            w.u32(n.right);
            w.f64(n.probability);
        }
    }
    return w.bytes();
}

TrainedModel TrainedModel::from_bytes(std::string_view bytes) {
    BinaryReader r(bytes);
    r.expect_raw(kMagic);
    auto version = r.u32();
    if (version != kFormatVersion)
        throw Error(ErrorCode::Parse, "unsupported bot model version " + std::to_string(version));
    TrainedModel m;
    auto kind = r.u8();
    if (kind > 2) throw Error(ErrorCode::Parse, "unknown model kind in file");
    m.kind = static_cast<ModelKind>(kind);
    m.seed = r.u64();
    auto& hp = m.hyperparams;
    hp.learning_rate = r.f64();
    hp.epochs = static_cast<int>(r.u32());
    hp.l2 = r.f64();
    hp.max_depth = static_cast<int>(r.u32());
    hp.min_samples_split = static_cast<int>(r.u32());
    hp.min_samples_leaf = static_cast<int>(r.u32());
    hp.max_features = static_cast<int>(r.u32());
    hp.n_trees = static_cast<int>(r.u32());
    hp.bootstrap = r.u8() != 0;
    hp.k = r.u64();
    auto d = r.u64();
    for (std::uint64_t j = 0; j < d; ++j) {
        m.feature_names.push_back(r.str());
        m.scaler.min.push_back(r.f64());
        m.scaler.max.push_back(r.f64());
    }
    auto ns = r.u64();
    for (std::uint64_t i = 0; i < ns; ++i) {
        auto c = r.u64();
        if (c >= d) throw Error(ErrorCode::Parse, "selected column out of range");
        m.selected.push_back(c);
    }
    auto nw = r.u64();
    for (std::uint64_t i = 0; i < nw; ++i) m.logistic.weights.push_back(r.f64());
    m.logistic.bias = r.f64();
    auto nt = r.u64();
    for (std::uint64_t t = 0; t < nt; ++t) {
        Tree tree;
        auto nn = r.u64();
        for (std::uint64_t i = 0; i < nn; ++i) {
            TreeNode n;
            n.feature = static_cast<std::int32_t>(r.u32());
            n.threshold = r.f64();
            n.left = r.u32();
            n.right = r.u32();
            n.probability = r.f64();
            if (n.feature >= 0 && (n.left >= nn || n.right >= nn || static_cast<std::uint64_t>(n.feature) >= ns))
                throw Error(ErrorCode::Parse, "tree node points outside the tree");
            tree.nodes.push_back(n);
        }
        if (tree.nodes.empty()) throw Error(ErrorCode::Parse, "empty tree");
        m.trees.push_back(std::move(tree));
    }
    if (!r.at_end()) throw Error(ErrorCode::Parse, "trailing bytes in bot model");
    if (m.kind == ModelKind::LogisticRegression && m.logistic.weights.size() != m.selected.size())
        throw Error(ErrorCode::Parse, "weight count differs from selected columns");
    return m;
}

void TrainedModel::save(const std::filesystem::path& path) const { write_file_atomic(path, to_bytes()); }

TrainedModel TrainedModel::load(const std::filesystem::path& path) { return from_bytes(read_file(path)); }

}  // namespace ctikit::botml
