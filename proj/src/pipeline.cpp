#include "ctikit/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

#include "ctikit/botml.hpp"
#include "ctikit/digest.hpp"
#include "ctikit/explain.hpp"
#include "ctikit/extract.hpp"
#include "ctikit/features.hpp"
#include "ctikit/ingest.hpp"
#include "ctikit/preprocess.hpp"
#include "ctikit/relevance.hpp"
#include "ctikit/reliability.hpp"
#include "ctikit/text.hpp"

namespace ctikit::pipeline {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, what); }

std::string unquote(std::string_view v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) ++i;
            out.push_back(v[i]);
        }
        return out;
    }
    return std::string(v);
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && text::is_space(s[b])) ++b;
    while (e > b && text::is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

template <class T>
T number(std::string_view key, const std::string& v) {
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        config_error("value '" + v + "' for '" + std::string(key) + "' is not a number");
    return out;
}

fs::path resolve(const fs::path& base, const std::string& v) {
    if (v.empty()) return {};
    fs::path p(v);
    return p.is_absolute() || base.empty() ? p : base / p;
}

std::string hex_of(const std::vector<std::string>& parts) {
    std::string material;
    for (const auto& p : parts) {
        material += p;
        material += '\n';
    }
    return sha256_hex(material);
}

Json counts_json(const relevance::ConfusionCounts& c) {
    Json j{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
    j["f1"] = (c.tp + c.fp + c.fn) > 0 ? Json(relevance::f1_score(c)) : Json(nullptr);
    j["detection_rate"] = (c.tp + c.fn) > 0 ? Json(relevance::detection_rate(c)) : Json(nullptr);
    return j;
}

std::string fmt(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

class Runner {
public:
    Runner(const PipelineConfig& config, const RunHooks& hooks) : cfg_(config), hooks_(hooks), out_(config.output) {
        fs::create_directories(out_);
        auto manifest_path = out_ / "manifest.json";
        if (fs::exists(manifest_path)) {
            manifest_ = Json::parse(read_file(manifest_path), nullptr, false);
            if (manifest_.is_discarded() || !manifest_.is_object()) manifest_ = Json::object();
        } else {
            manifest_ = Json::object();
        }
        if (!manifest_.contains("stages")) manifest_["stages"] = Json::object();
    }

    fs::path at(const std::string& rel) const { return out_ / rel; }

    void log(const std::string& line) const {
        if (hooks_.log) *hooks_.log << line << '\n';
    }

    /// Runs `body` unless the manifest already holds this stage with the same
    /// input key and the outputs on disk still match their recorded digests.
    void stage(const std::string& name, const std::vector<fs::path>& inputs, const std::vector<std::string>& params,
               const std::vector<std::string>& outputs, const std::function<void()>& body) {
        try {
            std::vector<std::string> parts{name};
            parts.insert(parts.end(), params.begin(), params.end());
            for (const auto& in : inputs) parts.push_back(in.empty() ? "-" : digest_path(in));
            const std::string key = hex_of(parts);

            auto& entry = manifest_["stages"][name];
            if (entry.is_object() && entry.value("key", "") == key && outputs_intact(entry, outputs)) {
                result_.skipped.push_back(name);
                log("[" + name + "] up to date");
                return;
            }
            log("[" + name + "] running");
            body();
            Json recorded = Json::object();
            for (const auto& o : outputs) recorded[o] = digest_path(at(o));
            entry = Json{{"key", key}, {"outputs", recorded}};
            write_file_atomic(out_ / "manifest.json", manifest_.dump(2) + "\n");
            result_.executed.push_back(name);
        } catch (const StageError&) {
            throw;
        } catch (const Error& e) {
            throw StageError(name, e);
        } catch (const std::exception& e) {
            throw StageError(name, Error(ErrorCode::Io, e.what()));
        }
    }

    RunResult run();

private:
    bool outputs_intact(const Json& entry, const std::vector<std::string>& outputs) const {
        auto it = entry.find("outputs");
        if (it == entry.end() || !it->is_object()) return false;
        for (const auto& o : outputs) {
            if (!fs::exists(at(o)) || !it->contains(o)) return false;
            if ((*it)[o].get<std::string>() != digest_path(at(o))) return false;
        }
        return true;
    }

    void run_ingest();
    void run_preprocess();
    void run_relevance();
    void run_extract();
    void run_enrich();
    void run_reliability();
    void run_features();
    void run_botml();
    void run_prop_bot();
    void run_explain();
    void run_summary();

    const PipelineConfig& cfg_;
    const RunHooks& hooks_;
    fs::path out_;
    Json manifest_;
    RunResult result_;
};

void Runner::run_ingest() {
    auto loaded = ingest::load_archive(cfg_.posts);
    auto filtered = ingest::filter_corpus(std::move(loaded.posts), cfg_.lang);
    write_jsonl(at("posts.jsonl"), "posts", filtered.posts);
    const auto& s = filtered.stats;
    Json stats{{"total_read", s.total_read},
               {"non_english_dropped", s.non_english_dropped},
               {"retweets_dropped", s.retweets_dropped},
               {"duplicates_dropped", s.duplicates_dropped},
               {"retained", s.retained}};
    write_file_atomic(at("ingest_stats.json"), stats.dump(2) + "\n");
}

void Runner::run_preprocess() {
    auto posts = read_posts(at("posts.jsonl"));
    std::vector<std::string> texts;
    for (const auto& p : posts) texts.push_back(p.text);
    auto tokens = preprocess::preprocess_batch(texts);
    std::vector<Json> rows;
    for (std::size_t i = 0; i < posts.size(); ++i) rows.push_back(Json{{"post_id", posts[i].post_id}, {"tokens", tokens[i]}});
    write_jsonl(at("tokens.jsonl"), "tokens", rows);
}

void Runner::run_relevance() {
    std::vector<relevance::LabeledTokenSeq> docs;
    for_each_json(at("tokens.jsonl"), [&](std::size_t, const Json& j) {
        docs.push_back({j.at("post_id").get<std::string>(), j.at("tokens").get<preprocess::TokenSequence>(), 0});
    });

    relevance::TextModel model;
    Json eval = Json::object();
    if (!cfg_.text_model.empty()) {
        model = relevance::TextModel::load(cfg_.text_model);
        eval["source"] = "pretrained";
    } else {
        auto labels = read_relevance_labels(cfg_.relevance_labels);
        std::vector<relevance::LabeledTokenSeq> labeled;
        for (const auto& d : docs) {
            auto it = labels.find(d.post_id);
            if (it != labels.end()) labeled.push_back({d.post_id, d.tokens, it->second});
        }
        auto split = relevance::split_80_10_10(labeled.size(), cfg_.seed);
        auto pick = [&](const std::vector<std::size_t>& idx) {
            std::vector<relevance::LabeledTokenSeq> out;
            for (auto i : idx) out.push_back(labeled[i]);
            return out;
        };
        relevance::TrainConfig tc;
        tc.seed = cfg_.seed;
        model = relevance::train_text(pick(split.train), tc);
        eval["source"] = "trained";
        eval["train_rows"] = split.train.size();
        eval["validation"] = counts_json(relevance::evaluate_text(model, pick(split.validation), cfg_.relevance_threshold));
        eval["test"] = counts_json(relevance::evaluate_text(model, pick(split.test), cfg_.relevance_threshold));
    }
    model.save(at("text_model.bin"));

    std::vector<Json> rows;
    for (const auto& d : docs) {
        double score = relevance::predict_text(model, d.tokens);
        rows.push_back(Json{{"post_id", d.post_id},
                            {"relevant", relevance::label_of(score, cfg_.relevance_threshold) == 1},
                            {"score", score}});
    }
    write_jsonl(at("classified.jsonl"), "classified", rows);
    write_file_atomic(at("relevance_eval.json"), eval.dump(2) + "\n");
}

void Runner::run_extract() {
    std::set<std::string> relevant;
    for_each_json(at("classified.jsonl"), [&](std::size_t, const Json& j) {
        if (j.at("relevant").get<bool>()) relevant.insert(j.at("post_id").get<std::string>());
    });
    std::vector<PostRecord> posts;
    for (auto& p : read_posts(at("posts.jsonl")))
        if (relevant.count(p.post_id)) posts.push_back(std::move(p));
    extract::ExtractOptions opts;
    if (!cfg_.exclusions.empty()) opts.exclusions = extract::ExclusionList::from_file(cfg_.exclusions);
    auto all = extract::extract_batch(posts, opts);
    write_jsonl(at("iocs_all.jsonl"), "iocs", all);
    write_jsonl(at("iocs.jsonl"), "iocs", extract::dedup_iocs(std::move(all)));
}

void Runner::run_enrich() {
    auto iocs = read_iocs(at("iocs.jsonl"));
    enrich::VerdictCache cache(cfg_.cache.empty() ? at("cache") : cfg_.cache);
    enrich::EnrichOptions opts;
    opts.services = cfg_.services;
    opts.width = cfg_.enrich_width;
    enrich::EnrichResult result;
    if (cfg_.provider == "fixture") {
        enrich::FixtureProvider provider(cfg_.fixtures);
        result = enrich::enrich_dataset(iocs, provider, opts, &cache);
    } else {
        auto credentials = enrich::Credentials::from_environment(cfg_.services);
        std::unique_ptr<enrich::Transport> owned;
        enrich::Transport* transport = hooks_.transport;
        if (!transport) {
            owned = enrich::make_http_transport();
            transport = owned.get();
        }
        enrich::LiveProvider provider(credentials, *transport);
        result = enrich::enrich_dataset(iocs, provider, opts, &cache);
    }
    log("[enrich] " + std::to_string(result.cache_hits) + " cache hits, " + std::to_string(result.lookups) +
        " lookups, " + std::to_string(result.failures.size()) + " failures");
    write_jsonl(at("verdicts.jsonl"), "verdicts", result.verdicts);
    write_jsonl(at("enrich_failures.jsonl"), "enrich_failures", result.failures);
}

void Runner::run_reliability() {
    auto iocs = read_iocs(at("iocs.jsonl"));
    auto verdicts = read_verdicts(at("verdicts.jsonl"));
    auto correctness = reliability::correctness_table(iocs, verdicts);
    auto timeliness = reliability::timeliness(verdicts, iocs);
    auto overlap = reliability::overlap(verdicts);
    fs::create_directories(at("report"));
    write_file_atomic(at("report/correctness.csv"), reliability::correctness_csv(correctness));
    write_file_atomic(at("report/timeliness_summary.csv"), reliability::timeliness_summary_csv(timeliness));
    write_file_atomic(at("report/timeliness_records.csv"), reliability::timeliness_records_csv(timeliness));
    write_file_atomic(at("report/overlap.csv"), reliability::overlap_csv(overlap));
    write_file_atomic(at("report/monthly.csv"), reliability::monthly_csv(reliability::monthly_tally(iocs)));
    write_file_atomic(at("report/reliability.txt"), reliability::text_summary(correctness, timeliness, overlap));
}

void Runner::run_features() {
    auto timelines = features::load_timelines(cfg_.timelines);
    auto rows = features::compute_batch(timelines, features::corpus_sources(timelines));
    write_file_atomic(at("features.csv"), features::to_csv(rows));
}

void Runner::run_botml() {
    auto rows = features::read_csv(at("features.csv"));
    auto labeled = botml::label_accounts(rows, botml::read_scores_csv(cfg_.botness), cfg_.botness_threshold);
    auto data = botml::to_dataset(labeled);
    auto split = botml::stratified_split(data.y, 0.2, cfg_.seed);
    botml::Hyperparams hp;
    hp.k = cfg_.bot_k;
    hp.n_trees = cfg_.bot_trees;
    auto kind = botml::model_kind_from_string(cfg_.bot_model);
    auto model = botml::train_classifier(kind, data.subset(split.train), hp, cfg_.seed);
    model.save(at("bot_model.bin"));
    auto test = data.subset(split.test);
    Json eval{{"model", std::string(botml::to_string(kind))},
              {"train_rows", split.train.size()},
              {"test_rows", split.test.size()},
              {"bots", std::count(data.y.begin(), data.y.end(), 1)},
              {"humans", std::count(data.y.begin(), data.y.end(), 0)}};
    if (!test.x.empty()) {
        auto e = botml::evaluate(model, test);
        eval["test"] = counts_json(e.counts);
        eval["test"]["f1"] = e.f1;
    }
    write_file_atomic(at("bot_eval.json"), eval.dump(2) + "\n");
    std::string csv = "author_id,label,probability,predicted\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        double p = model.predict_proba(data.x[i]);
        csv += data.ids[i] + "," + std::to_string(data.y[i]) + "," + fmt(p) + "," + (p >= 0.5 ? "1" : "0") + "\n";
    }
    write_file_atomic(at("bot_predictions.csv"), csv);
}

void Runner::run_prop_bot() {
    std::set<std::string> bots;
    std::istringstream in(read_file(at("bot_predictions.csv")));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto id = line.substr(0, line.find(','));
        if (line.back() == '1') bots.insert(id);
    }
    std::set<std::pair<std::string, IocType>> malicious;
    for (const auto& v : read_verdicts(at("verdicts.jsonl")))
        if (is_malicious(v.status)) malicious.emplace(v.ioc_value, v.ioc_type);
    std::int64_t total = 0, by_bots = 0;
    for (const auto& r : read_iocs(at("iocs.jsonl"))) {
        if (!malicious.count({r.ioc_value, r.ioc_type})) continue;
        ++total;
        if (bots.count(r.user_name)) ++by_bots;
    }
    Json j{{"n_bot_mal", by_bots}, {"n_tot_mal", total}};
    if (total > 0) {
        j["prop_bot"] = reliability::prop_bot(by_bots, total);
        j["prop_bot_pct"] = reliability::format_percent(by_bots, total);
    } else {
        j["prop_bot"] = nullptr;
        j["prop_bot_pct"] = nullptr;
    }
    write_file_atomic(at("prop_bot.json"), j.dump(2) + "\n");
}

void Runner::run_explain() {
    auto model = botml::TrainedModel::load(at("bot_model.bin"));
    auto rows = features::read_csv(at("features.csv"));
    auto labeled = botml::label_accounts(rows, botml::read_scores_csv(cfg_.botness), cfg_.botness_threshold);
    auto data = botml::to_dataset(labeled);
    auto split = botml::stratified_split(data.y, 0.2, cfg_.seed);
    auto test = data.subset(split.test);
    if (test.x.empty()) test = data;
    auto ranked = explain::permutation_importance(model, botml::minmax_apply(model.scaler, test.x), test.y,
                                                  model.feature_names, 10, cfg_.seed);
    write_file_atomic(at("bot_importance.csv"), explain::to_csv(ranked));
}

void Runner::run_summary() {
    std::ostringstream s;
    Json stats = Json::parse(read_file(at("ingest_stats.json")));
    s << "Corpus: " << stats["total_read"] << " read, " << stats["retained"] << " retained\n";
    std::size_t relevant = 0, classified = 0;
    for_each_json(at("classified.jsonl"), [&](std::size_t, const Json& j) {
        ++classified;
        if (j["relevant"].get<bool>()) ++relevant;
    });
    s << "Relevant posts: " << relevant << " of " << classified << "\n";
    s << "Unique indicators: " << read_iocs(at("iocs.jsonl")).size() << "\n\n";
    s << read_file(at("report/reliability.txt"));
    if (fs::exists(at("prop_bot.json"))) {
        Json pb = Json::parse(read_file(at("prop_bot.json")));
        s << "\nBot share of malicious indicators: " << pb["n_bot_mal"] << " / " << pb["n_tot_mal"];
        if (!pb["prop_bot_pct"].is_null()) s << " = " << pb["prop_bot_pct"].get<std::string>() << "%";
        s << "\n";
    }
    write_file_atomic(at("summary.txt"), s.str());
}

RunResult Runner::run() {
    const auto seed = std::to_string(cfg_.seed);
    stage("ingest", {cfg_.posts}, {cfg_.lang}, {"posts.jsonl", "ingest_stats.json"}, [&] { run_ingest(); });
    stage("preprocess", {at("posts.jsonl")}, {}, {"tokens.jsonl"}, [&] { run_preprocess(); });
    stage("relevance", {at("tokens.jsonl"), cfg_.text_model, cfg_.text_model.empty() ? cfg_.relevance_labels : fs::path()},
          {seed, fmt(cfg_.relevance_threshold)}, {"text_model.bin", "classified.jsonl", "relevance_eval.json"},
          [&] { run_relevance(); });
    stage("extract", {at("posts.jsonl"), at("classified.jsonl"), cfg_.exclusions}, {},
          {"iocs_all.jsonl", "iocs.jsonl"}, [&] { run_extract(); });
    std::string services;
    for (auto s : cfg_.services) services += std::string(short_name(s)) + ",";
    stage("enrich", {at("iocs.jsonl"), cfg_.provider == "fixture" ? cfg_.fixtures : fs::path()},
          {services, cfg_.provider}, {"verdicts.jsonl", "enrich_failures.jsonl"}, [&] { run_enrich(); });
    stage("reliability", {at("iocs.jsonl"), at("verdicts.jsonl")}, {},
          {"report/correctness.csv", "report/timeliness_summary.csv", "report/timeliness_records.csv",
           "report/overlap.csv", "report/monthly.csv", "report/reliability.txt"},
          [&] { run_reliability(); });
    if (!cfg_.timelines.empty() && !cfg_.botness.empty()) {
        stage("features", {cfg_.timelines}, {}, {"features.csv"}, [&] { run_features(); });
        std::vector<std::string> bot_params{seed, cfg_.bot_model, std::to_string(cfg_.bot_k),
                                            std::to_string(cfg_.bot_trees), fmt(cfg_.botness_threshold)};
        stage("botml", {at("features.csv"), cfg_.botness}, bot_params,
              {"bot_model.bin", "bot_eval.json", "bot_predictions.csv"}, [&] { run_botml(); });
        stage("prop_bot", {at("iocs.jsonl"), at("verdicts.jsonl"), at("bot_predictions.csv")}, {}, {"prop_bot.json"},
              [&] { run_prop_bot(); });
        stage("explain", {at("bot_model.bin"), at("features.csv"), cfg_.botness}, bot_params, {"bot_importance.csv"},
              [&] { run_explain(); });
    } else {
        log("[features] no timelines or botness scores configured; account stages skipped");
    }
    std::vector<fs::path> all_inputs{at("ingest_stats.json"), at("classified.jsonl"), at("iocs.jsonl"),
                                     at("report/reliability.txt")};
    if (fs::exists(at("prop_bot.json"))) all_inputs.push_back(at("prop_bot.json"));
    stage("summary", all_inputs, {}, {"summary.txt"}, [&] { run_summary(); });
    return result_;
}

}  // namespace

void apply_setting(PipelineConfig& c, std::string_view key_in, std::string_view raw, const fs::path& base) {
    const std::string key(key_in);
    const std::string v = unquote(trim(raw));
    if (key == "posts") c.posts = resolve(base, v);
    else if (key == "lang") c.lang = v;
    else if (key == "relevance_labels") c.relevance_labels = resolve(base, v);
    else if (key == "text_model") c.text_model = resolve(base, v);
    else if (key == "exclusions") c.exclusions = resolve(base, v);
    else if (key == "services") c.services = parse_services(v);
    else if (key == "provider") {
        if (v != "fixture" && v != "live") config_error("provider must be 'fixture' or 'live'");
        c.provider = v;
    } else if (key == "fixtures") c.fixtures = resolve(base, v);
    else if (key == "cache") c.cache = resolve(base, v);
    else if (key == "timelines") c.timelines = resolve(base, v);
    else if (key == "botness") c.botness = resolve(base, v);
    else if (key == "bot_model") {
        botml::model_kind_from_string(v);
        c.bot_model = v;
    } else if (key == "bot_k") c.bot_k = number<std::size_t>(key, v);
    else if (key == "bot_trees") c.bot_trees = number<int>(key, v);
    else if (key == "relevance_threshold") c.relevance_threshold = number<double>(key, v);
    else if (key == "botness_threshold") c.botness_threshold = number<double>(key, v);
    else if (key == "seed") c.seed = number<std::uint64_t>(key, v);
    else if (key == "enrich_width") c.enrich_width = number<int>(key, v);
    else if (key == "output") c.output = resolve(base, v);
    else config_error("unknown config key '" + key + "'");
}

PipelineConfig parse_config(std::string_view contents, const fs::path& base_dir) {
    PipelineConfig c;
    std::istringstream in{std::string(contents)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        auto t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) config_error("line " + std::to_string(line_no) + ": expected key = value");
        try {
            apply_setting(c, trim(t.substr(0, eq)), t.substr(eq + 1), base_dir);
        } catch (const Error& e) {
            config_error("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) config_error("config file not found: '" + path.string() + "'");
    return parse_config(read_file(path), path.parent_path());
}

void validate(const PipelineConfig& c) {
    auto need = [](const fs::path& p, const char* what) {
        if (p.empty()) config_error(std::string("missing required setting '") + what + "'");
        if (!fs::exists(p)) config_error(std::string(what) + " not found: '" + p.string() + "'");
    };
    auto optional = [](const fs::path& p, const char* what) {
        if (!p.empty() && !fs::exists(p)) config_error(std::string(what) + " not found: '" + p.string() + "'");
    };
    need(c.posts, "posts");
    if (c.text_model.empty())
        need(c.relevance_labels, "relevance_labels");
    else
        need(c.text_model, "text_model");
    optional(c.exclusions, "exclusions");
    if (c.provider == "fixture") need(c.fixtures, "fixtures");
    optional(c.timelines, "timelines");
    optional(c.botness, "botness");
    if (c.services.empty()) config_error("no services selected");
    if (!(c.relevance_threshold >= 0 && c.relevance_threshold <= 1)) config_error("relevance_threshold outside [0, 1]");
    if (!(c.botness_threshold >= 0 && c.botness_threshold <= 1)) config_error("botness_threshold outside [0, 1]");
    if (c.enrich_width < 1) config_error("enrich_width must be positive");
    if (c.bot_trees < 1) config_error("bot_trees must be positive");
}

RunResult run_pipeline(const PipelineConfig& config, const RunHooks& hooks) {
    validate(config);
    if (config.provider == "live") {
        try {
            enrich::Credentials::from_environment(config.services);
        } catch (const Error& e) {
            throw StageError("startup", e);
        }
    }
    Runner runner(config, hooks);
    return runner.run();
}

std::vector<PostRecord> read_posts(const fs::path& path) {
    std::vector<PostRecord> out;
    for_each_json(path, [&](std::size_t line, const Json& j) {
        try {
            out.push_back(j.get<PostRecord>());
        } catch (const Error& e) {
            throw ParseError(line, j.dump().substr(0, 40), e.what());
        }
    });
    return out;
}

std::vector<IocRecord> read_iocs(const fs::path& path) {
    std::vector<IocRecord> out;
    for_each_json(path, [&](std::size_t line, const Json& j) {
        try {
            out.push_back(j.get<IocRecord>());
        } catch (const Error& e) {
            throw ParseError(line, j.dump().substr(0, 40), e.what());
        }
    });
    return out;
}

std::vector<Verdict> read_verdicts(const fs::path& path) {
    std::vector<Verdict> out;
    for_each_json(path, [&](std::size_t line, const Json& j) {
        try {
            out.push_back(j.get<Verdict>());
        } catch (const Error& e) {
            throw ParseError(line, j.dump().substr(0, 40), e.what());
        }
    });
    return out;
}

std::map<std::string, int> read_relevance_labels(const fs::path& path) {
    std::map<std::string, int> out;
    std::size_t line_no = 0;
    for_each_line(path, [&](std::size_t line, std::string_view text) {
        line_no = line;
        auto comma = text.find(',');
        if (comma == std::string_view::npos) throw ParseError(line, std::string(text.substr(0, 40)), "expected post_id,label");
        auto id = trim(text.substr(0, comma));
        auto label = trim(text.substr(comma + 1));
        if (line == 1 && id == "post_id") return;
        if (label != "0" && label != "1") throw ParseError(line, label, "label must be 0 or 1");
        out[id] = label == "1" ? 1 : 0;
    });
    return out;
}

std::set<ServiceId> parse_services(std::string_view list) {
    std::set<ServiceId> out;
    if (trim(list) == "all") return {std::begin(kAllServices), std::end(kAllServices)};
    std::string item;
    std::istringstream in{std::string(list)};
    while (std::getline(in, item, ',')) {
        auto name = trim(item);
        if (name.empty()) continue;
        auto s = service_from_name(name);
        if (!s) throw Error(ErrorCode::Config, "unknown service '" + name + "'");
        out.insert(*s);
    }
    return out;
}

std::string digest_path(const fs::path& path) {
    if (fs::is_directory(path)) {
        std::vector<std::string> parts;
        for (const auto& e : fs::recursive_directory_iterator(path)) {
            if (!e.is_regular_file()) continue;
            parts.push_back(fs::relative(e.path(), path).generic_string() + " " + sha256_hex(read_file(e.path())));
        }
        std::sort(parts.begin(), parts.end());
        return hex_of(parts);
    }
    if (!fs::exists(path)) return "missing";
    return sha256_hex(read_file(path));
}

}  // namespace ctikit::pipeline
