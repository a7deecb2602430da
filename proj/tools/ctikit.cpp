// ctikit command-line front end. Each subcommand wraps one library stage;
// `run` drives the whole pipeline from a config file.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

#include "ctikit/botml.hpp"
#include "ctikit/enrich.hpp"
#include "ctikit/explain.hpp"
#include "ctikit/extract.hpp"
#include "ctikit/features.hpp"
#include "ctikit/ingest.hpp"
#include "ctikit/pipeline.hpp"
#include "ctikit/preprocess.hpp"
#include "ctikit/relevance.hpp"
#include "ctikit/reliability.hpp"
#include "ctikit/serialize.hpp"

namespace fs = std::filesystem;
using namespace ctikit;

namespace {

std::string stage_name;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_file_atomic(path, text);
}

void cmd_ingest(const std::string& input, const std::string& output, const std::string& lang, bool lenient) {
    stage_name = "ingest";
    auto loaded = ingest::load_archive(input, lenient ? ingest::Strictness::Lenient : ingest::Strictness::Strict);
    auto filtered = ingest::filter_corpus(std::move(loaded.posts), lang);
    pipeline::write_jsonl(output, "posts", filtered.posts);
    const auto& s = filtered.stats;
    std::cerr << "read " << s.total_read << ", kept " << s.retained << " (dropped: " << s.non_english_dropped
              << " language, " << s.retweets_dropped << " retweets, " << s.duplicates_dropped << " duplicates)\n";
}

void cmd_preprocess(const std::string& input, const std::string& output) {
    stage_name = "preprocess";
    auto posts = pipeline::read_posts(input);
    std::vector<std::string> texts;
    for (const auto& p : posts) texts.push_back(p.text);
    auto tokens = preprocess::preprocess_batch(texts);
    std::vector<Json> rows;
    for (std::size_t i = 0; i < posts.size(); ++i) rows.push_back(Json{{"post_id", posts[i].post_id}, {"tokens", tokens[i]}});
    pipeline::write_jsonl(output, "tokens", rows);
}

void cmd_classify(const std::string& model_path, const std::string& input, const std::string& output,
                  const std::string& train_labels, double threshold, std::uint64_t seed) {
    stage_name = "relevance";
    auto posts = pipeline::read_posts(input);
    std::vector<std::string> texts;
    for (const auto& p : posts) texts.push_back(p.text);
    auto tokens = preprocess::preprocess_batch(texts);

    relevance::TextModel model;
    if (!train_labels.empty()) {
        auto labels = pipeline::read_relevance_labels(train_labels);
        std::vector<relevance::LabeledTokenSeq> rows;
        for (std::size_t i = 0; i < posts.size(); ++i) {
            auto it = labels.find(posts[i].post_id);
            if (it != labels.end()) rows.push_back({posts[i].post_id, tokens[i], it->second});
        }
        auto split = relevance::split_80_10_10(rows.size(), seed);
        std::vector<relevance::LabeledTokenSeq> train, test;
        for (auto i : split.train) train.push_back(rows[i]);
        for (auto i : split.test) test.push_back(rows[i]);
        relevance::TrainConfig tc;
        tc.seed = seed;
        model = relevance::train_text(train, tc);
        model.save(model_path);
        auto c = relevance::evaluate_text(model, test, threshold);
        std::cerr << "trained on " << train.size() << " posts; test tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn
                  << " tn=" << c.tn << "\n";
    } else {
        model = relevance::TextModel::load(model_path);
    }

    std::string out = schema_header("classified").dump() + "\n";
    for (std::size_t i = 0; i < posts.size(); ++i) {
        double score = relevance::predict_text(model, tokens[i]);
        Json j = posts[i];
        j["relevant"] = relevance::label_of(score, threshold) == 1;
        j["score"] = score;
        out += j.dump() + "\n";
    }
    write_file_atomic(output, out);
}

void cmd_extract(const std::string& input, const std::string& output, const std::string& exclusions,
                 bool only_relevant, bool keep_duplicates) {
    stage_name = "extract";
    std::vector<PostRecord> posts;
    for_each_json(input, [&](std::size_t line, const Json& j) {
        if (only_relevant && !j.value("relevant", false)) return;
        try {
            posts.push_back(j.get<PostRecord>());
        } catch (const Error& e) {
            throw ParseError(line, j.dump().substr(0, 40), e.what());
        }
    });
    extract::ExtractOptions opts;
    if (!exclusions.empty()) opts.exclusions = extract::ExclusionList::from_file(exclusions);
    auto records = extract::extract_batch(posts, opts);
    if (!keep_duplicates) records = extract::dedup_iocs(std::move(records));
    pipeline::write_jsonl(output, "iocs", records);
    std::cerr << records.size() << " indicators from " << posts.size() << " posts\n";
}

void cmd_enrich(const std::string& input, const std::string& output, const std::string& services,
                const std::string& provider_name, const std::string& cache_dir, const std::string& fixtures,
                const std::string& failures_path, int width) {
    stage_name = "enrich";
    enrich::EnrichOptions opts;
    opts.services = pipeline::parse_services(services);
    opts.width = width;
    auto iocs = pipeline::read_iocs(input);
    std::optional<enrich::VerdictCache> cache;
    if (!cache_dir.empty()) cache.emplace(cache_dir);
    enrich::EnrichResult result;
    if (provider_name == "fixture") {
        if (fixtures.empty()) throw Error(ErrorCode::Usage, "--fixtures is required with --provider fixture");
        enrich::FixtureProvider provider(fixtures);
        result = enrich::enrich_dataset(iocs, provider, opts, cache ? &*cache : nullptr);
    } else {
        auto credentials = enrich::Credentials::from_environment(opts.services);
        auto transport = enrich::make_http_transport();
        enrich::LiveProvider provider(credentials, *transport);
        result = enrich::enrich_dataset(iocs, provider, opts, cache ? &*cache : nullptr);
    }
    pipeline::write_jsonl(output, "verdicts", result.verdicts);
    if (!failures_path.empty()) pipeline::write_jsonl(failures_path, "enrich_failures", result.failures);
    for (const auto& f : result.failures)
        std::cerr << "failed: " << short_name(f.service) << " " << f.ioc_value << ": " << f.message << "\n";
    std::cerr << result.verdicts.size() << " verdicts (" << result.cache_hits << " cached, " << result.lookups
              << " looked up, " << result.failures.size() << " failed)\n";
}

void cmd_metrics(const std::string& iocs_path, const std::string& verdicts_path, const std::string& out_dir) {
    stage_name = "reliability";
    auto iocs = pipeline::read_iocs(iocs_path);
    auto verdicts = pipeline::read_verdicts(verdicts_path);
    auto correctness = reliability::correctness_table(iocs, verdicts);
    auto timeliness = reliability::timeliness(verdicts, iocs);
    auto overlap = reliability::overlap(verdicts);
    fs::path dir(out_dir);
    fs::create_directories(dir);
    write_file_atomic(dir / "correctness.csv", reliability::correctness_csv(correctness));
    write_file_atomic(dir / "timeliness_summary.csv", reliability::timeliness_summary_csv(timeliness));
    write_file_atomic(dir / "timeliness_records.csv", reliability::timeliness_records_csv(timeliness));
    write_file_atomic(dir / "overlap.csv", reliability::overlap_csv(overlap));
    write_file_atomic(dir / "monthly.csv", reliability::monthly_csv(reliability::monthly_tally(iocs)));
    auto summary = reliability::text_summary(correctness, timeliness, overlap);
    write_file_atomic(dir / "reliability.txt", summary);
    std::cout << summary;
}

void cmd_features(const std::string& input, const std::string& output, bool literal) {
    stage_name = "features";
    auto timelines = features::load_timelines(input);
    features::FeatureOptions opts;
    opts.literal_time_pattern = literal;
    auto rows = features::compute_batch(timelines, features::corpus_sources(timelines), opts);
    write_text(output, features::to_csv(rows));
}

botml::Dataset labeled_dataset(const std::string& features_path, const std::string& scores_path, double threshold) {
    auto rows = features::read_csv(features_path);
    return botml::to_dataset(botml::label_accounts(rows, botml::read_scores_csv(scores_path), threshold));
}

void cmd_train_bot(const std::string& features_path, const std::string& scores_path, const std::string& model_path,
                   const std::string& kind_name, std::size_t k, int trees, int depth, double threshold, double test_ratio,
                   std::uint64_t seed) {
    stage_name = "botml";
    auto data = labeled_dataset(features_path, scores_path, threshold);
    auto kind = botml::model_kind_from_string(kind_name);
    botml::Hyperparams hp;
    hp.k = k;
    hp.n_trees = trees;
    hp.max_depth = depth;
    auto split = botml::stratified_split(data.y, test_ratio, seed);
    auto model = botml::train_classifier(kind, data.subset(split.train), hp, seed);
    model.save(model_path);
    std::cerr << botml::to_string(kind) << ": trained on " << split.train.size() << " accounts";
    if (!split.test.empty()) {
        auto e = botml::evaluate(model, data.subset(split.test));
        std::cerr << ", held-out F1 " << e.f1 << " (tp=" << e.counts.tp << " fp=" << e.counts.fp
                  << " fn=" << e.counts.fn << " tn=" << e.counts.tn << ")";
    }
    std::cerr << "\n";
}

void cmd_predict_bot(const std::string& model_path, const std::string& features_path, const std::string& output,
                     double threshold) {
    stage_name = "botml";
    auto model = botml::TrainedModel::load(model_path);
    std::string csv = "author_id,probability,predicted\n";
    for (const auto& row : features::read_csv(features_path)) {
        botml::Row raw(row.values.begin(), row.values.end());
        double p = model.predict_proba(raw);
        csv += row.author_id + "," + std::to_string(p) + "," + (p >= threshold ? "1" : "0") + "\n";
    }
    write_text(output, csv);
}

void cmd_explain(const std::string& model_path, const std::string& features_path, const std::string& instance,
                 const std::string& method, const std::string& scores_path, double threshold, std::size_t samples,
                 std::uint64_t seed, const std::string& output) {
    stage_name = "explain";
    auto model = botml::TrainedModel::load(model_path);
    auto rows = features::read_csv(features_path);
    std::vector<botml::Row> scaled;
    std::optional<std::size_t> target;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        scaled.push_back(model.scaler.apply(botml::Row(rows[i].values.begin(), rows[i].values.end())));
        if (rows[i].author_id == instance) target = i;
    }
    if (method == "perm") {
        if (scores_path.empty()) throw Error(ErrorCode::Usage, "--scores is required with --method perm");
        auto data = labeled_dataset(features_path, scores_path, threshold);
        auto ranked = explain::permutation_importance(model, botml::minmax_apply(model.scaler, data.x), data.y,
                                                      model.feature_names, 10, seed);
        write_text(output, explain::to_csv(ranked));
        return;
    }
    if (!target) throw Error(ErrorCode::InvalidArgument, "instance '" + instance + "' not found in features");
    explain::Explanation e;
    if (method == "linear") {
        e = explain::linear_contributions(model, scaled[*target], scaled, instance);
    } else {
        explain::LimeOptions opts;
        opts.n_samples = samples;
        opts.seed = seed;
        e = explain::lime_explain(model, scaled[*target], model.feature_names, opts, instance);
    }
    std::cerr << "base " << e.base_value << ", prediction " << e.prediction << " (" << explain::to_string(e.scale)
              << ")" << (e.ridge_fallback ? ", ridge fallback" : "") << "\n";
    write_text(output, explain::to_csv(e));
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& settings,
            const std::map<std::string, std::string>& flags) {
    stage_name = "startup";
    auto config = pipeline::load_config(config_path);
    for (const auto& s : settings) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::Usage, "--set expects key=value, got '" + s + "'");
        pipeline::apply_setting(config, s.substr(0, eq), s.substr(eq + 1), fs::current_path());
    }
    for (const auto& [key, value] : flags)
        if (!value.empty()) pipeline::apply_setting(config, key, value, fs::current_path());
    if (config.cache.empty()) config.cache = config.output / "cache";
    pipeline::RunHooks hooks;
    hooks.log = &std::cerr;
    auto result = pipeline::run_pipeline(config, hooks);
    std::cerr << result.executed.size() << " stages run, " << result.skipped.size() << " up to date; artifacts in "
              << config.output.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Threat-intelligence collection and security-account analysis toolkit"};
    app.require_subcommand(1);

    std::string input, output, lang = "en";
    bool lenient = false;
    auto* ingest_cmd = app.add_subcommand("ingest", "Load an archive and keep original English posts");
    ingest_cmd->add_option("-i,--input", input, "Post archive (.jsonl or .jsonl.gz)")->required();
    ingest_cmd->add_option("-o,--output", output, "Filtered posts JSONL")->required();
    ingest_cmd->add_option("--lang", lang, "Language code to keep");
    ingest_cmd->add_flag("--lenient", lenient, "Skip malformed lines instead of failing");

    auto* prep_cmd = app.add_subcommand("preprocess", "Tokenize, stem, and drop stopwords");
    prep_cmd->add_option("-i,--input", input)->required();
    prep_cmd->add_option("-o,--output", output)->required();

    std::string model, train, exclusions;
    double threshold = -1;
    std::uint64_t seed = 42;
    auto* cls_cmd = app.add_subcommand("classify-tweets", "Mark posts as security-relevant");
    cls_cmd->add_option("-m,--model", model, "Text model file (written when --train is given)")->required();
    cls_cmd->add_option("-i,--input", input)->required();
    cls_cmd->add_option("-o,--output", output)->required();
    cls_cmd->add_option("--train", train, "CSV post_id,label to train a new model first");
    cls_cmd->add_option("--threshold", threshold, "Decision threshold (default 0.5)");
    cls_cmd->add_option("--seed", seed);

    bool only_relevant = false, keep_duplicates = false;
    auto* ext_cmd = app.add_subcommand("extract", "Extract indicators from posts");
    ext_cmd->add_option("-i,--input", input)->required();
    ext_cmd->add_option("-o,--output", output)->required();
    ext_cmd->add_option("--exclusions", exclusions, "File of blocked hosts, one per line");
    ext_cmd->add_flag("--only-relevant", only_relevant, "Skip posts not marked relevant");
    ext_cmd->add_flag("--keep-duplicates", keep_duplicates, "Emit every mention instead of the earliest");

    std::string services = "all", provider = "fixture", cache, fixtures, failures;
    int width = 4;
    auto* enr_cmd = app.add_subcommand("enrich", "Query threat-intelligence services for each indicator");
    enr_cmd->add_option("-i,--input", input)->required();
    enr_cmd->add_option("-o,--output", output)->required();
    enr_cmd->add_option("--services", services, "Comma list of vt,otx,urlhaus,mb,misp,nvd or 'all'");
    enr_cmd->add_option("--provider", provider)->check(CLI::IsMember({"fixture", "live"}));
    enr_cmd->add_option("--cache", cache, "Verdict cache directory");
    enr_cmd->add_option("--fixtures", fixtures, "Recorded responses for --provider fixture");
    enr_cmd->add_option("--failures", failures, "JSONL of lookups that failed");
    enr_cmd->add_option("--width", width, "Concurrent requests per service")->check(CLI::PositiveNumber);

    std::string iocs_path, verdicts_path, out_dir;
    auto* met_cmd = app.add_subcommand("metrics", "Correctness, timeliness, and overlap report");
    met_cmd->add_option("--iocs", iocs_path)->required();
    met_cmd->add_option("--verdicts", verdicts_path)->required();
    met_cmd->add_option("-o,--output-dir", out_dir)->required();

    bool literal = false;
    auto* feat_cmd = app.add_subcommand("features", "Per-account feature table from timelines");
    feat_cmd->add_option("-i,--input", input, "Timelines JSONL")->required();
    feat_cmd->add_option("-o,--output", output, "CSV (stdout when omitted)");
    feat_cmd->add_flag("--literal-time-pattern", literal, "Use -sum P(d) log2(d) for timePattern");

    std::string features_path, scores, kind = "rf";
    std::size_t k = 0;
    int trees = 100, depth = 20;
    double test_ratio = 0.2;
    auto* tb_cmd = app.add_subcommand("train-bot", "Train a bot classifier");
    tb_cmd->add_option("-f,--features", features_path)->required();
    tb_cmd->add_option("-s,--scores", scores, "CSV author_id,botness")->required();
    tb_cmd->add_option("-m,--model", model)->required();
    tb_cmd->add_option("--kind", kind)->check(CLI::IsMember({"lr", "dt", "rf"}));
    tb_cmd->add_option("--k", k, "Keep the k best features (0 keeps all)");
    tb_cmd->add_option("--trees", trees)->check(CLI::PositiveNumber);
    tb_cmd->add_option("--max-depth", depth)->check(CLI::PositiveNumber);
    tb_cmd->add_option("--botness-threshold", threshold, "Label threshold (default 0.95)");
    tb_cmd->add_option("--test-ratio", test_ratio)->check(CLI::Range(0.0, 0.9));
    tb_cmd->add_option("--seed", seed);

    auto* pb_cmd = app.add_subcommand("predict-bot", "Score accounts with a trained classifier");
    pb_cmd->add_option("-m,--model", model)->required();
    pb_cmd->add_option("-f,--features", features_path)->required();
    pb_cmd->add_option("-o,--output", output, "CSV (stdout when omitted)");
    pb_cmd->add_option("--threshold", threshold, "Decision threshold (default 0.5)");

    std::string instance, method = "linear";
    std::size_t samples = 5000;
    auto* exp_cmd = app.add_subcommand("explain", "Per-feature contributions for one account");
    exp_cmd->add_option("-m,--model", model)->required();
    exp_cmd->add_option("-f,--features", features_path)->required();
    exp_cmd->add_option("--instance", instance, "author_id to explain");
    exp_cmd->add_option("--method", method)->check(CLI::IsMember({"linear", "lime", "perm"}));
    exp_cmd->add_option("-s,--scores", scores, "Botness CSV, needed for --method perm");
    exp_cmd->add_option("--samples", samples, "LIME perturbations");
    exp_cmd->add_option("--seed", seed);
    exp_cmd->add_option("-o,--output", output, "CSV (stdout when omitted)");

    std::string config_path;
    std::vector<std::string> settings;
    std::map<std::string, std::string> run_flags{{"output", ""}, {"provider", ""}, {"services", ""},
                                                 {"cache", ""}, {"fixtures", ""}, {"seed", ""}};
    auto* run_cmd = app.add_subcommand("run", "Full pipeline from a config file");
    run_cmd->add_option("-c,--config", config_path)->required();
    run_cmd->add_option("--set", settings, "Override a config key (key=value), repeatable");
    for (auto& [key, value] : run_flags) run_cmd->add_option("--" + key, value);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ErrorCode::Usage);
    }

    try {
        if (*ingest_cmd) cmd_ingest(input, output, lang, lenient);
        else if (*prep_cmd) cmd_preprocess(input, output);
        else if (*cls_cmd) cmd_classify(model, input, output, train, threshold < 0 ? 0.5 : threshold, seed);
        else if (*ext_cmd) cmd_extract(input, output, exclusions, only_relevant, keep_duplicates);
        else if (*enr_cmd) cmd_enrich(input, output, services, provider, cache, fixtures, failures, width);
        else if (*met_cmd) cmd_metrics(iocs_path, verdicts_path, out_dir);
        else if (*feat_cmd) cmd_features(input, output, literal);
        else if (*tb_cmd) cmd_train_bot(features_path, scores, model, kind, k, trees, depth,
                                        threshold < 0 ? botml::kBotnessThreshold : threshold, test_ratio, seed);
        else if (*pb_cmd) cmd_predict_bot(model, features_path, output, threshold < 0 ? 0.5 : threshold);
        else if (*exp_cmd) cmd_explain(model, features_path, instance, method, scores,
                                       threshold < 0 ? botml::kBotnessThreshold : threshold, samples, seed, output);
        else if (*run_cmd) return cmd_run(config_path, settings, run_flags);
    } catch (const pipeline::StageError& e) {
        std::cerr << "error: stage=" << e.stage() << " code=" << to_string(e.code()) << ": " << e.detail() << "\n";
        return static_cast<int>(e.code());
    } catch (const Error& e) {
        std::cerr << "error: stage=" << stage_name << " code=" << to_string(e.code()) << ": " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: stage=" << stage_name << " code=io: " << e.what() << "\n";
        return static_cast<int>(ErrorCode::Io);
    }
    return 0;
}
