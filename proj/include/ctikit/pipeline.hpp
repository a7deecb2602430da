#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ctikit/enrich.hpp"
#include "ctikit/error.hpp"
#include "ctikit/serialize.hpp"
#include "ctikit/types.hpp"

namespace ctikit::pipeline {

struct PipelineConfig {
    std::filesystem::path posts;             // JSONL(.gz) archive of PostRecord
    std::string lang = "en";
    std::filesystem::path relevance_labels;  // CSV post_id,label; used when text_model is unset
    std::filesystem::path text_model;        // pre-trained model; trained from labels when empty
    std::filesystem::path exclusions;        // optional blocklist file
    std::set<ServiceId> services{std::begin(kAllServices), std::end(kAllServices)};
    std::string provider = "fixture";        // fixture | live
    std::filesystem::path fixtures;
    std::filesystem::path cache;             // defaults to <output>/cache
    std::filesystem::path timelines;         // JSONL of {account, posts}
    std::filesystem::path botness;           // CSV author_id,botness
    std::string bot_model = "rf";            // lr | dt | rf
    std::size_t bot_k = 0;                   // 0 keeps all 47 features
    int bot_trees = 100;
    double relevance_threshold = 0.5;
    double botness_threshold = 0.95;
    std::uint64_t seed = 42;
    int enrich_width = 4;
    std::filesystem::path output = "out";
};

/// Parses "key = value" lines; '#' starts a comment, values may be double-quoted.
/// Relative paths resolve against `base_dir`. Unknown keys raise Error(Config).
PipelineConfig parse_config(std::string_view contents, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Applies one key=value override with the same rules as the file.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir = {});

/// Throws Error(Config) naming the first input path that does not exist.
void validate(const PipelineConfig& config);

/// Error raised by a stage; keeps the underlying code.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause)
        : Error(cause.code(), "stage '" + stage + "': " + cause.what()), stage_(std::move(stage)),
          detail_(cause.what()) {}
    const std::string& stage() const noexcept { return stage_; }
    /// The underlying message without the stage prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string stage_;
    std::string detail_;
};

struct RunHooks {
    enrich::Transport* transport = nullptr;  // replaces HTTPS for provider=live
    std::ostream* log = nullptr;
};

struct RunResult {
    std::vector<std::string> executed;
    std::vector<std::string> skipped;  // resumed from a matching manifest entry
};

/// ingest -> preprocess -> relevance -> extract -> enrich -> reliability ->
/// features -> botml -> prop_bot -> explain, writing every artifact under
/// config.output. A stage whose recorded input digest matches is skipped.
RunResult run_pipeline(const PipelineConfig& config, const RunHooks& hooks = {});

// Artifact helpers shared with the command-line tool.
std::vector<PostRecord> read_posts(const std::filesystem::path& path);
std::vector<IocRecord> read_iocs(const std::filesystem::path& path);
std::vector<Verdict> read_verdicts(const std::filesystem::path& path);
std::map<std::string, int> read_relevance_labels(const std::filesystem::path& path);
std::set<ServiceId> parse_services(std::string_view list);

template <class T>
void write_jsonl(const std::filesystem::path& path, std::string_view kind, const std::vector<T>& rows) {
    std::string out = schema_header(kind).dump() + "\n";
    for (const auto& r : rows) out += Json(r).dump() + "\n";
    write_file_atomic(path, out);
}

/// Digest of a file, or of every file under a directory (relative path + content).
std::string digest_path(const std::filesystem::path& path);

}  // namespace ctikit::pipeline
