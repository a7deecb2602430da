#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ctikit/parallel.hpp"
#include "ctikit/serialize.hpp"
#include "ctikit/types.hpp"

namespace ctikit::features {

/// An account snapshot plus its posts, ascending by created_at.
struct Timeline {
    AccountProfile account;
    std::vector<PostRecord> posts;
};

void to_json(Json& j, const Timeline& t);
void from_json(const Json& j, Timeline& t);

inline constexpr std::size_t kFeatureCount = 47;

/// Column order of every feature vector and CSV.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    // profile
    "nFoS", "nF", "rFF", "nList", "lDesc", "proImage", "age", "rListAge", "Rep", "Pro", "Ver",
    // content
    "nTweet", "nRT", "mean_len", "sd_len", "mean_url_posts", "nWord", "nDigitTweet", "rMn", "rUMn",
    "rHashPost", "rURLPost", "rRTPost", "rUPost", "mean_like", "mean_quote", "mean_reply",
    "mean_retweet", "nSoc", "rSoc", "similarity",
    // temporal; interval statistics in hours
    "nPostperDay", "max_time_tweets", "max_time_retweets", "max_time_posts", "min_time_tweets",
    "min_time_retweets", "min_time_posts", "mean_time_tweets", "mean_time_retweets",
    "mean_time_posts", "sd_time_tweets", "sd_time_retweets", "sd_time_posts", "IH", "timePattern",
    "burstiness",
};

/// Index of a named feature; throws Error(InvalidArgument) for unknown names.
std::size_t feature_index(std::string_view name);

struct FeatureVector {
    std::string author_id;
    std::array<double, kFeatureCount> values{};

    double operator[](std::string_view name) const { return values[feature_index(name)]; }
    double& operator[](std::string_view name) { return values[feature_index(name)]; }
};

struct FeatureOptions {
    std::size_t similarity_window = 200;  // most recent posts compared pairwise
    int entropy_bins = 10;
    double epsilon = 1.0;                 // burstiness offset
    bool literal_time_pattern = false;    // -sum P(d) log2(d) over distinct intervals
};

/// Mean cosine similarity of term-frequency vectors over all distinct pairs.
/// Fewer than two texts gives 0; a pair with an empty vector scores 0.
double tweet_similarity(const std::vector<std::string>& texts);

/// Shannon entropy (bits) of the histogram of `intervals` over `bins` equal-width
/// bins spanning [min, max]. Zero when all intervals are equal or there are none.
double time_pattern_entropy(const std::vector<double>& intervals, int bins = 10);

/// -sum over distinct interval values v (v > 0) of P(v) * log2(v).
double literal_time_pattern(const std::vector<double>& intervals);

/// Distinct non-empty source labels across all timelines.
std::set<std::string> corpus_sources(const std::vector<Timeline>& timelines);

/// Throws Error(Domain) for an empty timeline, unsorted posts, or posts by another author.
FeatureVector compute_features(const Timeline& timeline, const std::set<std::string>& corpus_sources,
                               const FeatureOptions& options = {});

std::vector<FeatureVector> compute_batch(const std::vector<Timeline>& timelines,
                                         const std::set<std::string>& corpus_sources,
                                         const FeatureOptions& options = {}, Exec exec = Exec::Parallel);

std::vector<Timeline> load_timelines(const std::filesystem::path& path);

/// author_id followed by the 47 columns; doubles printed shortest round-trip.
std::string to_csv(const std::vector<FeatureVector>& rows);
std::vector<FeatureVector> read_csv(const std::filesystem::path& path);
std::vector<FeatureVector> parse_csv(std::string_view contents);

}  // namespace ctikit::features
