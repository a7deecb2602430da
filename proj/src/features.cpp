#include "ctikit/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "ctikit/error.hpp"
#include "ctikit/text.hpp"

namespace ctikit::features {

namespace {

constexpr double kSecondsPerHour = 3600.0;

struct IntervalStats {
    double max = 0, min = 0, mean = 0, sd = 0;
};

std::vector<double> gaps_hours(const std::vector<Timestamp>& times) {
    std::vector<double> out;
    for (std::size_t i = 1; i < times.size(); ++i)
        out.push_back(static_cast<double>(times[i].epoch_seconds() - times[i - 1].epoch_seconds()) / kSecondsPerHour);
    return out;
}

IntervalStats stats_of(const std::vector<double>& xs) {
    IntervalStats s;
    if (xs.empty()) return s;
    s.max = *std::max_element(xs.begin(), xs.end());
    s.min = *std::min_element(xs.begin(), xs.end());
    double sum = 0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size()));
    return s;
}

double safe_div(double num, double den) { return den == 0 ? 0.0 : num / den; }

std::map<std::string, double> term_counts(std::string_view text) {
    std::map<std::string, double> tf;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) tf[cur] += 1.0;
        cur.clear();
    };
    for (char c : text) {
        if (text::is_ascii_alnum(c))
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else
            flush();
    }
    flush();
    return tf;
}

double cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    if (a.empty() || b.empty()) return 0.0;
    double dot = 0, na = 0, nb = 0;
    for (const auto& [t, x] : a) na += x * x;
    for (const auto& [t, y] : b) nb += y * y;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->first < ib->first) ++ia;
        else if (ib->first < ia->first) ++ib;
        else {
            dot += ia->second * ib->second;
            ++ia;
            ++ib;
        }
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

}  // namespace

void to_json(Json& j, const Timeline& t) {
    j = Json::object();
    j["account"] = t.account;
    j["posts"] = t.posts;
}

void from_json(const Json& j, Timeline& t) {
    if (!j.is_object() || !j.contains("account") || !j.contains("posts") || !j["posts"].is_array())
        throw Error(ErrorCode::Parse, "timeline needs 'account' and 'posts'");
    t.account = j["account"].get<AccountProfile>();
    t.posts = j["posts"].get<std::vector<PostRecord>>();
}

std::size_t feature_index(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (kFeatureNames[i] == name) return i;
    throw Error(ErrorCode::InvalidArgument, "unknown feature '" + std::string(name) + "'");
}

double tweet_similarity(const std::vector<std::string>& texts) {
    if (texts.size() < 2) return 0.0;
    std::vector<std::map<std::string, double>> vecs;
    vecs.reserve(texts.size());
    for (const auto& t : texts) vecs.push_back(term_counts(t));
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        for (std::size_t k = i + 1; k < vecs.size(); ++k) {
            sum += cosine(vecs[i], vecs[k]);
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

double time_pattern_entropy(const std::vector<double>& intervals, int bins) {
    if (bins < 1) throw Error(ErrorCode::InvalidArgument, "bins must be positive");
    if (intervals.empty()) return 0.0;
    auto [lo_it, hi_it] = std::minmax_element(intervals.begin(), intervals.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi == lo) return 0.0;
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double x : intervals) {
        auto b = static_cast<std::size_t>((x - lo) / (hi - lo) * bins);
        ++counts[std::min(b, counts.size() - 1)];
    }
    double h = 0;
    for (auto c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(intervals.size());
        h -= p * std::log2(p);
    }
    return h;
}

double literal_time_pattern(const std::vector<double>& intervals) {
    std::map<double, std::size_t> counts;
    for (double x : intervals) ++counts[x];
    double s = 0;
    for (const auto& [v, c] : counts) {
        if (v <= 0) continue;
        s -= static_cast<double>(c) / static_cast<double>(intervals.size()) * std::log2(v);
    }
    return s;
}

std::set<std::string> corpus_sources(const std::vector<Timeline>& timelines) {
    std::set<std::string> out;
    for (const auto& t : timelines)
        for (const auto& p : t.posts)
            if (!p.source_label.empty()) out.insert(p.source_label);
    return out;
}

FeatureVector compute_features(const Timeline& timeline, const std::set<std::string>& corpus_sources,
                               const FeatureOptions& options) {
    const auto& a = timeline.account;
    const auto& posts = timeline.posts;
    if (posts.empty()) throw Error(ErrorCode::Domain, "empty timeline for account '" + a.author_id + "'");
    for (std::size_t i = 0; i < posts.size(); ++i) {
        if (posts[i].author_id != a.author_id)
            throw Error(ErrorCode::Domain, "post '" + posts[i].post_id + "' belongs to another author");
        if (i > 0 && posts[i].created_at < posts[i - 1].created_at)
            throw Error(ErrorCode::Domain, "timeline of '" + a.author_id + "' is not sorted by created_at");
    }

    FeatureVector f;
    f.author_id = a.author_id;
    auto set = [&](std::string_view name, double v) { f.values[feature_index(name)] = v; };

    // profile
    const double followers = static_cast<double>(a.followers_count);
    const double following = static_cast<double>(a.following_count);
    const double age = static_cast<double>(
        std::max<std::int64_t>(1, (a.snapshot_at.epoch_seconds() - a.created_at.epoch_seconds()) / 86400));
    set("nFoS", followers);
    set("nF", following);
    set("rFF", followers / (following == 0 ? 1.0 : following));
    set("nList", static_cast<double>(a.listed_count));
    set("lDesc", static_cast<double>(text::code_points(a.description)));
    set("proImage", a.has_profile_image ? 1.0 : 0.0);
    set("age", age);
    set("rListAge", static_cast<double>(a.listed_count) / age);
    set("Rep", safe_div(followers, followers + following));
    set("Pro", a.is_protected ? 1.0 : 0.0);
    set("Ver", a.verified ? 1.0 : 0.0);

    // content
    double n_tweet = 0, n_rt = 0;
    double len_sum = 0, word_sum = 0, digits = 0, mentions = 0, hashtags = 0, urls = 0, url_posts = 0;
    double likes = 0, quotes = 0, replies = 0, retweets = 0;
    std::set<std::string> unique_mentions, unique_texts, sources;
    std::vector<double> lengths;
    std::vector<Timestamp> t_tweets, t_retweets, t_posts;
    for (const auto& p : posts) {
        const bool rt = is_retweet(p);
        (rt ? n_rt : n_tweet) += 1;
        const double len = static_cast<double>(text::code_points(p.text));
        lengths.push_back(len);
        len_sum += len;
        word_sum += static_cast<double>(text::split_whitespace(p.text).size());
        hashtags += static_cast<double>(p.hashtags.size());
        urls += static_cast<double>(p.urls.size());
        if (!p.urls.empty()) url_posts += 1;
        likes += static_cast<double>(p.like_count);
        quotes += static_cast<double>(p.quote_count);
        replies += static_cast<double>(p.reply_count);
        retweets += static_cast<double>(p.retweet_count);
        unique_texts.insert(p.text);
        if (!p.source_label.empty()) sources.insert(p.source_label);
        if (!rt) {
            digits += static_cast<double>(std::count_if(p.text.begin(), p.text.end(), text::is_ascii_digit));
            mentions += static_cast<double>(p.mentions.size());
            unique_mentions.insert(p.mentions.begin(), p.mentions.end());
            t_tweets.push_back(p.created_at);
        } else {
            t_retweets.push_back(p.created_at);
        }
        t_posts.push_back(p.created_at);
    }
    const double n_posts = n_tweet + n_rt;
    const double mean_len = len_sum / n_posts;
    double ss = 0;
    for (double l : lengths) ss += (l - mean_len) * (l - mean_len);

    set("nTweet", n_tweet);
    set("nRT", n_rt);
    set("mean_len", mean_len);
    set("sd_len", std::sqrt(ss / n_posts));
    set("mean_url_posts", url_posts / n_posts);
    set("nWord", word_sum / n_posts);
    set("nDigitTweet", safe_div(digits, n_tweet));
    set("rMn", safe_div(mentions, n_tweet));
    set("rUMn", safe_div(static_cast<double>(unique_mentions.size()), n_tweet));
    set("rHashPost", hashtags / n_posts);
    set("rURLPost", urls / n_posts);
    set("rRTPost", n_rt / n_posts);
    set("rUPost", static_cast<double>(unique_texts.size()) / n_posts);
    set("mean_like", likes / n_posts);
    set("mean_quote", quotes / n_posts);
    set("mean_reply", replies / n_posts);
    set("mean_retweet", retweets / n_posts);
    set("nSoc", static_cast<double>(sources.size()));
    set("rSoc", safe_div(static_cast<double>(sources.size()), static_cast<double>(corpus_sources.size())));
    std::vector<std::string> recent;
    std::size_t from = posts.size() > options.similarity_window ? posts.size() - options.similarity_window : 0;
    for (std::size_t i = from; i < posts.size(); ++i) recent.push_back(posts[i].text);
    set("similarity", tweet_similarity(recent));

    // temporal
    set("nPostperDay", n_posts / age);
    const auto g_tweets = gaps_hours(t_tweets);
    const auto g_retweets = gaps_hours(t_retweets);
    const auto g_posts = gaps_hours(t_posts);
    const IntervalStats fam[3] = {stats_of(g_tweets), stats_of(g_retweets), stats_of(g_posts)};
    const char* suffix[3] = {"tweets", "retweets", "posts"};
    for (int i = 0; i < 3; ++i) {
        std::string s = suffix[i];
        set("max_time_" + s, fam[i].max);
        set("min_time_" + s, fam[i].min);
        set("mean_time_" + s, fam[i].mean);
        set("sd_time_" + s, fam[i].sd);
    }
    const auto& all = fam[2];
    set("IH", all.max / n_posts);
    set("timePattern", options.literal_time_pattern ? literal_time_pattern(g_posts)
                                                    : time_pattern_entropy(g_posts, options.entropy_bins));
    set("burstiness", all.sd + all.mean == 0 ? options.epsilon
                                             : (all.sd - all.mean) / (all.sd + all.mean) + options.epsilon);
    return f;
}

std::vector<FeatureVector> compute_batch(const std::vector<Timeline>& timelines,
                                         const std::set<std::string>& sources, const FeatureOptions& options,
                                         Exec exec) {
    std::vector<FeatureVector> out(timelines.size());
    for_each_index(exec, timelines.size(),
                   [&](std::size_t i) { out[i] = compute_features(timelines[i], sources, options); });
    return out;
}

std::vector<Timeline> load_timelines(const std::filesystem::path& path) {
    std::vector<Timeline> out;
    for_each_json(path, [&](std::size_t line, const Json& j) {
        try {
            out.push_back(j.get<Timeline>());
        } catch (const Error& e) {
            throw ParseError(line, j.dump().substr(0, 40), e.what());
        } catch (const Json::exception& e) {
            throw ParseError(line, j.dump().substr(0, 40), e.what());
        }
    });
    return out;
}

std::string to_csv(const std::vector<FeatureVector>& rows) {
    std::string out = "author_id";
    for (auto n : kFeatureNames) {
        out += ',';
        out += n;
    }
    out += '\n';
    for (const auto& r : rows) {
        out += r.author_id;
        for (double v : r.values) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<FeatureVector> parse_csv(std::string_view contents) {
    std::vector<FeatureVector> out;
    std::istringstream in{std::string(contents)};
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> column_of;  // csv column -> feature index
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (column_of.empty()) {
            if (cells.size() != kFeatureCount + 1 || cells[0] != "author_id")
                throw ParseError(line_no, line.substr(0, 40), "feature header must be author_id + 47 columns");
            for (std::size_t c = 1; c < cells.size(); ++c) {
                try {
                    column_of.push_back(feature_index(cells[c]));
                } catch (const Error&) {
                    throw ParseError(line_no, cells[c], "unknown feature column");
                }
            }
            continue;
        }
        if (cells.size() != kFeatureCount + 1) throw ParseError(line_no, line.substr(0, 40), "wrong column count");
        FeatureVector f;
        f.author_id = cells[0];
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v = 0;
            const auto& cell = cells[c];
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw ParseError(line_no, cell, "not a finite number");
            f.values[column_of[c - 1]] = v;
        }
        out.push_back(std::move(f));
    }
    if (column_of.empty()) throw Error(ErrorCode::Parse, "feature CSV has no header");
    return out;
}

std::vector<FeatureVector> read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

}  // namespace ctikit::features
