#pragma once

// Straight-line reference computations, written from the metric definitions and
// kept deliberately naive. Tests compare library output against these.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctikit/features.hpp"

namespace ctikit::testing::oracle {

/// Spreadsheet-style F1: 2*TP / (2*TP + FP + FN). Returns -1 when undefined.
inline double f1(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    std::int64_t den = 2 * tp + fp + fn;
    if (den == 0) return -1;
    return static_cast<double>(2 * tp) / static_cast<double>(den);
}

/// Harmonic mean of precision and recall; equal to f1() up to rounding.
inline double f1_from_precision_recall(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    if (tp == 0) return 0.0;
    double precision = double(tp) / double(tp + fp);
    double recall = double(tp) / double(tp + fn);
    return 2 * precision * recall / (precision + recall);
}

inline double detection_rate(std::int64_t tp, std::int64_t fn) {
    if (tp + fn == 0) return -1;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

/// Long-division rendering of 100*num/den with round-half-even at the last place.
inline std::string percent(std::int64_t num, std::int64_t den, int decimals) {
    std::int64_t scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    std::int64_t scaled_num = num * 100 * scale;
    std::int64_t q = scaled_num / den;
    std::int64_t r = scaled_num % den;
    if (2 * r > den || (2 * r == den && q % 2 == 1)) ++q;
    std::string digits = std::to_string(q);
    if (decimals == 0) return digits;
    while (static_cast<int>(digits.size()) <= decimals) digits = "0" + digits;
    return digits.substr(0, digits.size() - decimals) + "." + digits.substr(digits.size() - decimals);
}

inline std::size_t utf8_length(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

inline bool starts_rt(const PostRecord& p) { return p.is_retweet || p.text.rfind("RT @", 0) == 0; }

inline double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0;
    double s = 0;
    for (double x : xs) s += x;
    return s / xs.size();
}

inline double population_sd(const std::vector<double>& xs) {
    if (xs.empty()) return 0;
    double m = mean_of(xs);
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / xs.size());
}

inline std::unordered_map<std::string, int> bag_of_words(const std::string& text) {
    std::unordered_map<std::string, int> bag;
    std::string word;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        char c = i < text.size() ? text[i] : ' ';
        bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
        if (alnum) {
            word += (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c;
        } else if (!word.empty()) {
            bag[word]++;
            word.clear();
        }
    }
    return bag;
}

inline double cosine_similarity(const std::string& a, const std::string& b) {
    auto x = bag_of_words(a);
    auto y = bag_of_words(b);
    if (x.empty() || y.empty()) return 0;
    double dot = 0, nx = 0, ny = 0;
    for (auto& [w, c] : x) {
        nx += double(c) * c;
        auto it = y.find(w);
        if (it != y.end()) dot += double(c) * it->second;
    }
    for (auto& [w, c] : y) ny += double(c) * c;
    return dot / std::sqrt(nx * ny);
}

/// Interval summary in hours between consecutive timestamps.
struct Gaps {
    double max = 0, min = 0, mean = 0, sd = 0;
    std::vector<double> hours;
};

inline Gaps gaps(const std::vector<std::int64_t>& seconds) {
    Gaps g;
    for (std::size_t i = 1; i < seconds.size(); ++i) g.hours.push_back((seconds[i] - seconds[i - 1]) / 3600.0);
    if (g.hours.empty()) return g;
    g.max = *std::max_element(g.hours.begin(), g.hours.end());
    g.min = *std::min_element(g.hours.begin(), g.hours.end());
    g.mean = mean_of(g.hours);
    g.sd = population_sd(g.hours);
    return g;
}

inline double histogram_entropy(const std::vector<double>& xs, int bins) {
    if (xs.empty()) return 0;
    double lo = xs[0], hi = xs[0];
    for (double x : xs) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (lo == hi) return 0;
    std::vector<int> count(bins, 0);
    double width = (hi - lo) / bins;
    for (double x : xs) {
        int b = int((x - lo) / width);
        if (b >= bins) b = bins - 1;
        count[b]++;
    }
    double h = 0;
    for (int c : count)
        if (c > 0) h += -(double(c) / xs.size()) * std::log2(double(c) / xs.size());
    return h;
}

/// All 47 account features by name.
inline std::map<std::string, double> features(const features::Timeline& t, std::size_t n_corpus_sources) {
    std::map<std::string, double> f;
    const auto& a = t.account;
    const auto& posts = t.posts;
    double fol = double(a.followers_count), fing = double(a.following_count);

    f["nFoS"] = fol;
    f["nF"] = fing;
    f["rFF"] = fing > 0 ? fol / fing : fol;
    f["nList"] = double(a.listed_count);
    f["lDesc"] = double(utf8_length(a.description));
    f["proImage"] = a.has_profile_image;
    std::int64_t days = (a.snapshot_at.epoch_seconds() - a.created_at.epoch_seconds()) / 86400;
    double age = days < 1 ? 1.0 : double(days);
    f["age"] = age;
    f["rListAge"] = a.listed_count / age;
    f["Rep"] = (fol + fing) > 0 ? fol / (fol + fing) : 0.0;
    f["Pro"] = a.is_protected;
    f["Ver"] = a.verified;

    double n = double(posts.size());
    double n_tweet = 0, n_rt = 0;
    for (const auto& p : posts) (starts_rt(p) ? n_rt : n_tweet) += 1;
    f["nTweet"] = n_tweet;
    f["nRT"] = n_rt;

    std::vector<double> lengths;
    for (const auto& p : posts) lengths.push_back(double(utf8_length(p.text)));
    f["mean_len"] = mean_of(lengths);
    f["sd_len"] = population_sd(lengths);

    double with_url = 0, words = 0, hashtags = 0, urls = 0;
    for (const auto& p : posts) {
        if (!p.urls.empty()) with_url += 1;
        std::size_t w = 0;
        bool in_word = false;
        for (char c : p.text) {
            bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
            if (!space && !in_word) ++w;
            in_word = !space;
        }
        words += double(w);
        hashtags += double(p.hashtags.size());
        urls += double(p.urls.size());
    }
    f["mean_url_posts"] = with_url / n;
    f["nWord"] = words / n;

    double digits = 0, mentions = 0;
    std::set<std::string> distinct_mentions;
    for (const auto& p : posts) {
        if (starts_rt(p)) continue;
        for (char c : p.text)
            if (c >= '0' && c <= '9') digits += 1;
        mentions += double(p.mentions.size());
        for (const auto& m : p.mentions) distinct_mentions.insert(m);
    }
    f["nDigitTweet"] = n_tweet > 0 ? digits / n_tweet : 0.0;
    f["rMn"] = n_tweet > 0 ? mentions / n_tweet : 0.0;
    f["rUMn"] = n_tweet > 0 ? double(distinct_mentions.size()) / n_tweet : 0.0;
    f["rHashPost"] = hashtags / n;
    f["rURLPost"] = urls / n;
    f["rRTPost"] = n_rt / n;
    std::set<std::string> texts;
    for (const auto& p : posts) texts.insert(p.text);
    f["rUPost"] = double(texts.size()) / n;

    double likes = 0, quotes = 0, replies = 0, rts = 0;
    for (const auto& p : posts) {
        likes += double(p.like_count);
        quotes += double(p.quote_count);
        replies += double(p.reply_count);
        rts += double(p.retweet_count);
    }
    f["mean_like"] = likes / n;
    f["mean_quote"] = quotes / n;
    f["mean_reply"] = replies / n;
    f["mean_retweet"] = rts / n;

    std::set<std::string> sources;
    for (const auto& p : posts)
        if (!p.source_label.empty()) sources.insert(p.source_label);
    f["nSoc"] = double(sources.size());
    f["rSoc"] = n_corpus_sources > 0 ? double(sources.size()) / double(n_corpus_sources) : 0.0;

    std::size_t first = posts.size() > 200 ? posts.size() - 200 : 0;
    double sim = 0;
    std::size_t pairs = 0;
    for (std::size_t i = first; i < posts.size(); ++i)
        for (std::size_t j = i + 1; j < posts.size(); ++j) {
            sim += cosine_similarity(posts[i].text, posts[j].text);
            ++pairs;
        }
    f["similarity"] = pairs ? sim / double(pairs) : 0.0;

    f["nPostperDay"] = n / age;
    std::vector<std::int64_t> ts_tweets, ts_rts, ts_all;
    for (const auto& p : posts) {
        (starts_rt(p) ? ts_rts : ts_tweets).push_back(p.created_at.epoch_seconds());
        ts_all.push_back(p.created_at.epoch_seconds());
    }
    Gaps gt = gaps(ts_tweets), gr = gaps(ts_rts), ga = gaps(ts_all);
    f["max_time_tweets"] = gt.max;
    f["max_time_retweets"] = gr.max;
    f["max_time_posts"] = ga.max;
    f["min_time_tweets"] = gt.min;
    f["min_time_retweets"] = gr.min;
    f["min_time_posts"] = ga.min;
    f["mean_time_tweets"] = gt.mean;
    f["mean_time_retweets"] = gr.mean;
    f["mean_time_posts"] = ga.mean;
    f["sd_time_tweets"] = gt.sd;
    f["sd_time_retweets"] = gr.sd;
    f["sd_time_posts"] = ga.sd;
    f["IH"] = ga.max / n;
    f["timePattern"] = histogram_entropy(ga.hours, 10);
    f["burstiness"] = (ga.sd + ga.mean) > 0 ? (ga.sd - ga.mean) / (ga.sd + ga.mean) + 1.0 : 1.0;
    return f;
}

/// Relative agreement |a - b| <= tol * max(1, |b|).
inline bool close(double a, double b, double tol = 1e-9) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b));
}

}  // namespace ctikit::testing::oracle
