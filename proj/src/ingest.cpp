#include "ctikit/ingest.hpp"

#include <algorithm>
#include <optional>
#include <unordered_set>

#include "ctikit/error.hpp"
#include "ctikit/serialize.hpp"

namespace ctikit::ingest {

namespace {

struct RawLine {
    std::size_t line_no;
    std::string text;
};

std::string fragment_of(std::string_view line) {
    constexpr std::size_t kMax = 60;
    return std::string(line.substr(0, kMax));
}

}  // namespace

LoadedArchive load_archive(const std::filesystem::path& path, Strictness strictness, Exec exec) {
    std::vector<RawLine> lines;
    for_each_line(path, [&](std::size_t line_no, std::string_view line) {
        lines.push_back({line_no, std::string(line)});
    });

    std::vector<std::optional<PostRecord>> parsed(lines.size());
    std::vector<std::optional<LineIssue>> issues(lines.size());
    for_each_index(exec, lines.size(), [&](std::size_t i) {
        const auto& raw = lines[i];
        Json j = Json::parse(raw.text, nullptr, false);
        if (j.is_discarded()) {
            issues[i] = LineIssue{raw.line_no, fragment_of(raw.text), "malformed JSON"};
            return;
        }
        if (i == 0 && is_schema_header(j)) return;
        try {
            parsed[i] = j.get<PostRecord>();
        } catch (const Error& e) {
            issues[i] = LineIssue{raw.line_no, fragment_of(raw.text), e.what()};
        }
    });

    LoadedArchive out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (issues[i]) {
            if (strictness == Strictness::Strict)
                throw ParseError(issues[i]->line, issues[i]->fragment, issues[i]->reason);
            out.rejected.push_back(std::move(*issues[i]));
        } else if (parsed[i]) {
            out.posts.push_back(std::move(*parsed[i]));
        }
    }
    return out;
}

FilteredCorpus filter_corpus(std::vector<PostRecord> posts, std::string_view lang) {
    FilteredCorpus out;
    out.stats.total_read = posts.size();

    std::vector<PostRecord> kept;
    kept.reserve(posts.size());
    for (auto& p : posts) {
        if (p.lang != lang) {
            ++out.stats.non_english_dropped;
        } else if (is_retweet(p)) {
            ++out.stats.retweets_dropped;
        } else {
            kept.push_back(std::move(p));
        }
    }

    std::sort(kept.begin(), kept.end(), [](const PostRecord& a, const PostRecord& b) {
        if (a.created_at != b.created_at) return a.created_at < b.created_at;
        return a.post_id < b.post_id;
    });

    std::unordered_set<std::string_view> seen;
    out.posts.reserve(kept.size());
    for (auto& p : kept) {
        if (seen.contains(p.text)) {
            ++out.stats.duplicates_dropped;
            continue;
        }
        out.posts.push_back(std::move(p));
        seen.insert(out.posts.back().text);
    }
    out.stats.retained = out.posts.size();
    return out;
}

}  // namespace ctikit::ingest
