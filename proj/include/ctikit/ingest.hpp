#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ctikit/parallel.hpp"
#include "ctikit/types.hpp"

namespace ctikit::ingest {

struct ArchiveStats {
    std::size_t total_read = 0;
    std::size_t non_english_dropped = 0;  // any language other than the requested one
    std::size_t retweets_dropped = 0;
    std::size_t duplicates_dropped = 0;
    std::size_t retained = 0;

    bool balanced() const {
        return retained + non_english_dropped + retweets_dropped + duplicates_dropped == total_read;
    }
    bool operator==(const ArchiveStats&) const = default;
};

struct LineIssue {
    std::size_t line = 0;
    std::string fragment;
    std::string reason;
};

struct LoadedArchive {
    std::vector<PostRecord> posts;     // file order
    std::vector<LineIssue> rejected;   // only populated in lenient mode
};

enum class Strictness { Strict, Lenient };

/// Reads a .jsonl or .jsonl.gz archive of PostRecord lines. Strict mode throws
/// ParseError on the first malformed line; lenient mode skips and reports it.
/// Lines are parsed in parallel under Exec::Parallel; output order is file order.
LoadedArchive load_archive(const std::filesystem::path& path,
                           Strictness strictness = Strictness::Strict,
                           Exec exec = Exec::Parallel);

struct FilteredCorpus {
    std::vector<PostRecord> posts;
    ArchiveStats stats;
};

/// Language filter, retweet removal, then chronological exact-text dedup keeping
/// the earliest post. Output sorted by (created_at, post_id).
FilteredCorpus filter_corpus(std::vector<PostRecord> posts, std::string_view lang);

}  // namespace ctikit::ingest
