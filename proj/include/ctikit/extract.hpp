#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ctikit/parallel.hpp"
#include "ctikit/types.hpp"

namespace ctikit::extract {

/// Reverses common defanging: hxxp(s) -> http(s), "[.]" "(.)" "[dot]" -> ".",
/// "[:]" -> ":", "[at]" "[@]" -> "@", "[://]" -> "://". Case-insensitive.
/// Applied to a fixpoint, so refang(refang(s)) == refang(s).
std::string refang(std::string_view text);

/// Refanged text plus, for every output byte, the half-open source range it came from.
struct RefangedText {
    std::string text;
    std::vector<std::size_t> source_begin;
    std::vector<std::size_t> source_end;
};
RefangedText refang_mapped(std::string_view text);

/// Known final labels accepted for standalone domains.
class SuffixList {
public:
    /// The built-in list shipped in data/tlds_v1.txt.
    static const SuffixList& builtin();
    static SuffixList from_file(const std::filesystem::path& path);
    static SuffixList parse(std::string_view contents);

    bool contains(std::string_view final_label) const;
    void add(std::string suffix);
    std::size_t size() const { return suffixes_.size(); }

private:
    std::set<std::string, std::less<>> suffixes_;
};

/// Hosts whose URLs (and bare domains) never count as indicators.
class ExclusionList {
public:
    static ExclusionList defaults();
    static ExclusionList from_file(const std::filesystem::path& path);

    /// True when host equals an entry or ends with "." + entry.
    bool blocks(std::string_view host) const;
    const std::set<std::string>& entries() const { return entries_; }

private:
    std::set<std::string> entries_;
};

struct IocMatch {
    std::size_t begin = 0;  // span in the scanned (original) text
    std::size_t end = 0;
    std::string value;      // canonical form
    IocType type;
    bool defanged = false;
    std::string host;       // URL host, empty otherwise
};

/// Finds URL, IPv4, domain, hash, and CVE indicators. Matches never overlap and
/// come back in text order; a URL's host is not reported separately.
class IocScanner {
public:
    explicit IocScanner(const SuffixList& suffixes = SuffixList::builtin());

    std::vector<IocMatch> scan(std::string_view text) const;

private:
    const SuffixList* suffixes_;
};

/// Type of a canonical value, if the whole string is exactly one indicator.
std::optional<IocType> classify(std::string_view value,
                                const SuffixList& suffixes = SuffixList::builtin());

struct ExtractOptions {
    ExclusionList exclusions = ExclusionList::defaults();
    const SuffixList* suffixes = &SuffixList::builtin();
};

std::string tweet_url(const PostRecord& post);

/// Indicators in the post's refanged text plus its expanded URL entities.
std::vector<IocRecord> extract_iocs(const PostRecord& post, const ExtractOptions& options = {});

/// Per-post extraction over a batch, concatenated in input order.
std::vector<IocRecord> extract_batch(const std::vector<PostRecord>& posts,
                                     const ExtractOptions& options = {},
                                     Exec exec = Exec::Parallel);

/// Sorted by published_date; only the earliest record per (ioc_value, ioc_type).
std::vector<IocRecord> dedup_iocs(std::vector<IocRecord> records);

}  // namespace ctikit::extract
