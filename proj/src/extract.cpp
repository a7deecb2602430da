#include "ctikit/extract.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <tuple>

#include "ctikit/error.hpp"
#include "ctikit/serialize.hpp"
#include "ctikit/text.hpp"
#include "embedded_data.hpp"

namespace ctikit::extract {

using text::is_ascii_alnum;
using text::is_ascii_alpha;
using text::is_ascii_digit;
using text::is_hex;

namespace {

struct RefangRule {
    std::string_view from;
    std::string_view to;
    bool char_aligned;  // from/to have equal length and map position by position
};

// Longer patterns first so "[://]" wins over "[:]".
constexpr std::array<RefangRule, 9> kRules = {{
    {"[://]", "://", false},
    {"[dot]", ".", false},
    {"hxxps", "https", true},
    {"hxxp", "http", true},
    {"[.]", ".", false},
    {"(.)", ".", false},
    {"[:]", ":", false},
    {"[at]", "@", false},
    {"[@]", "@", false},
}};

RefangedText refang_pass(std::string_view s) {
    RefangedText out;
    out.text.reserve(s.size());
    out.source_begin.reserve(s.size());
    out.source_end.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        bool replaced = false;
        for (const auto& rule : kRules) {
            if (!text::istarts_with(s.substr(i), rule.from)) continue;
            for (std::size_t k = 0; k < rule.to.size(); ++k) {
                out.text.push_back(rule.to[k]);
                if (rule.char_aligned) {
                    out.source_begin.push_back(i + k);
                    out.source_end.push_back(i + k + 1);
                } else {
                    out.source_begin.push_back(i);
                    out.source_end.push_back(i + rule.from.size());
                }
            }
            i += rule.from.size();
            replaced = true;
            break;
        }
        if (!replaced) {
            out.text.push_back(s[i]);
            out.source_begin.push_back(i);
            out.source_end.push_back(i + 1);
            ++i;
        }
    }
    return out;
}

bool in_set(char c, std::string_view set) { return set.find(c) != std::string_view::npos; }

bool word_boundary_before(std::string_view s, std::size_t i) {
    if (i == 0) return true;
    char p = s[i - 1];
    return !(is_ascii_alnum(p) || in_set(p, "._-@/\\"));
}

bool ident_char(char c) { return is_ascii_alnum(c) || c == '_'; }

struct Found {
    std::size_t end;
    std::string value;
    IocType type;
    std::string host;
};

std::optional<std::size_t> parse_ipv4_at(std::string_view s, std::size_t i) {
    std::size_t j = i;
    for (int octet = 0; octet < 4; ++octet) {
        if (octet > 0) {
            if (j >= s.size() || s[j] != '.') return std::nullopt;
            ++j;
        }
        std::size_t start = j;
        int value = 0;
        while (j < s.size() && is_ascii_digit(s[j]) && j - start < 3) {
            value = value * 10 + (s[j] - '0');
            ++j;
        }
        std::size_t len = j - start;
        if (len == 0 || value > 255) return std::nullopt;
        if (len > 1 && s[start] == '0') return std::nullopt;
        if (j < s.size() && is_ascii_digit(s[j])) return std::nullopt;
    }
    return j;
}

bool valid_ipv4(std::string_view s) {
    auto end = parse_ipv4_at(s, 0);
    return end && *end == s.size();
}

bool valid_label(std::string_view label) {
    if (label.empty() || label.size() > 63) return false;
    if (label.front() == '-' || label.back() == '-') return false;
    return std::all_of(label.begin(), label.end(),
                       [](char c) { return is_ascii_alnum(c) || c == '-'; });
}

std::vector<std::string_view> split_labels(std::string_view host) {
    std::vector<std::string_view> labels;
    std::size_t start = 0;
    while (true) {
        auto dot = host.find('.', start);
        labels.push_back(host.substr(start, dot == std::string_view::npos ? host.npos : dot - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return labels;
}

// Host inside a URL: IPv4 or a dotted name whose final label is alphabetic.
bool valid_url_host(std::string_view host) {
    if (host.empty() || host.size() > 253) return false;
    if (valid_ipv4(host)) return true;
    auto labels = split_labels(host);
    if (labels.size() < 2) return false;
    for (auto l : labels)
        if (!valid_label(l)) return false;
    auto last = labels.back();
    if (last.starts_with("xn--")) return true;
    return last.size() >= 2 && std::all_of(last.begin(), last.end(), is_ascii_alpha);
}

std::optional<Found> match_url(std::string_view s, std::size_t i) {
    std::size_t scheme_len = 0;
    for (std::string_view scheme : {"https://", "http://", "ftp://"}) {
        if (text::istarts_with(s.substr(i), scheme)) {
            scheme_len = scheme.size();
            break;
        }
    }
    if (scheme_len == 0) return std::nullopt;

    std::size_t end = i + scheme_len;
    while (end < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[end]);
        if (c >= 0x80 || text::is_space(s[end]) || in_set(s[end], "<>\"'`{}|\\^[]")) break;
        ++end;
    }
    // Trailing punctuation belongs to the sentence, not the URL.
    while (end > i + scheme_len) {
        char last = s[end - 1];
        if (last == ')') {
            auto body = s.substr(i, end - i);
            if (std::count(body.begin(), body.end(), '(') >= std::count(body.begin(), body.end(), ')'))
                break;
        } else if (!in_set(last, ".,;:!?'\"*")) {
            break;
        }
        --end;
    }

    std::string_view rest = s.substr(i + scheme_len, end - i - scheme_len);
    std::size_t authority_len = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, authority_len);
    std::string_view tail = authority_len == std::string_view::npos ? std::string_view{}
                                                                    : rest.substr(authority_len);
    std::string_view userinfo;
    if (auto at = authority.rfind('@'); at != std::string_view::npos) {
        userinfo = authority.substr(0, at + 1);
        authority = authority.substr(at + 1);
    }
    std::string_view host = authority;
    std::string_view port;
    if (auto colon = authority.find(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        port = authority.substr(colon);
        if (port.size() < 2 || !std::all_of(port.begin() + 1, port.end(), is_ascii_digit))
            return std::nullopt;
    }
    if (!valid_url_host(host)) return std::nullopt;

    std::string lowered_host = text::ascii_lower(host);
    std::string value = text::ascii_lower(s.substr(i, scheme_len));
    value += userinfo;
    value += lowered_host;
    value += port;
    value += tail;
    return Found{end, std::move(value), IocType::url(), std::move(lowered_host)};
}

std::optional<Found> match_cve(std::string_view s, std::size_t i) {
    if (!text::istarts_with(s.substr(i), "cve-")) return std::nullopt;
    std::size_t j = i + 4;
    for (int k = 0; k < 4; ++k, ++j)
        if (j >= s.size() || !is_ascii_digit(s[j])) return std::nullopt;
    if (j >= s.size() || s[j] != '-') return std::nullopt;
    ++j;
    std::size_t start = j;
    while (j < s.size() && is_ascii_digit(s[j])) ++j;
    if (j - start < 4) return std::nullopt;
    if (j < s.size() && ident_char(s[j])) return std::nullopt;
    std::string value = "CVE-" + std::string(s.substr(i + 4, j - i - 4));
    return Found{j, std::move(value), IocType::cve(), {}};
}

std::optional<Found> match_hash(std::string_view s, std::size_t i) {
    std::size_t j = i;
    while (j < s.size() && is_hex(s[j])) ++j;
    if (j < s.size() && ident_char(s[j])) return std::nullopt;
    auto kind = hash_kind_for_length(j - i);
    if (!kind) return std::nullopt;
    return Found{j, text::ascii_lower(s.substr(i, j - i)), IocType::hash(*kind), {}};
}

std::optional<Found> match_ipv4(std::string_view s, std::size_t i) {
    auto end = parse_ipv4_at(s, i);
    if (!end) return std::nullopt;
    std::size_t j = *end;
    if (j < s.size()) {
        if (ident_char(s[j])) return std::nullopt;
        if (s[j] == '.' && j + 1 < s.size() && is_ascii_digit(s[j + 1])) return std::nullopt;
    }
    return Found{j, std::string(s.substr(i, j - i)), IocType::ip(), {}};
}

std::optional<Found> match_domain(std::string_view s, std::size_t i, const SuffixList& suffixes) {
    std::size_t run_end = i;
    while (run_end < s.size() && (ident_char(s[run_end]) || s[run_end] == '.' || s[run_end] == '-'))
        ++run_end;
    if (run_end < s.size() && s[run_end] == '@') return std::nullopt;
    std::size_t end = run_end;
    while (end > i && (s[end - 1] == '.' || s[end - 1] == '-')) --end;
    std::string_view candidate = s.substr(i, end - i);
    if (candidate.find('_') != std::string_view::npos || candidate.size() > 253) return std::nullopt;
    auto labels = split_labels(candidate);
    if (labels.size() < 2) return std::nullopt;
    for (auto l : labels)
        if (!valid_label(l)) return std::nullopt;
    std::string last = text::ascii_lower(labels.back());
    if (!std::all_of(last.begin(), last.end(), is_ascii_alpha) || !suffixes.contains(last))
        return std::nullopt;
    return Found{end, text::ascii_lower(candidate), IocType::domain(), {}};
}

std::size_t skip_word(std::string_view s, std::size_t i) {
    while (i < s.size() && (ident_char(s[i]) || s[i] == '.' || s[i] == '-')) ++i;
    return i;
}

std::vector<IocMatch> scan_refanged(std::string_view s, const SuffixList& suffixes) {
    std::vector<IocMatch> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_ascii_alnum(s[i]) || !word_boundary_before(s, i)) {
            ++i;
            continue;
        }
        std::optional<Found> f = match_url(s, i);
        if (!f) f = match_cve(s, i);
        if (!f) f = match_hash(s, i);
        if (!f) f = match_ipv4(s, i);
        if (!f) f = match_domain(s, i, suffixes);
        if (f) {
            out.push_back(IocMatch{i, f->end, std::move(f->value), f->type, false, std::move(f->host)});
            i = f->end;
        } else {
            i = skip_word(s, i);
        }
    }
    return out;
}

// One entry per line; '#' starts a comment; a leading '.' is ignored.
std::vector<std::string> word_list(std::string_view contents) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= contents.size()) {
        auto nl = contents.find('\n', pos);
        auto line = contents.substr(pos, nl == std::string_view::npos ? contents.npos : nl - pos);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto words = text::split_whitespace(line);
        if (!words.empty()) {
            std::string_view w = words.front();
            if (w.starts_with('.')) w.remove_prefix(1);
            out.emplace_back(w);
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

}  // namespace

RefangedText refang_mapped(std::string_view input) {
    RefangedText current = refang_pass(input);
    for (int round = 0; round < 32; ++round) {
        RefangedText next = refang_pass(current.text);
        if (next.text == current.text) break;
        for (std::size_t k = 0; k < next.text.size(); ++k) {
            std::size_t b = next.source_begin[k];
            std::size_t e = next.source_end[k];
            next.source_begin[k] = current.source_begin[b];
            next.source_end[k] = current.source_end[e - 1];
        }
        current = std::move(next);
    }
    return current;
}

std::string refang(std::string_view text) { return refang_mapped(text).text; }

const SuffixList& SuffixList::builtin() {
    static const SuffixList list = parse(data::kTldsV1);
    return list;
}

SuffixList SuffixList::parse(std::string_view contents) {
    SuffixList list;
    for (auto& word : word_list(contents)) list.add(std::move(word));
    return list;
}

SuffixList SuffixList::from_file(const std::filesystem::path& path) {
    return parse(read_file(path));
}

bool SuffixList::contains(std::string_view final_label) const {
    return suffixes_.find(text::ascii_lower(final_label)) != suffixes_.end();
}

void SuffixList::add(std::string suffix) { suffixes_.insert(text::ascii_lower(suffix)); }

ExclusionList ExclusionList::defaults() {
    ExclusionList list;
    list.entries_ = {"twitter.com", "facebook.com",  "fb.me",     "m.facebook.com",
                     "mbasic.facebook.com", "youtube.com", "youtu.be", "reddit.com"};
    return list;
}

ExclusionList ExclusionList::from_file(const std::filesystem::path& path) {
    ExclusionList list;
    for (auto& word : word_list(read_file(path))) list.entries_.insert(text::ascii_lower(word));
    return list;
}

bool ExclusionList::blocks(std::string_view host) const {
    std::string h = text::ascii_lower(host);
    for (const auto& entry : entries_) {
        if (h == entry) return true;
        if (h.size() > entry.size() && h.ends_with(entry) && h[h.size() - entry.size() - 1] == '.')
            return true;
    }
    return false;
}

IocScanner::IocScanner(const SuffixList& suffixes) : suffixes_(&suffixes) {}

std::vector<IocMatch> IocScanner::scan(std::string_view original) const {
    RefangedText refanged = refang_mapped(original);
    std::vector<IocMatch> matches = scan_refanged(refanged.text, *suffixes_);
    for (auto& m : matches) {
        std::size_t b = refanged.source_begin[m.begin];
        std::size_t e = refanged.source_end[m.end - 1];
        m.defanged = original.substr(b, e - b) != std::string_view(refanged.text).substr(m.begin, m.end - m.begin);
        m.begin = b;
        m.end = e;
    }
    return matches;
}

std::optional<IocType> classify(std::string_view value, const SuffixList& suffixes) {
    auto matches = scan_refanged(value, suffixes);
    if (matches.size() != 1) return std::nullopt;
    const auto& m = matches.front();
    if (m.begin != 0 || m.end != value.size() || m.value != value) return std::nullopt;
    return m.type;
}

std::string tweet_url(const PostRecord& post) {
    return "https://twitter.com/" + post.author_id + "/status/" + post.post_id;
}

std::vector<IocRecord> extract_iocs(const PostRecord& post, const ExtractOptions& options) {
    IocScanner scanner(*options.suffixes);
    std::vector<IocMatch> found = scanner.scan(post.text);
    for (const auto& entity : post.urls) {
        for (auto& m : scanner.scan(entity)) {
            if (m.type.kind() == IocType::Kind::Url && m.begin == 0) {
                m.defanged = false;
                found.push_back(std::move(m));
            }
            break;
        }
    }

    std::vector<IocRecord> out;
    std::map<std::pair<IocType, std::string>, std::size_t> index;
    const std::string url = tweet_url(post);
    const auto hashtags = canonical_set(post.hashtags);
    for (auto& m : found) {
        if (m.type.kind() == IocType::Kind::Url && options.exclusions.blocks(m.host)) continue;
        if (m.type.kind() == IocType::Kind::Domain && options.exclusions.blocks(m.value)) continue;
        auto key = std::make_pair(m.type, m.value);
        if (auto it = index.find(key); it != index.end()) {
            out[it->second].was_defanged = out[it->second].was_defanged || m.defanged;
            continue;
        }
        index.emplace(key, out.size());
        out.push_back(IocRecord{post.author_id, post.created_at, std::move(m.value), m.type, hashtags,
                                url, m.defanged});
    }
    return out;
}

std::vector<IocRecord> extract_batch(const std::vector<PostRecord>& posts,
                                     const ExtractOptions& options, Exec exec) {
    std::vector<std::vector<IocRecord>> per_post(posts.size());
    for_each_index(exec, posts.size(),
                   [&](std::size_t i) { per_post[i] = extract_iocs(posts[i], options); });
    std::vector<IocRecord> out;
    for (auto& batch : per_post)
        for (auto& r : batch) out.push_back(std::move(r));
    return out;
}

std::vector<IocRecord> dedup_iocs(std::vector<IocRecord> records) {
    auto order = [](const IocRecord& r) {
        return std::tie(r.published_date, r.ioc_type, r.ioc_value, r.tweet_url, r.user_name);
    };
    std::sort(records.begin(), records.end(),
              [&](const IocRecord& a, const IocRecord& b) { return order(a) < order(b); });
    std::vector<IocRecord> out;
    std::map<std::pair<IocType, std::string>, bool> seen;
    for (auto& r : records) {
        if (!seen.emplace(std::make_pair(r.ioc_type, r.ioc_value), true).second) continue;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace ctikit::extract
