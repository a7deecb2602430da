#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctikit/time.hpp"

namespace ctikit {

/// One social-media post as stored in an archive.
struct PostRecord {
    std::string post_id;
    std::string author_id;
    std::string text;
    Timestamp created_at;
    std::string lang;
    bool is_retweet = false;
    std::string source_label;
    std::vector<std::string> hashtags;
    std::vector<std::string> mentions;
    std::vector<std::string> urls;
    std::int64_t like_count = 0;
    std::int64_t quote_count = 0;
    std::int64_t reply_count = 0;
    std::int64_t retweet_count = 0;

    bool operator==(const PostRecord&) const = default;
};

/// Archive retweet flag, or the conventional "RT @" text prefix.
bool is_retweet(const PostRecord& post);

struct AccountProfile {
    std::string author_id;
    std::int64_t followers_count = 0;
    std::int64_t following_count = 0;
    std::int64_t listed_count = 0;
    std::string description;
    bool has_profile_image = false;
    bool is_protected = false;
    bool verified = false;
    Timestamp created_at;
    Timestamp snapshot_at;

    bool operator==(const AccountProfile&) const = default;
};

enum class HashKind : std::uint8_t { Md5, Sha1, Sha256, Sha3_384, Sha512 };

/// Hash subtype by hex length (32/40/64/96/128); nullopt for any other length.
std::optional<HashKind> hash_kind_for_length(std::size_t hex_length);

class IocType {
public:
    enum class Kind : std::uint8_t { Url, Ip, Domain, Hash, Cve };

    constexpr IocType() = default;
    static constexpr IocType url() { return IocType(Kind::Url); }
    static constexpr IocType ip() { return IocType(Kind::Ip); }
    static constexpr IocType domain() { return IocType(Kind::Domain); }
    static constexpr IocType cve() { return IocType(Kind::Cve); }
    static constexpr IocType hash(HashKind h) { return IocType(Kind::Hash, h); }

    constexpr Kind kind() const { return kind_; }
    constexpr std::optional<HashKind> hash_kind() const {
        return kind_ == Kind::Hash ? std::optional<HashKind>(hash_) : std::nullopt;
    }

    /// "url", "ip", "domain", "cve", "md5", "sha1", "sha256", "sha3_384", "sha512"
    std::string_view name() const;
    static std::optional<IocType> from_name(std::string_view name);

    auto operator<=>(const IocType&) const = default;

private:
    constexpr explicit IocType(Kind k, HashKind h = HashKind::Md5) : kind_(k), hash_(h) {}

    Kind kind_ = Kind::Url;
    HashKind hash_ = HashKind::Md5;  // meaningful only when kind_ == Hash
};

/// Family label used for tallies ("URL", "IP", "Domain", "Hash", "CVE").
std::string_view family_label(IocType::Kind kind);
inline constexpr IocType::Kind kAllKinds[] = {IocType::Kind::Url, IocType::Kind::Ip,
                                              IocType::Kind::Domain, IocType::Kind::Hash,
                                              IocType::Kind::Cve};

struct IocRecord {
    std::string user_name;
    Timestamp published_date;
    std::string ioc_value;
    IocType ioc_type;
    std::vector<std::string> hashtags;  // sorted, unique
    std::string tweet_url;
    bool was_defanged = false;

    bool operator==(const IocRecord&) const = default;
};

enum class ServiceId : std::uint8_t { VirusTotal, AlienVault, UrlHaus, MalwareBazaar, Misp, Nvd };

inline constexpr ServiceId kAllServices[] = {ServiceId::VirusTotal,    ServiceId::AlienVault,
                                             ServiceId::UrlHaus,       ServiceId::MalwareBazaar,
                                             ServiceId::Misp,          ServiceId::Nvd};

/// Short CLI names: vt, otx, urlhaus, mb, misp, nvd.
std::string_view short_name(ServiceId service);
std::string_view display_name(ServiceId service);
std::optional<ServiceId> service_from_name(std::string_view name);

/// Whether the service accepts indicators of this kind (IoC/service acceptance matrix).
bool accepts(ServiceId service, IocType::Kind kind);

/// Database-style services answer Found/NotFound; scanners answer Malicious/Clean.
bool is_database_service(ServiceId service);

enum class VerdictStatus : std::uint8_t { Malicious, Clean, Found, NotFound, NotApplicable };

std::string_view to_string(VerdictStatus status);
std::optional<VerdictStatus> verdict_status_from_string(std::string_view s);

/// Found counts as malicious for every metric.
constexpr bool is_malicious(VerdictStatus s) {
    return s == VerdictStatus::Malicious || s == VerdictStatus::Found;
}

struct Verdict {
    std::string ioc_value;
    IocType ioc_type;
    ServiceId service = ServiceId::VirusTotal;
    VerdictStatus status = VerdictStatus::NotApplicable;
    std::optional<Timestamp> first_seen;
    std::string detail;

    bool operator==(const Verdict&) const = default;
};

/// Sorted-unique copy; used wherever a list is semantically a set.
std::vector<std::string> canonical_set(std::vector<std::string> values);

}  // namespace ctikit
