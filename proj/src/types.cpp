#include "ctikit/types.hpp"

#include <algorithm>

#include "ctikit/error.hpp"

namespace ctikit {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Usage: return "usage";
        case ErrorCode::Config: return "config";
        case ErrorCode::Io: return "io";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::Credential: return "credential";
        case ErrorCode::Network: return "network";
        case ErrorCode::Domain: return "domain";
    }
    return "unknown";
}

bool is_retweet(const PostRecord& post) {
    return post.is_retweet || std::string_view(post.text).starts_with("RT @");
}

std::optional<HashKind> hash_kind_for_length(std::size_t hex_length) {
    switch (hex_length) {
        case 32: return HashKind::Md5;
        case 40: return HashKind::Sha1;
        case 64: return HashKind::Sha256;
        case 96: return HashKind::Sha3_384;
        case 128: return HashKind::Sha512;
        default: return std::nullopt;
    }
}

std::string_view IocType::name() const {
    switch (kind_) {
        case Kind::Url: return "url";
        case Kind::Ip: return "ip";
        case Kind::Domain: return "domain";
        case Kind::Cve: return "cve";
        case Kind::Hash:
            switch (hash_) {
                case HashKind::Md5: return "md5";
                case HashKind::Sha1: return "sha1";
                case HashKind::Sha256: return "sha256";
                case HashKind::Sha3_384: return "sha3_384";
                case HashKind::Sha512: return "sha512";
            }
    }
    return "url";
}

std::optional<IocType> IocType::from_name(std::string_view name) {
    if (name == "url") return url();
    if (name == "ip") return ip();
    if (name == "domain") return domain();
    if (name == "cve") return cve();
    if (name == "md5") return hash(HashKind::Md5);
    if (name == "sha1") return hash(HashKind::Sha1);
    if (name == "sha256") return hash(HashKind::Sha256);
    if (name == "sha3_384") return hash(HashKind::Sha3_384);
    if (name == "sha512") return hash(HashKind::Sha512);
    return std::nullopt;
}

std::string_view family_label(IocType::Kind kind) {
    switch (kind) {
        case IocType::Kind::Url: return "URL";
        case IocType::Kind::Ip: return "IP";
        case IocType::Kind::Domain: return "Domain";
        case IocType::Kind::Hash: return "Hash";
        case IocType::Kind::Cve: return "CVE";
    }
    return "URL";
}

std::string_view short_name(ServiceId service) {
    switch (service) {
        case ServiceId::VirusTotal: return "vt";
        case ServiceId::AlienVault: return "otx";
        case ServiceId::UrlHaus: return "urlhaus";
        case ServiceId::MalwareBazaar: return "mb";
        case ServiceId::Misp: return "misp";
        case ServiceId::Nvd: return "nvd";
    }
    return "vt";
}

std::string_view display_name(ServiceId service) {
    switch (service) {
        case ServiceId::VirusTotal: return "VirusTotal";
        case ServiceId::AlienVault: return "AlienVault";
        case ServiceId::UrlHaus: return "URLhaus";
        case ServiceId::MalwareBazaar: return "MalwareBazaar";
        case ServiceId::Misp: return "MISP";
        case ServiceId::Nvd: return "NVD";
    }
    return "VirusTotal";
}

std::optional<ServiceId> service_from_name(std::string_view name) {
    for (ServiceId s : kAllServices)
        if (short_name(s) == name || display_name(s) == name) return s;
    return std::nullopt;
}

bool accepts(ServiceId service, IocType::Kind kind) {
    using K = IocType::Kind;
    switch (service) {
        case ServiceId::VirusTotal:
        case ServiceId::AlienVault:
        case ServiceId::UrlHaus: return kind != K::Cve;
        case ServiceId::MalwareBazaar: return kind == K::Hash;
        case ServiceId::Misp: return kind == K::Hash || kind == K::Cve;
        case ServiceId::Nvd: return kind == K::Cve;
    }
    return false;
}

bool is_database_service(ServiceId service) {
    return service != ServiceId::VirusTotal && service != ServiceId::AlienVault;
}

std::string_view to_string(VerdictStatus status) {
    switch (status) {
        case VerdictStatus::Malicious: return "malicious";
        case VerdictStatus::Clean: return "clean";
        case VerdictStatus::Found: return "found";
        case VerdictStatus::NotFound: return "not_found";
        case VerdictStatus::NotApplicable: return "not_applicable";
    }
    return "not_applicable";
}

std::optional<VerdictStatus> verdict_status_from_string(std::string_view s) {
    for (auto st : {VerdictStatus::Malicious, VerdictStatus::Clean, VerdictStatus::Found,
                    VerdictStatus::NotFound, VerdictStatus::NotApplicable})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

std::vector<std::string> canonical_set(std::vector<std::string> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

}  // namespace ctikit
