#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctikit/parallel.hpp"
#include "ctikit/serialize.hpp"
#include "ctikit/types.hpp"

namespace ctikit::enrich {

struct IocKey {
    std::string value;
    IocType type;

    auto operator<=>(const IocKey&) const = default;
};

/// Normalizes one service response. Throws Error(Parse) naming the service when
/// the payload lacks the fields that service always returns.
Verdict judge(ServiceId service, const IocKey& ioc, const Json& payload);

/// Verdict for a service that does not take this indicator type.
Verdict not_applicable(ServiceId service, const IocKey& ioc);

/// File name shared by the cache and fixture directories: <dir>/<service>/<key>.json.
std::string cache_key(ServiceId service, std::string_view ioc_value);

class VerdictCache {
public:
    explicit VerdictCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::optional<Verdict> get(ServiceId service, const IocKey& ioc) const;
    void put(const Verdict& verdict) const;
    std::filesystem::path path_for(ServiceId service, std::string_view ioc_value) const;

private:
    std::filesystem::path dir_;
};

/// Source of verdicts for accepted (service, ioc) pairs.
class Provider {
public:
    virtual ~Provider() = default;
    virtual Verdict lookup(ServiceId service, const IocKey& ioc) = 0;
};

/// Reads pre-normalized verdict files laid out like the cache.
class FixtureProvider final : public Provider {
public:
    explicit FixtureProvider(std::filesystem::path dir);
    Verdict lookup(ServiceId service, const IocKey& ioc) override;

private:
    VerdictCache files_;
};

struct HttpRequest {
    std::string method;  // GET or POST
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    std::string content_type;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

class Transport {
public:
    virtual ~Transport() = default;
    /// Throws Error(Network) on connection failure or timeout.
    virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// HTTPS client; timeout applies to connect and read separately.
std::unique_ptr<Transport> make_http_transport(std::chrono::seconds timeout = std::chrono::seconds(30));

/// Time source the limiter and retry loop wait on; tests substitute a fake.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::steady_clock::time_point now() = 0;
    virtual void sleep_for(std::chrono::steady_clock::duration d) = 0;
};

Clock& system_clock();

/// At most `limit` grants in any window of `window` length. A one-second guard
/// is added to the window so provider-side clock skew cannot push a burst over.
class RateLimiter {
public:
    RateLimiter(int limit, std::chrono::seconds window, Clock& clock);

    void acquire();
    int limit() const { return limit_; }

private:
    int limit_;
    std::chrono::steady_clock::duration span_;
    Clock* clock_;
    std::mutex mutex_;
    std::deque<std::chrono::steady_clock::time_point> grants_;
};

struct Credentials {
    std::string vt_key;
    std::string otx_key;
    std::string misp_url;
    std::string misp_key;

    /// Reads CTIKIT_VT_KEY, CTIKIT_OTX_KEY, CTIKIT_MISP_URL, CTIKIT_MISP_KEY for the
    /// services that need them; throws Error(Credential) naming every missing one.
    static Credentials from_environment(const std::set<ServiceId>& services);
};

/// Request a live lookup sends; exposed for inspection.
HttpRequest build_request(ServiceId service, const IocKey& ioc, const Credentials& credentials);

struct LiveOptions {
    std::map<ServiceId, int> requests_per_minute = {
        {ServiceId::VirusTotal, 4},  {ServiceId::AlienVault, 60}, {ServiceId::UrlHaus, 60},
        {ServiceId::MalwareBazaar, 60}, {ServiceId::Misp, 120},   {ServiceId::Nvd, 5},
    };
    int attempts = 3;
    std::chrono::milliseconds backoff{1000};  // doubled after every failed attempt
};

class LiveProvider final : public Provider {
public:
    LiveProvider(Credentials credentials, Transport& transport, LiveOptions options = {},
                 Clock& clock = system_clock());

    Verdict lookup(ServiceId service, const IocKey& ioc) override;

private:
    Credentials credentials_;
    Transport* transport_;
    LiveOptions options_;
    Clock* clock_;
    std::map<ServiceId, std::unique_ptr<RateLimiter>> limiters_;
};

struct EnrichFailure {
    std::string ioc_value;
    IocType ioc_type;
    ServiceId service = ServiceId::VirusTotal;
    std::string message;
};

struct EnrichResult {
    std::vector<Verdict> verdicts;  // sorted by (ioc_value, ioc_type, service)
    std::vector<EnrichFailure> failures;
    std::size_t cache_hits = 0;
    std::size_t lookups = 0;
};

struct EnrichOptions {
    std::set<ServiceId> services{std::begin(kAllServices), std::end(kAllServices)};
    int width = 4;  // concurrent lookups per service
    Exec exec = Exec::Parallel;
};

/// One verdict per (distinct ioc, selected service); NotApplicable where the
/// service does not take the type. Cache hits skip the provider entirely.
EnrichResult enrich_dataset(const std::vector<IocRecord>& iocs, Provider& provider,
                            const EnrichOptions& options = {}, const VerdictCache* cache = nullptr);

void to_json(Json& j, const EnrichFailure& f);

}  // namespace ctikit::enrich
