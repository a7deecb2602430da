#include "ctikit/enrich.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

#include "ctikit/digest.hpp"
#include "ctikit/error.hpp"
#include "ctikit/time.hpp"

namespace ctikit::enrich {

namespace {

[[noreturn]] void malformed(ServiceId service, const std::string& what) {
    throw Error(ErrorCode::Parse, std::string(display_name(service)) + ": malformed response: " + what);
}

const Json* find_path(const Json& j, std::initializer_list<const char*> path) {
    const Json* cur = &j;
    for (const char* key : path) {
        if (!cur->is_object()) return nullptr;
        auto it = cur->find(key);
        if (it == cur->end()) return nullptr;
        cur = &*it;
    }
    return cur;
}

std::optional<Timestamp> time_of(const Json* v) {
    if (!v || v->is_null()) return std::nullopt;
    if (v->is_number_integer()) return Timestamp(v->get<std::int64_t>());
    if (v->is_string()) {
        const auto& s = v->get_ref<const std::string&>();
        if (!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
            return Timestamp(std::stoll(s));
        return parse_timestamp(s);
    }
    return std::nullopt;
}

void keep_earliest(std::optional<Timestamp>& acc, std::optional<Timestamp> t) {
    if (t && (!acc || *t < *acc)) acc = t;
}

Verdict base(ServiceId service, const IocKey& ioc, VerdictStatus status) {
    Verdict v;
    v.ioc_value = ioc.value;
    v.ioc_type = ioc.type;
    v.service = service;
    v.status = status;
    return v;
}

Verdict judge_virustotal(const IocKey& ioc, const Json& p) {
    constexpr auto S = ServiceId::VirusTotal;
    if (const Json* err = find_path(p, {"error", "code"})) {
        if (err->is_string() && err->get<std::string>() == "NotFoundError") {
            auto v = base(S, ioc, VerdictStatus::Clean);
            v.detail = "not in corpus";
            return v;
        }
        malformed(S, "error payload " + err->dump());
    }
    if (const Json* stats = find_path(p, {"data", "attributes", "last_analysis_stats"})) {
        if (!stats->is_object()) malformed(S, "last_analysis_stats is not an object");
        std::int64_t malicious = 0, total = 0;
        for (const auto& [name, count] : stats->items()) {
            if (!count.is_number_integer()) malformed(S, "non-integer engine count");
            total += count.get<std::int64_t>();
            if (name == "malicious") malicious = count.get<std::int64_t>();
        }
        auto v = base(S, ioc, malicious >= 1 ? VerdictStatus::Malicious : VerdictStatus::Clean);
        v.detail = "engines " + std::to_string(malicious) + "/" + std::to_string(total);
        v.first_seen = time_of(find_path(p, {"data", "attributes", "first_submission_date"}));
        return v;
    }
    // v2 report shape
    if (const Json* code = find_path(p, {"response_code"})) {
        if (!code->is_number_integer()) malformed(S, "response_code is not an integer");
        if (code->get<int>() == 0) {
            auto v = base(S, ioc, VerdictStatus::Clean);
            v.detail = "not in corpus";
            return v;
        }
        const Json* positives = find_path(p, {"positives"});
        if (!positives || !positives->is_number_integer()) malformed(S, "missing positives");
        auto n = positives->get<std::int64_t>();
        auto v = base(S, ioc, n >= 1 ? VerdictStatus::Malicious : VerdictStatus::Clean);
        const Json* total = find_path(p, {"total"});
        v.detail = "engines " + std::to_string(n) + "/" +
                   (total && total->is_number_integer() ? std::to_string(total->get<std::int64_t>()) : "?");
        v.first_seen = time_of(find_path(p, {"first_seen"}));
        return v;
    }
    malformed(S, "no analysis stats");
}

Verdict judge_alienvault(const IocKey& ioc, const Json& p) {
    constexpr auto S = ServiceId::AlienVault;
    const Json* count = find_path(p, {"pulse_info", "count"});
    if (!count || !count->is_number_integer()) malformed(S, "missing pulse_info.count");
    auto pulses = count->get<std::int64_t>();
    std::vector<std::string> signals;
    if (pulses > 0) signals.push_back("pulses " + std::to_string(pulses));
    if (const Json* gsb = find_path(p, {"safe_browsing"}); gsb && gsb->is_array() && !gsb->empty())
        signals.push_back("safe browsing");
    if (const Json* plugins = find_path(p, {"analysis", "plugins"}); plugins && plugins->is_object()) {
        for (const auto& [name, plugin] : plugins->items()) {
            const Json* det = find_path(plugin, {"results", "detection"});
            if (det && det->is_string() && !det->get<std::string>().empty()) signals.push_back("av " + name);
        }
    }
    auto v = base(S, ioc, signals.empty() ? VerdictStatus::Clean : VerdictStatus::Malicious);
    for (std::size_t i = 0; i < signals.size(); ++i) v.detail += (i ? "; " : "") + signals[i];
    if (const Json* list = find_path(p, {"pulse_info", "pulses"}); list && list->is_array())
        for (const auto& pulse : *list) keep_earliest(v.first_seen, time_of(find_path(pulse, {"created"})));
    return v;
}

Verdict judge_urlhaus(const IocKey& ioc, const Json& p) {
    constexpr auto S = ServiceId::UrlHaus;
    const Json* qs = find_path(p, {"query_status"});
    if (!qs || !qs->is_string()) malformed(S, "missing query_status");
    const auto& status = qs->get_ref<const std::string&>();
    if (status != "ok") {
        auto v = base(S, ioc, VerdictStatus::NotFound);
        v.detail = status;
        return v;
    }
    auto v = base(S, ioc, VerdictStatus::Found);
    keep_earliest(v.first_seen, time_of(find_path(p, {"date_added"})));
    keep_earliest(v.first_seen, time_of(find_path(p, {"firstseen"})));
    if (const Json* threat = find_path(p, {"threat"}); threat && threat->is_string()) v.detail = threat->get<std::string>();
    return v;
}

Verdict judge_malwarebazaar(const IocKey& ioc, const Json& p) {
    constexpr auto S = ServiceId::MalwareBazaar;
    const Json* qs = find_path(p, {"query_status"});
    if (!qs || !qs->is_string()) malformed(S, "missing query_status");
    const auto& status = qs->get_ref<const std::string&>();
    if (status != "ok") {
        auto v = base(S, ioc, VerdictStatus::NotFound);
        v.detail = status;
        return v;
    }
    const Json* data = find_path(p, {"data"});
    if (!data || !data->is_array() || data->empty()) malformed(S, "status ok without data");
    auto v = base(S, ioc, VerdictStatus::Found);
    for (const auto& entry : *data) keep_earliest(v.first_seen, time_of(find_path(entry, {"first_seen"})));
    if (const Json* sig = find_path((*data)[0], {"signature"}); sig && sig->is_string()) v.detail = sig->get<std::string>();
    return v;
}

Verdict judge_misp(const IocKey& ioc, const Json& p) {
    constexpr auto S = ServiceId::Misp;
    const Json* attrs = find_path(p, {"response", "Attribute"});
    if (!attrs || !attrs->is_array()) malformed(S, "missing response.Attribute");
    if (attrs->empty()) return base(S, ioc, VerdictStatus::NotFound);
    auto v = base(S, ioc, VerdictStatus::Found);
    std::set<std::string> events;
    for (const auto& a : *attrs) {
        keep_earliest(v.first_seen, time_of(find_path(a, {"Event", "date"})));
        if (const Json* id = find_path(a, {"event_id"}); id && id->is_string()) events.insert(id->get<std::string>());
    }
    v.detail = "events " + std::to_string(events.empty() ? attrs->size() : events.size());
    return v;
}

Verdict judge_nvd(const IocKey& ioc, const Json& p) {
    constexpr auto S = ServiceId::Nvd;
    const Json* total = find_path(p, {"totalResults"});
    if (!total || !total->is_number_integer()) malformed(S, "missing totalResults");
    if (total->get<std::int64_t>() == 0) return base(S, ioc, VerdictStatus::NotFound);
    const Json* vulns = find_path(p, {"vulnerabilities"});
    if (!vulns || !vulns->is_array() || vulns->empty()) malformed(S, "results without vulnerabilities");
    auto v = base(S, ioc, VerdictStatus::Found);
    v.first_seen = time_of(find_path((*vulns)[0], {"cve", "published"}));
    return v;
}

std::string percent_encode(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

std::string base64url(std::string_view s) {
    std::string out(4 * ((s.size() + 2) / 3) + 1, '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(s.data()), static_cast<int>(s.size()));
    out.resize(static_cast<std::size_t>(n));
    while (!out.empty() && out.back() == '=') out.pop_back();
    for (char& c : out) {
        if (c == '+') c = '-';
        else if (c == '/') c = '_';
    }
    return out;
}

// Hash algorithms each database endpoint can be queried by.
bool endpoint_supports(ServiceId service, const IocType& type) {
    auto h = type.hash_kind();
    if (!h) return true;
    switch (service) {
        case ServiceId::UrlHaus: return *h == HashKind::Md5 || *h == HashKind::Sha256;
        case ServiceId::MalwareBazaar: return *h == HashKind::Md5 || *h == HashKind::Sha1 || *h == HashKind::Sha256;
        default: return true;
    }
}

class SteadyClock final : public Clock {
public:
    std::chrono::steady_clock::time_point now() override { return std::chrono::steady_clock::now(); }
    void sleep_for(std::chrono::steady_clock::duration d) override { std::this_thread::sleep_for(d); }
};

}  // namespace

Verdict judge(ServiceId service, const IocKey& ioc, const Json& payload) {
    if (!accepts(service, ioc.type.kind())) return not_applicable(service, ioc);
    if (!payload.is_object()) malformed(service, "payload is not a JSON object");
    switch (service) {
        case ServiceId::VirusTotal: return judge_virustotal(ioc, payload);
        case ServiceId::AlienVault: return judge_alienvault(ioc, payload);
        case ServiceId::UrlHaus: return judge_urlhaus(ioc, payload);
        case ServiceId::MalwareBazaar: return judge_malwarebazaar(ioc, payload);
        case ServiceId::Misp: return judge_misp(ioc, payload);
        case ServiceId::Nvd: return judge_nvd(ioc, payload);
    }
    malformed(service, "unknown service");
}

Verdict not_applicable(ServiceId service, const IocKey& ioc) {
    return base(service, ioc, VerdictStatus::NotApplicable);
}

std::string cache_key(ServiceId service, std::string_view ioc_value) {
    std::string material(short_name(service));
    material += '\n';
    material += ioc_value;
    return sha256_hex(material);
}

std::filesystem::path VerdictCache::path_for(ServiceId service, std::string_view ioc_value) const {
    return dir_ / std::string(short_name(service)) / (cache_key(service, ioc_value) + ".json");
}

std::optional<Verdict> VerdictCache::get(ServiceId service, const IocKey& ioc) const {
    auto path = path_for(service, ioc.value);
    if (!std::filesystem::exists(path)) return std::nullopt;
    auto v = deserialize<Verdict>(read_file(path));
    if (v.service != service || v.ioc_value != ioc.value || v.ioc_type != ioc.type)
        throw Error(ErrorCode::Parse, "verdict file '" + path.string() + "' belongs to another indicator");
    return v;
}

void VerdictCache::put(const Verdict& verdict) const {
    write_file_atomic(path_for(verdict.service, verdict.ioc_value), canonical_serialize(verdict) + "\n");
}

FixtureProvider::FixtureProvider(std::filesystem::path dir) : files_(dir) {
    if (!std::filesystem::is_directory(dir))
        throw Error(ErrorCode::Config, "fixture directory not found: '" + dir.string() + "'");
}

Verdict FixtureProvider::lookup(ServiceId service, const IocKey& ioc) {
    if (!accepts(service, ioc.type.kind())) return not_applicable(service, ioc);
    auto v = files_.get(service, ioc);
    if (!v)
        throw Error(ErrorCode::Io, "no fixture for " + std::string(short_name(service)) + " / " + ioc.value);
    return *v;
}

Clock& system_clock() {
    static SteadyClock clock;
    return clock;
}

RateLimiter::RateLimiter(int limit, std::chrono::seconds window, Clock& clock)
    : limit_(limit), span_(window + std::chrono::seconds(1)), clock_(&clock) {
    if (limit < 1) throw Error(ErrorCode::Config, "rate limit must be positive");
}

void RateLimiter::acquire() {
    std::lock_guard lock(mutex_);
    while (true) {
        auto now = clock_->now();
        while (!grants_.empty() && grants_.front() + span_ <= now) grants_.pop_front();
        if (static_cast<int>(grants_.size()) < limit_) {
            grants_.push_back(now);
            return;
        }
        clock_->sleep_for(grants_.front() + span_ - now);
    }
}

Credentials Credentials::from_environment(const std::set<ServiceId>& services) {
    Credentials c;
    std::vector<std::string> missing;
    auto read = [&](const char* name, std::string& into) {
        const char* value = std::getenv(name);
        if (value && *value)
            into = value;
        else
            missing.emplace_back(name);
    };
    if (services.count(ServiceId::VirusTotal)) read("CTIKIT_VT_KEY", c.vt_key);
    if (services.count(ServiceId::AlienVault)) read("CTIKIT_OTX_KEY", c.otx_key);
    if (services.count(ServiceId::Misp)) {
        read("CTIKIT_MISP_URL", c.misp_url);
        read("CTIKIT_MISP_KEY", c.misp_key);
    }
    if (!missing.empty()) {
        std::string msg = "missing credentials; set";
        for (const auto& m : missing) msg += " " + m;
        throw Error(ErrorCode::Credential, msg);
    }
    return c;
}

HttpRequest build_request(ServiceId service, const IocKey& ioc, const Credentials& cred) {
    HttpRequest r;
    const auto kind = ioc.type.kind();
    switch (service) {
        case ServiceId::VirusTotal: {
            r.method = "GET";
            std::string base = "https://www.virustotal.com/api/v3/";
            switch (kind) {
                case IocType::Kind::Url: r.url = base + "urls/" + base64url(ioc.value); break;
                case IocType::Kind::Ip: r.url = base + "ip_addresses/" + ioc.value; break;
                case IocType::Kind::Domain: r.url = base + "domains/" + ioc.value; break;
                default: r.url = base + "files/" + ioc.value; break;
            }
            r.headers.emplace_back("x-apikey", cred.vt_key);
            break;
        }
        case ServiceId::AlienVault: {
            r.method = "GET";
            std::string section;
            switch (kind) {
                case IocType::Kind::Url: section = "url"; break;
                case IocType::Kind::Ip: section = "IPv4"; break;
                case IocType::Kind::Domain: section = "domain"; break;
                default: section = "file"; break;
            }
            r.url = "https://otx.alienvault.com/api/v1/indicators/" + section + "/" +
                    percent_encode(ioc.value) + "/general";
            r.headers.emplace_back("X-OTX-API-KEY", cred.otx_key);
            break;
        }
        case ServiceId::UrlHaus: {
            r.method = "POST";
            r.content_type = "application/x-www-form-urlencoded";
            std::string base = "https://urlhaus-api.abuse.ch/v1/";
            if (kind == IocType::Kind::Url) {
                r.url = base + "url/";
                r.body = "url=" + percent_encode(ioc.value);
            } else if (kind == IocType::Kind::Hash) {
                r.url = base + "payload/";
                r.body = (ioc.type.hash_kind() == HashKind::Md5 ? "md5_hash=" : "sha256_hash=") + ioc.value;
            } else {
                r.url = base + "host/";
                r.body = "host=" + percent_encode(ioc.value);
            }
            break;
        }
        case ServiceId::MalwareBazaar:
            r.method = "POST";
            r.content_type = "application/x-www-form-urlencoded";
            r.url = "https://mb-api.abuse.ch/api/v1/";
            r.body = "query=get_info&hash=" + ioc.value;
            break;
        case ServiceId::Misp: {
            r.method = "POST";
            r.content_type = "application/json";
            std::string base = cred.misp_url;
            while (!base.empty() && base.back() == '/') base.pop_back();
            r.url = base + "/attributes/restSearch";
            r.body = Json{{"returnFormat", "json"}, {"value", ioc.value}}.dump();
            r.headers.emplace_back("Authorization", cred.misp_key);
            r.headers.emplace_back("Accept", "application/json");
            break;
        }
        case ServiceId::Nvd:
            r.method = "GET";
            r.url = "https://services.nvd.nist.gov/rest/json/cves/2.0?cveId=" + percent_encode(ioc.value);
            break;
    }
    return r;
}

LiveProvider::LiveProvider(Credentials credentials, Transport& transport, LiveOptions options, Clock& clock)
    : credentials_(std::move(credentials)), transport_(&transport), options_(std::move(options)), clock_(&clock) {
    if (options_.attempts < 1) throw Error(ErrorCode::Config, "attempts must be at least 1");
    for (auto s : kAllServices) {
        auto it = options_.requests_per_minute.find(s);
        int limit = it == options_.requests_per_minute.end() ? 60 : it->second;
        limiters_[s] = std::make_unique<RateLimiter>(limit, std::chrono::seconds(60), *clock_);
    }
}

Verdict LiveProvider::lookup(ServiceId service, const IocKey& ioc) {
    if (!accepts(service, ioc.type.kind())) return not_applicable(service, ioc);
    if (!endpoint_supports(service, ioc.type)) {
        auto v = base(service, ioc, VerdictStatus::NotFound);
        v.detail = "no lookup by " + std::string(ioc.type.name());
        return v;
    }
    const auto request = build_request(service, ioc, credentials_);
    const std::string who(display_name(service));
    auto delay = options_.backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
        if (attempt > 1) {
            clock_->sleep_for(delay);
            delay *= 2;
        }
        limiters_.at(service)->acquire();
        HttpResponse response;
        try {
            response = transport_->send(request);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Network) throw;
            last_error = e.what();
            continue;
        }
        if (response.status == 429 || response.status >= 500) {
            last_error = "HTTP " + std::to_string(response.status);
            continue;
        }
        if (response.status == 401 || response.status == 403)
            throw Error(ErrorCode::Credential, who + ": credentials rejected (HTTP " +
                                                   std::to_string(response.status) + ")");
        if (response.status == 404 && service != ServiceId::VirusTotal) {
            auto v = base(service, ioc, is_database_service(service) ? VerdictStatus::NotFound : VerdictStatus::Clean);
            v.detail = "not indexed";
            return v;
        }
        if (response.status != 200 && response.status != 404)
            throw Error(ErrorCode::Network, who + ": unexpected HTTP " + std::to_string(response.status));
        Json payload = Json::parse(response.body, nullptr, false);
        if (payload.is_discarded()) malformed(service, "body is not JSON");
        return judge(service, ioc, payload);
    }
    throw Error(ErrorCode::Network,
                who + ": giving up after " + std::to_string(options_.attempts) + " attempts: " + last_error);
}

EnrichResult enrich_dataset(const std::vector<IocRecord>& iocs, Provider& provider,
                            const EnrichOptions& options, const VerdictCache* cache) {
    std::set<IocKey> keys;
    for (const auto& r : iocs) keys.insert(IocKey{r.ioc_value, r.ioc_type});

    struct Task {
        ServiceId service;
        const IocKey* ioc;
        std::optional<Verdict> verdict;
        std::string error;
    };
    EnrichResult result;
    std::map<ServiceId, std::vector<Task>> pending;
    for (const auto& key : keys) {
        for (auto s : options.services) {
            if (!accepts(s, key.type.kind())) {
                result.verdicts.push_back(not_applicable(s, key));
                continue;
            }
            if (cache) {
                if (auto hit = cache->get(s, key)) {
                    result.verdicts.push_back(std::move(*hit));
                    ++result.cache_hits;
                    continue;
                }
            }
            pending[s].push_back(Task{s, &key, std::nullopt, {}});
        }
    }

    auto run = [&](Task& t) {
        try {
            t.verdict = provider.lookup(t.service, *t.ioc);
            if (cache) cache->put(*t.verdict);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Credential) throw;
            t.error = e.what();
        }
    };

    if (options.exec == Exec::Serial || options.width <= 1) {
        for (auto& [s, tasks] : pending)
            for (auto& t : tasks) run(t);
    } else {
        std::vector<std::thread> workers;
        std::vector<std::unique_ptr<std::atomic<std::size_t>>> cursors;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (auto& [s, tasks] : pending) {
            cursors.push_back(std::make_unique<std::atomic<std::size_t>>(0));
            auto* cursor = cursors.back().get();
            auto* list = &tasks;
            int n = std::min<int>(options.width, static_cast<int>(tasks.size()));
            for (int w = 0; w < n; ++w) {
                workers.emplace_back([&, cursor, list] {
                    for (std::size_t i; (i = cursor->fetch_add(1)) < list->size();) {
                        try {
                            run((*list)[i]);
                        } catch (...) {
                            std::lock_guard lock(failure_mutex);
                            if (!failure) failure = std::current_exception();
                        }
                    }
                });
            }
        }
        for (auto& w : workers) w.join();
        if (failure) std::rethrow_exception(failure);
    }

    for (auto& [s, tasks] : pending) {
        for (auto& t : tasks) {
            ++result.lookups;
            if (t.verdict)
                result.verdicts.push_back(std::move(*t.verdict));
            else
                result.failures.push_back(EnrichFailure{t.ioc->value, t.ioc->type, t.service, t.error});
        }
    }
    std::sort(result.verdicts.begin(), result.verdicts.end(), [](const Verdict& a, const Verdict& b) {
        return std::tie(a.ioc_value, a.ioc_type, a.service) < std::tie(b.ioc_value, b.ioc_type, b.service);
    });
    std::sort(result.failures.begin(), result.failures.end(), [](const EnrichFailure& a, const EnrichFailure& b) {
        return std::tie(a.ioc_value, a.ioc_type, a.service) < std::tie(b.ioc_value, b.ioc_type, b.service);
    });
    return result;
}

void to_json(Json& j, const EnrichFailure& f) {
    j = Json{{"ioc_value", f.ioc_value},
             {"ioc_type", std::string(f.ioc_type.name())},
             {"service", std::string(short_name(f.service))},
             {"error", f.message}};
}

}  // namespace ctikit::enrich
