#include <doctest.h>

#include <thread>

#include "ctikit/digest.hpp"
#include "ctikit/enrich.hpp"
#include "ctikit/error.hpp"
#include "fakes.hpp"
#include "generators.hpp"

using namespace ctikit;
using namespace std::chrono_literals;
using enrich::IocKey;

namespace {

const IocKey kUrl{"http://evil.com/a", IocType::url()};
const IocKey kMd5{"0123456789abcdef0123456789abcdef", IocType::hash(HashKind::Md5)};
const IocKey kSha1{"0123456789abcdef0123456789abcdef01234567", IocType::hash(HashKind::Sha1)};
const IocKey kCve{"CVE-2021-44228", IocType::cve()};

IocRecord record(const IocKey& k) {
    IocRecord r;
    r.user_name = "u";
    r.ioc_value = k.value;
    r.ioc_type = k.type;
    return r;
}

}  // namespace

TEST_CASE("VirusTotal responses") {
    auto mal = enrich::judge(ServiceId::VirusTotal, kUrl, Json::parse(R"({"data":{"attributes":{
        "last_analysis_stats":{"malicious":3,"harmless":60,"undetected":7},"first_submission_date":1609459200}}})"));
    CHECK(mal.status == VerdictStatus::Malicious);
    CHECK(mal.detail == "engines 3/70");
    CHECK(mal.first_seen == Timestamp::from_civil(2021, 1, 1));

    auto clean = enrich::judge(ServiceId::VirusTotal, kUrl,
                               Json::parse(R"({"data":{"attributes":{"last_analysis_stats":{"malicious":0,"harmless":5}}}})"));
    CHECK(clean.status == VerdictStatus::Clean);
    CHECK_FALSE(clean.first_seen.has_value());

    auto missing = enrich::judge(ServiceId::VirusTotal, kUrl, Json::parse(R"({"error":{"code":"NotFoundError"}})"));
    CHECK(missing.status == VerdictStatus::Clean);

    auto v2 = enrich::judge(ServiceId::VirusTotal, kMd5,
                            Json::parse(R"({"response_code":1,"positives":12,"total":70,"first_seen":"2020-05-01 10:00:00"})"));
    CHECK(v2.status == VerdictStatus::Malicious);
    CHECK(v2.first_seen == Timestamp::from_civil(2020, 5, 1, 10));

    CHECK_THROWS_AS(enrich::judge(ServiceId::VirusTotal, kUrl, Json::parse(R"({"data":{}})")), Error);
    CHECK_THROWS_AS(enrich::judge(ServiceId::VirusTotal, kUrl, Json::parse("[]")), Error);
}

TEST_CASE("AlienVault responses") {
    auto none = enrich::judge(ServiceId::AlienVault, kUrl, Json::parse(R"({"pulse_info":{"count":0,"pulses":[]}})"));
    CHECK(none.status == VerdictStatus::Clean);
    auto pulses = enrich::judge(ServiceId::AlienVault, kUrl, Json::parse(R"({"pulse_info":{"count":2,"pulses":[
        {"created":"2021-03-01T00:00:00"},{"created":"2021-02-01T00:00:00.123"}]}})"));
    CHECK(pulses.status == VerdictStatus::Malicious);
    CHECK(pulses.first_seen == Timestamp::from_civil(2021, 2, 1));
    auto av = enrich::judge(ServiceId::AlienVault, kMd5, Json::parse(R"({"pulse_info":{"count":0},
        "analysis":{"plugins":{"avast":{"results":{"detection":"Win32:Trojan"}},"clamav":{"results":{"detection":""}}}}})"));
    CHECK(av.status == VerdictStatus::Malicious);
    CHECK(av.detail == "av avast");
    CHECK_THROWS_AS(enrich::judge(ServiceId::AlienVault, kUrl, Json::parse(R"({"indicator":"x"})")), Error);
}

TEST_CASE("database services answer found or not found") {
    auto uh = enrich::judge(ServiceId::UrlHaus, kUrl,
                            Json::parse(R"({"query_status":"ok","date_added":"2021-04-01 12:00:00 UTC","threat":"malware_download"})"));
    CHECK(uh.status == VerdictStatus::Found);
    CHECK(uh.detail == "malware_download");
    CHECK(uh.first_seen == Timestamp::from_civil(2021, 4, 1, 12));
    CHECK(enrich::judge(ServiceId::UrlHaus, kUrl, Json::parse(R"({"query_status":"no_results"})")).status ==
          VerdictStatus::NotFound);

    auto mb = enrich::judge(ServiceId::MalwareBazaar, kMd5, Json::parse(R"({"query_status":"ok","data":[
        {"first_seen":"2021-01-02 00:00:00","signature":"AgentTesla"}]})"));
    CHECK(mb.status == VerdictStatus::Found);
    CHECK(mb.detail == "AgentTesla");
    CHECK(enrich::judge(ServiceId::MalwareBazaar, kMd5, Json::parse(R"({"query_status":"hash_not_found"})")).status ==
          VerdictStatus::NotFound);
    CHECK_THROWS_AS(enrich::judge(ServiceId::MalwareBazaar, kMd5, Json::parse(R"({"query_status":"ok"})")), Error);

    auto misp = enrich::judge(ServiceId::Misp, kCve, Json::parse(R"({"response":{"Attribute":[
        {"event_id":"1","Event":{"date":"2021-12-11"}},{"event_id":"2","Event":{"date":"2021-12-10"}}]}})"));
    CHECK(misp.status == VerdictStatus::Found);
    CHECK(misp.detail == "events 2");
    CHECK(misp.first_seen == Timestamp::from_civil(2021, 12, 10));
    CHECK(enrich::judge(ServiceId::Misp, kCve, Json::parse(R"({"response":{"Attribute":[]}})")).status ==
          VerdictStatus::NotFound);

    auto nvd = enrich::judge(ServiceId::Nvd, kCve, Json::parse(R"({"totalResults":1,"vulnerabilities":[
        {"cve":{"id":"CVE-2021-44228","published":"2021-12-10T10:15:09.143"}}]})"));
    CHECK(nvd.status == VerdictStatus::Found);
    CHECK(nvd.first_seen == Timestamp::from_civil(2021, 12, 10, 10, 15, 9));
    CHECK_THROWS_AS(enrich::judge(ServiceId::Nvd, kCve, Json::parse(R"({})")), Error);
}

TEST_CASE("non-accepting services are not applicable") {
    CHECK(enrich::judge(ServiceId::Nvd, kUrl, Json::object()).status == VerdictStatus::NotApplicable);
    CHECK(enrich::judge(ServiceId::VirusTotal, kCve, Json::object()).status == VerdictStatus::NotApplicable);
}

TEST_CASE("requests carry credentials from the environment only") {
    auto cred = testing::dummy_credentials();
    auto vt = enrich::build_request(ServiceId::VirusTotal, kUrl, cred);
    CHECK(vt.url == "https://www.virustotal.com/api/v3/urls/aHR0cDovL2V2aWwuY29tL2E");
    REQUIRE(vt.headers.size() == 1);
    CHECK(vt.headers[0].second == "vt-test-key");
    auto otx = enrich::build_request(ServiceId::AlienVault, kUrl, cred);
    CHECK(otx.url == "https://otx.alienvault.com/api/v1/indicators/url/http%3A%2F%2Fevil.com%2Fa/general");
    auto uh = enrich::build_request(ServiceId::UrlHaus, kMd5, cred);
    CHECK(uh.body == "md5_hash=" + kMd5.value);
    auto misp = enrich::build_request(ServiceId::Misp, kCve, cred);
    CHECK(misp.url == "https://misp.invalid/attributes/restSearch");
    CHECK(Json::parse(misp.body)["value"] == "CVE-2021-44228");

    ::unsetenv("CTIKIT_VT_KEY");
    ::setenv("CTIKIT_OTX_KEY", "k", 1);
    try {
        enrich::Credentials::from_environment({ServiceId::VirusTotal, ServiceId::AlienVault, ServiceId::Nvd});
        FAIL("expected a credential error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Credential);
        CHECK(std::string(e.what()).find("CTIKIT_VT_KEY") != std::string::npos);
        CHECK(std::string(e.what()).find("CTIKIT_OTX_KEY") == std::string::npos);
    }
    CHECK_NOTHROW(enrich::Credentials::from_environment({ServiceId::Nvd, ServiceId::UrlHaus}));
    ::unsetenv("CTIKIT_OTX_KEY");
}

TEST_CASE("verdict cache round-trips and rejects foreign files") {
    auto dir = testing::scratch_dir("cache");
    enrich::VerdictCache cache(dir);
    CHECK_FALSE(cache.get(ServiceId::VirusTotal, kUrl).has_value());
    Verdict v{kUrl.value, kUrl.type, ServiceId::VirusTotal, VerdictStatus::Malicious, Timestamp(1000), "x"};
    cache.put(v);
    CHECK(cache.get(ServiceId::VirusTotal, kUrl) == v);
    CHECK(cache.path_for(ServiceId::VirusTotal, kUrl.value) ==
          dir / "vt" / (sha256_hex("vt\n" + kUrl.value) + ".json"));
    std::filesystem::copy_file(cache.path_for(ServiceId::VirusTotal, kUrl.value),
                               cache.path_for(ServiceId::VirusTotal, kMd5.value));
    CHECK_THROWS_AS(cache.get(ServiceId::VirusTotal, kMd5), Error);
}

TEST_CASE("rate limiter never exceeds its budget") {
    testing::FakeClock clock;
    enrich::RateLimiter limiter(4, 60s, clock);
    std::vector<std::chrono::steady_clock::time_point> grants;
    for (int i = 0; i < 50; ++i) {
        limiter.acquire();
        grants.push_back(clock.now());
    }
    CHECK(testing::max_in_window(grants, 61s) <= 4);
    CHECK(grants[4] - grants[0] == 61s);
    CHECK_THROWS_AS(enrich::RateLimiter(0, 60s, clock), Error);
}

TEST_CASE("rate limiter under concurrent callers") {
    testing::FakeClock clock;
    enrich::RateLimiter limiter(5, 60s, clock);
    std::mutex m;
    std::vector<std::chrono::steady_clock::time_point> grants;
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&] {
            for (int i = 0; i < 25; ++i) {
                limiter.acquire();
                std::lock_guard lock(m);
                grants.push_back(clock.now());
            }
        });
    for (auto& t : threads) t.join();
    CHECK(grants.size() == 100);
    CHECK(testing::max_in_window(grants, 61s) <= 5);
}

TEST_CASE("live provider retries transient failures with backoff") {
    testing::FakeClock clock;
    testing::ScriptedTransport transport([](const enrich::HttpRequest&, int call) -> enrich::HttpResponse {
        if (call == 0) throw Error(ErrorCode::Network, "timeout");
        if (call == 1) return {429, ""};
        return {200, R"({"pulse_info":{"count":1}})"};
    });
    enrich::LiveProvider provider(testing::dummy_credentials(), transport, {}, clock);
    auto v = provider.lookup(ServiceId::AlienVault, kUrl);
    CHECK(v.status == VerdictStatus::Malicious);
    CHECK(transport.count() == 3);
    CHECK(clock.slept() >= 3s);  // 1 s then 2 s
}

TEST_CASE("live provider gives up, rejects bad keys, and maps 404") {
    testing::FakeClock clock;
    testing::ScriptedTransport down([](const enrich::HttpRequest&, int) -> enrich::HttpResponse {
        throw Error(ErrorCode::Network, "connection refused");
    });
    enrich::LiveProvider p1(testing::dummy_credentials(), down, {}, clock);
    try {
        p1.lookup(ServiceId::UrlHaus, kUrl);
        FAIL("expected network error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Network);
    }
    CHECK(down.count() == 3);

    testing::ScriptedTransport denied([](const enrich::HttpRequest&, int) { return enrich::HttpResponse{401, ""}; });
    enrich::LiveProvider p2(testing::dummy_credentials(), denied, {}, clock);
    CHECK_THROWS_WITH_AS(p2.lookup(ServiceId::VirusTotal, kUrl), doctest::Contains("credentials rejected"), Error);

    testing::ScriptedTransport missing([](const enrich::HttpRequest&, int) { return enrich::HttpResponse{404, ""}; });
    enrich::LiveProvider p3(testing::dummy_credentials(), missing, {}, clock);
    CHECK(p3.lookup(ServiceId::UrlHaus, kUrl).status == VerdictStatus::NotFound);
    CHECK(p3.lookup(ServiceId::AlienVault, kUrl).status == VerdictStatus::Clean);

    testing::ScriptedTransport unused([](const enrich::HttpRequest&, int) { return enrich::HttpResponse{500, ""}; });
    enrich::LiveProvider p4(testing::dummy_credentials(), unused, {}, clock);
    auto v = p4.lookup(ServiceId::UrlHaus, kSha1);
    CHECK(v.status == VerdictStatus::NotFound);
    CHECK(v.detail == "no lookup by sha1");
    CHECK(unused.count() == 0);
}

TEST_CASE("enrich_dataset fills every service slot and uses the cache") {
    auto dir = testing::scratch_dir("enrich_ds");
    enrich::VerdictCache cache(dir);
    std::atomic<int> calls{0};
    testing::FakeClock clock;
    testing::ScriptedTransport transport([&](const enrich::HttpRequest& r, int) -> enrich::HttpResponse {
        ++calls;
        if (r.url.find("virustotal") != std::string::npos)
            return {200, R"({"data":{"attributes":{"last_analysis_stats":{"malicious":1}}}})"};
        if (r.url.find("alienvault") != std::string::npos) return {200, R"({"pulse_info":{"count":0}})"};
        if (r.url.find("nvd") != std::string::npos)
            return {200, R"({"totalResults":1,"vulnerabilities":[{"cve":{"published":"2021-12-10"}}]})"};
        if (r.url.find("misp") != std::string::npos) return {200, R"({"response":{"Attribute":[]}})"};
        return {200, R"({"query_status":"no_results"})"};
    });
    enrich::LiveProvider provider(testing::dummy_credentials(), transport, {}, clock);
    std::vector<IocRecord> iocs{record(kUrl), record(kUrl), record(kMd5), record(kCve)};
    auto first = enrich::enrich_dataset(iocs, provider, {}, &cache);
    CHECK(first.verdicts.size() == 3 * 6);
    CHECK(first.failures.empty());
    CHECK(first.cache_hits == 0);
    std::size_t na = 0;
    for (auto& v : first.verdicts) na += v.status == VerdictStatus::NotApplicable;
    CHECK(na == 3 + 1 + 4);  // url: mb misp nvd; md5: nvd; cve: vt otx urlhaus mb
    const int network_calls = calls.load();

    auto second = enrich::enrich_dataset(iocs, provider, {}, &cache);
    CHECK(calls.load() == network_calls);
    CHECK(second.verdicts == first.verdicts);
    CHECK(second.cache_hits == 3 * 6 - na);
}

TEST_CASE("enrich_dataset records failures and stops on credential errors") {
    testing::FakeClock clock;
    testing::ScriptedTransport flaky([](const enrich::HttpRequest& r, int) -> enrich::HttpResponse {
        if (r.url.find("nvd") != std::string::npos) throw Error(ErrorCode::Network, "timeout");
        return {200, R"({"response":{"Attribute":[]}})"};
    });
    enrich::LiveProvider provider(testing::dummy_credentials(), flaky, {}, clock);
    enrich::EnrichOptions opts;
    opts.services = {ServiceId::Nvd, ServiceId::Misp};
    auto r = enrich::enrich_dataset({record(kCve)}, provider, opts);
    CHECK(r.verdicts.size() == 1);
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].service == ServiceId::Nvd);

    testing::ScriptedTransport denied([](const enrich::HttpRequest&, int) { return enrich::HttpResponse{403, ""}; });
    enrich::LiveProvider p2(testing::dummy_credentials(), denied, {}, clock);
    CHECK_THROWS_AS(enrich::enrich_dataset({record(kCve)}, p2, opts), Error);
}

TEST_CASE("parallel and serial enrichment agree") {
    auto dir = testing::fixture_dir() / "enrichment";
    enrich::FixtureProvider provider(dir);
    std::vector<IocRecord> iocs;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "vt")) {
        auto v = deserialize<Verdict>(read_file(entry.path()));
        iocs.push_back(record({v.ioc_value, v.ioc_type}));
    }
    enrich::EnrichOptions serial;
    serial.exec = Exec::Serial;
    auto a = enrich::enrich_dataset(iocs, provider, serial);
    auto b = enrich::enrich_dataset(iocs, provider, {});
    CHECK(a.verdicts == b.verdicts);
    CHECK(a.failures.empty());
    CHECK_THROWS_AS(enrich::FixtureProvider(dir / "does-not-exist"), Error);
}
