#include <doctest.h>

#include <zlib.h>

#include "ctikit/digest.hpp"
#include "ctikit/error.hpp"
#include "ctikit/serialize.hpp"
#include "ctikit/text.hpp"
#include "ctikit/time.hpp"
#include "generators.hpp"

using namespace ctikit;

TEST_CASE("timestamps render at second precision in UTC") {
    CHECK(Timestamp::from_civil(2021, 1, 5).iso8601() == "2021-01-05T00:00:00Z");
    CHECK(Timestamp(0).iso8601() == "1970-01-01T00:00:00Z");
    CHECK(Timestamp(-1).iso8601() == "1969-12-31T23:59:59Z");
    CHECK(Timestamp(-1).epoch_day() == -1);
    CHECK(Timestamp::from_civil(2024, 2, 29, 23, 59, 59).date_string() == "2024-02-29");
    CHECK(Timestamp::from_civil(2022, 12, 1).month_string() == "2022-12");
}

TEST_CASE("timestamp parsing accepts archive spellings") {
    const auto expect = Timestamp::from_civil(2021, 1, 5, 10, 0, 0);
    for (const char* s : {"2021-01-05T10:00:00Z", "2021-01-05T10:00:00.999Z", "2021-01-05 10:00:00",
                          "2021-01-05T12:00:00+02:00", "2021-01-05T10:00:00 UTC", "Tue Jan 05 10:00:00 +0000 2021"}) {
        CAPTURE(s);
        REQUIRE(parse_timestamp(s).has_value());
        CHECK(*parse_timestamp(s) == expect);
    }
    CHECK(*parse_timestamp("2021-01-05") == Timestamp::from_civil(2021, 1, 5));
    CHECK_FALSE(parse_timestamp("yesterday").has_value());
    CHECK_FALSE(parse_timestamp("2021-13-01").has_value());
    CHECK_FALSE(parse_timestamp("").has_value());
    CHECK_THROWS_AS(parse_timestamp_or_throw("nope"), Error);
}

TEST_CASE("iso8601 round-trips for random instants") {
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        Timestamp t(static_cast<std::int64_t>(rng.below(4'000'000'000ULL)) - 1'000'000'000);
        CHECK(*parse_timestamp(t.iso8601()) == t);
    }
}

TEST_CASE("hash subtype follows hex length only") {
    CHECK(hash_kind_for_length(32) == HashKind::Md5);
    CHECK(hash_kind_for_length(40) == HashKind::Sha1);
    CHECK(hash_kind_for_length(64) == HashKind::Sha256);
    CHECK(hash_kind_for_length(96) == HashKind::Sha3_384);
    CHECK(hash_kind_for_length(128) == HashKind::Sha512);
    CHECK_FALSE(hash_kind_for_length(48).has_value());
    for (auto name : {"url", "ip", "domain", "cve", "md5", "sha1", "sha256", "sha3_384", "sha512"})
        CHECK(IocType::from_name(name)->name() == name);
    CHECK_FALSE(IocType::from_name("sha224").has_value());
}

TEST_CASE("service acceptance matrix") {
    using K = IocType::Kind;
    CHECK(accepts(ServiceId::VirusTotal, K::Url));
    CHECK_FALSE(accepts(ServiceId::VirusTotal, K::Cve));
    CHECK(accepts(ServiceId::MalwareBazaar, K::Hash));
    CHECK_FALSE(accepts(ServiceId::MalwareBazaar, K::Url));
    CHECK(accepts(ServiceId::Misp, K::Cve));
    CHECK_FALSE(accepts(ServiceId::Misp, K::Domain));
    CHECK(accepts(ServiceId::Nvd, K::Cve));
    CHECK_FALSE(accepts(ServiceId::Nvd, K::Hash));
    for (auto s : kAllServices) CHECK(service_from_name(short_name(s)) == s);
    CHECK(is_malicious(VerdictStatus::Found));
    CHECK_FALSE(is_malicious(VerdictStatus::NotFound));
}

namespace {

IocRecord sample_ioc() {
    IocRecord r;
    r.user_name = "alice";
    r.published_date = Timestamp::from_civil(2021, 1, 5);
    r.ioc_value = "http://evil.com/a";
    r.ioc_type = IocType::url();
    r.hashtags = {"phishing", "malware"};
    r.tweet_url = "https://twitter.com/alice/status/1";
    r.was_defanged = true;
    return r;
}

}  // namespace

TEST_CASE("canonical serialization is deterministic and order-insensitive for sets") {
    auto a = sample_ioc();
    auto b = sample_ioc();
    b.hashtags = {"malware", "phishing"};
    CHECK(canonical_serialize(a) == canonical_serialize(a));
    CHECK(canonical_serialize(a) == canonical_serialize(b));
    CHECK(canonical_serialize(a).find("\"published_date\":\"2021-01-05T00:00:00Z\"") != std::string::npos);
    auto back = deserialize<IocRecord>(canonical_serialize(a));
    CHECK(back == canonical(a));
}

TEST_CASE("records round-trip through JSON") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        auto t = testing::random_timeline(rng, "acct" + std::to_string(i), {.posts = 3});
        for (auto& p : t.posts) {
            auto c = canonical(p);
            CHECK(deserialize<PostRecord>(canonical_serialize(c)) == c);
        }
        CHECK(deserialize<AccountProfile>(canonical_serialize(t.account)) ==
              [&] { auto a = t.account; a.description = text::nfc(a.description); return a; }());
        auto [value, type] = testing::random_ioc(rng);
        Verdict v{value, type, kAllServices[rng.below(6)], VerdictStatus::Found,
                  rng.below(2) ? std::optional<Timestamp>(Timestamp(1600000000)) : std::nullopt, "d"};
        CHECK(deserialize<Verdict>(canonical_serialize(v)) == v);
    }
}

TEST_CASE("serialization distinguishes distinct records") {
    auto a = sample_ioc();
    auto b = a;
    b.was_defanged = false;
    auto c = a;
    c.ioc_type = IocType::domain();
    CHECK(canonical_serialize(a) != canonical_serialize(b));
    CHECK(canonical_serialize(a) != canonical_serialize(c));
}

TEST_CASE("text is stored NFC") {
    PostRecord p;
    p.post_id = "1";
    p.author_id = "a";
    p.text = "cafe\xCC\x81";  // e + combining acute
    auto back = deserialize<PostRecord>(canonical_serialize(p));
    CHECK(back.text == "caf\xC3\xA9");
    CHECK(text::code_points(back.text) == 4);
}

TEST_CASE("from_json rejects invariant violations") {
    CHECK_THROWS_AS(deserialize<PostRecord>(R"({"post_id":"","author_id":"a","text":"x","created_at":"2021-01-01"})"), Error);
    CHECK_THROWS_AS(deserialize<PostRecord>(R"({"post_id":"1","author_id":"a","text":"x","created_at":"2021-01-01","like_count":-1})"), Error);
    CHECK_THROWS_AS(deserialize<AccountProfile>(R"({"author_id":"a","created_at":"2021-02-01","snapshot_at":"2021-01-01"})"), Error);
    CHECK_THROWS_AS(deserialize<IocRecord>(R"({"user_name":"a","published_date":"2021-01-01","ioc_value":"x","ioc_type":"sha224"})"), Error);
}

TEST_CASE("jsonl reader skips the schema header and reads gzip transparently") {
    auto dir = testing::scratch_dir("jsonl");
    {
        JsonlWriter w(dir / "a.jsonl", "iocs");
        w.write(Json(sample_ioc()));
        w.write(Json(sample_ioc()));
    }
    std::size_t n = 0;
    for_each_json(dir / "a.jsonl", [&](std::size_t line, const Json& j) {
        CHECK(line >= 2);
        CHECK(j.get<IocRecord>().user_name == "alice");
        ++n;
    });
    CHECK(n == 2);

    std::string raw = read_file(dir / "a.jsonl");
    gzFile gz = gzopen((dir / "a.jsonl.gz").c_str(), "wb");
    gzwrite(gz, raw.data(), static_cast<unsigned>(raw.size()));
    gzclose(gz);
    n = 0;
    for_each_json(dir / "a.jsonl.gz", [&](std::size_t, const Json&) { ++n; });
    CHECK(n == 2);

    write_file_atomic(dir / "bad.jsonl", "{\"a\":1}\n{oops\n");
    try {
        for_each_json(dir / "bad.jsonl", [](std::size_t, const Json&) {});
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.fragment() == "{oops");
    }
    CHECK_THROWS_AS(for_each_json(dir / "missing.jsonl", [](std::size_t, const Json&) {}), Error);
}

TEST_CASE("sha256 matches the published test vector") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
