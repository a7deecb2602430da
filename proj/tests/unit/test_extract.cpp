#include <doctest.h>

#include <regex>

#include "ctikit/extract.hpp"
#include "generators.hpp"

using namespace ctikit;

namespace {

PostRecord post_with(std::string text, std::vector<std::string> urls = {}) {
    PostRecord p;
    p.post_id = "100";
    p.author_id = "alice";
    p.text = std::move(text);
    p.created_at = Timestamp::from_civil(2021, 3, 1);
    p.lang = "en";
    p.hashtags = {"b", "a"};
    p.urls = std::move(urls);
    return p;
}

}  // namespace

TEST_CASE("refang examples") {
    CHECK(extract::refang("hxxp://a[.]b/c") == "http://a.b/c");
    CHECK(extract::refang("1[.]1[.]1[.]1") == "1.1.1.1");
    CHECK(extract::refang("http://a.b/c") == "http://a.b/c");
    CHECK(extract::refang("HXXPS://x(.)y[dot]z") == "https://x.y.z");
    CHECK(extract::refang("user[at]mail[.]com") == "user@mail.com");
    CHECK(extract::refang("https[://]a.b") == "https://a.b");
    CHECK(extract::refang("http[:]//a.b") == "http://a.b");
    CHECK(extract::refang("plain words stay") == "plain words stay");
}

TEST_CASE("refang is idempotent on arbitrary strings") {
    Rng rng(17);
    const std::vector<std::string> atoms{"[", "]", ".", "(", ")", "dot", "hxxp", "x", ":", "//", "[.]", "[[.]]", "hXxP", "at", "@"};
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        for (std::size_t k = 0, n = rng.below(12); k < n; ++k) s += testing::pick(rng, atoms);
        auto once = extract::refang(s);
        CAPTURE(s);
        CHECK(extract::refang(once) == once);
    }
}

TEST_CASE("refang_mapped maps output bytes to source ranges") {
    auto r = extract::refang_mapped("a[.]b");
    CHECK(r.text == "a.b");
    REQUIRE(r.source_begin.size() == 3);
    CHECK(r.source_begin[1] == 1);
    CHECK(r.source_end[1] == 4);
    CHECK(r.source_begin[2] == 4);
}

TEST_CASE("extract_iocs examples") {
    auto cve = extract::extract_iocs(post_with("CVE-2021-20180 patched"));
    REQUIRE(cve.size() == 1);
    CHECK(cve[0].ioc_value == "CVE-2021-20180");
    CHECK(cve[0].ioc_type == IocType::cve());

    CHECK(extract::extract_iocs(post_with("visit https://twitter.com/x/status/1")).empty());

    Rng rng(1);
    auto h = testing::random_hex(rng, 64);
    auto hashes = extract::extract_iocs(post_with("sample " + h));
    REQUIRE(hashes.size() == 1);
    CHECK(hashes[0].ioc_type == IocType::hash(HashKind::Sha256));

    auto rec = extract::extract_iocs(post_with("drop at hxxp://bad[.]xyz/p"))[0];
    CHECK(rec.user_name == "alice");
    CHECK(rec.published_date == Timestamp::from_civil(2021, 3, 1));
    CHECK(rec.hashtags == std::vector<std::string>{"a", "b"});
    CHECK(rec.tweet_url == "https://twitter.com/alice/status/100");
    CHECK(rec.was_defanged);
    CHECK(rec.ioc_value == "http://bad.xyz/p");
}

TEST_CASE("exclusion list matches on host boundaries") {
    auto ex = extract::ExclusionList::defaults();
    CHECK(ex.blocks("twitter.com"));
    CHECK(ex.blocks("mobile.twitter.com"));
    CHECK_FALSE(ex.blocks("nottwitter.com"));
    CHECK(ex.blocks("YOUTU.BE"));
    auto dir = testing::scratch_dir("exclusions");
    write_file_atomic(dir / "ex.txt", "# custom\n.example.org\nbad.test\n");
    auto custom = extract::ExclusionList::from_file(dir / "ex.txt");
    CHECK(custom.blocks("a.example.org"));
    CHECK_FALSE(custom.blocks("twitter.com"));
    extract::ExtractOptions opts;
    opts.exclusions = custom;
    CHECK(extract::extract_iocs(post_with("https://twitter.com/a"), opts).size() == 1);
    CHECK(extract::extract_iocs(post_with("https://www.example.org/a"), opts).empty());
}

TEST_CASE("ip records are valid dotted quads") {
    const std::regex quad(R"(^(25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)(\.(25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)){3}$)");
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        std::string s = std::to_string(rng.below(400)) + "." + std::to_string(rng.below(300)) + "." +
                        std::to_string(rng.below(300)) + "." + std::to_string(rng.below(300));
        for (auto& r : extract::extract_iocs(post_with("host " + s + " seen")))
            if (r.ioc_type == IocType::ip()) CHECK(std::regex_match(r.ioc_value, quad));
    }
    CHECK(extract::extract_iocs(post_with("256.1.1.1")).empty());
    CHECK(extract::extract_iocs(post_with("01.2.3.4")).empty());
}

TEST_CASE("domains need a known final label and URLs do not double count") {
    CHECK(extract::extract_iocs(post_with("readme.md and main.py")).empty());
    CHECK(extract::extract_iocs(post_with("localhost")).empty());
    auto r = extract::extract_iocs(post_with("https://evil.com/a evil.com"));
    REQUIRE(r.size() == 2);
    CHECK(r[0].ioc_type == IocType::url());
    CHECK(r[1].ioc_type == IocType::domain());
    CHECK(extract::extract_iocs(post_with("https://evil.com/a")).size() == 1);
}

TEST_CASE("classification is stable for every emitted value") {
    Rng rng(23);
    for (int i = 0; i < 500; ++i) {
        std::string text;
        for (std::size_t k = 0, n = 1 + rng.below(4); k < n; ++k) {
            auto [v, type] = testing::random_ioc(rng);
            text += (rng.below(2) ? testing::random_defang(rng, v) : v) + " and ";
        }
        for (auto& rec : extract::extract_iocs(post_with(text))) {
            CAPTURE(rec.ioc_value);
            CHECK(extract::classify(rec.ioc_value) == rec.ioc_type);
            CHECK(rec.ioc_value.find("[.]") == std::string::npos);
            CHECK(rec.ioc_value.find("hxxp") == std::string::npos);
        }
    }
}

TEST_CASE("random defangs round-trip through extraction") {
    Rng rng(29);
    for (int i = 0; i < 500; ++i) {
        auto [v, type] = testing::random_ioc(rng);
        auto d = testing::random_defang(rng, v);
        auto got = extract::extract_iocs(post_with("ioc: " + d + " end"));
        CAPTURE(d);
        REQUIRE(got.size() == 1);
        CHECK(got[0].ioc_value == v);
        CHECK(got[0].ioc_type == type);
        CHECK(got[0].was_defanged == (d != v));
    }
}

TEST_CASE("dedup keeps the earliest record per indicator") {
    auto a = extract::extract_iocs(post_with("http://x.com/a"))[0];
    auto b = a;
    b.published_date = Timestamp(a.published_date.epoch_seconds() - 100);
    b.tweet_url = "later-listed-but-earlier";
    auto out = extract::dedup_iocs({a, b});
    REQUIRE(out.size() == 1);
    CHECK(out[0].tweet_url == "later-listed-but-earlier");
    CHECK(extract::dedup_iocs({}).empty());

    Rng rng(31);
    std::vector<IocRecord> distinct;
    for (int i = 0; i < 50; ++i) {
        auto r = a;
        r.ioc_value = "http://h" + std::to_string(i) + ".com/";
        r.published_date = Timestamp(static_cast<std::int64_t>(rng.below(1000)));
        distinct.push_back(r);
    }
    auto sorted = extract::dedup_iocs(distinct);
    CHECK(sorted.size() == 50);
    CHECK(std::is_sorted(sorted.begin(), sorted.end(),
                         [](auto& x, auto& y) { return x.published_date < y.published_date; }));
}

TEST_CASE("serial and parallel batch extraction agree") {
    Rng rng(37);
    std::vector<PostRecord> posts;
    for (int i = 0; i < 300; ++i) {
        auto p = post_with(testing::random_defang(rng, testing::random_url(rng)) + " " + testing::random_ipv4(rng));
        p.post_id = std::to_string(i);
        posts.push_back(p);
    }
    CHECK(extract::extract_batch(posts, {}, Exec::Serial) == extract::extract_batch(posts, {}, Exec::Parallel));
}
