#include <doctest.h>

#include <algorithm>
#include <set>

#include "ctikit/error.hpp"
#include "ctikit/ingest.hpp"
#include "ctikit/serialize.hpp"
#include "generators.hpp"

using namespace ctikit;

namespace {

PostRecord make(std::string id, std::string text, std::int64_t t, std::string lang = "en", bool rt = false) {
    PostRecord p;
    p.post_id = std::move(id);
    p.author_id = "a";
    p.text = std::move(text);
    p.created_at = Timestamp(t);
    p.lang = std::move(lang);
    p.is_retweet = rt;
    return p;
}

}  // namespace

TEST_CASE("load_archive keeps file order and reports malformed lines") {
    auto dir = testing::scratch_dir("ingest");
    write_file_atomic(dir / "empty.jsonl", "");
    CHECK(ingest::load_archive(dir / "empty.jsonl").posts.empty());

    std::string three;
    for (int i = 3; i >= 1; --i) three += Json(make(std::to_string(i), "t" + std::to_string(i), i)).dump() + "\n";
    write_file_atomic(dir / "three.jsonl", three);
    auto loaded = ingest::load_archive(dir / "three.jsonl");
    REQUIRE(loaded.posts.size() == 3);
    CHECK(loaded.posts[0].post_id == "3");
    CHECK(loaded.posts[2].post_id == "1");

    std::string bad = Json(make("1", "x", 1)).dump() + "\n{\"post_id\":\"2\"}\n" + Json(make("3", "y", 3)).dump() + "\n";
    write_file_atomic(dir / "bad.jsonl", bad);
    try {
        ingest::load_archive(dir / "bad.jsonl");
        FAIL("strict mode should throw");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    auto lenient = ingest::load_archive(dir / "bad.jsonl", ingest::Strictness::Lenient);
    CHECK(lenient.posts.size() == 2);
    REQUIRE(lenient.rejected.size() == 1);
    CHECK(lenient.rejected[0].line == 2);

    CHECK_THROWS_AS(ingest::load_archive(dir / "absent.jsonl"), Error);
}

TEST_CASE("serial and parallel archive parsing agree") {
    auto dir = testing::scratch_dir("ingest_par");
    Rng rng(3);
    std::string lines;
    for (int i = 0; i < 300; ++i) {
        auto t = testing::random_timeline(rng, "u" + std::to_string(i), {.posts = 1});
        lines += Json(t.posts[0]).dump() + "\n";
    }
    write_file_atomic(dir / "p.jsonl", lines);
    auto a = ingest::load_archive(dir / "p.jsonl", ingest::Strictness::Strict, Exec::Serial);
    auto b = ingest::load_archive(dir / "p.jsonl", ingest::Strictness::Strict, Exec::Parallel);
    CHECK(a.posts == b.posts);
}

TEST_CASE("filter_corpus examples") {
    SUBCASE("duplicate text keeps the earliest") {
        auto out = ingest::filter_corpus({make("2", "same", 20), make("1", "same", 10)}, "en");
        REQUIRE(out.posts.size() == 1);
        CHECK(out.posts[0].post_id == "1");
        CHECK(out.stats.duplicates_dropped == 1);
    }
    SUBCASE("retweets dropped by flag or prefix") {
        auto out = ingest::filter_corpus({make("1", "x", 1, "en", true), make("2", "RT @a: y", 2), make("3", "z", 3)}, "en");
        CHECK(out.posts.size() == 1);
        CHECK(out.stats.retweets_dropped == 2);
    }
    SUBCASE("unique originals are only sorted") {
        auto out = ingest::filter_corpus({make("b", "x", 5), make("a", "y", 5), make("c", "z", 1)}, "en");
        std::vector<std::string> ids;
        for (auto& p : out.posts) ids.push_back(p.post_id);
        CHECK(ids == std::vector<std::string>{"c", "a", "b"});
        CHECK(out.stats.non_english_dropped + out.stats.retweets_dropped + out.stats.duplicates_dropped == 0);
    }
    SUBCASE("other languages dropped") {
        auto out = ingest::filter_corpus({make("1", "hola", 1, "es"), make("2", "hi", 2, "en")}, "en");
        CHECK(out.stats.non_english_dropped == 1);
        CHECK(out.stats.retained == 1);
    }
}

TEST_CASE("filter_corpus properties on random corpora") {
    Rng rng(99);
    const std::vector<std::string> texts{"alpha", "beta", "gamma", "delta", "RT @x: beta", "eps"};
    for (int round = 0; round < 100; ++round) {
        std::vector<PostRecord> posts;
        std::size_t n = rng.below(40);
        for (std::size_t i = 0; i < n; ++i)
            posts.push_back(make("p" + std::to_string(i), testing::pick(rng, texts), static_cast<std::int64_t>(rng.below(20)),
                                 rng.below(5) == 0 ? "de" : "en", rng.below(8) == 0));
        auto out = ingest::filter_corpus(posts, "en");
        CHECK(out.stats.balanced());
        CHECK(out.stats.total_read == n);
        CHECK(std::is_sorted(out.posts.begin(), out.posts.end(),
                             [](auto& a, auto& b) { return a.created_at < b.created_at; }));
        std::set<std::string> seen;
        for (auto& p : out.posts) CHECK(seen.insert(p.text).second);
        auto again = ingest::filter_corpus(out.posts, "en");
        CHECK(again.posts == out.posts);
        CHECK(again.stats.retained == again.stats.total_read);
    }
}
