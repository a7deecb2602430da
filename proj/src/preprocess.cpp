#include "ctikit/preprocess.hpp"

#include "ctikit/extract.hpp"
#include "ctikit/text.hpp"
#include "embedded_data.hpp"

namespace ctikit::preprocess {

namespace {

constexpr std::string_view kMarkers[] = {"[url]", "[ip]", "[domain]", "[hash]", "[cve]",
                                         kDefangedMarker};

struct Piece {
    bool marker;
    std::string text;
};

void alpha_tokens(std::string_view plain, std::vector<std::string>& out) {
    std::string current;
    for (char c : plain) {
        if (c >= 'a' && c <= 'z') {
            current.push_back(c);
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
}

}  // namespace

std::string_view marker_for(IocType::Kind kind) {
    switch (kind) {
        case IocType::Kind::Url: return "[url]";
        case IocType::Kind::Ip: return "[ip]";
        case IocType::Kind::Domain: return "[domain]";
        case IocType::Kind::Hash: return "[hash]";
        case IocType::Kind::Cve: return "[cve]";
    }
    return "[url]";
}

bool is_marker(std::string_view token) {
    for (auto m : kMarkers)
        if (m == token) return true;
    return false;
}

const Stopwords& Stopwords::builtin() {
    static const Stopwords list = parse(data::kStopwordsEnV1);
    return list;
}

Stopwords Stopwords::parse(std::string_view contents) {
    Stopwords list;
    std::size_t pos = 0;
    while (pos < contents.size()) {
        auto nl = contents.find('\n', pos);
        auto line = contents.substr(pos, nl == std::string_view::npos ? contents.npos : nl - pos);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        for (auto w : text::split_whitespace(line)) list.words_.insert(text::ascii_lower(w));
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return list;
}

TokenSequence preprocess(std::string_view raw) {
    // (i) lowercase
    const std::string lowered = text::ascii_lower(raw);

    // (ii) mentions
    std::string without_mentions;
    for (auto word : text::split_whitespace(lowered)) {
        if (word.starts_with('@')) continue;
        if (!without_mentions.empty()) without_mentions.push_back(' ');
        without_mentions.append(word);
    }

    // (iii)+(iv) indicators become markers; defanged ones are flagged as such
    static const extract::IocScanner scanner;
    std::vector<Piece> pieces;
    std::size_t cursor = 0;
    for (const auto& m : scanner.scan(without_mentions)) {
        if (m.begin > cursor)
            pieces.push_back({false, without_mentions.substr(cursor, m.begin - cursor)});
        if (m.defanged) pieces.push_back({true, std::string(kDefangedMarker)});
        pieces.push_back({true, std::string(marker_for(m.type.kind()))});
        cursor = m.end;
    }
    if (cursor < without_mentions.size()) pieces.push_back({false, without_mentions.substr(cursor)});

    // (v) non-alphabetic removal, (vi) single characters
    std::vector<std::string> tokens;
    for (auto& piece : pieces) {
        if (piece.marker) {
            tokens.push_back(std::move(piece.text));
            continue;
        }
        std::vector<std::string> words;
        alpha_tokens(piece.text, words);
        for (auto& w : words)
            if (w.size() > 1) tokens.push_back(std::move(w));
    }

    // (vii) stemming, (viii) stopwords
    const Stopwords& stopwords = Stopwords::builtin();
    TokenSequence out;
    out.reserve(tokens.size());
    for (auto& token : tokens) {
        if (is_marker(token)) {
            out.push_back(std::move(token));
            continue;
        }
        if (stopwords.contains(token)) continue;
        std::string stemmed = stem(token);
        if (stemmed.size() < 2 || stopwords.contains(stemmed)) continue;
        out.push_back(std::move(stemmed));
    }
    return out;
}

std::vector<TokenSequence> preprocess_batch(const std::vector<std::string>& texts, Exec exec) {
    std::vector<TokenSequence> out(texts.size());
    for_each_index(exec, texts.size(), [&](std::size_t i) { out[i] = preprocess(texts[i]); });
    return out;
}

}  // namespace ctikit::preprocess
