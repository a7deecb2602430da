#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ctikit/parallel.hpp"
#include "ctikit/types.hpp"

namespace ctikit::preprocess {

/// Lowercase alphabetic tokens interleaved with indicator markers.
using TokenSequence = std::vector<std::string>;

inline constexpr std::string_view kDefangedMarker = "[defanged]";
std::string_view marker_for(IocType::Kind kind);
bool is_marker(std::string_view token);

class Stopwords {
public:
    /// data/stopwords_en_v1.txt
    static const Stopwords& builtin();
    static Stopwords parse(std::string_view contents);

    bool contains(std::string_view word) const { return words_.find(word) != words_.end(); }
    std::size_t size() const { return words_.size(); }

private:
    std::set<std::string, std::less<>> words_;
};

/// One application of the classic Porter (1980) suffix stripper to a lowercase word.
std::string porter_stem(std::string_view word);

/// porter_stem iterated to a fixpoint, so stem(stem(w)) == stem(w).
std::string stem(std::string_view word);

/// lowercase -> drop @mentions -> indicators to markers (defanged ones gain a
/// leading "[defanged]") -> keep only [a-z] outside markers -> drop 1-char tokens
/// -> stem -> drop stopwords.
TokenSequence preprocess(std::string_view text);

std::vector<TokenSequence> preprocess_batch(const std::vector<std::string>& texts,
                                            Exec exec = Exec::Parallel);

}  // namespace ctikit::preprocess
