#ifndef CLASSEVAL_PARSERS_HPP
#define CLASSEVAL_PARSERS_HPP

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "classeval/metrics.hpp"

namespace classeval {

// None of these throw on malformed model output; failures set `failed`.

struct TaggedDictParse {
    NerPrediction prediction;
    bool failed = false;
    std::string error;
};

/// First brace block that parses as a dict of quoted keys to a quoted string
/// or a list of quoted strings. Accepts ' " ‘ ’ “ ” and ` as quotes, trailing
/// commas, a doubled {{ }} wrapper and prose around the block. Values are
/// split on whitespace into words.
TaggedDictParse parse_tagged_dict(std::string_view raw);

struct ScoredListParse {
    std::vector<std::pair<std::string, double>> items;
    bool failed = false;
};

/// Every "(item, number)" tuple in order. Scores are clamped to [0, 1]; a
/// repeated item keeps its first position and the highest score.
ScoredListParse parse_scored_list(std::string_view raw);

struct BinaryParse {
    int value = 0;
    bool failed = false;
};

/// First standalone 0 or 1 (ASCII or Devanagari digit); 0 with `failed` set
/// when there is none.
BinaryParse parse_binary(std::string_view raw);

}  // namespace classeval

#endif  // CLASSEVAL_PARSERS_HPP
