#ifndef CLASSEVAL_METRICS_HPP
#define CLASSEVAL_METRICS_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "classeval/error.hpp"
#include "classeval/lemma.hpp"
#include "classeval/textproc.hpp"

namespace classeval {

class LengthMismatch : public Error {
public:
    LengthMismatch(std::size_t a, std::size_t b)
        : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class SentenceCountMismatch : public Error {
public:
    SentenceCountMismatch(std::size_t gold, std::size_t pred)
        : Error("gold has " + std::to_string(gold) + " sentences, predictions " +
                std::to_string(pred)) {}
};

class TooFewItems : public Error {
public:
    TooFewItems(std::size_t items, std::size_t chunks)
        : Error(std::to_string(items) + " items cannot fill " + std::to_string(chunks) + " chunks") {}
};

// ---------------------------------------------------------------------------
// Exact match

enum class EmMode { Inflected, Lemmatized };

/// Scores predictions against acceptable answers in canonical script.
/// Both sides are normalized with daṇḍa and punctuation stripped; Lemmatized
/// mode also runs both through the lemmatizer and compares lemma sequences.
class ExactMatcher {
public:
    ExactMatcher(Script answer_script, Script prediction_script, const Lemmatizer* lemmatizer);

    /// Throws std::invalid_argument for an empty acceptable set, and for
    /// Lemmatized mode without a lemmatizer.
    int score(std::string_view prediction, const std::vector<std::string>& acceptable,
              EmMode mode) const;

    /// Same, with separately supplied lemmatized gold forms (used as given).
    int score_lemmatized(std::string_view prediction, const std::vector<std::string>& acceptable,
                         const std::vector<std::string>& acceptable_lemmatized) const;

private:
    std::string canonical(std::string_view text, Script script) const;

    Script answer_script_;
    Script prediction_script_;
    const Lemmatizer* lemmatizer_;
};

// ---------------------------------------------------------------------------
// BLEU

inline constexpr int kDefaultBleuOrder = 4;
inline constexpr double kSentenceBleuEpsilon = 0.1;

/// Corpus BLEU on a 0..1 scale: clipped n-gram counts summed over the corpus,
/// geometric mean of the modified precisions times the brevity penalty, no
/// smoothing. Reference length is the closest reference per sentence (the
/// shorter one on ties). Orders for which the corpus has no candidate n-grams
/// (every candidate shorter than n) are left out of the mean. Tokens are
/// whitespace-separated words of the normalized text.
/// Throws LengthMismatch, and std::invalid_argument for an item without references.
double corpus_bleu(const std::vector<std::string>& candidates,
                   const std::vector<std::vector<std::string>>& references,
                   int max_n = kDefaultBleuOrder);

/// Sentence-level BLEU; a zero n-gram match count is replaced by epsilon so
/// the logarithm stays finite. No match at any order scores 0.
double sentence_bleu(std::string_view candidate, const std::vector<std::string>& references,
                     int max_n = kDefaultBleuOrder, double epsilon = kSentenceBleuEpsilon);

// ---------------------------------------------------------------------------
// NER

inline constexpr std::string_view kOutsideTag = "O";

/// Tag -> predicted surface words, in the order the model emitted them.
struct NerPrediction {
    std::vector<std::pair<std::string, std::vector<std::string>>> entries;

    bool empty() const noexcept { return entries.empty(); }
    bool operator==(const NerPrediction&) const = default;
};

struct SpuriousWord {
    std::string tag;
    std::string word;
};

struct NerAlignment {
    std::vector<std::string> tags;  // one per sentence token
    std::vector<SpuriousWord> spurious;
};

/// Each predicted (tag, word) claims the first unclaimed token with the same
/// surface; unclaimed tokens are "O"; words with no free token are spurious.
NerAlignment align_ner(const std::vector<Token>& sentence_tokens, const NerPrediction& prediction);

/// Entity type of a BI tag ("B-LOC" -> "LOC"); "O" stays "O".
std::string entity_type(std::string_view tag);

struct ConfusionMatrix {
    std::vector<std::string> labels;                  // entity types, then "O"
    std::vector<std::vector<std::int64_t>> counts;    // [gold][predicted]
    std::vector<std::vector<double>> row_normalized;  // rows with no counts stay zero
};

struct TagScore {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct NerScore {
    std::map<std::string, TagScore> per_tag;  // BI-prefixed tags, "O" excluded
    double macro_f1 = 0.0;
    ConfusionMatrix confusion;
};

/// Token-level scoring over BI tags; spurious predicted words count as false
/// positives of their tag. Macro-F1 averages over every tag seen in gold or
/// predictions; with no entity tags anywhere it is 1.
/// Throws SentenceCountMismatch (and LengthMismatch for a sentence whose
/// predicted tags do not match its gold length).
NerScore ner_macro_f1(const std::vector<std::vector<std::string>>& gold_tags,
                      const std::vector<NerAlignment>& predictions);

/// Convenience: aligns each prediction against the gold sentence tokens first.
NerScore ner_macro_f1(const std::vector<std::vector<Token>>& sentences,
                      const std::vector<std::vector<std::string>>& gold_tags,
                      const std::vector<NerPrediction>& predictions);

// ---------------------------------------------------------------------------
// Chunked summaries

inline constexpr std::size_t kDefaultSummaryChunks = 10;

struct ChunkedSummary {
    std::size_t n_chunks = 0;
    std::vector<std::size_t> chunk_sizes;
    std::vector<double> per_chunk_means;
    double mean = 0.0;  // of the chunk means
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
    double overall_mean = 0.0;  // of the items
};

/// Splits the scores into contiguous equal-size chunks in order (the remainder
/// joins the last chunk) and summarises the chunk means. Quartiles use linear
/// interpolation between order statistics. A seed shuffles the items first.
/// Throws TooFewItems.
ChunkedSummary chunked_summary(const std::vector<double>& per_item_scores,
                               std::size_t n_chunks = kDefaultSummaryChunks,
                               std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// Linear-interpolation quantile of sorted values, q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

}  // namespace classeval

#endif  // CLASSEVAL_METRICS_HPP
