#include "classeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "classeval/sampling.hpp"

namespace classeval {

// ---------------------------------------------------------------------------
// Exact match

ExactMatcher::ExactMatcher(Script answer_script, Script prediction_script,
                           const Lemmatizer* lemmatizer)
    : answer_script_(answer_script), prediction_script_(prediction_script), lemmatizer_(lemmatizer) {}

std::string ExactMatcher::canonical(std::string_view text, Script script) const {
    return prepare_for_lemmatizer(text, script);
}

namespace {

std::string join(const LemmaSequence& lemmas) {
    std::string out;
    for (std::size_t i = 0; i < lemmas.size(); ++i) {
        if (i) out.push_back(' ');
        out += lemmas[i];
    }
    return out;
}

}  // namespace

int ExactMatcher::score(std::string_view prediction, const std::vector<std::string>& acceptable,
                        EmMode mode) const {
    if (acceptable.empty()) throw std::invalid_argument("exact_match needs at least one acceptable answer");
    if (mode == EmMode::Lemmatized && lemmatizer_ == nullptr)
        throw std::invalid_argument("lemmatized exact match needs a lemmatizer");

    const std::string pred = canonical(prediction, prediction_script_);
    if (mode == EmMode::Inflected) {
        for (const auto& gold : acceptable)
            if (canonical(gold, answer_script_) == pred) return 1;
        return 0;
    }
    const std::string pred_lemmas = join(lemmatizer_->lemmatize(pred));
    for (const auto& gold : acceptable)
        if (join(lemmatizer_->lemmatize(canonical(gold, answer_script_))) == pred_lemmas) return 1;
    return 0;
}

int ExactMatcher::score_lemmatized(std::string_view prediction,
                                   const std::vector<std::string>& acceptable,
                                   const std::vector<std::string>& acceptable_lemmatized) const {
    if (acceptable_lemmatized.empty()) return score(prediction, acceptable, EmMode::Lemmatized);
    if (lemmatizer_ == nullptr) throw std::invalid_argument("lemmatized exact match needs a lemmatizer");
    const std::string pred_lemmas = join(lemmatizer_->lemmatize(canonical(prediction, prediction_script_)));
    for (const auto& gold : acceptable_lemmatized)
        if (canonical(gold, answer_script_) == pred_lemmas) return 1;
    return 0;
}

// ---------------------------------------------------------------------------
// BLEU

namespace {

using Words = std::vector<std::string>;
using NgramCounts = std::map<Words, std::int64_t>;

Words bleu_tokens(std::string_view text) {
    Words out;
    for (auto& t : tokenize(normalize(text))) out.push_back(std::move(t.surface));
    return out;
}

NgramCounts ngrams(const Words& words, std::size_t n) {
    NgramCounts counts;
    if (words.size() < n) return counts;
    for (std::size_t i = 0; i + n <= words.size(); ++i)
        ++counts[Words(words.begin() + static_cast<std::ptrdiff_t>(i),
                       words.begin() + static_cast<std::ptrdiff_t>(i + n))];
    return counts;
}

struct BleuStats {
    std::vector<std::int64_t> matches;
    std::vector<std::int64_t> totals;
    std::int64_t candidate_len = 0;
    std::int64_t reference_len = 0;
};

void accumulate(BleuStats& stats, const Words& candidate, const std::vector<Words>& references,
                int max_n) {
    stats.candidate_len += static_cast<std::int64_t>(candidate.size());
    // Closest reference length, shorter on ties.
    std::int64_t best = -1;
    for (const auto& ref : references) {
        const auto len = static_cast<std::int64_t>(ref.size());
        const auto diff = std::llabs(len - static_cast<std::int64_t>(candidate.size()));
        const auto best_diff = std::llabs(best - static_cast<std::int64_t>(candidate.size()));
        if (best < 0 || diff < best_diff || (diff == best_diff && len < best)) best = len;
    }
    stats.reference_len += best;

    for (int n = 1; n <= max_n; ++n) {
        const auto cand = ngrams(candidate, static_cast<std::size_t>(n));
        NgramCounts max_ref;
        for (const auto& ref : references)
            for (const auto& [gram, count] : ngrams(ref, static_cast<std::size_t>(n)))
                max_ref[gram] = std::max(max_ref[gram], count);
        std::int64_t matched = 0;
        std::int64_t total = 0;
        for (const auto& [gram, count] : cand) {
            total += count;
            const auto it = max_ref.find(gram);
            if (it != max_ref.end()) matched += std::min(count, it->second);
        }
        stats.matches[static_cast<std::size_t>(n - 1)] += matched;
        stats.totals[static_cast<std::size_t>(n - 1)] += total;
    }
}

double bleu_from_stats(const BleuStats& stats, int max_n, std::optional<double> epsilon) {
    if (stats.candidate_len == 0) return 0.0;
    if (std::all_of(stats.matches.begin(), stats.matches.end(), [](std::int64_t m) { return m == 0; })) return 0.0;
    double log_sum = 0.0;
    int orders = 0;
    for (int n = 0; n < max_n; ++n) {
        const auto total = stats.totals[static_cast<std::size_t>(n)];
        if (total == 0) continue;
        double matched = static_cast<double>(stats.matches[static_cast<std::size_t>(n)]);
        if (matched == 0.0) {
            if (!epsilon) return 0.0;
            matched = *epsilon;
        }
        log_sum += std::log(matched / static_cast<double>(total));
        ++orders;
    }
    if (orders == 0) return 0.0;
    const double c = static_cast<double>(stats.candidate_len);
    const double r = static_cast<double>(stats.reference_len);
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum / orders);
}

void check_order(int max_n) {
    if (max_n < 1) throw std::invalid_argument("BLEU order must be >= 1");
}

}  // namespace

double corpus_bleu(const std::vector<std::string>& candidates,
                   const std::vector<std::vector<std::string>>& references, int max_n) {
    check_order(max_n);
    if (candidates.size() != references.size())
        throw LengthMismatch(candidates.size(), references.size());
    BleuStats stats;
    stats.matches.assign(static_cast<std::size_t>(max_n), 0);
    stats.totals.assign(static_cast<std::size_t>(max_n), 0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (references[i].empty())
            throw std::invalid_argument("item " + std::to_string(i) + " has no references");
        std::vector<Words> refs;
        for (const auto& ref : references[i]) refs.push_back(bleu_tokens(ref));
        accumulate(stats, bleu_tokens(candidates[i]), refs, max_n);
    }
    return bleu_from_stats(stats, max_n, std::nullopt);
}

double sentence_bleu(std::string_view candidate, const std::vector<std::string>& references,
                     int max_n, double epsilon) {
    check_order(max_n);
    if (references.empty()) throw std::invalid_argument("sentence_bleu needs a reference");
    BleuStats stats;
    stats.matches.assign(static_cast<std::size_t>(max_n), 0);
    stats.totals.assign(static_cast<std::size_t>(max_n), 0);
    std::vector<Words> refs;
    for (const auto& ref : references) refs.push_back(bleu_tokens(ref));
    accumulate(stats, bleu_tokens(candidate), refs, max_n);
    return bleu_from_stats(stats, max_n, epsilon);
}

// ---------------------------------------------------------------------------
// NER

NerAlignment align_ner(const std::vector<Token>& sentence_tokens, const NerPrediction& prediction) {
    NerAlignment out;
    out.tags.assign(sentence_tokens.size(), std::string(kOutsideTag));
    std::vector<bool> claimed(sentence_tokens.size(), false);
    for (const auto& [tag, words] : prediction.entries) {
        for (const auto& word : words) {
            bool placed = false;
            for (std::size_t i = 0; i < sentence_tokens.size(); ++i) {
                if (!claimed[i] && sentence_tokens[i].surface == word) {
                    claimed[i] = true;
                    out.tags[i] = tag;
                    placed = true;
                    break;
                }
            }
            if (!placed) out.spurious.push_back(SpuriousWord{tag, word});
        }
    }
    return out;
}

std::string entity_type(std::string_view tag) {
    if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-')
        return std::string(tag.substr(2));
    return std::string(tag);
}

NerScore ner_macro_f1(const std::vector<std::vector<std::string>>& gold_tags,
                      const std::vector<NerAlignment>& predictions) {
    if (gold_tags.size() != predictions.size())
        throw SentenceCountMismatch(gold_tags.size(), predictions.size());

    NerScore result;
    std::map<std::pair<std::string, std::string>, std::int64_t> pair_counts;
    std::set<std::string> types;
    for (std::size_t s = 0; s < gold_tags.size(); ++s) {
        const auto& gold = gold_tags[s];
        const auto& pred = predictions[s].tags;
        if (gold.size() != pred.size()) throw LengthMismatch(gold.size(), pred.size());
        for (std::size_t t = 0; t < gold.size(); ++t) {
            const std::string& g = gold[t];
            const std::string& p = pred[t];
            if (g == p) {
                if (g != kOutsideTag) ++result.per_tag[g].tp;
            } else {
                if (p != kOutsideTag) ++result.per_tag[p].fp;
                if (g != kOutsideTag) ++result.per_tag[g].fn;
            }
            const std::string gt = entity_type(g);
            const std::string pt = entity_type(p);
            if (gt != kOutsideTag) types.insert(gt);
            if (pt != kOutsideTag) types.insert(pt);
            ++pair_counts[{gt, pt}];
        }
        for (const auto& extra : predictions[s].spurious) {
            if (extra.tag != kOutsideTag) ++result.per_tag[extra.tag].fp;
        }
    }

    double f1_sum = 0.0;
    for (auto& [tag, score] : result.per_tag) {
        const auto ratio = [](std::int64_t num, std::int64_t den) {
            return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
        };
        score.precision = ratio(score.tp, score.tp + score.fp);
        score.recall = ratio(score.tp, score.tp + score.fn);
        score.f1 = score.precision + score.recall > 0.0
                       ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                       : 0.0;
        f1_sum += score.f1;
    }
    result.macro_f1 =
        result.per_tag.empty() ? 1.0 : f1_sum / static_cast<double>(result.per_tag.size());

    ConfusionMatrix& cm = result.confusion;
    cm.labels.assign(types.begin(), types.end());
    cm.labels.emplace_back(kOutsideTag);
    const std::size_t n = cm.labels.size();
    cm.counts.assign(n, std::vector<std::int64_t>(n, 0));
    cm.row_normalized.assign(n, std::vector<double>(n, 0.0));
    const auto label_index = [&](const std::string& label) {
        return static_cast<std::size_t>(std::find(cm.labels.begin(), cm.labels.end(), label) -
                                        cm.labels.begin());
    };
    for (const auto& [key, count] : pair_counts)
        cm.counts[label_index(key.first)][label_index(key.second)] += count;
    for (std::size_t r = 0; r < n; ++r) {
        std::int64_t row_total = 0;
        for (auto c : cm.counts[r]) row_total += c;
        if (row_total == 0) continue;
        for (std::size_t c = 0; c < n; ++c)
            cm.row_normalized[r][c] =
                static_cast<double>(cm.counts[r][c]) / static_cast<double>(row_total);
    }
    return result;
}

NerScore ner_macro_f1(const std::vector<std::vector<Token>>& sentences,
                      const std::vector<std::vector<std::string>>& gold_tags,
                      const std::vector<NerPrediction>& predictions) {
    if (sentences.size() != gold_tags.size()) throw SentenceCountMismatch(gold_tags.size(), sentences.size());
    if (predictions.size() != gold_tags.size())
        throw SentenceCountMismatch(gold_tags.size(), predictions.size());
    std::vector<NerAlignment> aligned;
    aligned.reserve(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i)
        aligned.push_back(align_ner(sentences[i], predictions[i]));
    return ner_macro_f1(gold_tags, aligned);
}

// ---------------------------------------------------------------------------
// Chunked summaries

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

ChunkedSummary chunked_summary(const std::vector<double>& per_item_scores, std::size_t n_chunks,
                               std::optional<std::uint64_t> shuffle_seed) {
    if (n_chunks == 0) throw std::invalid_argument("n_chunks must be >= 1");
    if (per_item_scores.size() < n_chunks) throw TooFewItems(per_item_scores.size(), n_chunks);

    std::vector<double> scores = per_item_scores;
    if (shuffle_seed) {
        Rng rng(*shuffle_seed);
        const auto order = shuffled_indices(rng, scores.size());
        for (std::size_t i = 0; i < order.size(); ++i) scores[i] = per_item_scores[order[i]];
    }

    ChunkedSummary summary;
    summary.n_chunks = n_chunks;
    const std::size_t base = scores.size() / n_chunks;
    std::size_t start = 0;
    double item_sum = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        const std::size_t size = c + 1 == n_chunks ? scores.size() - start : base;
        double sum = 0.0;
        for (std::size_t i = start; i < start + size; ++i) sum += scores[i];
        item_sum += sum;
        summary.chunk_sizes.push_back(size);
        summary.per_chunk_means.push_back(sum / static_cast<double>(size));
        start += size;
    }
    summary.overall_mean = item_sum / static_cast<double>(scores.size());

    std::vector<double> sorted = summary.per_chunk_means;
    std::sort(sorted.begin(), sorted.end());
    double mean_sum = 0.0;
    for (double m : sorted) mean_sum += m;
    summary.mean = mean_sum / static_cast<double>(sorted.size());
    summary.median = quantile_sorted(sorted, 0.5);
    summary.q1 = quantile_sorted(sorted, 0.25);
    summary.q3 = quantile_sorted(sorted, 0.75);
    summary.min = sorted.front();
    summary.max = sorted.back();
    return summary;
}

}  // namespace classeval
