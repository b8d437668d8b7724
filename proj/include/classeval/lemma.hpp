#ifndef CLASSEVAL_LEMMA_HPP
#define CLASSEVAL_LEMMA_HPP

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "classeval/error.hpp"
#include "classeval/textproc.hpp"

namespace classeval {

/// Lemmas in canonical script. May be longer than the token count when
/// compounds or sandhi are split.
using LemmaSequence = std::vector<std::string>;

class LexiconMissing : public Error {
public:
    explicit LexiconMissing(const std::string& path) : Error("lexicon not found: " + path) {}
};

class ExternalLemmatizerUnavailable : public Error {
public:
    using Error::Error;
};

/// Interface for every lemmatizer. Input is one sentence in canonical script.
class Lemmatizer {
public:
    virtual ~Lemmatizer() = default;
    virtual LemmaSequence lemmatize(std::string_view canonical_sentence) const = 0;
    /// Stable description recorded in reports and used in cache keys.
    virtual std::string kind() const = 0;
};

class IdentityLemmatizer final : public Lemmatizer {
public:
    LemmaSequence lemmatize(std::string_view canonical_sentence) const override;
    std::string kind() const override { return "identity"; }
};

/// Lexicon-backed lemmatizer.
///
/// File format: UTF-8 TSV, `surface<TAB>lemma1 lemma2 ...`, one entry per line;
/// blank lines and lines starting with `#` are ignored. Entries are written in
/// `file_script` and converted to canonical script on load; a repeated surface
/// keeps the last entry.
///
/// A token found verbatim in the lexicon yields its lemmas. Otherwise the token
/// is segmented greedily left to right, taking the longest lexicon surface that
/// is a prefix of the remainder. If segmentation cannot cover the whole token
/// the token passes through unchanged.
class LexiconLemmatizer final : public Lemmatizer {
public:
    explicit LexiconLemmatizer(const std::filesystem::path& path,
                               Script file_script = Script::IAST);

    /// Builds from in-memory entries already in canonical script.
    explicit LexiconLemmatizer(std::unordered_map<std::string, LemmaSequence> entries,
                               std::string label = "inline");

    LemmaSequence lemmatize(std::string_view canonical_sentence) const override;
    std::string kind() const override { return "lexicon:" + label_; }
    std::size_t size() const noexcept { return entries_.size(); }

private:
    void segment(const std::string& token, LemmaSequence& out) const;

    std::unordered_map<std::string, LemmaSequence> entries_;
    std::size_t longest_surface_ = 0;
    std::string label_;
};

class ChildProcess;

struct ExternalLemmatizerOptions {
    std::string command;  // run through /bin/sh -c
    Script io_script = Script::IAST;
    std::chrono::milliseconds timeout{30000};
    std::size_t pool_size = 1;
};

/// Delegates to a long-running child process speaking a line protocol over its
/// standard streams: one sentence per line in, space-separated lemmas per line
/// out. Each child serves one request at a time; `pool_size` children run.
class ExternalLemmatizer final : public Lemmatizer {
public:
    explicit ExternalLemmatizer(ExternalLemmatizerOptions options);
    ~ExternalLemmatizer() override;
    ExternalLemmatizer(const ExternalLemmatizer&) = delete;
    ExternalLemmatizer& operator=(const ExternalLemmatizer&) = delete;

    LemmaSequence lemmatize(std::string_view canonical_sentence) const override;
    std::string kind() const override { return "external:" + options_.command; }

private:
    struct Pool;
    ExternalLemmatizerOptions options_;
    std::unique_ptr<Pool> pool_;
};

struct LemmaScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Bag-of-lemmas precision/recall over multiset intersection.
/// Both empty scores 1; exactly one side empty scores 0.
LemmaScore lemma_f1(const LemmaSequence& predicted, const LemmaSequence& gold);

/// Normalizes a sentence in `script` (daṇḍa and punctuation stripped) and
/// converts it to canonical script, ready for a Lemmatizer.
std::string prepare_for_lemmatizer(std::string_view text, Script script);

struct LemmatizeCorpusStats {
    std::size_t lemmatizer_calls = 0;
    bool cache_hit = false;
};

/// Fills `lemmas` of every chunk. With a cache directory the result is stored
/// in a content-addressed file keyed by the corpus digest and lemmatizer kind,
/// and a later run with the same key never calls the lemmatizer.
std::vector<DocumentChunk> lemmatize_corpus(std::vector<DocumentChunk> chunks,
                                            const Lemmatizer& lemmatizer, Script corpus_script,
                                            const std::optional<std::filesystem::path>& cache_dir,
                                            LemmatizeCorpusStats* stats = nullptr);

/// Lower-hex SHA-256 of the chunk ids and raw texts.
std::string corpus_digest(const std::vector<DocumentChunk>& chunks);

}  // namespace classeval

#endif  // CLASSEVAL_LEMMA_HPP
