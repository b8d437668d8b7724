#ifndef CLASSEVAL_RETRIEVAL_HPP
#define CLASSEVAL_RETRIEVAL_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "classeval/error.hpp"
#include "classeval/lemma.hpp"
#include "classeval/textproc.hpp"

namespace classeval {

class UnlemmatizedChunk : public Error {
public:
    explicit UnlemmatizedChunk(const std::string& id)
        : Error("chunk has no lemmas: " + id), id_(id) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class DuplicateChunk : public Error {
public:
    explicit DuplicateChunk(const std::string& id) : Error("duplicate chunk id: " + id) {}
};

class UnknownChunk : public Error {
public:
    explicit UnknownChunk(const std::string& id) : Error("unknown chunk id: " + id) {}
};

struct Bm25Params {
    double k1 = 1.5;  // term-frequency saturation
    double b = 0.75;  // length normalization
};

struct Posting {
    std::size_t chunk = 0;  // position in RetrievalIndex::chunks()
    std::size_t tf = 0;
};

/// Immutable term statistics over lemmatized chunks.
class RetrievalIndex {
public:
    /// Throws EmptyCorpus, UnlemmatizedChunk or DuplicateChunk.
    static RetrievalIndex build(std::vector<DocumentChunk> chunks, Bm25Params params = {});

    const std::vector<DocumentChunk>& chunks() const noexcept { return chunks_; }
    const Bm25Params& params() const noexcept { return params_; }
    std::size_t size() const noexcept { return chunks_.size(); }

    std::size_t doc_freq(std::string_view lemma) const;
    std::size_t doc_len(std::size_t chunk) const { return doc_len_.at(chunk); }
    double avg_len() const noexcept { return avg_len_; }
    const std::vector<Posting>& postings(std::string_view lemma) const;
    /// Number of occurrences of `lemma` in chunk `chunk`.
    std::size_t term_freq(std::string_view lemma, std::size_t chunk) const;

    /// Throws UnknownChunk.
    std::size_t position(std::string_view chunk_id) const;

    /// ln(1 + (N - df + 0.5) / (df + 0.5)); positive for every df <= N.
    double idf(std::string_view lemma) const;

    /// Sum over query lemmas (each occurrence counted) of
    /// idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg_len)).
    double bm25(const LemmaSequence& query, std::size_t chunk) const;

private:
    RetrievalIndex() = default;

    std::vector<DocumentChunk> chunks_;
    Bm25Params params_;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    std::vector<std::size_t> doc_len_;
    double avg_len_ = 0.0;
    std::unordered_map<std::string, std::size_t> position_;
};

/// Throws UnknownChunk.
double bm25_score(const RetrievalIndex& index, const LemmaSequence& query, std::string_view chunk_id);

// ---------------------------------------------------------------------------
// Embeddings

inline constexpr Eigen::Index kDefaultEmbeddingDim = 100;

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Word vectors keyed by lemma (canonical script), one row per lemma.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::vector<std::string> lemmas, RowMatrixXd vectors);

    Eigen::Index dim() const noexcept { return vectors_.cols(); }
    std::size_t size() const noexcept { return lemmas_.size(); }
    /// Row of `lemma`, or -1.
    Eigen::Index row(std::string_view lemma) const;
    auto vector(Eigen::Index row) const { return vectors_.row(row); }
    const std::vector<std::string>& lemmas() const noexcept { return lemmas_; }

private:
    std::vector<std::string> lemmas_;
    RowMatrixXd vectors_;
    std::unordered_map<std::string, Eigen::Index> rows_;
};

/// Parses whitespace-separated `lemma v1 ... vdim` lines. The dimension comes
/// from the first line; a leading `count dim` header (word2vec/fastText text
/// format) is recognised and skipped. Lemmas are read in `script` and stored
/// canonically. A repeated lemma keeps its last vector and logs a warning.
/// Throws DimMismatch or ParseError with the 1-based line number.
EmbeddingTable load_embeddings(const std::filesystem::path& path, Script script = Script::CanonicalRoman);

struct AveragedEmbedding {
    Eigen::VectorXd vector;
    std::size_t known = 0;  // lemmas found in the table
    bool all_oov() const noexcept { return known == 0; }
};

/// Mean of the vectors of in-vocabulary lemmas. All-OOV input gives a zero
/// vector with `known == 0`. Summation runs over distinct lemmas in sorted
/// order, so permutations of the input give bit-identical results.
AveragedEmbedding embed_average(const LemmaSequence& lemmas, const EmbeddingTable& table);

/// Averaged vector for every chunk of an index, built once per table.
class EmbeddingIndex {
public:
    EmbeddingIndex(const RetrievalIndex& index, const EmbeddingTable& table);

    const EmbeddingTable& table() const noexcept { return *table_; }
    /// Row i is chunk i's mean vector (zero for all-OOV chunks).
    const RowMatrixXd& chunk_vectors() const noexcept { return vectors_; }
    const Eigen::VectorXd& norms() const noexcept { return norms_; }

private:
    const EmbeddingTable* table_;
    RowMatrixXd vectors_;
    Eigen::VectorXd norms_;
};

/// Cosine similarity; 0 when either vector is zero. Result lies in [-1, 1].
double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

// ---------------------------------------------------------------------------
// Top-k

struct ScoredChunk {
    std::string chunk_id;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based
};

struct Bm25Retriever {};
struct AvgEmbeddingRetriever {
    const EmbeddingIndex* embeddings = nullptr;
};
using RetrieverKind = std::variant<Bm25Retriever, AvgEmbeddingRetriever>;

struct TopK {
    std::vector<ScoredChunk> hits;
    /// Set when an embedding query had no in-vocabulary lemma; hits is empty.
    bool zero_query_vector = false;
};

/// The k best chunks, scores non-increasing, ties broken by ascending chunk id.
/// Throws std::invalid_argument for k == 0.
TopK top_k(const RetrievalIndex& index, const LemmaSequence& query, std::size_t k,
           const RetrieverKind& kind);

/// Normalizes and lemmatizes `query_raw` (written in `query_script`) first.
TopK top_k(const RetrievalIndex& index, std::string_view query_raw, Script query_script,
           const Lemmatizer& lemmatizer, std::size_t k, const RetrieverKind& kind);

// ---------------------------------------------------------------------------
// Persistence
//
// Line-oriented text file:
//   #classeval-index v1
//   params <k1> <b>
//   chunks <count>
//   <id>\t<first>\t<last>\t<space-separated lemmas>\t<escaped raw text>   (count lines)
// Raw text escapes backslash, tab and newline as \\ \t \n. Statistics are
// rebuilt on load.

inline constexpr std::string_view kIndexMagic = "#classeval-index";
inline constexpr int kIndexVersion = 1;

void save_index(const RetrievalIndex& index, const std::filesystem::path& path);
RetrievalIndex load_index(const std::filesystem::path& path);

}  // namespace classeval

#endif  // CLASSEVAL_RETRIEVAL_HPP
