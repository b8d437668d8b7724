#include "classeval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "classeval/digest.hpp"

namespace classeval {

RetrievalIndex RetrievalIndex::build(std::vector<DocumentChunk> chunks, Bm25Params params) {
    if (chunks.empty()) throw EmptyCorpus();
    if (params.k1 < 0.0 || params.b < 0.0 || params.b > 1.0)
        throw std::invalid_argument("BM25 requires k1 >= 0 and b in [0, 1]");

    RetrievalIndex index;
    index.params_ = params;
    index.doc_len_.reserve(chunks.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const DocumentChunk& chunk = chunks[i];
        if (chunk.lemmas.empty()) throw UnlemmatizedChunk(chunk.id);
        if (!index.position_.emplace(chunk.id, i).second) throw DuplicateChunk(chunk.id);

        std::map<std::string_view, std::size_t> counts;
        for (const auto& lemma : chunk.lemmas) ++counts[lemma];
        for (const auto& [lemma, tf] : counts) {
            auto it = index.postings_.find(lemma);
            if (it == index.postings_.end())
                it = index.postings_.emplace(std::string(lemma), std::vector<Posting>{}).first;
            it->second.push_back(Posting{i, tf});
        }
        index.doc_len_.push_back(chunk.lemmas.size());
        total += chunk.lemmas.size();
    }
    index.avg_len_ = static_cast<double>(total) / static_cast<double>(chunks.size());
    index.chunks_ = std::move(chunks);
    return index;
}

const std::vector<Posting>& RetrievalIndex::postings(std::string_view lemma) const {
    static const std::vector<Posting> kEmpty;
    const auto it = postings_.find(lemma);
    return it == postings_.end() ? kEmpty : it->second;
}

std::size_t RetrievalIndex::doc_freq(std::string_view lemma) const { return postings(lemma).size(); }

std::size_t RetrievalIndex::term_freq(std::string_view lemma, std::size_t chunk) const {
    const auto& list = postings(lemma);
    const auto it = std::lower_bound(list.begin(), list.end(), chunk,
                                     [](const Posting& p, std::size_t c) { return p.chunk < c; });
    return it != list.end() && it->chunk == chunk ? it->tf : 0;
}

std::size_t RetrievalIndex::position(std::string_view chunk_id) const {
    const auto it = position_.find(std::string(chunk_id));
    if (it == position_.end()) throw UnknownChunk(std::string(chunk_id));
    return it->second;
}

double RetrievalIndex::idf(std::string_view lemma) const {
    const double n = static_cast<double>(chunks_.size());
    const double df = static_cast<double>(doc_freq(lemma));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

namespace {

double term_score(double idf, double tf, double len, double avg_len, const Bm25Params& p) {
    return idf * (tf * (p.k1 + 1.0)) / (tf + p.k1 * (1.0 - p.b + p.b * len / avg_len));
}

}  // namespace

double RetrievalIndex::bm25(const LemmaSequence& query, std::size_t chunk) const {
    if (chunk >= chunks_.size()) throw UnknownChunk(std::to_string(chunk));
    const double len = static_cast<double>(doc_len_[chunk]);
    double score = 0.0;
    for (const auto& lemma : query) {
        const std::size_t tf = term_freq(lemma, chunk);
        if (tf == 0) continue;
        score += term_score(idf(lemma), static_cast<double>(tf), len, avg_len_, params_);
    }
    return score;
}

double bm25_score(const RetrievalIndex& index, const LemmaSequence& query, std::string_view chunk_id) {
    return index.bm25(query, index.position(chunk_id));
}

// ---------------------------------------------------------------------------
// Top-k

namespace {

TopK select(const RetrievalIndex& index, const std::vector<double>& scores, std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto& chunks = index.chunks();
    const auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return chunks[a].id < chunks[b].id;
    };
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      better);
    TopK result;
    result.hits.reserve(take);
    for (std::size_t r = 0; r < take; ++r)
        result.hits.push_back(ScoredChunk{chunks[order[r]].id, scores[order[r]], r + 1});
    return result;
}

std::vector<double> bm25_all(const RetrievalIndex& index, const LemmaSequence& query) {
    std::vector<double> scores(index.size(), 0.0);
    for (const auto& lemma : query) {
        const auto& postings = index.postings(lemma);
        if (postings.empty()) continue;
        const double idf = index.idf(lemma);
        for (const Posting& p : postings) {
            scores[p.chunk] += term_score(idf, static_cast<double>(p.tf),
                                          static_cast<double>(index.doc_len(p.chunk)),
                                          index.avg_len(), index.params());
        }
    }
    return scores;
}

}  // namespace

TopK top_k(const RetrievalIndex& index, const LemmaSequence& query, std::size_t k,
           const RetrieverKind& kind) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    if (std::holds_alternative<Bm25Retriever>(kind)) return select(index, bm25_all(index, query), k);

    const EmbeddingIndex* embeddings = std::get<AvgEmbeddingRetriever>(kind).embeddings;
    if (embeddings == nullptr) throw std::invalid_argument("embedding retriever without a table");
    const AveragedEmbedding q = embed_average(query, embeddings->table());
    if (q.all_oov()) {
        TopK empty;
        empty.zero_query_vector = true;
        return empty;
    }
    const double q_norm = q.vector.norm();
    const auto& vectors = embeddings->chunk_vectors();
    const auto& norms = embeddings->norms();
    std::vector<double> scores(index.size(), 0.0);
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
        if (norms[i] == 0.0) continue;
        const double c = vectors.row(i).dot(q.vector) / (norms[i] * q_norm);
        scores[static_cast<std::size_t>(i)] = std::clamp(c, -1.0, 1.0);
    }
    return select(index, scores, k);
}

TopK top_k(const RetrievalIndex& index, std::string_view query_raw, Script query_script,
           const Lemmatizer& lemmatizer, std::size_t k, const RetrieverKind& kind) {
    return top_k(index, lemmatizer.lemmatize(prepare_for_lemmatizer(query_raw, query_script)), k, kind);
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

std::string escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape(std::string_view s, std::size_t line) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\') {
            out.push_back(s[i]);
            continue;
        }
        if (++i == s.size()) throw ParseError(line, "dangling escape");
        switch (s[i]) {
            case '\\': out.push_back('\\'); break;
            case 't': out.push_back('\t'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            default: throw ParseError(line, std::string("unknown escape \\") + s[i]);
        }
    }
    return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos
                                                                           : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return fields;
}

}  // namespace

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
    std::ostringstream out;
    out.precision(17);
    out << kIndexMagic << " v" << kIndexVersion << '\n';
    out << "params " << index.params().k1 << ' ' << index.params().b << '\n';
    out << "chunks " << index.size() << '\n';
    for (const auto& chunk : index.chunks()) {
        out << chunk.id << '\t' << chunk.span.first << '\t' << chunk.span.last << '\t';
        for (std::size_t i = 0; i < chunk.lemmas.size(); ++i) out << (i ? " " : "") << chunk.lemmas[i];
        out << '\t' << escape(chunk.raw_text) << '\n';
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_file_atomic(path.string(), out.str());
}

RetrievalIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open index " + path.string());
    std::string line;
    std::size_t lineno = 1;
    const std::string expected_magic = std::string(kIndexMagic) + " v" + std::to_string(kIndexVersion);
    if (!std::getline(in, line) || line != expected_magic)
        throw ParseError(lineno, "not a classeval index (expected '" + expected_magic + "')");

    Bm25Params params;
    ++lineno;
    if (!std::getline(in, line)) throw ParseError(lineno, "missing params line");
    {
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag >> params.k1 >> params.b) || tag != "params")
            throw ParseError(lineno, "malformed params line");
    }
    std::size_t count = 0;
    ++lineno;
    if (!std::getline(in, line)) throw ParseError(lineno, "missing chunks line");
    {
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag >> count) || tag != "chunks") throw ParseError(lineno, "malformed chunks line");
    }
    std::vector<DocumentChunk> chunks;
    chunks.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        ++lineno;
        if (!std::getline(in, line)) throw ParseError(lineno, "truncated index");
        const auto fields = split_tabs(line);
        if (fields.size() != 5) throw ParseError(lineno, "expected 5 tab-separated fields");
        DocumentChunk chunk;
        chunk.id = std::string(fields[0]);
        try {
            chunk.span.first = std::stoul(std::string(fields[1]));
            chunk.span.last = std::stoul(std::string(fields[2]));
        } catch (const std::exception&) {
            throw ParseError(lineno, "bad line span");
        }
        for (auto& token : tokenize(fields[3])) chunk.lemmas.push_back(std::move(token.surface));
        chunk.raw_text = unescape(fields[4], lineno);
        chunks.push_back(std::move(chunk));
    }
    return RetrievalIndex::build(std::move(chunks), params);
}

}  // namespace classeval
