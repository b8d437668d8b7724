#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "classeval/retrieval.hpp"

namespace classeval {

EmbeddingTable::EmbeddingTable(std::vector<std::string> lemmas, RowMatrixXd vectors)
    : lemmas_(std::move(lemmas)), vectors_(std::move(vectors)) {
    if (static_cast<Eigen::Index>(lemmas_.size()) != vectors_.rows())
        throw std::invalid_argument("embedding table: lemma count differs from row count");
    for (Eigen::Index i = 0; i < vectors_.rows(); ++i) {
        if (!rows_.emplace(lemmas_[static_cast<std::size_t>(i)], i).second)
            throw std::invalid_argument("embedding table: duplicate lemma " +
                                        lemmas_[static_cast<std::size_t>(i)]);
    }
}

Eigen::Index EmbeddingTable::row(std::string_view lemma) const {
    const auto it = rows_.find(std::string(lemma));
    return it == rows_.end() ? -1 : it->second;
}

namespace {

bool parse_count(const std::string& s, std::size_t& out) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return false;
    out = std::stoul(s);
    return true;
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path, Script script) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open embeddings " + path.string());

    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> vectors;
    std::size_t dim = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::vector<std::string> fields;
        for (std::string f; ss >> f;) fields.push_back(std::move(f));
        if (fields.empty()) continue;

        std::size_t header_rows = 0;
        std::size_t header_dim = 0;
        if (dim == 0 && order.empty() && fields.size() == 2 && parse_count(fields[0], header_rows) &&
            parse_count(fields[1], header_dim)) {
            dim = header_dim;
            continue;
        }
        if (fields.size() < 2) throw ParseError(lineno, "expected a lemma followed by components");
        const std::size_t arity = fields.size() - 1;
        if (dim == 0) dim = arity;
        if (arity != dim) throw DimMismatch(lineno, dim, arity);

        std::vector<double> values(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            const std::string& f = fields[i + 1];
            std::size_t used = 0;
            try {
                values[i] = std::stod(f, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != f.size() || !std::isfinite(values[i]))
                throw ParseError(lineno, "bad component '" + f + "'");
        }
        std::string lemma = to_canonical(fields[0], script);
        auto [it, inserted] = vectors.try_emplace(lemma, std::move(values));
        if (inserted) {
            order.push_back(std::move(lemma));
        } else {
            spdlog::warn("{}:{}: duplicate embedding for '{}', keeping the later vector",
                         path.string(), lineno, fields[0]);
            it->second = std::move(values);
        }
    }

    RowMatrixXd matrix(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& v = vectors.at(order[r]);
        for (std::size_t c = 0; c < dim; ++c)
            matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
    }
    return EmbeddingTable(std::move(order), std::move(matrix));
}

AveragedEmbedding embed_average(const LemmaSequence& lemmas, const EmbeddingTable& table) {
    AveragedEmbedding out;
    out.vector = Eigen::VectorXd::Zero(table.dim());
    std::map<std::string_view, std::size_t> counts;
    for (const auto& lemma : lemmas) ++counts[lemma];
    for (const auto& [lemma, count] : counts) {
        const Eigen::Index row = table.row(lemma);
        if (row < 0) continue;
        out.vector += static_cast<double>(count) * table.vector(row).transpose();
        out.known += count;
    }
    if (out.known > 0) out.vector /= static_cast<double>(out.known);
    return out;
}

EmbeddingIndex::EmbeddingIndex(const RetrievalIndex& index, const EmbeddingTable& table)
    : table_(&table),
      vectors_(static_cast<Eigen::Index>(index.size()), table.dim()),
      norms_(static_cast<Eigen::Index>(index.size())) {
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        vectors_.row(row) = embed_average(index.chunks()[i].lemmas, table).vector.transpose();
        norms_[row] = vectors_.row(row).norm();
    }
}

double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

}  // namespace classeval
