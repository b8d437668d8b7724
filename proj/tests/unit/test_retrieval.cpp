#include "doctest.h"

#include <algorithm>
#include <random>

#include "classeval/retrieval.hpp"
#include "fixtures.hpp"

using namespace classeval;

namespace {

std::vector<DocumentChunk> docs(const std::vector<LemmaSequence>& lemmas) {
    std::vector<DocumentChunk> out;
    for (std::size_t i = 0; i < lemmas.size(); ++i) {
        DocumentChunk c;
        c.span = {i, i};
        c.id = chunk_id(c.span);
        c.lemmas = lemmas[i];
        for (const auto& l : lemmas[i]) c.raw_text += (c.raw_text.empty() ? "" : " ") + l;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace

TEST_CASE("bm25 worked example") {
    const auto index = RetrievalIndex::build(docs({{"a", "b"}, {"a"}, {"c"}}));
    CHECK(index.doc_freq("a") == 2);
    CHECK(index.avg_len() == doctest::Approx(4.0 / 3));
    CHECK(index.bm25({"a"}, 0) == doctest::Approx(0.3836764320373352).epsilon(1e-12));
    CHECK(bm25_score(index, {"a"}, index.chunks()[0].id) == index.bm25({"a"}, 0));
    CHECK(index.doc_freq("b") == 1);
    CHECK(index.doc_freq("c") == 1);
    CHECK(index.bm25({"z"}, 0) == 0.0);
    CHECK(index.bm25({}, 0) == 0.0);
    CHECK(index.idf("z") > index.idf("a"));
    CHECK_THROWS_AS(bm25_score(index, {"a"}, "nope"), UnknownChunk);
}

TEST_CASE("index construction errors") {
    CHECK_THROWS_AS(RetrievalIndex::build({}), EmptyCorpus);
    auto unlem = docs({{"a"}, {}});
    CHECK_THROWS_AS(RetrievalIndex::build(unlem), UnlemmatizedChunk);
    auto dup = docs({{"a"}, {"b"}});
    dup[1].id = dup[0].id;
    CHECK_THROWS_AS(RetrievalIndex::build(dup), DuplicateChunk);
}

TEST_CASE("top_k ordering and ties") {
    const auto index = RetrievalIndex::build(docs({{"x"}, {"a"}, {"a"}, {"a", "a"}, {"y"}}));
    const auto r = top_k(index, {"a"}, 3, Bm25Retriever{});
    REQUIRE(r.hits.size() == 3);
    CHECK(r.hits[0].chunk_id == index.chunks()[3].id);
    CHECK(r.hits[1].chunk_id == index.chunks()[1].id);
    CHECK(r.hits[2].chunk_id == index.chunks()[2].id);
    CHECK(r.hits[1].score == r.hits[2].score);
    CHECK(r.hits[0].rank == 1);
    CHECK(top_k(index, {"a"}, 99, Bm25Retriever{}).hits.size() == 5);
    CHECK(top_k(index, {"x"}, 1, Bm25Retriever{}).hits[0].chunk_id == index.chunks()[0].id);
    CHECK_THROWS_AS(top_k(index, {"a"}, 0, Bm25Retriever{}), std::invalid_argument);
}

TEST_CASE("embedding average is order independent") {
    RowMatrixXd v(3, 2);
    v << 1, 0, 0, 1, 1, 1;
    EmbeddingTable table({"a", "b", "c"}, v);
    CHECK(table.row("b") == 1);
    CHECK(table.row("q") == -1);
    const auto e = embed_average({"a", "b", "q"}, table);
    CHECK(e.known == 2);
    CHECK(e.vector(0) == doctest::Approx(0.5));
    CHECK(e.vector(1) == doctest::Approx(0.5));
    CHECK(embed_average({"q"}, table).all_oov());

    std::mt19937 rng(11);
    LemmaSequence seq = {"a", "c", "b", "c", "a"};
    const auto base = embed_average(seq, table).vector;
    for (int i = 0; i < 20; ++i) {
        std::shuffle(seq.begin(), seq.end(), rng);
        CHECK((embed_average(seq, table).vector.array() == base.array()).all());
    }
}

TEST_CASE("cosine") {
    Eigen::VectorXd a(2), b(2), z = Eigen::VectorXd::Zero(2);
    a << 1, 0;
    b << -1, 0;
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(a, b) == doctest::Approx(-1.0));
    CHECK(cosine(a, z) == 0.0);
}

TEST_CASE("embedding retrieval and all-OOV queries") {
    RowMatrixXd v(3, 2);
    v << 1, 0, 0, 1, 1, 1;
    EmbeddingTable table({"a", "b", "c"}, v);
    const auto index = RetrievalIndex::build(docs({{"a"}, {"b"}, {"c"}}));
    EmbeddingIndex emb(index, table);
    const auto r = top_k(index, {"b"}, 2, AvgEmbeddingRetriever{&emb});
    REQUIRE(r.hits.size() == 2);
    CHECK(r.hits[0].chunk_id == index.chunks()[1].id);
    CHECK(r.hits[1].chunk_id == index.chunks()[2].id);
    const auto oov = top_k(index, {"zz"}, 2, AvgEmbeddingRetriever{&emb});
    CHECK(oov.zero_query_vector);
    CHECK(oov.hits.empty());
}

TEST_CASE("embedding file parsing") {
    fixtures::TempDir dir("emb");
    fixtures::write_text(dir / "ok.vec", "2 3\nrAma 1 2 3\nvana 0 0 1\n");
    const auto t = load_embeddings(dir / "ok.vec");
    CHECK(t.size() == 2);
    CHECK(t.dim() == 3);
    CHECK(t.vector(t.row("rAma"))(2) == 3.0);

    fixtures::write_text(dir / "iast.vec", "rāma 1 0\n");
    CHECK(load_embeddings(dir / "iast.vec", Script::IAST).row("rAma") == 0);

    fixtures::write_text(dir / "bad.vec", "a 1 2 3\nb 1 2\n");
    try {
        load_embeddings(dir / "bad.vec");
        FAIL("expected DimMismatch");
    } catch (const DimMismatch& e) {
        CHECK(e.line() == 2);
    }
    fixtures::write_text(dir / "nan.vec", "a 1 2\nb 1 x\n");
    CHECK_THROWS_AS(load_embeddings(dir / "nan.vec"), ParseError);
}

TEST_CASE("index save and load round trip") {
    fixtures::TempDir dir("index");
    auto chunks = docs({{"a", "b"}, {"a"}, {"c"}});
    chunks[1].raw_text = "tab\there\nnewline \\ slash";
    const auto index = RetrievalIndex::build(chunks, {1.2, 0.5});
    save_index(index, dir / "idx.txt");
    const auto back = load_index(dir / "idx.txt");
    REQUIRE(back.size() == 3);
    CHECK(back.params().k1 == 1.2);
    CHECK(back.chunks()[1].raw_text == chunks[1].raw_text);
    CHECK(back.bm25({"a"}, 0) == index.bm25({"a"}, 0));

    fixtures::write_text(dir / "bad.txt", "#classeval-index v9\n");
    CHECK_THROWS_AS(load_index(dir / "bad.txt"), Error);
}

TEST_CASE("top_k prefixes and brute-force order on a random corpus") {
    std::mt19937 rng(3);
    std::vector<LemmaSequence> lemmas(100);
    for (auto& d : lemmas) {
        const std::size_t len = 1 + rng() % 8;
        for (std::size_t i = 0; i < len; ++i) d.push_back("w" + std::to_string(rng() % 15));
    }
    const auto index = RetrievalIndex::build(docs(lemmas));
    const LemmaSequence query = {"w1", "w4", "w4", "w9"};

    std::vector<std::pair<double, std::string>> all;
    for (std::size_t i = 0; i < index.size(); ++i) all.emplace_back(-index.bm25(query, i), index.chunks()[i].id);
    std::sort(all.begin(), all.end());

    const auto full = top_k(index, query, 100, Bm25Retriever{});
    REQUIRE(full.hits.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) CHECK(full.hits[i].chunk_id == all[i].second);
    for (std::size_t k = 1; k < 20; ++k) {
        const auto a = top_k(index, query, k, Bm25Retriever{});
        const auto b = top_k(index, query, k + 1, Bm25Retriever{});
        for (std::size_t i = 0; i < k; ++i) CHECK(a.hits[i].chunk_id == b.hits[i].chunk_id);
    }
}

TEST_CASE("duplicate embedding lemma keeps the last vector") {
    fixtures::TempDir dir("emb-dup");
    fixtures::write_text(dir / "dup.vec", "a 1 1\nb 0 1\na 2 2\n");
    const auto t = load_embeddings(dir / "dup.vec");
    CHECK(t.size() == 2);
    CHECK(t.vector(t.row("a"))(0) == 2.0);
}
