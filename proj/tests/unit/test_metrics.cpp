#include "doctest.h"

#include <cmath>
#include <fstream>

#include "json.hpp"

#include "classeval/metrics.hpp"
#include "fixtures.hpp"

using namespace classeval;

TEST_CASE("exact match normalization") {
    IdentityLemmatizer id;
    ExactMatcher m(Script::IAST, Script::IAST, &id);
    CHECK(m.score("rāmaḥ", {"rāmaḥ"}, EmMode::Inflected) == 1);
    CHECK(m.score("  rāmaḥ ।", {"rāmaḥ"}, EmMode::Inflected) == 1);
    CHECK(m.score("rāmaḥ", {"sītā", "rāmaḥ"}, EmMode::Inflected) == 1);
    CHECK(m.score("rāma", {"rāmaḥ"}, EmMode::Inflected) == 0);
    CHECK_THROWS_AS(m.score("x", {}, EmMode::Inflected), std::invalid_argument);

    ExactMatcher no_lemma(Script::IAST, Script::IAST, nullptr);
    CHECK_THROWS_AS(no_lemma.score("x", {"x"}, EmMode::Lemmatized), std::invalid_argument);
}

TEST_CASE("exact match across scripts") {
    ExactMatcher m(Script::IAST, Script::Devanagari, nullptr);
    CHECK(m.score("रामः", {"rāmaḥ"}, EmMode::Inflected) == 1);
}

TEST_CASE("inflected versus lemmatized match") {
    LexiconLemmatizer lex(std::unordered_map<std::string, LemmaSequence>{{"gala-grahe", {"galagraha"}}});
    ExactMatcher m(Script::IAST, Script::IAST, &lex);
    CHECK(m.score("galagraha", {"gala-grahe"}, EmMode::Inflected) == 0);
    CHECK(m.score("galagraha", {"gala-grahe"}, EmMode::Lemmatized) == 1);
    CHECK(m.score_lemmatized("galagraha", {"gala-grahe"}, {"galagraha"}) == 1);
}

TEST_CASE("bleu edge cases") {
    CHECK(corpus_bleu({"a b c d e", "f g h i"}, {{"a b c d e"}, {"f g h i"}}) == doctest::Approx(1.0));
    CHECK(corpus_bleu({""}, {{"a b c d"}}) == 0.0);
    CHECK(sentence_bleu("", {"a b c d"}) == 0.0);
    CHECK(sentence_bleu("x y z", {"a b c d"}) == 0.0);
    CHECK(sentence_bleu("a b c d", {"a b c d"}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(corpus_bleu({"a"}, {}), LengthMismatch);
    CHECK_THROWS_AS(corpus_bleu({"a"}, {{}}), std::invalid_argument);
}

TEST_CASE("bleu matches the reference oracle") {
    std::ifstream in(fixtures::kTestData / "bleu_cases.json");
    const auto cases = nlohmann::json::parse(in);
    REQUIRE(cases.size() > 0);
    for (const auto& c : cases) {
        const auto cands = c.at("candidates").get<std::vector<std::string>>();
        const auto refs = c.at("references").get<std::vector<std::vector<std::string>>>();
        CHECK(corpus_bleu(cands, refs) == doctest::Approx(c.at("corpus_bleu").get<double>()).epsilon(1e-9));
        const auto& sent = c.at("sentence_bleu");
        for (std::size_t i = 0; i < cands.size(); ++i) {
            // The oracle has no sentence score for an empty candidate; ours is 0.
            const double want = sent[i].is_null() ? 0.0 : sent[i].get<double>();
            CHECK(sentence_bleu(cands[i], refs[i]) == doctest::Approx(want).epsilon(1e-9));
        }
    }
}

TEST_CASE("hand-counted two-sentence bleu") {
    // Sentence 1 matches fully (4/4, 3/3, 2/2, 1/1); sentence 2 "a b x d" vs "a b c d":
    // unigrams 3/4, bigrams 1/3, trigrams 0/2, 4-grams 0/1. Corpus totals: 7/8, 4/6, 2/4, 1/2.
    const double expected = std::exp((std::log(7.0 / 8) + std::log(4.0 / 6) + std::log(2.0 / 4) + std::log(1.0 / 2)) / 4);
    CHECK(corpus_bleu({"p q r s", "a b x d"}, {{"p q r s"}, {"a b c d"}}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ner alignment") {
    const auto toks = tokenize("rāma rāma vanam");
    SUBCASE("repeated word claimed in order") {
        const auto a = align_ner(toks, {{{"B-PER", {"rāma", "rāma"}}}});
        CHECK(a.tags == std::vector<std::string>{"B-PER", "B-PER", "O"});
        CHECK(a.spurious.empty());
    }
    SUBCASE("absent word is spurious") {
        const auto a = align_ner(toks, {{{"B-PER", {"sītā"}}, {"B-LOC", {"vanam"}}}});
        CHECK(a.tags == std::vector<std::string>{"O", "O", "B-LOC"});
        REQUIRE(a.spurious.size() == 1);
        CHECK(a.spurious[0].word == "sītā");
    }
    CHECK(entity_type("B-LOC") == "LOC");
    CHECK(entity_type("I-GRP") == "GRP");
    CHECK(entity_type("O") == "O");
}

TEST_CASE("ner macro f1") {
    const std::vector<std::vector<std::string>> gold = {{"B-PER", "O", "B-LOC"}, {"B-GRP", "I-GRP", "O"}};

    SUBCASE("perfect") {
        std::vector<NerAlignment> pred = {{gold[0], {}}, {gold[1], {}}};
        const auto s = ner_macro_f1(gold, pred);
        CHECK(s.macro_f1 == 1.0);
        const auto& c = s.confusion;
        for (std::size_t i = 0; i < c.labels.size(); ++i)
            for (std::size_t j = 0; j < c.labels.size(); ++j)
                if (i != j) CHECK(c.counts[i][j] == 0);
    }
    SUBCASE("empty predictions") {
        std::vector<NerAlignment> pred = {{{"O", "O", "O"}, {}}, {{"O", "O", "O"}, {}}};
        const auto s = ner_macro_f1(gold, pred);
        CHECK(s.macro_f1 == 0.0);
        const auto& c = s.confusion;
        const std::size_t o = c.labels.size() - 1;
        CHECK(c.labels[o] == "O");
        for (std::size_t i = 0; i + 1 < c.labels.size(); ++i) CHECK(c.row_normalized[i][o] == 1.0);
    }
    SUBCASE("hand tally") {
        std::vector<NerAlignment> pred = {{{"B-PER", "B-LOC", "O"}, {}}, {{"B-GRP", "O", "O"}, {{"B-PER", "x"}}}};
        const auto s = ner_macro_f1(gold, pred);
        // B-PER tp1 fp1; B-LOC tp0 fp1 fn1; B-GRP tp1; I-GRP fn1.
        CHECK(s.per_tag.at("B-PER").tp == 1);
        CHECK(s.per_tag.at("B-PER").fp == 1);
        CHECK(s.per_tag.at("B-PER").f1 == doctest::Approx(2.0 / 3));
        CHECK(s.per_tag.at("B-LOC").f1 == 0.0);
        CHECK(s.per_tag.at("B-GRP").f1 == 1.0);
        CHECK(s.per_tag.at("I-GRP").fn == 1);
        CHECK(s.macro_f1 == doctest::Approx((2.0 / 3 + 0 + 1 + 0) / 4));
        for (const auto& row : s.confusion.row_normalized) {
            double sum = 0;
            for (double v : row) sum += v;
            if (sum != 0.0) CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    SUBCASE("no entity tags at all") {
        const std::vector<std::vector<std::string>> none = {{"O"}};
        CHECK(ner_macro_f1(none, std::vector<NerAlignment>{{{"O"}, {}}}).macro_f1 == 1.0);
    }
    CHECK_THROWS_AS(ner_macro_f1(gold, std::vector<NerAlignment>{}), SentenceCountMismatch);
    CHECK_THROWS_AS(ner_macro_f1(gold, std::vector<NerAlignment>{{{"O"}, {}}, {{"O"}, {}}}), LengthMismatch);
}

TEST_CASE("chunked summaries") {
    SUBCASE("constant scores") {
        const auto s = chunked_summary(std::vector<double>(10, 0.7), 10);
        CHECK(s.n_chunks == 10);
        for (double m : s.per_chunk_means) CHECK(m == doctest::Approx(0.7));
        CHECK(s.q3 - s.q1 == doctest::Approx(0.0));
        CHECK(s.mean == doctest::Approx(0.7));
    }
    SUBCASE("alternating 0/1") {
        std::vector<double> v;
        for (int i = 0; i < 20; ++i) v.push_back(i % 2);
        const auto s = chunked_summary(v, 10);
        for (double m : s.per_chunk_means) CHECK(m == 0.5);
        CHECK(s.overall_mean == 0.5);
    }
    SUBCASE("remainder joins the last chunk") {
        const auto s = chunked_summary({1, 1, 1, 0, 0, 0, 0}, 3);
        CHECK(s.chunk_sizes == std::vector<std::size_t>{2, 2, 3});
        CHECK(s.per_chunk_means[2] == 0.0);
    }
    SUBCASE("seeded shuffle is reproducible") {
        std::vector<double> v;
        for (int i = 0; i < 50; ++i) v.push_back(i < 25);
        const auto a = chunked_summary(v, 5, 7);
        const auto b = chunked_summary(v, 5, 7);
        CHECK(a.per_chunk_means == b.per_chunk_means);
        CHECK(a.overall_mean == 0.5);
    }
    CHECK_THROWS_AS(chunked_summary({1, 0}, 3), TooFewItems);
    CHECK(quantile_sorted({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile_sorted({1, 2, 3, 4}, 0.25) == 1.75);
    CHECK(quantile_sorted({5}, 0.75) == 5);
}
