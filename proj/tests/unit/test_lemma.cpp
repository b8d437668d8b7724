#include "doctest.h"

#include "classeval/lemma.hpp"
#include "fixtures.hpp"

using namespace classeval;

namespace {

LemmaSequence lemmatize_iast(const Lemmatizer& l, const std::string& iast) {
    LemmaSequence out;
    for (const auto& s : l.lemmatize(prepare_for_lemmatizer(iast, Script::IAST)))
        out.push_back(from_canonical(s, Script::IAST));
    return out;
}

}  // namespace

TEST_CASE("lemma_f1") {
    CHECK(lemma_f1({}, {}).f1 == 1.0);
    CHECK(lemma_f1({"a"}, {}).f1 == 0.0);
    CHECK(lemma_f1({}, {"a"}).f1 == 0.0);
    const auto s = lemma_f1({"a", "a", "b"}, {"a", "c"});
    CHECK(s.precision == doctest::Approx(1.0 / 3));
    CHECK(s.recall == doctest::Approx(0.5));
    CHECK(s.f1 == doctest::Approx(0.4));
    CHECK(lemma_f1({"b", "a"}, {"a", "b"}).f1 == 1.0);
    const auto ab = lemma_f1({"a", "b"}, {"a", "c"});
    CHECK(ab.precision == 0.5);
    CHECK(ab.recall == 0.5);
    CHECK(ab.f1 == 0.5);
    const auto aa = lemma_f1({"a", "a"}, {"a"});
    CHECK(aa.precision == 0.5);
    CHECK(aa.recall == 1.0);
    CHECK(aa.f1 == doctest::Approx(2.0 / 3));
}

TEST_CASE("identity lemmatizer splits on whitespace") {
    IdentityLemmatizer id;
    CHECK(id.lemmatize("rAmaH vanam") == LemmaSequence{"rAmaH", "vanam"});
    CHECK(id.lemmatize("").empty());
    CHECK(id.kind() == "identity");
}

TEST_CASE("lexicon lemmatizer") {
    fixtures::TempDir dir("lemma-lex");
    fixtures::write_text(dir / "lex.tsv", fixtures::kLexicon);
    LexiconLemmatizer lex(dir / "lex.tsv");
    CHECK(lex.size() == 6);

    SUBCASE("compound splits into two lemmas") {
        CHECK(lemmatize_iast(lex, "haridrāmalakaṃ gṛhṇāti") == LemmaSequence{"haridrā", "āmalaka", "gṛh"});
    }
    SUBCASE("greedy segmentation of unlisted compounds") {
        CHECK(lemmatize_iast(lex, "rāmasyavanaṃ") == LemmaSequence{"rāma", "vana"});
    }
    SUBCASE("empty sentence") { CHECK(lex.lemmatize("").empty()); }
    SUBCASE("unknown tokens pass through") {
        CHECK(lemmatize_iast(lex, "sītā") == LemmaSequence{"sītā"});
        CHECK(lemmatize_iast(lex, "rāmaḥtu") == LemmaSequence{"rāmaḥtu"});
    }
    SUBCASE("daṇḍa and punctuation are stripped first") {
        CHECK(lemmatize_iast(lex, "rāmaḥ, vanaṃ gacchati ।") == LemmaSequence{"rāma", "vana", "gam"});
    }
    CHECK_THROWS_AS(LexiconLemmatizer(dir / "missing.tsv"), LexiconMissing);
}

TEST_CASE("lexicon file in Devanagari") {
    fixtures::TempDir dir("lemma-deva");
    fixtures::write_text(dir / "lex.tsv", "रामः\tराम\n");
    LexiconLemmatizer lex(dir / "lex.tsv", Script::Devanagari);
    CHECK(lex.lemmatize("rAmaH") == LemmaSequence{"rAma"});
}

TEST_CASE("external lemmatizer speaks the line protocol") {
    ExternalLemmatizerOptions opts;
    opts.command = "cat";
    opts.io_script = Script::IAST;
    opts.timeout = std::chrono::milliseconds(5000);
    ExternalLemmatizer ext(opts);
    CHECK(ext.lemmatize("rAmaH vanam") == LemmaSequence{"rAmaH", "vanam"});
    CHECK(ext.lemmatize("gacCati") == LemmaSequence{"gacCati"});
    CHECK(ext.kind() == "external:cat");
}

TEST_CASE("external lemmatizer that cannot start") {
    ExternalLemmatizerOptions opts;
    opts.command = "exit 3";
    opts.timeout = std::chrono::milliseconds(2000);
    CHECK_THROWS_AS(
        [&] {
            ExternalLemmatizer ext(opts);
            ext.lemmatize("rAmaH");
        }(),
        ExternalLemmatizerUnavailable);
}

namespace {

class CountingLemmatizer final : public Lemmatizer {
public:
    LemmaSequence lemmatize(std::string_view s) const override {
        ++calls;
        return IdentityLemmatizer().lemmatize(s);
    }
    std::string kind() const override { return "counting"; }
    mutable std::size_t calls = 0;
};

}  // namespace

TEST_CASE("lemmatize_corpus caches by corpus digest") {
    fixtures::TempDir dir("lemma-cache");
    const std::vector<std::string> lines = {"rāmaḥ vanaṃ", "gacchati", "sītā", "lakṣmaṇaḥ"};
    const auto chunks = chunk_corpus(lines, 2, 0);
    CountingLemmatizer lem;

    LemmatizeCorpusStats first;
    const auto a = lemmatize_corpus(chunks, lem, Script::IAST, dir.path(), &first);
    CHECK_FALSE(first.cache_hit);
    CHECK(first.lemmatizer_calls > 0);
    CHECK(a[0].lemmas == LemmaSequence{"rAmaH", "vanaM", "gacCati"});

    const std::size_t calls = lem.calls;
    LemmatizeCorpusStats second;
    const auto b = lemmatize_corpus(chunks, lem, Script::IAST, dir.path(), &second);
    CHECK(second.cache_hit);
    CHECK(lem.calls == calls);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].lemmas == b[i].lemmas);

    auto changed = chunks;
    changed[1].raw_text = "rāvaṇaḥ\nlaṅkā";
    CHECK(corpus_digest(changed) != corpus_digest(chunks));
    LemmatizeCorpusStats third;
    lemmatize_corpus(changed, lem, Script::IAST, dir.path(), &third);
    CHECK_FALSE(third.cache_hit);
}

TEST_CASE("three-chunk toy corpus with a two-entry lexicon") {
    LexiconLemmatizer lex(std::unordered_map<std::string, LemmaSequence>{{"rAmaH", {"rAma"}}, {"vanaM", {"vana"}}});
    const std::vector<std::string> lines = {"rāmaḥ vanaṃ", "sītā", "vanaṃ vanaṃ"};
    const auto chunks = lemmatize_corpus(chunk_corpus(lines, 1, 0), lex, Script::IAST, std::nullopt);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].lemmas == LemmaSequence{"rAma", "vana"});
    CHECK(chunks[1].lemmas == LemmaSequence{"sItA"});
    CHECK(chunks[2].lemmas == LemmaSequence{"vana", "vana"});
}
