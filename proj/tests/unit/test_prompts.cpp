#include "doctest.h"

#include <algorithm>
#include <set>

#include "classeval/experiment.hpp"
#include "classeval/prompts.hpp"
#include "fixtures.hpp"

using namespace classeval;

namespace {

const PromptRegistry& registry() {
    static const PromptRegistry r = PromptRegistry::load(fixtures::kDataDir / "prompts");
    return r;
}

const char* kSanskritTemplate =
    "id: demo.sa\n"
    "task: QA_closed\n"
    "language: sa\n"
    "script: slp1\n"
    "placeholders: QUESTION\n"
    "=== system\n"
    "rAmaH `knowledge-graph` {{`x`}}\n"
    "=== human\n"
    "praSnaH: {QUESTION}\n";

}  // namespace

TEST_CASE("bundled registry") {
    const auto ids = registry().ids();
    CHECK(ids.size() == 17);
    for (const char* id : {"ner.en", "ner.sa", "mt.la", "qa_rag.sa", "qa_closed.en", "tog.reason", "tog.answer"})
        CHECK(registry().contains(id));
    CHECK_THROWS_AS(registry().get("nope"), UnknownTemplate);
}

TEST_CASE("ner prompt carries the bindings verbatim") {
    const auto msgs = registry().render("ner.en", {{"LANGUAGE", "Latin"}, {"ENTITY TYPES", "PER, LOC"}, {"INPUT", "a b"}});
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].role == Role::Human);
    CHECK(msgs[0].content.find("PER, LOC") != std::string::npos);
    CHECK(msgs[0].content.find("Sentence: a b") != std::string::npos);
    CHECK(msgs[0].content.find("{'B-<entity1>'") != std::string::npos);
    try {
        registry().render("ner.en", {{"LANGUAGE", "Latin"}, {"ENTITY TYPES", "PER"}});
        FAIL("expected MissingPlaceholder");
    } catch (const MissingPlaceholder& e) {
        CHECK(e.name() == "INPUT");
    }
}

TEST_CASE("sanskrit template rendering") {
    const auto t = parse_template(kSanskritTemplate);
    CHECK(t.id == "demo.sa");
    CHECK(t.task == PromptTask::QA_closed);
    REQUIRE(t.script.has_value());
    CHECK(*t.script == Script::CanonicalRoman);
    const auto deva = t.render({{"QUESTION", "कः"}}, Script::Devanagari);
    REQUIRE(deva.size() == 2);
    CHECK(deva[0].role == Role::System);
    CHECK(deva[0].content == "रामः knowledge-graph {x}");
    CHECK(deva[1].content == "प्रश्नः: कः");
    const auto iast = t.render({{"QUESTION", "kaḥ"}}, Script::IAST);
    CHECK(iast[0].content == "rāmaḥ knowledge-graph {x}");
    CHECK(iast[1].content == "praśnaḥ: kaḥ");
}

TEST_CASE("placeholder values are inserted as-is") {
    const auto t = parse_template(kSanskritTemplate);
    // A value that looks like a placeholder is not expanded again.
    CHECK(t.render({{"QUESTION", "{QUESTION}"}}, Script::IAST)[1].content == "praśnaḥ: {QUESTION}");
}

TEST_CASE("rendering is injective in the bindings") {
    const std::vector<std::string> values = {"", "a", "b", "a b", "{", "}", "{{", "ab", "a\nb"};
    std::set<std::string> seen;
    for (const auto& q : values) {
        const auto msgs = registry().render("qa_closed.en", {{"TOPIC", "Rāmāyaṇa"}, {"QUESTION", q}, {"CHOICES", ""}});
        std::string all;
        for (const auto& m : msgs) all += std::string(to_string(m.role)) + "\x1f" + m.content + "\x1e";
        seen.insert(all);
    }
    CHECK(seen.size() == values.size());
}

TEST_CASE("malformed templates") {
    CHECK_THROWS_AS(parse_template("id: x\ntask: NER\nlanguage: en\nscript: none\nplaceholders: A\n"), TemplateError);
    CHECK_THROWS_AS(parse_template("id: x\ntask: Bogus\nlanguage: en\nscript: none\nplaceholders:\n=== human\nhi\n"),
                    Error);
    CHECK_THROWS_AS(
        parse_template("id: x\ntask: NER\nlanguage: en\nscript: none\nplaceholders: A\n=== human\n{B}\n"),
        TemplateError);
}

TEST_CASE("rag contexts keep retrieval rank order") {
    const std::string ctx = format_contexts({"first line\nsecond", "two", "three", "four"});
    CHECK(ctx == "1. first line second\n2. two\n3. three\n4. four");
    const auto msgs = registry().render(
        "qa_rag.en", {{"TOPIC", "Rāmāyaṇa"}, {"CONTEXTS", ctx}, {"QUESTION", "q"}, {"CHOICES", ""}});
    const auto& human = msgs.back().content;
    std::size_t prev = 0;
    for (const char* n : {"1. ", "2. ", "3. ", "4. "}) {
        const auto pos = human.find(n);
        REQUIRE(pos != std::string::npos);
        CHECK(pos >= prev);
        prev = pos;
    }
}

TEST_CASE("tagsets") {
    const auto la = load_tagset_for(fixtures::kDataDir / "tagsets", "la");
    CHECK(entity_type_list(la) == "PER, LOC, GRP");
    const auto grc = load_tagset_for(fixtures::kDataDir / "tagsets", "grc");
    for (const char* t : {"NORP", "ORG", "GOD", "LANGUAGE", "LOC", "PERSON"})
        CHECK(std::find(grc.types.begin(), grc.types.end(), t) != grc.types.end());
    CHECK_THROWS_AS(entity_type_list(Tagset{"xx", {}}), EmptyTagset);
    fixtures::TempDir dir("tagset");
    fixtures::write_text(dir / "xx.txt", "# nothing\n\n");
    CHECK_THROWS_AS(entity_type_list(load_tagset_for(dir.path(), "xx")), EmptyTagset);
}
