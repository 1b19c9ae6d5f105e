#include <random>

#include "doctest.h"
#include "social/memory.hpp"

using namespace social;
using namespace social::memory;

namespace {

KnowledgeDoc doc_of(std::string text, std::string id = "d") {
    KnowledgeDoc d;
    d.doc_id = std::move(id);
    d.source = "test";
    d.text = std::move(text);
    return d;
}

std::vector<Span> spans(const std::vector<Chunk>& cs) {
    std::vector<Span> out;
    for (const auto& c : cs) out.push_back(c.span);
    return out;
}

std::vector<Span> segment_spans(std::size_t n) {
    EpisodicSegmenter seg("u", "s");
    std::vector<Span> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto s = seg.append(llm::make_message(llm::Role::user, "q" + std::to_string(i)),
                            llm::make_message(llm::Role::assistant, "a" + std::to_string(i)), {});
        if (s) out.push_back(s->span());
    }
    if (auto s = seg.flush({})) out.push_back(s->span());
    return out;
}

}  // namespace

TEST_SUITE("memory") {

TEST_CASE("chunk stride oracles") {
    CHECK(spans(chunk_knowledge(doc_of(std::string(1000, 'a')))) == std::vector<Span>{{0, 1000}});
    CHECK(spans(chunk_knowledge(doc_of(std::string(1800, 'a')))) == std::vector<Span>{{0, 1000}, {800, 1800}});
    CHECK(spans(chunk_knowledge(doc_of(std::string(2600, 'a')))) ==
          std::vector<Span>{{0, 1000}, {800, 1800}, {1600, 2600}});
    CHECK(spans(chunk_knowledge(doc_of(std::string(1001, 'a')))) == std::vector<Span>{{0, 1000}, {800, 1001}});
    CHECK(spans(chunk_knowledge(doc_of("x"))) == std::vector<Span>{{0, 1}});
}

TEST_CASE("chunk metadata and ids") {
    auto d = doc_of(std::string(1800, 'a'), "faq");
    d.metadata["lang"] = "en";
    const auto cs = chunk_knowledge(d);
    CHECK(cs[1].chunk_id == "faq#1");
    CHECK(cs[1].space_id == "knowledge");
    CHECK(cs[1].metadata["doc_id"] == "faq");
    CHECK(cs[1].metadata["meta"]["lang"] == "en");
}

TEST_CASE("chunking counts code points, not bytes") {
    std::string text;
    for (int i = 0; i < 1200; ++i) text += "\xC3\xA9";  // é
    const auto cs = chunk_knowledge(doc_of(text));
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].text.size() == 2000);
    CHECK(cs[1].span == Span{800, 1200});
}

TEST_CASE("chunk reconstruction on random text") {
    std::mt19937 rng(3);
    for (int n = 0; n < 50; ++n) {
        std::string text(1 + rng() % 5000, 'x');
        for (auto& c : text) c = static_cast<char>('a' + rng() % 26);
        const auto cs = chunk_knowledge(doc_of(text), 300, 50);
        std::string rebuilt = cs[0].text;
        for (std::size_t i = 1; i < cs.size(); ++i) rebuilt += cs[i].text.substr(50);
        CHECK(rebuilt == text);
    }
}

TEST_CASE("chunk errors") {
    CHECK_THROWS_AS(chunk_knowledge(doc_of("")), ValidationError);
    CHECK_THROWS_AS(chunk_knowledge(doc_of("abc"), 10, 10), ValidationError);
    CHECK_THROWS_AS(chunk_knowledge(doc_of("\xFF\xFE")), ValidationError);
}

TEST_CASE("segmentation oracles") {
    CHECK(segment_spans(0).empty());
    CHECK(segment_spans(1) == std::vector<Span>{{0, 1}});
    CHECK(segment_spans(5) == std::vector<Span>{{0, 5}});
    CHECK(segment_spans(6) == std::vector<Span>{{0, 5}, {4, 6}});
    CHECK(segment_spans(9) == std::vector<Span>{{0, 5}, {4, 9}});
    CHECK(segment_spans(11) == std::vector<Span>{{0, 5}, {4, 9}, {8, 11}});
    CHECK(segment_spans(23) == std::vector<Span>{{0, 5}, {4, 9}, {8, 13}, {12, 17}, {16, 21}, {20, 23}});
}

TEST_CASE("flush starts a new episode with continuing indices") {
    EpisodicSegmenter seg("u", "s");
    for (int i = 0; i < 3; ++i)
        seg.append(llm::make_message(llm::Role::user, "q"), llm::make_message(llm::Role::assistant, "a"), {});
    auto f = seg.flush({});
    REQUIRE(f);
    CHECK(f->partial);
    CHECK(f->span() == Span{0, 3});
    CHECK_FALSE(seg.flush({}).has_value());
    std::optional<EpisodicSegment> full;
    for (int i = 0; i < 5; ++i)
        full = seg.append(llm::make_message(llm::Role::user, "q"), llm::make_message(llm::Role::assistant, "a"), {});
    REQUIRE(full);
    CHECK(full->span() == Span{3, 8});
    CHECK_FALSE(full->partial);
}

TEST_CASE("segment rendering and ids") {
    EpisodicSegmenter seg("alice", "sess-1", 2, 1);
    seg.append(llm::make_message(llm::Role::user, "hi"), llm::make_message(llm::Role::assistant, "hello"), {});
    auto s = seg.append(llm::make_message(llm::Role::user, "my favorite color is teal"),
                        llm::make_message(llm::Role::assistant, "noted"), {});
    REQUIRE(s);
    CHECK(s->render("Nadine") == "User: hi\nNadine: hello\nUser: my favorite color is teal\nNadine: noted");
    CHECK(s->chunk_id() == "sess-1/seg/0-2");
    CHECK(user_space("alice") == "user:alice");
    CHECK_THROWS_AS(EpisodicSegmenter("u", "s", 3, 3), ValidationError);
    CHECK_THROWS_AS(seg.append(llm::make_message(llm::Role::user, ""), llm::make_message(llm::Role::assistant, "x"), {}),
                    ValidationError);
}

TEST_CASE("chunk json round trip") {
    Chunk c;
    c.chunk_id = "d#0";
    c.space_id = "knowledge";
    c.text = "t";
    c.span = {0, 1};
    c.embedding = {0.5, 0.25};
    c.insertion_seq = 7;
    c.metadata = {{"k", "v"}};
    const auto back = chunk_from_json(to_json(c));
    CHECK(back.chunk_id == c.chunk_id);
    CHECK(back.span == c.span);
    CHECK(back.embedding == c.embedding);
    CHECK(back.insertion_seq == 7);
    CHECK(back.metadata == c.metadata);
    CHECK_FALSE(to_json(c, false).contains("vector"));

    const auto d = doc_from_json({{"doc_id", "x"}, {"text", "body"}, {"metadata", {{"a", "b"}}}});
    CHECK(d.metadata.at("a") == "b");
    CHECK(doc_from_json({{"doc_id", "x"}, {"text", "b"}, {"metadata", {{"a", 1}}}}).metadata.at("a") == "1");
    CHECK_THROWS_AS(doc_from_json({{"doc_id", "x"}, {"text", ""}}), ValidationError);
    CHECK_THROWS_AS(doc_from_json({{"text", "b"}}), ValidationError);
}

}
