#pragma once

// Knowledge documents, chunks, and episodic conversation segments.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "social/common.hpp"
#include "social/llm.hpp"

namespace social::memory {

inline constexpr std::string_view kKnowledgeSpace = "knowledge";
std::string user_space(std::string_view user_id);

struct KnowledgeDoc {
    std::string doc_id;
    std::string source;
    std::string text;
    std::map<std::string, std::string> metadata;
};

// Accepts {"doc_id", "source", "text", "metadata"}; non-string metadata values
// are kept as their JSON text.
KnowledgeDoc doc_from_json(const nlohmann::json& j);

// Half-open range. For knowledge chunks the unit is Unicode code points of
// the source text; for episodic chunks it is interaction indices.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
    friend bool operator==(const Span&, const Span&) = default;
};

struct Chunk {
    std::string chunk_id;
    std::string space_id;
    std::string text;
    Span span;
    std::vector<double> embedding;
    std::uint64_t insertion_seq = 0;
    nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json to_json(const Chunk& c, bool with_embedding = true);
Chunk chunk_from_json(const nlohmann::json& j);

struct RetrievedPassage {
    Chunk chunk;  // embedding not populated
    double score = 0.0;
    std::size_t rank = 0;  // 1-based
};

nlohmann::json to_json(const RetrievedPassage& p);

// Fixed-size splitting. Chunk i covers code points
// [i*(size-overlap), min(i*(size-overlap)+size, L)); generation stops once a
// chunk reaches the end of the text. Throws ValidationError on empty text,
// overlap >= size, or malformed UTF-8.
std::vector<Chunk> chunk_knowledge(const KnowledgeDoc& doc, std::size_t size = 1000,
                                   std::size_t overlap = 200);

struct Interaction {
    llm::ChatMessage user_message;
    llm::ChatMessage assistant_message;
    std::size_t index = 0;
};

struct EpisodicSegment {
    std::string user_id;
    std::string session_id;
    std::vector<Interaction> interactions;
    Timestamp finalized_at{};
    bool partial = false;

    Span span() const;
    // "User: ...\n<persona>: ..." per interaction, joined by newlines.
    std::string render(std::string_view persona_name) const;
    std::string chunk_id() const;
};

// Sliding-window segmentation over one session's interactions. Full windows
// hold `window` interactions and consecutive windows share `overlap`.
class EpisodicSegmenter {
public:
    EpisodicSegmenter(std::string user_id, std::string session_id, std::size_t window = 5,
                      std::size_t overlap = 1);

    // Appends the next interaction (its index is assigned here) and returns a
    // segment when a window fills.
    std::optional<EpisodicSegment> append(llm::ChatMessage user_message,
                                          llm::ChatMessage assistant_message, Timestamp now);
    // Emits the uncovered tail, if any, and starts a new episode.
    std::optional<EpisodicSegment> flush(Timestamp now);

    std::size_t interaction_count() const { return interactions_.size(); }
    const std::vector<Interaction>& interactions() const { return interactions_; }

private:
    EpisodicSegment make_segment(std::size_t begin, std::size_t end, Timestamp now, bool partial) const;

    std::string user_id_;
    std::string session_id_;
    std::size_t window_;
    std::size_t overlap_;
    std::vector<Interaction> interactions_;
    std::size_t episode_start_ = 0;
    std::size_t window_start_ = 0;
    std::size_t covered_end_ = 0;
};

}  // namespace social::memory
