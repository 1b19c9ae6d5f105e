#pragma once

#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "social/embedding.hpp"
#include "social/llm.hpp"
#include "social/memory.hpp"
#include "social/vector_store.hpp"

namespace social::memory {

struct MemoryConfig {
    std::size_t chunk_size = 1000;
    std::size_t chunk_overlap = 200;
    std::size_t knowledge_top_k = 5;
    std::size_t memory_top_k = 5;
    std::size_t segment_window = 5;
    std::size_t segment_overlap = 1;
    std::string persona_name = "Nadine";

    void validate() const;
};

// Standalone-question template used when the user query may depend on the
// chat history.
extern const char* const kContextualizerTemplate;

struct ContextualizedQuery {
    std::string text;
    bool used_llm = false;
    bool fell_back = false;
    std::optional<llm::CompletionRequest> request;
    std::optional<std::string> llm_output;
    std::string error;
};

// Combines the knowledge space and per-user episodic spaces behind one
// retrieval surface.
class MemorySystem {
public:
    MemorySystem(MemoryConfig config, std::shared_ptr<EmbeddingProvider> embedder,
                 std::shared_ptr<VectorStore> store, std::shared_ptr<llm::LlmProvider> llm);

    const MemoryConfig& config() const { return config_; }
    VectorStore& store() { return *store_; }
    const EmbeddingProvider& embedder() const { return *embedder_; }

    // Chunks, embeds and stores a document. Returns the number of chunks.
    std::size_t ingest(const KnowledgeDoc& doc);

    std::vector<RetrievedPassage> retrieve_knowledge(std::string_view query) const;
    std::vector<RetrievedPassage> retrieve_memories(std::string_view user_id, std::string_view query) const;

    // Returns the query unchanged when the history is empty (no LLM call).
    // Any LLM failure or malformed output falls back to the raw query.
    ContextualizedQuery contextualize(std::string_view query, const std::vector<llm::ChatMessage>& history) const;

    // Embeds and stores a segment in the user's space. An embedding failure
    // queues the segment and returns false; retry_pending() tries again.
    bool store_segment(const EpisodicSegment& segment);
    std::size_t retry_pending();
    std::size_t pending_count() const;

    std::vector<Chunk> segments(std::string_view user_id) const;

    Chunk segment_chunk(const EpisodicSegment& segment) const;

private:
    MemoryConfig config_;
    std::shared_ptr<EmbeddingProvider> embedder_;
    std::shared_ptr<VectorStore> store_;
    std::shared_ptr<llm::LlmProvider> llm_;
    mutable std::mutex pending_mu_;
    std::deque<EpisodicSegment> pending_;
};

}  // namespace social::memory
