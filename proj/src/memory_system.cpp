#include "social/memory_system.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

namespace social::memory {

const char* const kContextualizerTemplate =
    "Given a chat history and the latest user question which might reference context in the chat "
    "history, formulate a standalone question which can be understood without the chat history. "
    "Do NOT answer the question, just reformulate it if needed and otherwise return it as is.";

void MemoryConfig::validate() const {
    if (chunk_size == 0 || chunk_overlap >= chunk_size)
        throw ConfigError("chunk_overlap must be smaller than chunk_size");
    if (knowledge_top_k == 0 || memory_top_k == 0) throw ConfigError("top_k must be at least 1");
    if (segment_window == 0 || segment_overlap >= segment_window)
        throw ConfigError("segment_overlap must be smaller than segment_window");
}

MemorySystem::MemorySystem(MemoryConfig config, std::shared_ptr<EmbeddingProvider> embedder,
                           std::shared_ptr<VectorStore> store, std::shared_ptr<llm::LlmProvider> llm)
    : config_(std::move(config)), embedder_(std::move(embedder)), store_(std::move(store)), llm_(std::move(llm)) {
    config_.validate();
    if (embedder_->dimension() != store_->dimension())
        throw ConfigError("embedding dimension does not match the vector store");
}

std::size_t MemorySystem::ingest(const KnowledgeDoc& doc) {
    auto chunks = chunk_knowledge(doc, config_.chunk_size, config_.chunk_overlap);
    for (auto& c : chunks) c.embedding = embedder_->embed(c.text);
    return store_->upsert(std::string(kKnowledgeSpace), std::move(chunks));
}

std::vector<RetrievedPassage> MemorySystem::retrieve_knowledge(std::string_view query) const {
    if (trim(query).empty()) return {};
    const auto q = embedder_->embed(query);
    return store_->retrieve(std::string(kKnowledgeSpace), q, config_.knowledge_top_k);
}

std::vector<RetrievedPassage> MemorySystem::retrieve_memories(std::string_view user_id,
                                                              std::string_view query) const {
    if (trim(query).empty()) return {};
    const auto q = embedder_->embed(query);
    return store_->retrieve(user_space(user_id), q, config_.memory_top_k);
}

namespace {

// Tag lines mean the model answered or acted instead of rewriting.
bool looks_malformed(std::string_view out) {
    if (trim(out).empty()) return true;
    std::size_t pos = 0;
    while (pos <= out.size()) {
        const auto nl = out.find('\n', pos);
        const std::string line = trim(out.substr(pos, nl == std::string_view::npos ? out.size() - pos : nl - pos));
        for (std::string_view tag : {"answer:", "action:", "action input:", "final answer:"}) {
            if (starts_with_icase(line, tag)) return true;
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return false;
}

}  // namespace

ContextualizedQuery MemorySystem::contextualize(std::string_view query,
                                                const std::vector<llm::ChatMessage>& history) const {
    ContextualizedQuery out;
    out.text = std::string(query);
    if (history.empty() || !llm_ || trim(query).empty()) return out;

    llm::CompletionRequest req;
    req.purpose = "contextualize";
    req.temperature = 0.0;
    req.max_output = 256;
    req.messages.push_back(llm::ChatMessage{llm::Role::system, kContextualizerTemplate, std::nullopt, {}});
    for (const auto& m : history) {
        if (m.role == llm::Role::user || m.role == llm::Role::assistant) req.messages.push_back(m);
    }
    req.messages.push_back(llm::ChatMessage{llm::Role::user, std::string(query), std::nullopt, {}});
    out.used_llm = true;
    out.request = req;
    try {
        std::string reply = llm_->complete(req);
        out.llm_output = reply;
        if (looks_malformed(reply)) {
            out.fell_back = true;
            out.error = "malformed contextualizer output";
            spdlog::warn("contextualizer returned malformed output; using raw query");
        } else {
            out.text = trim(reply);
        }
    } catch (const std::exception& e) {
        out.fell_back = true;
        out.error = e.what();
        spdlog::warn("contextualizer failed ({}); using raw query", e.what());
    }
    return out;
}

Chunk MemorySystem::segment_chunk(const EpisodicSegment& segment) const {
    Chunk c;
    c.chunk_id = segment.chunk_id();
    c.space_id = user_space(segment.user_id);
    c.text = segment.render(config_.persona_name);
    c.span = segment.span();
    c.metadata = {{"session_id", segment.session_id},
                  {"finalized_at", to_epoch_seconds(segment.finalized_at)},
                  {"partial", segment.partial},
                  {"interactions", segment.interactions.size()}};
    return c;
}

bool MemorySystem::store_segment(const EpisodicSegment& segment) {
    Chunk c = segment_chunk(segment);
    try {
        c.embedding = embedder_->embed(c.text);
    } catch (const RetryableError& e) {
        spdlog::warn("segment {} embedding failed ({}); queued for retry", c.chunk_id, e.what());
        std::lock_guard lock(pending_mu_);
        pending_.push_back(segment);
        return false;
    }
    const std::string space = c.space_id;
    store_->upsert(space, {std::move(c)});
    return true;
}

std::size_t MemorySystem::retry_pending() {
    std::deque<EpisodicSegment> work;
    {
        std::lock_guard lock(pending_mu_);
        work.swap(pending_);
    }
    std::size_t stored = 0;
    for (const auto& seg : work) {
        if (store_segment(seg)) ++stored;
    }
    return stored;
}

std::size_t MemorySystem::pending_count() const {
    std::lock_guard lock(pending_mu_);
    return pending_.size();
}

std::vector<Chunk> MemorySystem::segments(std::string_view user_id) const {
    auto chunks = store_->chunks(user_space(user_id));
    std::sort(chunks.begin(), chunks.end(),
              [](const Chunk& a, const Chunk& b) { return a.insertion_seq < b.insertion_seq; });
    for (auto& c : chunks) c.embedding.clear();
    return chunks;
}

}  // namespace social::memory
