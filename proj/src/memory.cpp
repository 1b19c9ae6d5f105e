#include "social/memory.hpp"

namespace social::memory {

using nlohmann::json;

std::string user_space(std::string_view user_id) { return "user:" + std::string(user_id); }

KnowledgeDoc doc_from_json(const json& j) {
    KnowledgeDoc d;
    try {
        d.doc_id = j.at("doc_id").get<std::string>();
        d.source = j.value("source", std::string());
        d.text = j.at("text").get<std::string>();
        if (j.contains("metadata") && !j["metadata"].is_null()) {
            for (const auto& [k, v] : j["metadata"].items()) {
                d.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("knowledge document: ") + e.what());
    }
    if (d.doc_id.empty()) throw ValidationError("knowledge document: doc_id must be non-empty");
    if (d.text.empty()) throw ValidationError("knowledge document '" + d.doc_id + "': text must be non-empty");
    return d;
}

json to_json(const Chunk& c, bool with_embedding) {
    json j{{"id", c.chunk_id},
           {"space", c.space_id},
           {"span", {c.span.begin, c.span.end}},
           {"seq", c.insertion_seq},
           {"text", c.text},
           {"metadata", c.metadata}};
    if (with_embedding) j["vector"] = c.embedding;
    return j;
}

Chunk chunk_from_json(const json& j) {
    Chunk c;
    c.chunk_id = j.at("id").get<std::string>();
    c.space_id = j.value("space", std::string());
    const auto& span = j.at("span");
    c.span = {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
    c.insertion_seq = j.value("seq", std::uint64_t{0});
    c.text = j.at("text").get<std::string>();
    if (j.contains("metadata")) c.metadata = j["metadata"];
    if (j.contains("vector")) c.embedding = j["vector"].get<std::vector<double>>();
    return c;
}

json to_json(const RetrievedPassage& p) {
    return {{"chunk_id", p.chunk.chunk_id},
            {"space", p.chunk.space_id},
            {"span", {p.chunk.span.begin, p.chunk.span.end}},
            {"text", p.chunk.text},
            {"metadata", p.chunk.metadata},
            {"score", p.score},
            {"rank", p.rank}};
}

std::vector<Chunk> chunk_knowledge(const KnowledgeDoc& doc, std::size_t size, std::size_t overlap) {
    if (doc.text.empty()) throw ValidationError("cannot chunk an empty document");
    if (size == 0 || overlap >= size) throw ValidationError("chunk overlap must be smaller than chunk size");
    const auto offsets = utf8_offsets(doc.text);
    const std::size_t length = offsets.size() - 1;
    const std::size_t stride = size - overlap;

    std::vector<Chunk> out;
    for (std::size_t start = 0; start < length; start += stride) {
        const std::size_t end = std::min(start + size, length);
        Chunk c;
        c.chunk_id = doc.doc_id + "#" + std::to_string(out.size());
        c.space_id = std::string(kKnowledgeSpace);
        c.span = {start, end};
        c.text = doc.text.substr(offsets[start], offsets[end] - offsets[start]);
        c.metadata = {{"doc_id", doc.doc_id}, {"source", doc.source}};
        for (const auto& [k, v] : doc.metadata) c.metadata["meta"][k] = v;
        out.push_back(std::move(c));
        if (end == length) break;
    }
    return out;
}

Span EpisodicSegment::span() const {
    if (interactions.empty()) return {};
    return {interactions.front().index, interactions.back().index + 1};
}

std::string EpisodicSegment::render(std::string_view persona_name) const {
    std::string out;
    for (const auto& it : interactions) {
        if (!out.empty()) out += '\n';
        out += "User: ";
        out += it.user_message.content;
        out += '\n';
        out += persona_name;
        out += ": ";
        out += it.assistant_message.content;
    }
    return out;
}

std::string EpisodicSegment::chunk_id() const {
    const auto s = span();
    return session_id + "/seg/" + std::to_string(s.begin) + "-" + std::to_string(s.end);
}

EpisodicSegmenter::EpisodicSegmenter(std::string user_id, std::string session_id, std::size_t window,
                                     std::size_t overlap)
    : user_id_(std::move(user_id)), session_id_(std::move(session_id)), window_(window), overlap_(overlap) {
    if (window_ == 0 || overlap_ >= window_)
        throw ValidationError("segment overlap must be smaller than the window");
}

EpisodicSegment EpisodicSegmenter::make_segment(std::size_t begin, std::size_t end, Timestamp now,
                                                bool partial) const {
    EpisodicSegment seg;
    seg.user_id = user_id_;
    seg.session_id = session_id_;
    seg.finalized_at = now;
    seg.partial = partial;
    seg.interactions.assign(interactions_.begin() + static_cast<std::ptrdiff_t>(begin),
                            interactions_.begin() + static_cast<std::ptrdiff_t>(end));
    return seg;
}

std::optional<EpisodicSegment> EpisodicSegmenter::append(llm::ChatMessage user_message,
                                                         llm::ChatMessage assistant_message,
                                                         Timestamp now) {
    user_message.validate();
    assistant_message.validate();
    interactions_.push_back(Interaction{std::move(user_message), std::move(assistant_message),
                                        interactions_.size()});
    if (interactions_.size() - window_start_ < window_) return std::nullopt;
    auto seg = make_segment(window_start_, window_start_ + window_, now, false);
    covered_end_ = window_start_ + window_;
    window_start_ += window_ - overlap_;
    return seg;
}

std::optional<EpisodicSegment> EpisodicSegmenter::flush(Timestamp now) {
    const std::size_t count = interactions_.size();
    std::optional<EpisodicSegment> out;
    if (count > covered_end_) {
        std::size_t begin = episode_start_;
        if (covered_end_ > episode_start_) begin = std::max(episode_start_, covered_end_ - overlap_);
        out = make_segment(begin, count, now, true);
    }
    episode_start_ = window_start_ = covered_end_ = count;
    return out;
}

}  // namespace social::memory
