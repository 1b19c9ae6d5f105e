#pragma once

// Exact cosine top-k search over named spaces, with optional on-disk
// persistence (snapshot + append-only journal per space). File formats are
// described in docs/storage.md.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "social/memory.hpp"

namespace social::memory {

class VectorStore {
public:
    // In-memory only when `root` is empty. Otherwise existing spaces under
    // root/knowledge, root/memory/<user>/ and root/spaces/<id>/ are loaded (snapshot, then journal).
    explicit VectorStore(std::size_t dimension, std::filesystem::path root = {},
                         std::size_t journal_compaction_threshold = 1000);
    ~VectorStore();

    VectorStore(const VectorStore&) = delete;
    VectorStore& operator=(const VectorStore&) = delete;

    std::size_t dimension() const { return dimension_; }

    // Stores chunks (replacing any with the same chunk_id, which keep their
    // original insertion_seq). Returns the number stored. Throws
    // ValidationError on dimension mismatch, before anything is written.
    std::size_t upsert(const std::string& space_id, std::vector<Chunk> chunks);

    // Top-k by cosine similarity, descending; ties by ascending insertion_seq.
    std::vector<RetrievedPassage> retrieve(const std::string& space_id,
                                           std::span<const double> query, std::size_t k = 5) const;

    std::size_t size(const std::string& space_id) const;
    std::vector<Chunk> chunks(const std::string& space_id) const;
    std::vector<std::string> spaces() const;

    // Writes a fresh snapshot for every dirty space and truncates its journal.
    void checkpoint();

    // Directory holding a space's files.
    std::filesystem::path space_dir(const std::string& space_id) const;

private:
    struct Space {
        mutable std::shared_mutex mu;
        std::vector<Chunk> chunks;
        std::unordered_map<std::string, std::size_t> by_id;
        std::uint64_t next_seq = 0;
        std::size_t journal_records = 0;
        std::unique_ptr<std::ofstream> journal;
        bool dirty = false;
    };

    Space& space_for_write(const std::string& space_id);
    const Space* find_space(const std::string& space_id) const;
    void load_space(const std::string& space_id);
    void write_snapshot(const std::string& space_id, Space& space);
    void open_journal(const std::string& space_id, Space& space);
    void apply(Space& space, Chunk chunk);

    std::size_t dimension_;
    std::filesystem::path root_;
    std::size_t compaction_threshold_;
    mutable std::shared_mutex spaces_mu_;
    std::map<std::string, std::unique_ptr<Space>> spaces_;
};

// Filesystem-safe rendering of a user id (percent-encodes anything outside
// [A-Za-z0-9._-]).
std::string safe_path_component(std::string_view s);
std::string unsafe_path_component(std::string_view s);

}  // namespace social::memory
