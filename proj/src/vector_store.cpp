#include "social/vector_store.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

namespace social::memory {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "social-agent-vectors";
constexpr int kFormatVersion = 1;
constexpr const char* kSnapshotFile = "snapshot.jsonl";
constexpr const char* kJournalFile = "journal.jsonl";

double l2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace

std::string safe_path_component(std::string_view s) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || (c == '.' && !out.empty())) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(kHex[c >> 4]);
            out.push_back(kHex[c & 0xF]);
        }
    }
    return out;
}

std::string unsafe_path_component(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

VectorStore::VectorStore(std::size_t dimension, fs::path root, std::size_t journal_compaction_threshold)
    : dimension_(dimension), root_(std::move(root)), compaction_threshold_(journal_compaction_threshold) {
    if (dimension_ == 0) throw ValidationError("vector store dimension must be positive");
    if (root_.empty()) return;
    fs::create_directories(root_);
    if (fs::exists(root_ / "knowledge")) load_space(std::string(kKnowledgeSpace));
    if (fs::exists(root_ / "memory")) {
        for (const auto& entry : fs::directory_iterator(root_ / "memory")) {
            if (!entry.is_directory()) continue;
            load_space(user_space(unsafe_path_component(entry.path().filename().string())));
        }
    }
    if (fs::exists(root_ / "spaces")) {
        for (const auto& entry : fs::directory_iterator(root_ / "spaces")) {
            if (entry.is_directory()) load_space(unsafe_path_component(entry.path().filename().string()));
        }
    }
}

VectorStore::~VectorStore() = default;

fs::path VectorStore::space_dir(const std::string& space_id) const {
    if (space_id == kKnowledgeSpace) return root_ / "knowledge";
    if (space_id.rfind("user:", 0) == 0) return root_ / "memory" / safe_path_component(space_id.substr(5));
    return root_ / "spaces" / safe_path_component(space_id);
}

void VectorStore::apply(Space& space, Chunk chunk) {
    if (auto it = space.by_id.find(chunk.chunk_id); it != space.by_id.end()) {
        chunk.insertion_seq = space.chunks[it->second].insertion_seq;
        space.chunks[it->second] = std::move(chunk);
        return;
    }
    chunk.insertion_seq = std::max(chunk.insertion_seq, space.next_seq);
    space.next_seq = chunk.insertion_seq + 1;
    space.by_id.emplace(chunk.chunk_id, space.chunks.size());
    space.chunks.push_back(std::move(chunk));
}

void VectorStore::load_space(const std::string& space_id) {
    auto space = std::make_unique<Space>();
    const fs::path dir = space_dir(space_id);

    auto read_lines = [&](const fs::path& file, bool is_journal) {
        std::ifstream in(file);
        if (!in) return;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error&) {
                // A torn final journal line is expected after a crash.
                spdlog::warn("{}:{}: skipping unreadable record", file.string(), lineno);
                continue;
            }
            if (!is_journal && lineno == 1) {
                if (j.value("format", std::string()) != kFormat)
                    throw ConfigError(file.string() + ": not a vector snapshot");
                if (j.value("dimension", std::size_t{0}) != dimension_)
                    throw ConfigError(file.string() + ": snapshot dimension " +
                                      std::to_string(j.value("dimension", 0)) + " does not match store dimension " +
                                      std::to_string(dimension_));
                continue;
            }
            const json& rec = is_journal ? j.at("chunk") : j;
            Chunk c = chunk_from_json(rec);
            c.space_id = space_id;
            if (c.embedding.size() != dimension_)
                throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": dimension mismatch");
            apply(*space, std::move(c));
            if (is_journal) ++space->journal_records;
        }
    };
    read_lines(dir / kSnapshotFile, false);
    read_lines(dir / kJournalFile, true);
    open_journal(space_id, *space);
    std::unique_lock lock(spaces_mu_);
    spaces_[space_id] = std::move(space);
}

void VectorStore::open_journal(const std::string& space_id, Space& space) {
    if (root_.empty()) return;
    const fs::path dir = space_dir(space_id);
    fs::create_directories(dir);
    space.journal = std::make_unique<std::ofstream>(dir / kJournalFile, std::ios::app);
    if (!*space.journal) throw ConfigError("cannot open journal in " + dir.string());
}

VectorStore::Space& VectorStore::space_for_write(const std::string& space_id) {
    {
        std::shared_lock lock(spaces_mu_);
        if (auto it = spaces_.find(space_id); it != spaces_.end()) return *it->second;
    }
    std::unique_lock lock(spaces_mu_);
    auto& slot = spaces_[space_id];
    if (!slot) {
        slot = std::make_unique<Space>();
        open_journal(space_id, *slot);
    }
    return *slot;
}

const VectorStore::Space* VectorStore::find_space(const std::string& space_id) const {
    std::shared_lock lock(spaces_mu_);
    auto it = spaces_.find(space_id);
    return it == spaces_.end() ? nullptr : it->second.get();
}

std::size_t VectorStore::upsert(const std::string& space_id, std::vector<Chunk> chunks) {
    for (const auto& c : chunks) {
        if (c.embedding.size() != dimension_)
            throw ValidationError("chunk '" + c.chunk_id + "' has dimension " + std::to_string(c.embedding.size()) +
                                  ", store expects " + std::to_string(dimension_));
        if (c.chunk_id.empty()) throw ValidationError("chunk id must be non-empty");
    }
    Space& space = space_for_write(space_id);
    std::unique_lock lock(space.mu);
    const std::size_t count = chunks.size();
    for (auto& c : chunks) {
        c.space_id = space_id;
        const std::string id = c.chunk_id;
        apply(space, std::move(c));
        if (space.journal) {
            const Chunk& stored = space.chunks[space.by_id.at(id)];
            *space.journal << dump_line({{"op", "upsert"}, {"chunk", to_json(stored)}}) << '\n';
            ++space.journal_records;
        }
    }
    if (space.journal) {
        space.journal->flush();
        if (!*space.journal) throw Error("failed appending to journal of space " + space_id);
    }
    space.dirty = true;
    if (space.journal && space.journal_records >= compaction_threshold_) write_snapshot(space_id, space);
    return count;
}

std::vector<RetrievedPassage> VectorStore::retrieve(const std::string& space_id, std::span<const double> query,
                                                    std::size_t k) const {
    if (query.size() != dimension_)
        throw ValidationError("query has dimension " + std::to_string(query.size()) + ", store expects " +
                              std::to_string(dimension_));
    if (k == 0) throw ValidationError("k must be at least 1");
    const Space* space = find_space(space_id);
    if (!space) return {};
    std::shared_lock lock(space->mu);

    const double qn = l2(query);
    struct Scored {
        double score;
        std::uint64_t seq;
        std::size_t idx;
    };
    std::vector<Scored> scored;
    scored.reserve(space->chunks.size());
    for (std::size_t i = 0; i < space->chunks.size(); ++i) {
        const auto& e = space->chunks[i].embedding;
        double dot = 0.0;
        double cn = 0.0;
        for (std::size_t d = 0; d < dimension_; ++d) {
            dot += query[d] * e[d];
            cn += e[d] * e[d];
        }
        cn = std::sqrt(cn);
        const double score = (qn == 0.0 || cn == 0.0) ? 0.0 : dot / (qn * cn);
        scored.push_back({score, space->chunks[i].insertion_seq, i});
    }
    const std::size_t n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                      [](const Scored& a, const Scored& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.seq < b.seq;
                      });
    std::vector<RetrievedPassage> out;
    out.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        RetrievedPassage p;
        p.chunk = space->chunks[scored[r].idx];
        p.chunk.embedding.clear();
        p.score = scored[r].score;
        p.rank = r + 1;
        out.push_back(std::move(p));
    }
    return out;
}

std::size_t VectorStore::size(const std::string& space_id) const {
    const Space* space = find_space(space_id);
    if (!space) return 0;
    std::shared_lock lock(space->mu);
    return space->chunks.size();
}

std::vector<Chunk> VectorStore::chunks(const std::string& space_id) const {
    const Space* space = find_space(space_id);
    if (!space) return {};
    std::shared_lock lock(space->mu);
    return space->chunks;
}

std::vector<std::string> VectorStore::spaces() const {
    std::shared_lock lock(spaces_mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : spaces_) out.push_back(id);
    return out;
}

void VectorStore::write_snapshot(const std::string& space_id, Space& space) {
    const fs::path dir = space_dir(space_id);
    fs::create_directories(dir);
    const fs::path tmp = dir / "snapshot.jsonl.tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << dump_line({{"format", kFormat},
                          {"version", kFormatVersion},
                          {"space", space_id},
                          {"dimension", dimension_},
                          {"count", space.chunks.size()}})
            << '\n';
        for (const auto& c : space.chunks) out << dump_line(to_json(c)) << '\n';
        out.flush();
        if (!out) throw Error("failed writing snapshot " + tmp.string());
    }
    fs::rename(tmp, dir / kSnapshotFile);
    space.journal.reset();
    std::ofstream(dir / kJournalFile, std::ios::trunc).close();
    space.journal_records = 0;
    open_journal(space_id, space);
    space.dirty = false;
}

void VectorStore::checkpoint() {
    if (root_.empty()) return;
    std::shared_lock lock(spaces_mu_);
    for (auto& [id, space] : spaces_) {
        std::unique_lock space_lock(space->mu);
        if (space->dirty || space->journal_records > 0) write_snapshot(id, *space);
    }
}

}  // namespace social::memory
