#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace social::memory {

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    // Throws ValidationError on blank text, RetryableError on provider failure.
    virtual std::vector<double> embed(std::string_view text) const = 0;
};

// Deterministic bag-of-words embedder: lowercase, split on non-alphanumerics,
// hash tokens (FNV-1a) into `dimension` buckets, count, L2-normalise.
// Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
class HashingEmbedder final : public EmbeddingProvider {
public:
    explicit HashingEmbedder(std::size_t dimension = 256);
    std::size_t dimension() const override { return dimension_; }
    std::vector<double> embed(std::string_view text) const override;

    static std::vector<std::string> tokenize(std::string_view text);
    static std::uint64_t hash(std::string_view token);

private:
    std::size_t dimension_;
};

struct HttpEmbedderConfig {
    std::string endpoint;
    std::string api_key;
    std::string model;
    std::size_t dimension = 0;
    double timeout_s = 30.0;
};

// POST {"model", "input"} and read data[0].embedding.
class HttpEmbedder final : public EmbeddingProvider {
public:
    explicit HttpEmbedder(HttpEmbedderConfig config);
    std::size_t dimension() const override { return config_.dimension; }
    std::vector<double> embed(std::string_view text) const override;

private:
    HttpEmbedderConfig config_;
};

}  // namespace social::memory
