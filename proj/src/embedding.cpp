#include "social/embedding.hpp"

#include <cctype>
#include <cmath>

#include "json.hpp"
#include "social/common.hpp"
#include "social/http_client.hpp"

namespace social::memory {

namespace {
bool is_word_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }
}  // namespace

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw ValidationError("embedding dimension must be positive");
}

std::vector<std::string> HashingEmbedder::tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::uint64_t HashingEmbedder::hash(std::string_view token) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : token) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<double> HashingEmbedder::embed(std::string_view text) const {
    const std::string trimmed = trim(text);
    if (trimmed.empty()) throw ValidationError("cannot embed empty text");
    auto tokens = tokenize(trimmed);
    // Punctuation-only input still gets a stable, non-zero vector.
    if (tokens.empty()) tokens.push_back(trimmed);

    std::vector<double> v(dimension_, 0.0);
    for (const auto& t : tokens) v[hash(t) % dimension_] += 1.0;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("embedding endpoint is not configured");
    if (config_.dimension == 0) throw ConfigError("embedding dimension must be configured");
    net::parse_url(config_.endpoint);
}

std::vector<double> HttpEmbedder::embed(std::string_view text) const {
    if (trim(text).empty()) throw ValidationError("cannot embed empty text");
    const nlohmann::json body{{"model", config_.model}, {"input", std::string(text)}};
    net::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    const auto resp = net::http_post_json(
        config_.endpoint, body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace), headers,
        config_.timeout_s);
    if (resp.status < 200 || resp.status >= 300)
        throw RetryableError("embedding provider returned HTTP " + std::to_string(resp.status));
    try {
        auto v = nlohmann::json::parse(resp.body).at("data").at(0).at("embedding").get<std::vector<double>>();
        if (v.size() != config_.dimension)
            throw RetryableError("embedding provider returned dimension " + std::to_string(v.size()));
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw RetryableError(std::string("malformed embedding payload: ") + e.what());
    }
}

}  // namespace social::memory
