#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace acsa {

using EmbeddingVector = std::vector<double>;

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dimension() const = 0;
    /// One finite vector per input text, all of dimension(). Throws
    /// BackendError on failure.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

/// Deterministic offline provider: each text is hashed and the hash
/// seeds a portable RNG that fills a unit-norm vector. The same string
/// yields the same vector in every process; different strings are
/// near-orthogonal in expectation.
std::shared_ptr<Embedder> make_hash_embedder(std::size_t dim = 16);

struct HttpEmbedderConfig {
    std::string base_url;
    std::string api_key;
    std::string model;
    std::string path = "/v1/embeddings";
    int timeout_seconds = 120;
    int max_attempts = 5;
    int retry_base_ms = 250;
};

std::shared_ptr<Embedder> make_http_embedder(HttpEmbedderConfig config);

}  // namespace acsa
