#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "acsa/domain.hpp"
#include "acsa/errors.hpp"

namespace acsa {

struct Message {
    std::string role;  // "system", "user", "assistant"
    std::string content;
};

struct DecodeOptions {
    double temperature = 0.0;
    int max_tokens = 1024;
    bool logprobs = true;
};

struct GenerationRequest {
    std::string model;
    std::vector<Message> messages;
    DecodeOptions decode;
};

/// One generated token with its log-probability and the half-open
/// character range it occupies in the generation text. Spans of a
/// response are non-overlapping, ordered and concatenate to the text.
struct TokenProb {
    std::string text;
    double logprob = 0.0;  // <= 0
    CharSpan span;
};

struct GenerationResponse {
    std::string text;
    std::vector<TokenProb> tokens;
    std::string model;
    bool cached = false;
};

/// SHA-256 hex digest over the canonical serialization of model,
/// messages and decode options. The content-address for caching.
std::string request_hash(const GenerationRequest& req);

/// Assigns char spans by walking the text with each token's bytes.
/// Throws CapabilityError when the token stream does not reconstruct
/// the text exactly or a log-probability is positive.
std::vector<TokenProb> align_tokens(std::string_view text,
                                    std::span<const std::pair<std::string, double>> tokens);

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    /// Uncached generation. Throws TransportError (retryable) or
    /// CapabilityError / BackendError (fatal).
    virtual GenerationResponse generate(const GenerationRequest& req) = 0;
};

struct HttpBackendConfig {
    std::string base_url;  // e.g. https://host:port
    std::string api_key;
    std::string path = "/v1/chat/completions";
    int timeout_seconds = 120;
};

std::shared_ptr<Backend> make_http_backend(HttpBackendConfig config);

/// Append-only JSONL response cache with an in-memory index keyed by
/// request hash. Replaying a cached record restores the exact response.
class ResponseCache {
public:
    ResponseCache() = default;
    /// Loads an existing file if present; later writes append to it.
    /// An empty path keeps the cache purely in memory.
    explicit ResponseCache(std::string path);

    std::optional<GenerationResponse> find(const std::string& hash) const;
    void put(const std::string& hash, const GenerationRequest& req, const GenerationResponse& resp);
    std::size_t size() const { return index_.size(); }

private:
    std::string path_;
    std::unordered_map<std::string, GenerationResponse> index_;
};

struct ClientOptions {
    std::string cache_path;    // empty: in-memory cache only
    bool strict_greedy = true; // reject temperature != 0 and logprobs off
    int max_attempts = 5;      // transport retries, exponential backoff
    int retry_base_ms = 250;
};

/// Cache-aware front of a Backend with bounded retry. Thread-safe.
class Client {
public:
    Client(std::shared_ptr<Backend> backend, ClientOptions options);

    GenerationResponse generate(const GenerationRequest& req);

    std::size_t cache_hits() const { return cache_hits_; }
    std::size_t backend_calls() const { return backend_calls_; }

private:
    std::shared_ptr<Backend> backend_;
    ClientOptions options_;
    ResponseCache cache_;
    mutable std::mutex mutex_;
    std::size_t cache_hits_ = 0;
    std::size_t backend_calls_ = 0;
};

}  // namespace acsa
