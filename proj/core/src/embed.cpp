#include "acsa/embed.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "acsa/errors.hpp"

namespace acsa {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

class HashEmbedder : public Embedder {
public:
    explicit HashEmbedder(std::size_t dim) : dim_(dim) {
        if (dim_ == 0) throw ConfigError("hash embedder dimension must be positive");
    }

    std::string name() const override { return "hash-" + std::to_string(dim_); }
    std::size_t dimension() const override { return dim_; }

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(one(t));
        return out;
    }

private:
    EmbeddingVector one(const std::string& text) const {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
        std::uint64_t seed = 0;
        for (int i = 0; i < 8; ++i) seed = (seed << 8) | digest[i];
        std::mt19937_64 rng(seed);
        // Explicit Box-Muller instead of std::normal_distribution keeps
        // the byte stream identical across standard libraries.
        auto uniform = [&rng]() {
            return (static_cast<double>(rng() >> 11) + 0.5) / 9007199254740992.0;
        };
        EmbeddingVector v(dim_);
        for (std::size_t i = 0; i < dim_; i += 2) {
            double u1 = uniform();
            double u2 = uniform();
            double r = std::sqrt(-2.0 * std::log(u1));
            v[i] = r * std::cos(kTwoPi * u2);
            if (i + 1 < dim_) v[i + 1] = r * std::sin(kTwoPi * u2);
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            v.assign(dim_, 0.0);
            v[0] = 1.0;
            return v;
        }
        for (double& x : v) x /= norm;
        return v;
    }

    std::size_t dim_;
};

class HttpEmbedder : public Embedder {
public:
    explicit HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {
        if (config_.base_url.empty()) throw ConfigError("embedding endpoint URL is empty");
    }

    std::string name() const override { return "http:" + config_.model; }

    std::size_t dimension() const override { return dim_; }

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
        if (texts.empty()) return {};
        nlohmann::json payload;
        payload["model"] = config_.model;
        payload["input"] = std::vector<std::string>(texts.begin(), texts.end());
        std::string body = payload.dump();

        std::string response_body;
        for (int attempt = 1;; ++attempt) {
            try {
                response_body = post(body);
                break;
            } catch (const TransportError&) {
                if (attempt >= config_.max_attempts) throw;
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(config_.retry_base_ms * (1 << (attempt - 1))));
            }
        }

        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(response_body);
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("embedding response is not JSON: ") + e.what());
        }
        if (!parsed.contains("data") || !parsed["data"].is_array() ||
            parsed["data"].size() != texts.size())
            throw BackendError("embedding response has no data array of the right length");
        std::vector<EmbeddingVector> out(texts.size());
        for (const auto& item : parsed["data"]) {
            std::size_t index = item.value("index", out.size());
            if (index >= out.size() || !item.contains("embedding"))
                throw BackendError("malformed embedding item in response");
            out[index] = item["embedding"].get<EmbeddingVector>();
        }
        for (const auto& v : out) {
            if (v.empty()) throw BackendError("embedding response left an input unanswered");
            if (dim_ == 0) dim_ = v.size();
            if (v.size() != dim_)
                throw BackendError("embedding dimensions differ across texts: " +
                                   std::to_string(v.size()) + " vs " + std::to_string(dim_));
            for (double x : v)
                if (!std::isfinite(x)) throw BackendError("non-finite embedding coordinate");
        }
        return out;
    }

private:
    std::string post(const std::string& body) {
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds);
        client.set_read_timeout(config_.timeout_seconds);
        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        auto res = client.Post(config_.path, headers, body, "application/json");
        if (!res)
            throw TransportError("embedding endpoint unreachable: " +
                                 httplib::to_string(res.error()));
        if (res->status >= 500)
            throw TransportError("embedding endpoint returned " + std::to_string(res->status));
        if (res->status != 200)
            throw BackendError("embedding endpoint returned " + std::to_string(res->status) +
                               ": " + res->body.substr(0, 200));
        return res->body;
    }

    HttpEmbedderConfig config_;
    std::size_t dim_ = 0;
};

}  // namespace

std::shared_ptr<Embedder> make_hash_embedder(std::size_t dim) {
    return std::make_shared<HashEmbedder>(dim);
}

std::shared_ptr<Embedder> make_http_embedder(HttpEmbedderConfig config) {
    return std::make_shared<HttpEmbedder>(std::move(config));
}

}  // namespace acsa
