#include "acsa/llm.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

namespace acsa {

namespace {

using nlohmann::json;

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

json request_to_json(const GenerationRequest& req) {
    json messages = json::array();
    for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    return {{"model", req.model},
            {"messages", std::move(messages)},
            {"decode",
             {{"temperature", req.decode.temperature},
              {"max_tokens", req.decode.max_tokens},
              {"logprobs", req.decode.logprobs}}}};
}

std::string utc_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string excerpt(const std::string& body, std::size_t limit = 300) {
    std::string out = body.substr(0, limit);
    for (char& c : out)
        if (c == '\n' || c == '\r') c = ' ';
    if (body.size() > limit) out += "...";
    return out;
}

}  // namespace

std::string request_hash(const GenerationRequest& req) {
    // nlohmann objects iterate in key order, so dump() is canonical.
    return sha256_hex(request_to_json(req).dump());
}

std::vector<TokenProb> align_tokens(std::string_view text,
                                    std::span<const std::pair<std::string, double>> tokens) {
    std::vector<TokenProb> out;
    out.reserve(tokens.size());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& [tok, lp] = tokens[i];
        if (lp > 0.0)
            throw CapabilityError("token " + std::to_string(i) + " has positive log-probability " +
                                  std::to_string(lp));
        if (pos + tok.size() > text.size() || text.substr(pos, tok.size()) != tok)
            throw CapabilityError("token stream does not reconstruct the generation text at byte " +
                                  std::to_string(pos) + " (token " + std::to_string(i) + ")");
        out.push_back({tok, lp, {pos, pos + tok.size()}});
        pos += tok.size();
    }
    if (pos != text.size())
        throw CapabilityError("token stream covers " + std::to_string(pos) + " of " +
                              std::to_string(text.size()) + " generation bytes");
    return out;
}

namespace {

class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
        if (config_.base_url.empty()) throw ConfigError("http backend needs a base URL");
    }

    std::string name() const override { return "openai:" + config_.base_url; }

    GenerationResponse generate(const GenerationRequest& req) override {
        json body = {{"model", req.model},
                     {"temperature", req.decode.temperature},
                     {"max_tokens", req.decode.max_tokens},
                     {"logprobs", req.decode.logprobs}};
        json messages = json::array();
        for (const auto& m : req.messages)
            messages.push_back({{"role", m.role}, {"content", m.content}});
        body["messages"] = std::move(messages);

        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_write_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);

        auto res = client.Post(config_.path, headers, body.dump(), "application/json");
        const std::string url = config_.base_url + config_.path;
        if (!res)
            throw TransportError("POST " + url + ": " + httplib::to_string(res.error()));
        if (res->status >= 500)
            throw TransportError("POST " + url + ": HTTP " + std::to_string(res->status) + ": " +
                                 excerpt(res->body));
        if (res->status != 200)
            throw BackendError("POST " + url + ": HTTP " + std::to_string(res->status) + ": " +
                               excerpt(res->body));

        json parsed;
        try {
            parsed = json::parse(res->body);
        } catch (const json::exception& e) {
            throw BackendError("POST " + url + ": unparseable response body: " + e.what());
        }
        return parse_completion(parsed, req, url);
    }

private:
    static GenerationResponse parse_completion(const json& parsed, const GenerationRequest& req,
                                               const std::string& url) {
        if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
            parsed["choices"].empty())
            throw BackendError(url + ": response has no choices");
        const json& choice = parsed["choices"][0];
        if (!choice.contains("message") || !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string())
            throw BackendError(url + ": choice has no message content");

        GenerationResponse resp;
        resp.text = choice["message"]["content"].get<std::string>();
        resp.model = parsed.value("model", req.model);

        if (req.decode.logprobs) {
            if (!choice.contains("logprobs") || choice["logprobs"].is_null() ||
                !choice["logprobs"].contains("content") ||
                !choice["logprobs"]["content"].is_array())
                throw CapabilityError(url +
                                      ": backend returned no token log-probabilities; "
                                      "confidence scoring needs them");
            std::vector<std::pair<std::string, double>> raw;
            for (const json& item : choice["logprobs"]["content"]) {
                if (!item.contains("token") || !item.contains("logprob"))
                    throw CapabilityError(url + ": malformed logprobs entry");
                raw.emplace_back(item["token"].get<std::string>(),
                                 item["logprob"].get<double>());
            }
            resp.tokens = align_tokens(resp.text, raw);
        }
        return resp;
    }

    HttpBackendConfig config_;
};

}  // namespace

std::shared_ptr<Backend> make_http_backend(HttpBackendConfig config) {
    return std::make_shared<HttpBackend>(std::move(config));
}

ResponseCache::ResponseCache(std::string path) : path_(std::move(path)) {
    if (path_.empty() || !std::filesystem::exists(path_)) return;
    std::ifstream in(path_);
    if (!in) throw DataError("cannot open cache file " + path_);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
            const std::string hash = record.at("request_hash").get<std::string>();
            const json& r = record.at("response");
            GenerationResponse resp;
            resp.text = r.at("text").get<std::string>();
            resp.model = r.value("model", std::string{});
            std::vector<std::pair<std::string, double>> raw;
            for (const json& t : r.at("tokens"))
                raw.emplace_back(t.at(0).get<std::string>(), t.at(1).get<double>());
            resp.tokens = align_tokens(resp.text, raw);
            resp.cached = true;
            index_[hash] = std::move(resp);
        } catch (const json::exception& e) {
            throw DataError("cache file " + path_ + " line " + std::to_string(line_no) + ": " +
                            e.what());
        }
    }
}

std::optional<GenerationResponse> ResponseCache::find(const std::string& hash) const {
    auto it = index_.find(hash);
    if (it == index_.end()) return std::nullopt;
    GenerationResponse resp = it->second;
    resp.cached = true;
    return resp;
}

void ResponseCache::put(const std::string& hash, const GenerationRequest& req,
                        const GenerationResponse& resp) {
    if (index_.contains(hash)) return;
    GenerationResponse stored = resp;
    stored.cached = true;
    index_[hash] = stored;
    if (path_.empty()) return;

    json tokens = json::array();
    for (const auto& t : resp.tokens) tokens.push_back({t.text, t.logprob});
    json record = {{"request_hash", hash},
                   {"timestamp", utc_timestamp()},
                   {"request", request_to_json(req)},
                   {"response",
                    {{"text", resp.text}, {"model", resp.model}, {"tokens", std::move(tokens)}}}};
    std::ofstream out(path_, std::ios::app);
    if (!out) throw DataError("cannot append to cache file " + path_);
    out << record.dump() << '\n';
}

Client::Client(std::shared_ptr<Backend> backend, ClientOptions options)
    : backend_(std::move(backend)), options_(std::move(options)), cache_(options_.cache_path) {
    if (!backend_) throw ConfigError("client needs a backend");
}

GenerationResponse Client::generate(const GenerationRequest& req) {
    if (options_.strict_greedy) {
        if (req.decode.temperature != 0.0)
            throw ConfigError("greedy decoding required: temperature must be 0");
        if (!req.decode.logprobs)
            throw ConfigError("token log-probabilities are required for confidence scoring");
    }
    const std::string hash = request_hash(req);
    {
        std::lock_guard lock(mutex_);
        if (auto hit = cache_.find(hash)) {
            ++cache_hits_;
            return *hit;
        }
    }

    GenerationResponse resp;
    const int attempts = std::max(1, options_.max_attempts);
    for (int attempt = 0;; ++attempt) {
        try {
            resp = backend_->generate(req);
            break;
        } catch (const TransportError&) {
            if (attempt + 1 >= attempts) throw;
            auto delay = std::chrono::milliseconds(
                static_cast<std::int64_t>(options_.retry_base_ms) << attempt);
            std::this_thread::sleep_for(delay);
        }
    }
    resp.cached = false;

    std::lock_guard lock(mutex_);
    ++backend_calls_;
    if (auto hit = cache_.find(hash)) return *hit;  // another thread won the race
    cache_.put(hash, req, resp);
    return resp;
}

}  // namespace acsa
