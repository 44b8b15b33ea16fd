#include "acsa/mock_backend.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace acsa {

namespace {

using nlohmann::json;

bool word_byte(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '#' || c == '/';
}

GenerationResponse response_from_rule(const MockRule& rule, const GenerationRequest& req) {
    GenerationResponse resp;
    resp.model = req.model;
    std::vector<std::pair<std::string, double>> raw;
    if (rule.tokens) {
        for (const auto& [tok, lp] : *rule.tokens) {
            resp.text += tok;
            raw.emplace_back(tok, lp);
        }
    } else {
        resp.text = rule.text;
        for (auto& tok : mock_tokenize(rule.text)) raw.emplace_back(std::move(tok), rule.logprob);
    }
    if (req.decode.logprobs) resp.tokens = align_tokens(resp.text, raw);
    return resp;
}

std::string scope_text(const MockRule& rule, const GenerationRequest& req) {
    if (rule.transcript_scope) {
        std::string out;
        for (const auto& m : req.messages) {
            out += m.role;
            out += ": ";
            out += m.content;
            out += '\n';
        }
        return out;
    }
    for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it)
        if (it->role == "user") return it->content;
    return {};
}

bool rule_matches(const MockRule& rule, const GenerationRequest& req) {
    const std::string target = scope_text(rule, req);
    for (const auto& needle : rule.match_all)
        if (target.find(needle) == std::string::npos) return false;
    return true;
}

MockRule rule_from_json(const json& obj, const std::string& where) {
    MockRule rule;
    if (obj.contains("match_all")) {
        if (!obj["match_all"].is_array())
            throw ConfigError(where + ": match_all must be an array of strings");
        for (const json& s : obj["match_all"]) {
            if (!s.is_string())
                throw ConfigError(where + ": match_all must be an array of strings");
            rule.match_all.push_back(s.get<std::string>());
        }
    }
    if (obj.contains("scope")) {
        const std::string scope = obj["scope"].get<std::string>();
        if (scope == "transcript")
            rule.transcript_scope = true;
        else if (scope != "last")
            throw ConfigError(where + ": scope must be \"last\" or \"transcript\", got \"" +
                              scope + "\"");
    }
    const bool has_text = obj.contains("text");
    const bool has_tokens = obj.contains("tokens");
    if (has_text == has_tokens)
        throw ConfigError(where + ": exactly one of text or tokens is required");
    if (has_text) {
        rule.text = obj["text"].get<std::string>();
        rule.logprob = obj.value("logprob", -0.1);
        if (rule.logprob > 0.0) throw ConfigError(where + ": logprob must be <= 0");
    } else {
        std::vector<std::pair<std::string, double>> tokens;
        for (const json& t : obj["tokens"]) {
            if (!t.is_array() || t.size() != 2)
                throw ConfigError(where + ": tokens entries must be [text, logprob] pairs");
            tokens.emplace_back(t[0].get<std::string>(), t[1].get<double>());
        }
        rule.tokens = std::move(tokens);
    }
    return rule;
}

}  // namespace

std::vector<std::string> mock_tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (word_byte(text[i])) {
            std::size_t j = i;
            while (j < text.size() && word_byte(text[j])) ++j;
            tokens.emplace_back(text.substr(i, j - i));
            i = j;
        } else {
            tokens.emplace_back(text.substr(i, 1));
            ++i;
        }
    }
    return tokens;
}

std::shared_ptr<MockBackend> MockBackend::from_script_string(const std::string& content) {
    json script;
    try {
        script = json::parse(content);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("mock script is not valid JSON: ") + e.what());
    }
    auto backend = std::make_shared<MockBackend>();
    if (script.contains("rules")) {
        if (!script["rules"].is_array()) throw ConfigError("mock script: rules must be an array");
        std::size_t idx = 0;
        for (const json& obj : script["rules"])
            backend->add_rule(rule_from_json(obj, "mock script rule " + std::to_string(idx++)));
    }
    if (script.contains("default"))
        backend->set_default(rule_from_json(script["default"], "mock script default"));
    return backend;
}

std::shared_ptr<MockBackend> MockBackend::from_script_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mock script " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_script_string(buffer.str());
}

GenerationResponse MockBackend::generate(const GenerationRequest& req) {
    calls_.fetch_add(1);
    if (handler_) {
        if (auto resp = handler_(req)) return *resp;
    }
    for (const MockRule& rule : rules_)
        if (rule_matches(rule, req)) return response_from_rule(rule, req);
    if (default_) return response_from_rule(*default_, req);

    std::string last_user;
    for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it)
        if (it->role == "user") {
            last_user = it->content;
            break;
        }
    throw BackendError("no mock rule matched; last user message begins: \"" +
                       last_user.substr(0, 120) + "\"");
}

}  // namespace acsa
