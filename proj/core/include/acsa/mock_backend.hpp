#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "acsa/llm.hpp"

namespace acsa {

/// Deterministic tokenizer for mock generations: maximal runs of
/// [A-Za-z0-9_#/] become word tokens, every other byte is a token of
/// its own. Concatenating the tokens reproduces the input.
std::vector<std::string> mock_tokenize(std::string_view text);

/// One scripted response. The rule fires when every match_all substring
/// occurs in the scope text: the last user message by default, or the
/// whole transcript when transcript_scope is set. Either an explicit
/// token list or a text whose mock tokens all share one log-probability.
struct MockRule {
    std::vector<std::string> match_all;
    bool transcript_scope = false;
    std::string text;
    double logprob = -0.1;
    std::optional<std::vector<std::pair<std::string, double>>> tokens;
};

/// Offline stand-in for a chat-completion backend. Rules are matched in
/// order; an optional default catches everything else. A programmatic
/// handler, when set, gets the first look at every request.
class MockBackend final : public Backend {
public:
    using Handler =
        std::function<std::optional<GenerationResponse>(const GenerationRequest&)>;

    /// Loads a JSON script: {"default": {...}, "rules": [{...}]} where
    /// each rule object carries match_all, optional scope
    /// ("last" | "transcript"), and text+logprob or tokens [[t, lp]...].
    static std::shared_ptr<MockBackend> from_script_file(const std::string& path);
    static std::shared_ptr<MockBackend> from_script_string(const std::string& content);

    std::string name() const override { return "mock"; }
    GenerationResponse generate(const GenerationRequest& req) override;

    void add_rule(MockRule rule) { rules_.push_back(std::move(rule)); }
    void set_default(MockRule rule) { default_ = std::move(rule); }
    void set_handler(Handler handler) { handler_ = std::move(handler); }

    std::size_t calls() const { return calls_.load(); }

private:
    std::vector<MockRule> rules_;
    std::optional<MockRule> default_;
    Handler handler_;
    std::atomic<std::size_t> calls_{0};
};

}  // namespace acsa
