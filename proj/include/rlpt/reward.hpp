#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlpt/tasks.hpp"

namespace rlpt::reward {

// Casefold, map curly quotes/dashes to ASCII, collapse whitespace, trim, and
// strip trailing terminal punctuation. Idempotent.
std::string normalize(std::string_view text);

// Whitespace tokens of normalize(text) with per-token trailing punctuation
// (.!?,;:) stripped; tokens that become empty are dropped. This is the token
// stream prefix_match compares on.
std::vector<std::string> match_tokens(std::string_view text);

// 1 iff normalize(predicted) == normalize(target).
int strict_match(std::string_view predicted, std::string_view target);

// 1 iff the prediction's match_tokens are a prefix of the reference window's
// and cover at least the target's token count (min-coverage clause,
// disabled via min_coverage=false to score any valid prefix).
int prefix_match(std::string_view predicted, std::string_view ref_window,
                 std::string_view target, bool min_coverage = true);

enum class RewardMode { Strict, Prefix, Verifiable };

std::string_view mode_name(RewardMode m);

enum class JudgeKind { Oracle, Remote };

struct JudgeRequest {
    std::string reference;
    std::string predicted;
    std::string prompt;  // rendered judge template
};

JudgeRequest make_judge_request(std::string_view reference, std::string_view predicted);

struct JudgeConfig {
    std::string endpoint;  // e.g. "http://127.0.0.1:8477/complete"
    int timeout_ms = 5000;
    int retries = 2;
    bool score_zero_on_error = false;  // trainer policy: fail run vs score 0
    bool log_transcripts = false;
    bool compare_oracle = false;  // also run the lexical oracle, report disagreement
};

struct JudgeError {
    std::string message;
};

// POSTs {"prompt": ...} to the endpoint, expects {"text": ...}, and parses
// the last line matching "Score: 0" or "Score: 1".
class JudgeClient {
public:
    explicit JudgeClient(JudgeConfig cfg);
    ~JudgeClient();
    JudgeClient(JudgeClient&&) noexcept;
    JudgeClient& operator=(JudgeClient&&) noexcept;

    // Returns the score, or JudgeError after exhausting retries.
    std::optional<int> score(const JudgeRequest& req, JudgeError* err = nullptr) const;

    const JudgeConfig& config() const { return cfg_; }

private:
    JudgeConfig cfg_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Parses "Score: 0"/"Score: 1" from the last matching line; nullopt if none.
std::optional<int> parse_judge_score(std::string_view response_text);

struct RewardConfig {
    RewardMode mode = RewardMode::Prefix;
    JudgeKind judge = JudgeKind::Oracle;
    bool min_coverage = true;
    JudgeConfig judge_cfg;
};

struct RewardOutcome {
    int value = 0;  // always 0 or 1
    RewardMode mode = RewardMode::Prefix;
    JudgeKind judge = JudgeKind::Oracle;
    std::string detail;
    std::optional<int> oracle_value;  // set when compare_oracle is on
};

// Extracts the tagged prediction from the raw model output and dispatches to
// the configured matcher; extraction failures score 0. Judge transport
// failures throw unless cfg.judge_cfg.score_zero_on_error is set.
RewardOutcome compute_reward(std::string_view output, const tasks::TaskInstance& task,
                             const RewardConfig& cfg, const JudgeClient* judge = nullptr);

// 1 iff the last "Answer: <x>" line of output normalizes to the gold answer.
int verifiable_reward(std::string_view output, std::string_view gold_answer);

}  // namespace rlpt::reward
