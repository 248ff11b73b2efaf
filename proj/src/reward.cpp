#include "rlpt/reward.hpp"

#include <cctype>
#include <stdexcept>

// keep the vendored httplib lean
#define CPPHTTPLIB_NO_EXCEPTIONS
#include <httplib.h>

#include <json.hpp>

#include "rlpt/text.hpp"

namespace rlpt::reward {

namespace {

// UTF-8 sequences mapped to ASCII before comparison.
struct CharMap {
    std::string_view from;
    char to;
};
constexpr CharMap kCharMaps[] = {
    {"“", '"'},  // left double quote
    {"”", '"'},  // right double quote
    {"„", '"'},
    {"‘", '\''},  // left single quote
    {"’", '\''},  // right single quote
    {"–", '-'},   // en dash
    {"—", '-'},   // em dash
};

bool token_tail_punct(char c) {
    return c == '.' || c == '!' || c == '?' || c == ',' || c == ';' || c == ':';
}

}  // namespace

std::string normalize(std::string_view sv) {
    std::string mapped;
    mapped.reserve(sv.size());
    std::size_t i = 0;
    while (i < sv.size()) {
        bool hit = false;
        for (const auto& m : kCharMaps) {
            if (sv.substr(i, m.from.size()) == m.from) {
                mapped.push_back(m.to);
                i += m.from.size();
                hit = true;
                break;
            }
        }
        if (hit) continue;
        const unsigned char c = static_cast<unsigned char>(sv[i]);
        mapped.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : sv[i]);
        ++i;
    }
    std::string out = text::collapse_whitespace(mapped);
    // strip trailing terminal punctuation (all of it, for idempotence)
    while (!out.empty()) {
        const char back = out.back();
        if (text::is_terminal_punct(back)) {
            out.pop_back();
        } else if (back == ' ') {
            out.pop_back();
        } else {
            break;
        }
    }
    return out;
}

std::vector<std::string> match_tokens(std::string_view sv) {
    std::vector<std::string> out;
    for (auto& tok : text::whitespace_tokens(normalize(sv))) {
        while (!tok.empty() && token_tail_punct(tok.back())) tok.pop_back();
        if (!tok.empty()) out.push_back(std::move(tok));
    }
    return out;
}

int strict_match(std::string_view predicted, std::string_view target) {
    return normalize(predicted) == normalize(target) ? 1 : 0;
}

int prefix_match(std::string_view predicted, std::string_view ref_window,
                 std::string_view target, bool min_coverage) {
    const auto pred = match_tokens(predicted);
    const auto ref = match_tokens(ref_window);
    const auto tgt = match_tokens(target);
    if (pred.empty()) return tgt.empty() ? 1 : 0;
    if (pred.size() > ref.size()) return 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] != ref[i]) return 0;
    if (min_coverage && pred.size() < tgt.size()) return 0;
    return 1;
}

std::string_view mode_name(RewardMode m) {
    switch (m) {
        case RewardMode::Strict: return "strict";
        case RewardMode::Prefix: return "prefix";
        case RewardMode::Verifiable: return "verifiable";
    }
    return "?";
}

JudgeRequest make_judge_request(std::string_view reference, std::string_view predicted) {
    JudgeRequest req;
    req.reference = std::string(reference);
    req.predicted = std::string(predicted);
    req.prompt = tasks::render_judge_prompt(reference, predicted);
    return req;
}

std::optional<int> parse_judge_score(std::string_view response_text) {
    std::optional<int> score;
    std::size_t pos = 0;
    while (pos <= response_text.size()) {
        const std::size_t nl = response_text.find('\n', pos);
        const std::size_t end = nl == std::string_view::npos ? response_text.size() : nl;
        const std::string line = text::trim(response_text.substr(pos, end - pos));
        if (line.rfind("Score:", 0) == 0) {
            const std::string rest = text::trim(std::string_view(line).substr(6));
            if (rest == "0") score = 0;
            else if (rest == "1") score = 1;
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return score;
}

// ---------------------------------------------------------------------------
// Remote judge

struct JudgeClient::Impl {
    std::string host;
    int port = 80;
    std::string path = "/";

    // "http://host:port/path" -> (host, port, path)
    bool parse(const std::string& endpoint) {
        std::string rest = endpoint;
        const std::string scheme = "http://";
        if (rest.rfind(scheme, 0) == 0) rest = rest.substr(scheme.size());
        const std::size_t slash = rest.find('/');
        path = slash == std::string::npos ? "/" : rest.substr(slash);
        std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
        const std::size_t colon = hostport.find(':');
        if (colon == std::string::npos) {
            host = hostport;
            port = 80;
        } else {
            host = hostport.substr(0, colon);
            port = std::stoi(hostport.substr(colon + 1));
        }
        return !host.empty();
    }
};

JudgeClient::JudgeClient(JudgeConfig cfg) : cfg_(std::move(cfg)), impl_(new Impl) {
    if (!impl_->parse(cfg_.endpoint))
        throw std::invalid_argument("judge endpoint not parseable: " + cfg_.endpoint);
}

JudgeClient::~JudgeClient() = default;
JudgeClient::JudgeClient(JudgeClient&&) noexcept = default;
JudgeClient& JudgeClient::operator=(JudgeClient&&) noexcept = default;

std::optional<int> JudgeClient::score(const JudgeRequest& req, JudgeError* err) const {
    const nlohmann::json body = {{"prompt", req.prompt}};
    const std::string payload = body.dump();
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
        httplib::Client client(impl_->host, impl_->port);
        client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
        client.set_read_timeout(0, cfg_.timeout_ms * 1000);
        auto res = client.Post(impl_->path, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        const nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("text") || !parsed["text"].is_string()) {
            last_error = "malformed judge response body";
            continue;
        }
        const auto score = parse_judge_score(parsed["text"].get<std::string>());
        if (!score) {
            last_error = "no Score: line in judge response";
            continue;
        }
        return score;
    }
    if (err) err->message = last_error;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

RewardOutcome compute_reward(std::string_view output, const tasks::TaskInstance& task,
                             const RewardConfig& cfg, const JudgeClient* judge) {
    RewardOutcome out;
    out.mode = cfg.mode;
    out.judge = cfg.judge;

    const tasks::Extraction ex = tasks::extract_prediction(output);
    if (!ex.ok()) {
        out.value = 0;
        out.detail = "extraction_failed";
        return out;
    }
    const std::string& pred = *ex.prediction;

    if (cfg.judge == JudgeKind::Remote) {
        if (!judge) throw std::invalid_argument("compute_reward: remote judge not configured");
        const JudgeRequest req = make_judge_request(task.ref_window, pred);
        JudgeError err;
        const auto score = judge->score(req, &err);
        if (!score) {
            if (!cfg.judge_cfg.score_zero_on_error)
                throw std::runtime_error("judge_remote failed: " + err.message);
            out.value = 0;
            out.detail = "judge_error:" + err.message;
        } else {
            out.value = *score;
            out.detail = "judge";
        }
        if (cfg.judge_cfg.compare_oracle) {
            out.oracle_value = cfg.mode == RewardMode::Strict
                                   ? strict_match(pred, task.target)
                                   : prefix_match(pred, task.ref_window, task.target,
                                                  cfg.min_coverage);
        }
        return out;
    }

    switch (cfg.mode) {
        case RewardMode::Strict:
            out.value = strict_match(pred, task.target);
            out.detail = normalize(pred) + " | " + normalize(task.target);
            break;
        case RewardMode::Prefix:
            out.value = prefix_match(pred, task.ref_window, task.target, cfg.min_coverage);
            out.detail = normalize(pred) + " | " + normalize(task.ref_window);
            break;
        case RewardMode::Verifiable:
            throw std::invalid_argument("compute_reward: verifiable mode needs a gold answer");
    }
    return out;
}

int verifiable_reward(std::string_view output, std::string_view gold_answer) {
    if (gold_answer.empty())
        throw std::invalid_argument("verifiable_reward: empty gold answer");
    // last "Answer:" marker; the answer runs to the end of that line, or to
    // the next protocol tag when the output is wrapped in prediction tags
    const std::size_t pos = output.rfind("Answer:");
    if (pos == std::string_view::npos) return 0;
    std::size_t end = std::min(output.find('\n', pos), output.find("<|", pos));
    if (end == std::string_view::npos) end = output.size();
    const std::string answer =
        text::trim(output.substr(pos + 7, end - pos - 7));
    if (answer.empty()) return 0;
    return normalize(answer) == normalize(gold_answer) ? 1 : 0;
}

}  // namespace rlpt::reward
