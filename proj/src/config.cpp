#include "rlpt/config.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace rlpt::config {

using nlohmann::json;

namespace {

json to_json(const RunConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["kernel"] = c.kernel;
    j["corpus"] = {{"input", c.corpus.input},
                   {"eval_files", c.corpus.eval_files},
                   {"shingle_size", c.corpus.shingle_size},
                   {"permutations", c.corpus.permutations},
                   {"bands", c.corpus.bands},
                   {"rows", c.corpus.rows},
                   {"dedup_threshold", c.corpus.dedup_threshold},
                   {"ngram_n", c.corpus.ngram_n},
                   {"min_chars", c.corpus.quality.min_chars},
                   {"max_chars", c.corpus.quality.max_chars},
                   {"min_alpha_ratio", c.corpus.quality.min_alpha_ratio},
                   {"min_mean_sentence_tokens", c.corpus.quality.min_mean_sentence_tokens},
                   {"max_mean_sentence_tokens", c.corpus.quality.max_mean_sentence_tokens},
                   {"max_repeated_line_ratio", c.corpus.quality.max_repeated_line_ratio},
                   {"score_cutoff", c.corpus.quality.score_cutoff}};
    j["segmentation"] = {{"input", c.segmentation.input},
                         {"min_tokens", c.segmentation.min_tokens},
                         {"min_chars", c.segmentation.min_chars}};
    j["tasks"] = {{"input", c.tasks.input},
                  {"window_max_segments", c.tasks.window_max_segments},
                  {"window_max_chars", c.tasks.window_max_chars},
                  {"lambda", c.tasks.lambda},
                  {"asr_ratio", c.tasks.asr_ratio},
                  {"msr_ratio", c.tasks.msr_ratio},
                  {"count", c.tasks.count}};
    j["policy"] = {{"embed_dim", c.policy.embed_dim},
                   {"window", c.policy.window},
                   {"hidden", c.policy.hidden},
                   {"vocab_max", c.policy.vocab_max},
                   {"init_scale", c.policy.init_scale}};
    j["sft"] = {{"input", c.sft.input},
                {"steps", c.sft.steps},
                {"batch_size", c.sft.batch_size},
                {"lr", c.sft.lr},
                {"schedule", c.sft.schedule},
                {"pretrain_input", c.sft.pretrain_input},
                {"pretrain_steps", c.sft.pretrain_steps},
                {"pretrain_lr", c.sft.pretrain_lr}};
    j["train"] = {{"checkpoint", c.train.checkpoint},
                  {"tasks", c.train.tasks},
                  {"qa", c.train.qa},
                  {"steps", c.train.steps},
                  {"batch_size", c.train.batch_size},
                  {"group_size", c.train.group_size},
                  {"lr", c.train.lr},
                  {"temperature", c.train.temperature},
                  {"top_p", c.train.top_p},
                  {"max_len", c.train.max_len},
                  {"std_floor", c.train.std_floor}};
    j["reward"] = {{"mode", c.reward.mode},
                   {"judge", c.reward.judge},
                   {"min_coverage", c.reward.min_coverage}};
    j["judge"] = {{"endpoint", c.reward.judge_cfg.endpoint},
                  {"timeout_ms", c.reward.judge_cfg.timeout_ms},
                  {"retries", c.reward.judge_cfg.retries},
                  {"score_zero_on_error", c.reward.judge_cfg.score_zero_on_error},
                  {"log_transcripts", c.reward.judge_cfg.log_transcripts},
                  {"compare_oracle", c.reward.judge_cfg.compare_oracle}};
    j["eval"] = {{"checkpoint", c.eval.checkpoint},
                 {"tasks", c.eval.tasks},
                 {"qa", c.eval.qa},
                 {"n", c.eval.n},
                 {"temperature", c.eval.temperature},
                 {"top_p", c.eval.top_p},
                 {"ks", c.eval.ks},
                 {"max_len", c.eval.max_len},
                 {"max_tasks", c.eval.max_tasks}};
    j["fit"] = {{"metrics", c.fit.metrics}, {"floor", c.fit.floor}, {"min_step", c.fit.min_step}};
    j["plot"] = {{"metrics", c.plot.metrics},
                 {"labels", c.plot.labels},
                 {"fit", c.plot.fit},
                 {"out", c.plot.out}};
    return j;
}

template <typename T>
void get_to(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

RunConfig from_json(const json& j) {
    RunConfig c;
    get_to(j, "seed", c.seed);
    get_to(j, "workers", c.workers);
    get_to(j, "kernel", c.kernel);
    if (j.contains("corpus")) {
        const json& s = j["corpus"];
        get_to(s, "input", c.corpus.input);
        get_to(s, "eval_files", c.corpus.eval_files);
        get_to(s, "shingle_size", c.corpus.shingle_size);
        get_to(s, "permutations", c.corpus.permutations);
        get_to(s, "bands", c.corpus.bands);
        get_to(s, "rows", c.corpus.rows);
        get_to(s, "dedup_threshold", c.corpus.dedup_threshold);
        get_to(s, "ngram_n", c.corpus.ngram_n);
        get_to(s, "min_chars", c.corpus.quality.min_chars);
        get_to(s, "max_chars", c.corpus.quality.max_chars);
        get_to(s, "min_alpha_ratio", c.corpus.quality.min_alpha_ratio);
        get_to(s, "min_mean_sentence_tokens", c.corpus.quality.min_mean_sentence_tokens);
        get_to(s, "max_mean_sentence_tokens", c.corpus.quality.max_mean_sentence_tokens);
        get_to(s, "max_repeated_line_ratio", c.corpus.quality.max_repeated_line_ratio);
        get_to(s, "score_cutoff", c.corpus.quality.score_cutoff);
    }
    if (j.contains("segmentation")) {
        const json& s = j["segmentation"];
        get_to(s, "input", c.segmentation.input);
        get_to(s, "min_tokens", c.segmentation.min_tokens);
        get_to(s, "min_chars", c.segmentation.min_chars);
    }
    if (j.contains("tasks")) {
        const json& s = j["tasks"];
        get_to(s, "input", c.tasks.input);
        get_to(s, "window_max_segments", c.tasks.window_max_segments);
        get_to(s, "window_max_chars", c.tasks.window_max_chars);
        get_to(s, "lambda", c.tasks.lambda);
        get_to(s, "asr_ratio", c.tasks.asr_ratio);
        get_to(s, "msr_ratio", c.tasks.msr_ratio);
        get_to(s, "count", c.tasks.count);
    }
    if (j.contains("policy")) {
        const json& s = j["policy"];
        get_to(s, "embed_dim", c.policy.embed_dim);
        get_to(s, "window", c.policy.window);
        get_to(s, "hidden", c.policy.hidden);
        get_to(s, "vocab_max", c.policy.vocab_max);
        get_to(s, "init_scale", c.policy.init_scale);
    }
    if (j.contains("sft")) {
        const json& s = j["sft"];
        get_to(s, "input", c.sft.input);
        get_to(s, "steps", c.sft.steps);
        get_to(s, "batch_size", c.sft.batch_size);
        get_to(s, "lr", c.sft.lr);
        get_to(s, "schedule", c.sft.schedule);
        get_to(s, "pretrain_input", c.sft.pretrain_input);
        get_to(s, "pretrain_steps", c.sft.pretrain_steps);
        get_to(s, "pretrain_lr", c.sft.pretrain_lr);
    }
    if (j.contains("train")) {
        const json& s = j["train"];
        get_to(s, "checkpoint", c.train.checkpoint);
        get_to(s, "tasks", c.train.tasks);
        get_to(s, "qa", c.train.qa);
        get_to(s, "steps", c.train.steps);
        get_to(s, "batch_size", c.train.batch_size);
        get_to(s, "group_size", c.train.group_size);
        get_to(s, "lr", c.train.lr);
        get_to(s, "temperature", c.train.temperature);
        get_to(s, "top_p", c.train.top_p);
        get_to(s, "max_len", c.train.max_len);
        get_to(s, "std_floor", c.train.std_floor);
    }
    if (j.contains("reward")) {
        const json& s = j["reward"];
        get_to(s, "mode", c.reward.mode);
        get_to(s, "judge", c.reward.judge);
        get_to(s, "min_coverage", c.reward.min_coverage);
    }
    if (j.contains("judge")) {
        const json& s = j["judge"];
        get_to(s, "endpoint", c.reward.judge_cfg.endpoint);
        get_to(s, "timeout_ms", c.reward.judge_cfg.timeout_ms);
        get_to(s, "retries", c.reward.judge_cfg.retries);
        get_to(s, "score_zero_on_error", c.reward.judge_cfg.score_zero_on_error);
        get_to(s, "log_transcripts", c.reward.judge_cfg.log_transcripts);
        get_to(s, "compare_oracle", c.reward.judge_cfg.compare_oracle);
    }
    if (j.contains("eval")) {
        const json& s = j["eval"];
        get_to(s, "checkpoint", c.eval.checkpoint);
        get_to(s, "tasks", c.eval.tasks);
        get_to(s, "qa", c.eval.qa);
        get_to(s, "n", c.eval.n);
        get_to(s, "temperature", c.eval.temperature);
        get_to(s, "top_p", c.eval.top_p);
        get_to(s, "ks", c.eval.ks);
        get_to(s, "max_len", c.eval.max_len);
        get_to(s, "max_tasks", c.eval.max_tasks);
    }
    if (j.contains("fit")) {
        const json& s = j["fit"];
        get_to(s, "metrics", c.fit.metrics);
        get_to(s, "floor", c.fit.floor);
        get_to(s, "min_step", c.fit.min_step);
    }
    if (j.contains("plot")) {
        const json& s = j["plot"];
        get_to(s, "metrics", c.plot.metrics);
        get_to(s, "labels", c.plot.labels);
        get_to(s, "fit", c.plot.fit);
        get_to(s, "out", c.plot.out);
    }
    return c;
}

}  // namespace

std::string to_json_string(const RunConfig& cfg) { return to_json(cfg).dump(2); }

RunConfig from_json_string(const std::string& text) {
    return from_json(json::parse(text));
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read config: " + path.string());
    return from_json(json::parse(f));
}

void save_config(const std::filesystem::path& path, const RunConfig& cfg,
                 const std::string& command, bool reproducible) {
    json j = to_json(cfg);
    j["command"] = command;
    j["reproducible"] = reproducible;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write config: " + path.string());
    f << j.dump(2) << '\n';
}

void apply_override(RunConfig& cfg, const std::string& dotted_assignment) {
    const std::size_t eq = dotted_assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must be path=value: " + dotted_assignment);
    const std::string dotted = dotted_assignment.substr(0, eq);
    const std::string raw = dotted_assignment.substr(eq + 1);

    json j = to_json(cfg);
    json* node = &j;
    std::size_t pos = 0;
    std::vector<std::string> parts;
    while (pos <= dotted.size()) {
        const std::size_t dot = dotted.find('.', pos);
        parts.push_back(dotted.substr(pos, dot == std::string::npos ? std::string::npos
                                                                    : dot - pos));
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i]))
            throw std::invalid_argument("unknown config field: " + dotted);
        node = &(*node)[parts[i]];
    }
    const std::string& leaf = parts.back();
    if (!node->contains(leaf))
        throw std::invalid_argument("unknown config field: " + dotted);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;  // plain string value
    (*node)[leaf] = std::move(value);
    cfg = from_json(j);
}

void validate(const RunConfig& cfg, const std::string& command) {
    if (cfg.corpus.permutations != cfg.corpus.bands * cfg.corpus.rows)
        throw std::invalid_argument(
            "corpus.permutations must equal corpus.bands * corpus.rows");
    if (cfg.tasks.lambda <= 0.0 || cfg.tasks.lambda >= 1.0)
        throw std::invalid_argument("tasks.lambda must lie in (0, 1)");
    if (cfg.reward.mode != "strict" && cfg.reward.mode != "prefix")
        throw std::invalid_argument("reward.mode must be strict or prefix");
    if (cfg.reward.judge != "oracle" && cfg.reward.judge != "remote")
        throw std::invalid_argument("reward.judge must be oracle or remote");
    if (cfg.reward.judge == "remote" && effective_judge_endpoint(cfg).empty())
        throw std::invalid_argument("judge.endpoint is required when reward.judge=remote");
    if (cfg.train.group_size < 2) throw std::invalid_argument("train.group_size must be >= 2");
    if (cfg.train.temperature <= 0.0)
        throw std::invalid_argument("train.temperature must be > 0");
    if ((command == "train-rlpt" || command == "train-rlvr") && cfg.train.checkpoint.empty())
        throw std::invalid_argument("train.checkpoint is required for " + command);
    for (std::size_t k : cfg.eval.ks)
        if (k == 0 || k > cfg.eval.n)
            throw std::invalid_argument("eval.ks entries must lie in [1, eval.n]");
}

std::string effective_judge_endpoint(const RunConfig& cfg) {
    if (const char* env = std::getenv("RLPT_JUDGE_ENDPOINT"); env && *env)
        return env;
    return cfg.reward.judge_cfg.endpoint;
}

}  // namespace rlpt::config
