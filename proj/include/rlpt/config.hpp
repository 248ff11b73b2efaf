#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rlpt/corpus.hpp"
#include "rlpt/eval.hpp"
#include "rlpt/policy.hpp"
#include "rlpt/reward.hpp"
#include "rlpt/segmentation.hpp"
#include "rlpt/tasks.hpp"
#include "rlpt/trainer.hpp"

namespace rlpt::config {

// Every tunable of the pipeline, serialized into each run directory so a run
// is reproducible from its snapshot alone.
struct RunConfig {
    std::uint64_t seed = 7;
    unsigned workers = 1;
    std::string kernel = "auto";

    struct Corpus {
        std::string input;
        std::vector<std::string> eval_files;
        std::size_t shingle_size = 5;
        std::size_t permutations = 128;
        std::size_t bands = 16;
        std::size_t rows = 8;
        double dedup_threshold = 0.8;
        std::size_t ngram_n = 13;
        corpus::QualityConfig quality;
    } corpus;

    struct Segmentation {
        std::string input;
        std::size_t min_tokens = 3;
        std::size_t min_chars = 10;
    } segmentation;

    struct Tasks {
        std::string input;  // segments.jsonl
        std::size_t window_max_segments = 3;
        std::size_t window_max_chars = 600;
        double lambda = 0.5;
        double asr_ratio = 1.0;
        double msr_ratio = 1.0;
        std::size_t count = 256;  // instances emitted by tasks-build
    } tasks;

    struct Policy {
        std::size_t embed_dim = 24;
        std::size_t window = 8;
        std::size_t hidden = 96;
        std::size_t vocab_max = 512;
        double init_scale = 0.05;
    } policy;

    struct Sft {
        std::string input;  // jsonl of {"text": ...}
        std::size_t steps = 2400;
        std::size_t batch_size = 16;
        double lr = 2.5;
        std::string schedule = "cosine";  // or "constant"
        // optional plain-NTP pretraining pass over raw corpus text before
        // the instruction-following pass; vocab covers both inputs
        std::string pretrain_input;
        std::size_t pretrain_steps = 1200;
        double pretrain_lr = 1.0;
    } sft;

    struct Train {
        std::string checkpoint;  // starting policy
        std::string tasks;       // segments.jsonl for rlpt
        std::string qa;          // qa.jsonl for rlvr
        std::size_t steps = 500;
        std::size_t batch_size = 64;
        std::size_t group_size = 8;
        double lr = 0.05;
        double temperature = 1.0;
        double top_p = 1.0;
        std::size_t max_len = 128;
        double std_floor = 1e-6;
    } train;

    struct Reward {
        std::string mode = "prefix";    // strict | prefix
        std::string judge = "oracle";   // oracle | remote
        bool min_coverage = true;
        reward::JudgeConfig judge_cfg;  // endpoint may come from env
    } reward;

    struct Eval {
        std::string checkpoint;
        std::string tasks;  // segments.jsonl (next-segment eval)
        std::string qa;     // qa.jsonl (verifiable eval)
        std::size_t n = 64;
        double temperature = 0.6;
        double top_p = 0.95;
        std::vector<std::size_t> ks = {1, 8};
        std::size_t max_len = 128;
        std::size_t max_tasks = 64;
    } eval;

    struct Fit {
        std::string metrics;  // metrics csv path
        double floor = 0.0;
        std::size_t min_step = 1;  // skip warmup rows
    } fit;

    struct Plot {
        std::vector<std::string> metrics;
        std::vector<std::string> labels;
        std::string fit;  // scaling.json to overlay
        std::string out = "reports/plot.svg";
    } plot;
};

std::string to_json_string(const RunConfig& cfg);
RunConfig from_json_string(const std::string& text);

RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& cfg,
                 const std::string& command, bool reproducible);

// Applies "dotted.path=value" onto the JSON form; value parsed as JSON when
// possible, else taken as a string. Throws std::invalid_argument naming the
// path on unknown fields.
void apply_override(RunConfig& cfg, const std::string& dotted_assignment);

// Throws std::invalid_argument naming the offending field.
void validate(const RunConfig& cfg, const std::string& command);

// Config, resolved against the environment (RLPT_JUDGE_ENDPOINT wins).
std::string effective_judge_endpoint(const RunConfig& cfg);

}  // namespace rlpt::config
