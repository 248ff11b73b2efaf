#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlpt/segmentation.hpp"

namespace rlpt::tasks {

inline constexpr std::string_view kStartTag = "<|startofprediction|>";
inline constexpr std::string_view kEndTag = "<|endofprediction|>";

// Prompt templates with {context} / {prompt},{next_step} /
// {reference},{predicted} slots. Pinned byte-for-byte by golden tests
// against assets/templates/.
const std::string& asr_template();
const std::string& msr_template();
const std::string& judge_template();

enum class TaskKind { Asr, Msr };

std::string_view kind_name(TaskKind k);  // "ASR" | "MSR"

struct TaskInstance {
    TaskKind kind = TaskKind::Asr;
    std::string task_id;
    std::string prompt;
    std::string target;      // s_i
    std::string ref_window;  // s_i followed by successor segments
    double loss_weight = 1.0;
};

struct TaskOptions {
    std::size_t window_max_segments = 3;  // M
    std::size_t window_max_chars = 600;   // C
    double msr_loss_weight = 0.5;         // lambda
};

// Segments joined with single spaces.
std::string join_segments(const std::vector<std::string>& segments);

// Joins tail[0.. ] (tail = s_i..s_n) stopping after M segments or once the
// accumulated segment characters would exceed C; tail[0] always included.
std::string build_reference_window(const std::vector<std::string>& tail,
                                   const TaskOptions& opts);
std::string build_reference_window(const seg::SegmentedText& seg, std::size_t i,
                                   const TaskOptions& opts);

TaskInstance render_asr_prompt(const seg::SegmentTriple& triple,
                               const TaskOptions& opts = {});
TaskInstance render_msr_prompt(const seg::SegmentTriple& triple,
                               const TaskOptions& opts = {});

std::string render_judge_prompt(std::string_view reference, std::string_view predicted);

struct Extraction {
    enum class Failure { None, MissingStart, MissingEnd, Empty };
    std::optional<std::string> prediction;
    Failure failure = Failure::None;
    bool ok() const { return prediction.has_value(); }
};

// Text strictly between the first start tag and the first end tag after it,
// trimmed of surrounding whitespace.
Extraction extract_prediction(std::string_view output);

struct ScheduleConfig {
    std::size_t batch_size = 64;
    double asr_weight = 1.0;  // ASR:MSR draw ratio
    double msr_weight = 1.0;
    TaskOptions options;
    std::uint64_t seed = 0;
};

// Draws batch_size tasks cycling through the triples in stream order,
// choosing ASR vs MSR per draw with the configured ratio. `cursor` carries
// the stream position across batches; the RNG is derived from cfg.seed and
// the cursor so a fixed seed fully determines the task sequence.
std::vector<TaskInstance> schedule_batch(const std::vector<seg::SegmentTriple>& triples,
                                         const ScheduleConfig& cfg,
                                         std::size_t& cursor);

inline std::vector<TaskInstance> schedule_batch(
    const std::vector<seg::SegmentTriple>& triples, const ScheduleConfig& cfg) {
    std::size_t cursor = 0;
    return schedule_batch(triples, cfg, cursor);
}

}  // namespace rlpt::tasks
