#include "rlpt/tasks.hpp"

#include <stdexcept>

#include "rlpt/text.hpp"

namespace rlpt::tasks {

namespace {

const std::string kAsrTemplate =
    "Complete the text provided under ### Context by predicting the next most "
    "probable sentence.\n"
    "\n"
    "Please reason step by step to determine the best possible continuation, "
    "and then enclose your final answer within <|startofprediction|> and "
    "<|endofprediction|> tags.\n"
    "\n"
    "### Context\n"
    "\n"
    "{context}\n";

const std::string kMsrTemplate =
    "## Text Material ##:\n"
    "{prompt}\n"
    "\n"
    "<MASK>\n"
    "\n"
    "{next_step}\n"
    "\n"
    "## Task ##:\n"
    "Fill in the <MASK> section of the material with appropriate sentences or "
    "a solution step.\n"
    "\n"
    "Carefully reason step by step to determine the most suitable completion.\n"
    "Finally, provide your best prediction for the <MASK> section.\n"
    "Enclose your final answer for the <MASK> part within <|startofprediction|> "
    "and <|endofprediction|>.\n";

const std::string kJudgeTemplate =
    "## Task\n"
    "Given a Predicted sentence and a Reference paragraph, determine whether "
    "the Predicted text is a prefix (initial segment) of the Reference "
    "paragraph, and whether it expresses exactly the same semantic content as "
    "the corresponding prefix of the Reference.\n"
    "The Predicted text does not need to match the prefix of the Reference "
    "word-for-word, but it must convey the same meaning.\n"
    "\n"
    "Reference:\n"
    "{reference}\n"
    "\n"
    "Predicted:\n"
    "{predicted}\n"
    "\n"
    "## Scoring Rules\n"
    "\n"
    "If the Predicted text semantically matches the prefix of the Reference, "
    "assign a score of 1.\n"
    "If the Predicted text does not semantically match the prefix of the "
    "Reference, assign a score of 0.\n"
    "When making your judgment, focus primarily on semantic equivalence, not "
    "on exact wording.\n"
    "\n"
    "Only output the score on a single line; do not provide any explanatory "
    "text or additional content.\n"
    "Output format (choose one):\n"
    "\n"
    "Score: 0\n"
    "or\n"
    "Score: 1\n";

// Slot values are substituted verbatim, no escaping.
std::string substitute(std::string tpl, std::string_view slot, std::string_view value) {
    const std::size_t pos = tpl.find(slot);
    if (pos == std::string::npos)
        throw std::logic_error("template slot missing: " + std::string(slot));
    tpl.replace(pos, slot.size(), value);
    return tpl;
}

}  // namespace

const std::string& asr_template() { return kAsrTemplate; }
const std::string& msr_template() { return kMsrTemplate; }
const std::string& judge_template() { return kJudgeTemplate; }

std::string_view kind_name(TaskKind k) { return k == TaskKind::Asr ? "ASR" : "MSR"; }

std::string join_segments(const std::vector<std::string>& segments) {
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i) out.push_back(' ');
        out += segments[i];
    }
    return out;
}

std::string build_reference_window(const std::vector<std::string>& tail,
                                   const TaskOptions& opts) {
    if (tail.empty()) return {};
    std::string out = tail[0];
    std::size_t count = 1;
    std::size_t chars = tail[0].size();
    for (std::size_t k = 1; k < tail.size(); ++k) {
        if (count >= opts.window_max_segments) break;
        if (chars + tail[k].size() > opts.window_max_chars) break;
        out.push_back(' ');
        out += tail[k];
        chars += tail[k].size();
        ++count;
    }
    return out;
}

std::string build_reference_window(const seg::SegmentedText& seg, std::size_t i,
                                   const TaskOptions& opts) {
    if (i < 2 || i + 1 > seg.segments.size())
        throw std::out_of_range("build_reference_window: index out of range");
    std::vector<std::string> tail(seg.segments.begin() + static_cast<std::ptrdiff_t>(i - 1),
                                  seg.segments.end());
    return build_reference_window(tail, opts);
}

TaskInstance render_asr_prompt(const seg::SegmentTriple& triple, const TaskOptions& opts) {
    TaskInstance t;
    t.kind = TaskKind::Asr;
    t.task_id = triple.doc_id + ":" + std::to_string(triple.index) + ":asr";
    t.prompt = substitute(kAsrTemplate, "{context}", join_segments(triple.context));
    t.target = triple.target;
    t.ref_window = build_reference_window(triple.window, opts);
    t.loss_weight = 1.0;
    return t;
}

TaskInstance render_msr_prompt(const seg::SegmentTriple& triple, const TaskOptions& opts) {
    TaskInstance t;
    t.kind = TaskKind::Msr;
    t.task_id = triple.doc_id + ":" + std::to_string(triple.index) + ":msr";
    std::string p = substitute(kMsrTemplate, "{prompt}", join_segments(triple.context));
    t.prompt = substitute(std::move(p), "{next_step}", triple.successor);
    t.target = triple.target;
    t.ref_window = build_reference_window(triple.window, opts);
    t.loss_weight = opts.msr_loss_weight;
    return t;
}

std::string render_judge_prompt(std::string_view reference, std::string_view predicted) {
    std::string p = substitute(kJudgeTemplate, "{reference}", reference);
    return substitute(std::move(p), "{predicted}", predicted);
}

Extraction extract_prediction(std::string_view output) {
    Extraction e;
    const std::size_t s = output.find(kStartTag);
    if (s == std::string_view::npos) {
        e.failure = Extraction::Failure::MissingStart;
        return e;
    }
    const std::size_t body = s + kStartTag.size();
    const std::size_t t = output.find(kEndTag, body);
    if (t == std::string_view::npos) {
        e.failure = Extraction::Failure::MissingEnd;
        return e;
    }
    std::string pred = text::trim(output.substr(body, t - body));
    if (pred.empty()) {
        e.failure = Extraction::Failure::Empty;
        return e;
    }
    e.prediction = std::move(pred);
    return e;
}

std::vector<TaskInstance> schedule_batch(const std::vector<seg::SegmentTriple>& triples,
                                         const ScheduleConfig& cfg, std::size_t& cursor) {
    std::vector<TaskInstance> batch;
    if (triples.empty() || cfg.batch_size == 0) return batch;
    const double total = cfg.asr_weight + cfg.msr_weight;
    if (total <= 0.0) throw std::invalid_argument("schedule_batch: ratio weights sum to 0");
    batch.reserve(cfg.batch_size);
    for (std::size_t k = 0; k < cfg.batch_size; ++k) {
        const seg::SegmentTriple& triple = triples[cursor % triples.size()];
        const double u = text::to_unit_double(text::derive_seed(cfg.seed, cursor, 0x7a5));
        ++cursor;
        const bool asr = u * total < cfg.asr_weight;
        batch.push_back(asr ? render_asr_prompt(triple, cfg.options)
                            : render_msr_prompt(triple, cfg.options));
    }
    return batch;
}

}  // namespace rlpt::tasks
