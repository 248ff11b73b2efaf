// rlpt: corpus -> segments -> tasks -> cold-start SFT -> GRPO training ->
// Pass@k evaluation and scaling fits, as subcommands over one config file.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlpt/config.hpp"
#include "rlpt/eval.hpp"
#include "rlpt/jsonl.hpp"
#include "rlpt/kernels.hpp"
#include "rlpt/svg_report.hpp"
#include "rlpt/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using rlpt::config::RunConfig;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string run_dir = "run";
    std::vector<std::string> overrides;
    std::int64_t seed = -1;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    cmd->add_option("--run-dir", args.run_dir, "run directory (outputs land here)");
    cmd->add_option("--set", args.overrides, "dotted-path override, e.g. train.lr=0.05");
    cmd->add_option("--seed", args.seed, "override the run seed");
    cmd->add_option("--workers", args.workers, "override worker count");
}

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg = rlpt::config::load_config(args.config_path);
    for (const auto& o : args.overrides) rlpt::config::apply_override(cfg, o);
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    if (args.workers > 0) cfg.workers = static_cast<unsigned>(args.workers);
    return cfg;
}

// Relative paths resolve against the run directory.
fs::path resolve(const fs::path& run_dir, const std::string& p) {
    if (p.empty()) return {};
    fs::path fp(p);
    return fp.is_absolute() ? fp : run_dir / fp;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw std::runtime_error("cannot read file: " + p.string());
    std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return body;
}

void write_file(const fs::path& p, const std::string& body) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write file: " + p.string());
    f << body;
}

void snapshot(const RunConfig& cfg, const fs::path& run_dir, const std::string& command) {
    const bool reproducible = cfg.reward.judge != "remote";
    rlpt::config::save_config(run_dir / "config.json", cfg, command, reproducible);
}

rlpt::reward::RewardConfig reward_config(const RunConfig& cfg) {
    rlpt::reward::RewardConfig rc;
    rc.mode = cfg.reward.mode == "strict" ? rlpt::reward::RewardMode::Strict
                                          : rlpt::reward::RewardMode::Prefix;
    rc.judge = cfg.reward.judge == "remote" ? rlpt::reward::JudgeKind::Remote
                                            : rlpt::reward::JudgeKind::Oracle;
    rc.min_coverage = cfg.reward.min_coverage;
    rc.judge_cfg = cfg.reward.judge_cfg;
    rc.judge_cfg.endpoint = rlpt::config::effective_judge_endpoint(cfg);
    return rc;
}

rlpt::trainer::TrainerConfig trainer_config(const RunConfig& cfg) {
    rlpt::trainer::TrainerConfig tc;
    tc.group_size = cfg.train.group_size;
    tc.batch_size = cfg.train.batch_size;
    tc.steps = cfg.train.steps;
    tc.lr = cfg.train.lr;
    tc.temperature = cfg.train.temperature;
    tc.top_p = cfg.train.top_p;
    tc.max_len = cfg.train.max_len;
    tc.std_floor = cfg.train.std_floor;
    tc.lambda = cfg.tasks.lambda;
    tc.asr_weight = cfg.tasks.asr_ratio;
    tc.msr_weight = cfg.tasks.msr_ratio;
    tc.task_options.window_max_segments = cfg.tasks.window_max_segments;
    tc.task_options.window_max_chars = cfg.tasks.window_max_chars;
    tc.task_options.msr_loss_weight = cfg.tasks.lambda;
    tc.reward = reward_config(cfg);
    tc.workers = cfg.workers;
    tc.seed = cfg.seed;
    return tc;
}

rlpt::seg::SplitConfig split_config(const RunConfig& cfg) {
    rlpt::seg::SplitConfig sc;
    sc.min_tokens = cfg.segmentation.min_tokens;
    sc.min_chars = cfg.segmentation.min_chars;
    return sc;
}

rlpt::policy::TinyLmPolicy load_policy(const fs::path& checkpoint) {
    auto model = rlpt::policy::TinyLm::load(checkpoint);
    auto vocab = rlpt::policy::Vocab::load(checkpoint.parent_path() / "vocab.txt");
    if (vocab.size() != model.config().vocab_size)
        throw std::runtime_error("vocab/checkpoint size mismatch at " + checkpoint.string());
    return {std::move(model), std::move(vocab)};
}

std::vector<rlpt::seg::SegmentTriple> triples_from_segments_file(const fs::path& p) {
    std::vector<rlpt::seg::SegmentTriple> triples;
    for (const auto& st : rlpt::jsonl::read_segments(p)) {
        auto t = rlpt::seg::build_triples(st);
        triples.insert(triples.end(), std::make_move_iterator(t.begin()),
                       std::make_move_iterator(t.end()));
    }
    return triples;
}

// ---------------------------------------------------------------------------

int cmd_corpus_prepare(const RunConfig& cfg, const fs::path& run_dir) {
    if (cfg.corpus.input.empty())
        throw std::invalid_argument("corpus.input is required for corpus-prepare");
    auto ingest = rlpt::corpus::ingest_documents(resolve(run_dir, cfg.corpus.input));

    std::vector<std::string> eval_texts;
    for (const auto& f : cfg.corpus.eval_files)
        eval_texts.push_back(read_file(resolve(run_dir, f)));
    const auto idx = rlpt::corpus::build_eval_index(eval_texts, cfg.corpus.ngram_n);

    rlpt::corpus::PipelineConfig pc;
    pc.dedup.minhash.shingle_size = cfg.corpus.shingle_size;
    pc.dedup.minhash.permutations = cfg.corpus.permutations;
    pc.dedup.minhash.bands = cfg.corpus.bands;
    pc.dedup.minhash.rows = cfg.corpus.rows;
    pc.dedup.minhash.seed = cfg.seed;
    pc.dedup.threshold = cfg.corpus.dedup_threshold;
    pc.dedup.workers = cfg.workers;
    pc.contamination_n = cfg.corpus.ngram_n;
    pc.quality = cfg.corpus.quality;

    rlpt::corpus::HeuristicScorer scorer;
    auto result = rlpt::corpus::prepare_corpus(std::move(ingest.documents), idx, pc, scorer);
    result.stats.insert(result.stats.begin(),
                        {"ingest", result.stats.front().input + ingest.rejects,
                         result.stats.front().input, ingest.rejects});

    rlpt::jsonl::write_documents(run_dir / "corpus" / "kept.jsonl", result.kept);
    rlpt::jsonl::write_rejects(run_dir / "corpus" / "rejects.jsonl", result.rejects);
    rlpt::jsonl::write_stats_csv(run_dir / "corpus" / "stats.csv", result.stats);
    std::cerr << "corpus-prepare: kept " << result.kept.size() << ", rejected "
              << result.rejects.size() << "\n";
    return 0;
}

int cmd_segment(const RunConfig& cfg, const fs::path& run_dir) {
    const fs::path in = cfg.segmentation.input.empty()
                            ? run_dir / "corpus" / "kept.jsonl"
                            : resolve(run_dir, cfg.segmentation.input);
    const auto docs = rlpt::corpus::ingest_documents(in);
    const auto sc = split_config(cfg);

    std::vector<rlpt::seg::SegmentedText> segs;
    std::vector<rlpt::seg::SegmentTriple> triples;
    for (const auto& d : docs.documents) {
        auto st = rlpt::seg::segment_document(d, sc);
        auto t = rlpt::seg::build_triples(st);
        triples.insert(triples.end(), std::make_move_iterator(t.begin()),
                       std::make_move_iterator(t.end()));
        segs.push_back(std::move(st));
    }
    rlpt::jsonl::write_segments(run_dir / "segments" / "segments.jsonl", segs);
    rlpt::jsonl::write_triples(run_dir / "segments" / "triples.jsonl", triples);
    std::cerr << "segment: " << segs.size() << " docs, " << triples.size() << " triples\n";
    return 0;
}

int cmd_tasks_build(const RunConfig& cfg, const fs::path& run_dir) {
    const fs::path in = cfg.tasks.input.empty() ? run_dir / "segments" / "segments.jsonl"
                                                : resolve(run_dir, cfg.tasks.input);
    const auto triples = triples_from_segments_file(in);
    rlpt::tasks::ScheduleConfig sched;
    sched.batch_size = cfg.tasks.count;
    sched.asr_weight = cfg.tasks.asr_ratio;
    sched.msr_weight = cfg.tasks.msr_ratio;
    sched.options.window_max_segments = cfg.tasks.window_max_segments;
    sched.options.window_max_chars = cfg.tasks.window_max_chars;
    sched.options.msr_loss_weight = cfg.tasks.lambda;
    sched.seed = cfg.seed;
    const auto batch = rlpt::tasks::schedule_batch(triples, sched);
    rlpt::jsonl::write_tasks(run_dir / "tasks" / "tasks.jsonl", batch);
    std::cerr << "tasks-build: " << batch.size() << " instances\n";
    return 0;
}

int cmd_train_sft(const RunConfig& cfg, const fs::path& run_dir) {
    if (cfg.sft.input.empty())
        throw std::invalid_argument("sft.input is required for train-sft");
    const auto texts = rlpt::jsonl::read_texts(resolve(run_dir, cfg.sft.input));
    if (texts.empty()) throw std::runtime_error("sft corpus is empty");
    std::vector<std::string> pretrain_texts;
    if (!cfg.sft.pretrain_input.empty())
        pretrain_texts = rlpt::jsonl::read_texts(resolve(run_dir, cfg.sft.pretrain_input));

    std::vector<std::string> vocab_texts = texts;
    vocab_texts.insert(vocab_texts.end(), pretrain_texts.begin(), pretrain_texts.end());
    auto vocab = rlpt::policy::Vocab::build(vocab_texts, cfg.policy.vocab_max);
    rlpt::policy::ModelConfig mc;
    mc.vocab_size = vocab.size();
    mc.embed_dim = cfg.policy.embed_dim;
    mc.window = cfg.policy.window;
    mc.hidden = cfg.policy.hidden;
    rlpt::policy::TinyLm model(mc, cfg.seed, cfg.policy.init_scale);

    auto encode_all = [&](const std::vector<std::string>& in) {
        std::vector<rlpt::policy::TokenSeq> seqs;
        seqs.reserve(in.size());
        for (const auto& t : in) {
            auto ids = vocab.encode(t);
            ids.push_back(vocab.eos());
            seqs.push_back(std::move(ids));
        }
        return seqs;
    };

    std::string log = "stage,step,loss\n";
    auto ntp_pass = [&](const std::vector<rlpt::policy::TokenSeq>& seqs, std::size_t steps,
                        double lr, rlpt::policy::LrSchedule schedule, const char* stage) {
        std::size_t cursor = 0;
        for (std::size_t step = 0; step < steps; ++step) {
            std::vector<rlpt::policy::TokenSeq> batch;
            for (std::size_t b = 0; b < cfg.sft.batch_size; ++b)
                batch.push_back(seqs[cursor++ % seqs.size()]);
            rlpt::policy::SftOptions opts;
            opts.lr = lr;
            opts.schedule = schedule;
            opts.step = step;
            opts.total_steps = steps;
            model.sft_step(batch, opts);
            if ((step + 1) % 25 == 0 || step + 1 == steps) {
                char buf[80];
                std::snprintf(buf, sizeof buf, "%s,%zu,%.6f\n", stage, step + 1,
                              model.ntp_loss(batch));
                log += buf;
            }
        }
    };

    // plain NTP over raw corpus text first, then the instruction pass
    if (!pretrain_texts.empty() && cfg.sft.pretrain_steps > 0)
        ntp_pass(encode_all(pretrain_texts), cfg.sft.pretrain_steps, cfg.sft.pretrain_lr,
                 rlpt::policy::LrSchedule::Constant, "pretrain");
    const auto schedule = cfg.sft.schedule == "cosine" ? rlpt::policy::LrSchedule::Cosine
                                                       : rlpt::policy::LrSchedule::Constant;
    ntp_pass(encode_all(texts), cfg.sft.steps, cfg.sft.lr, schedule, "coldstart");

    fs::create_directories(run_dir / "checkpoints");
    vocab.save(run_dir / "checkpoints" / "vocab.txt");
    model.save(run_dir / "checkpoints" / "sft.json");
    write_file(run_dir / "logs" / "sft_metrics.csv", log);
    std::cerr << "train-sft: saved checkpoints/sft.json (vocab " << vocab.size() << ")\n";
    return 0;
}

int write_train_outputs(const RunConfig& cfg, const fs::path& run_dir,
                        const rlpt::trainer::TrainResult& result,
                        rlpt::policy::TinyLmPolicy& policy, const std::string& stem) {
    rlpt::trainer::write_metrics_csv(run_dir / "logs" / (stem + "_metrics.csv"),
                                     result.metrics);
    fs::create_directories(run_dir / "checkpoints");
    policy.save(run_dir / "checkpoints" / (stem + ".json"));
    policy.vocab().save(run_dir / "checkpoints" / "vocab.txt");
    rlpt::trainer::save_train_state(run_dir / "checkpoints" / (stem + "_state.json"),
                                    result.state, rlpt::config::to_json_string(cfg));
    if (result.aborted_non_finite) {
        std::cerr << stem << ": aborted on non-finite loss, checkpoint saved\n";
        return 1;
    }
    return 0;
}

int cmd_train_rlpt(const RunConfig& cfg, const fs::path& run_dir) {
    auto policy = load_policy(resolve(run_dir, cfg.train.checkpoint));
    const fs::path tasks_in = cfg.train.tasks.empty()
                                  ? run_dir / "segments" / "segments.jsonl"
                                  : resolve(run_dir, cfg.train.tasks);
    const auto triples = triples_from_segments_file(tasks_in);
    if (triples.empty()) throw std::runtime_error("no triples in " + tasks_in.string());

    rlpt::trainer::Trainer trainer(policy, trainer_config(cfg));
    const auto result = trainer.train_rlpt(triples);
    const int rc = write_train_outputs(cfg, run_dir, result, policy, "rlpt");
    if (!result.metrics.empty())
        std::cerr << "train-rlpt: final mean ASR reward "
                  << result.metrics.back().mean_reward_asr << "\n";
    return rc;
}

int cmd_train_rlvr(const RunConfig& cfg, const fs::path& run_dir) {
    auto policy = load_policy(resolve(run_dir, cfg.train.checkpoint));
    if (cfg.train.qa.empty())
        throw std::invalid_argument("train.qa is required for train-rlvr");
    const auto qa = rlpt::jsonl::read_qa(resolve(run_dir, cfg.train.qa));
    if (qa.empty()) throw std::runtime_error("qa set is empty");

    rlpt::trainer::Trainer trainer(policy, trainer_config(cfg));
    const auto result = trainer.train_rlvr(qa);
    const int rc = write_train_outputs(cfg, run_dir, result, policy, "rlvr");
    if (!result.metrics.empty())
        std::cerr << "train-rlvr: final mean reward "
                  << result.metrics.back().mean_reward_asr << "\n";
    return rc;
}

int cmd_eval_passk(const RunConfig& cfg, const fs::path& run_dir) {
    if (cfg.eval.checkpoint.empty())
        throw std::invalid_argument("eval.checkpoint is required for eval-passk");
    auto policy = load_policy(resolve(run_dir, cfg.eval.checkpoint));

    std::vector<rlpt::eval::EvalTask> eval_tasks;
    if (!cfg.eval.qa.empty()) {
        for (const auto& qa : rlpt::jsonl::read_qa(resolve(run_dir, cfg.eval.qa))) {
            if (eval_tasks.size() >= cfg.eval.max_tasks) break;
            eval_tasks.push_back({qa.id, qa.question, [qa](const std::string& text) {
                                      return rlpt::reward::verifiable_reward(text, qa.gold);
                                  }});
        }
    } else {
        const fs::path in = cfg.eval.tasks.empty() ? run_dir / "segments" / "segments.jsonl"
                                                   : resolve(run_dir, cfg.eval.tasks);
        const auto rc = reward_config(cfg);
        rlpt::tasks::TaskOptions opts;
        opts.window_max_segments = cfg.tasks.window_max_segments;
        opts.window_max_chars = cfg.tasks.window_max_chars;
        opts.msr_loss_weight = cfg.tasks.lambda;
        for (const auto& triple : triples_from_segments_file(in)) {
            if (eval_tasks.size() >= cfg.eval.max_tasks) break;
            auto task = rlpt::tasks::render_asr_prompt(triple, opts);
            eval_tasks.push_back(
                {task.task_id, task.prompt, [task, rc](const std::string& text) {
                     return rlpt::reward::compute_reward(text, task, rc).value;
                 }});
        }
    }
    if (eval_tasks.empty()) throw std::runtime_error("no eval tasks");

    rlpt::eval::EvalConfig ec;
    ec.n = cfg.eval.n;
    ec.temperature = cfg.eval.temperature;
    ec.top_p = cfg.eval.top_p;
    ec.ks = cfg.eval.ks;
    ec.max_len = cfg.eval.max_len;
    ec.seed = cfg.seed;
    ec.workers = cfg.workers;
    const auto records = rlpt::eval::run_eval(policy, eval_tasks, ec);

    std::string csv = "prompt_id,n,c";
    for (std::size_t k : ec.ks) csv += ",pass@" + std::to_string(k);
    csv += "\n";
    for (const auto& r : records) {
        csv += r.prompt_id + "," + std::to_string(r.n) + "," + std::to_string(r.c);
        for (const auto& [k, v] : r.pass_at) {
            char buf[32];
            std::snprintf(buf, sizeof buf, ",%.6f", v);
            csv += buf;
        }
        csv += "\n";
    }
    write_file(run_dir / "reports" / "eval.csv", csv);

    json summary;
    summary["tasks"] = records.size();
    summary["n"] = ec.n;
    json macro = json::object();
    for (const auto& [k, v] : rlpt::eval::macro_average(records, ec.ks))
        macro["pass@" + std::to_string(k)] = v;
    summary["macro"] = std::move(macro);
    write_file(run_dir / "reports" / "eval_summary.json", summary.dump(2) + "\n");
    std::cerr << "eval-passk: " << records.size() << " tasks -> reports/eval.csv\n";
    return 0;
}

int cmd_fit_scaling(const RunConfig& cfg, const fs::path& run_dir) {
    const fs::path in = cfg.fit.metrics.empty() ? run_dir / "logs" / "rlpt_metrics.csv"
                                                : resolve(run_dir, cfg.fit.metrics);
    const auto rows = rlpt::trainer::read_metrics_csv(in);
    std::vector<std::pair<double, double>> points;
    for (const auto& r : rows) {
        if (r.step < cfg.fit.min_step) continue;
        if (std::isnan(r.mean_reward_asr)) continue;
        const double y = 1.0 - r.mean_reward_asr;  // error-like quantity
        if (r.tokens_seen == 0 || y <= cfg.fit.floor) continue;
        points.emplace_back(static_cast<double>(r.tokens_seen), y);
    }
    const auto fit = rlpt::eval::fit_power_law(points, cfg.fit.floor);

    json j;
    j["a"] = fit.a;
    j["b"] = fit.b;
    j["residual_rms"] = fit.residual_rms;
    j["y"] = "1 - mean_reward_asr";
    json pts = json::array();
    for (const auto& [x, y] : points) pts.push_back({{"x", x}, {"y", y}});
    j["points"] = std::move(pts);
    write_file(run_dir / "reports" / "scaling.json", j.dump(2) + "\n");

    rlpt::report::Panel panel;
    panel.title = "Error vs tokens";
    panel.x_label = "tokens_seen";
    panel.y_label = "1 - mean reward (ASR)";
    panel.log_x = panel.log_y = true;
    rlpt::report::Series data{"observed", points, true};
    rlpt::report::Series line{"fit", {}, false};
    for (const auto& [x, y] : points)
        line.points.emplace_back(x, fit.a * std::pow(x, -fit.b));
    panel.series = {data, line};
    write_file(run_dir / "reports" / "scaling.svg", rlpt::report::render_svg({panel}));
    std::cerr << "fit-scaling: a=" << fit.a << " b=" << fit.b
              << " residual=" << fit.residual_rms << "\n";
    return 0;
}

int cmd_report_plot(const RunConfig& cfg, const fs::path& run_dir) {
    std::vector<std::string> inputs = cfg.plot.metrics;
    if (inputs.empty()) inputs.push_back("logs/rlpt_metrics.csv");

    rlpt::report::Panel reward_panel{"Training Reward", "step", "mean reward", false, false, {}};
    rlpt::report::Panel len_panel{"Response Length", "step", "mean completion tokens",
                                  false, false, {}};
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto rows = rlpt::trainer::read_metrics_csv(resolve(run_dir, inputs[i]));
        if (rows.empty()) throw std::runtime_error("metrics csv has no rows: " + inputs[i]);
        const std::string label =
            i < cfg.plot.labels.size() ? cfg.plot.labels[i] : fs::path(inputs[i]).stem().string();
        rlpt::report::Series reward{label, {}, rows.size() == 1};
        rlpt::report::Series len{label, {}, rows.size() == 1};
        for (const auto& r : rows) {
            if (!std::isnan(r.mean_reward_asr))
                reward.points.emplace_back(static_cast<double>(r.step), r.mean_reward_asr);
            len.points.emplace_back(static_cast<double>(r.step), r.mean_len);
        }
        reward_panel.series.push_back(std::move(reward));
        len_panel.series.push_back(std::move(len));
    }

    std::vector<rlpt::report::Panel> panels{reward_panel, len_panel};
    if (!cfg.plot.fit.empty()) {
        const json fj = json::parse(read_file(resolve(run_dir, cfg.plot.fit)));
        rlpt::report::Panel fit_panel{"Error vs tokens", "tokens_seen", "error", true, true, {}};
        rlpt::report::Series data{"observed", {}, true};
        rlpt::report::Series line{"fit", {}, false};
        const double a = fj.at("a").get<double>(), b = fj.at("b").get<double>();
        for (const auto& pt : fj.at("points")) {
            const double x = pt.at("x").get<double>();
            data.points.emplace_back(x, pt.at("y").get<double>());
            line.points.emplace_back(x, a * std::pow(x, -b));
        }
        fit_panel.series = {data, line};
        panels.push_back(std::move(fit_panel));
    }
    const fs::path out = resolve(run_dir, cfg.plot.out.empty() ? "reports/plot.svg" : cfg.plot.out);
    write_file(out, rlpt::report::render_svg(panels));
    std::cerr << "report-plot: wrote " << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RL on pre-training data: next-segment reasoning at desk scale"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&, const fs::path&);
    };
    const Sub subs[] = {
        {"corpus-prepare", "dedup, PII masking, decontamination, quality filter", cmd_corpus_prepare},
        {"segment", "sentence segmentation and triple extraction", cmd_segment},
        {"tasks-build", "render ASR/MSR task instances", cmd_tasks_build},
        {"train-sft", "cold-start next-token SFT", cmd_train_sft},
        {"train-rlpt", "GRPO over next-segment tasks", cmd_train_rlpt},
        {"train-rlvr", "GRPO with verifiable rewards", cmd_train_rlvr},
        {"eval-passk", "sample n completions per task, report Pass@k", cmd_eval_passk},
        {"fit-scaling", "power-law fit over the metrics log", cmd_fit_scaling},
        {"report-plot", "SVG panels: reward, length, scaling", cmd_report_plot},
    };

    std::vector<CommonArgs> args(std::size(subs));
    std::vector<CLI::App*> cmds;
    for (std::size_t i = 0; i < std::size(subs); ++i) {
        CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        add_common(cmd, args[i]);
        cmds.push_back(cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 2;
    }

    for (std::size_t i = 0; i < std::size(subs); ++i) {
        if (!cmds[i]->parsed()) continue;
        try {
            RunConfig cfg = resolve_config(args[i]);
            rlpt::config::validate(cfg, subs[i].name);
            if (!rlpt::kernels::select(cfg.kernel))
                throw std::invalid_argument("kernel must be one of auto/scalar/" +
                                            std::string("avx2/neon (and supported here)"));
            const fs::path run_dir(args[i].run_dir);
            fs::create_directories(run_dir);
            snapshot(cfg, run_dir, subs[i].name);
            return subs[i].run(cfg, run_dir);
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 2;
}
