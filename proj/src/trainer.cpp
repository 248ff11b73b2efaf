#include "rlpt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rlpt/parallel.hpp"
#include "rlpt/text.hpp"

namespace rlpt::trainer {

std::vector<double> group_advantages(const std::vector<double>& rewards, double std_floor) {
    const std::size_t g = rewards.size();
    if (g < 2) throw std::invalid_argument("group_advantages: need G >= 2");
    if (std_floor <= 0.0) throw std::invalid_argument("group_advantages: std_floor must be > 0");
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(g);
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= static_cast<double>(g);  // population variance
    const double sd = std::sqrt(var);
    std::vector<double> adv(g, 0.0);
    if (sd < std_floor) return adv;
    for (std::size_t j = 0; j < g; ++j) adv[j] = (rewards[j] - mean) / sd;
    return adv;
}

Trainer::Trainer(policy::TinyLmPolicy& policy, TrainerConfig cfg)
    : policy_(policy), cfg_(std::move(cfg)) {
    if (cfg_.group_size < 2) throw std::invalid_argument("Trainer: group_size must be >= 2");
    cfg_.task_options.msr_loss_weight = cfg_.lambda;
    if (cfg_.reward.judge == reward::JudgeKind::Remote)
        judge_ = std::make_unique<reward::JudgeClient>(cfg_.reward.judge_cfg);
}

RolloutGroup Trainer::collect_from_prompt(std::string task_id, tasks::TaskKind kind,
                                          double loss_weight, policy::TokenSeq prompt_ids,
                                          const std::function<int(const Rollout&)>& score,
                                          std::uint64_t seed) const {
    RolloutGroup group;
    group.task_id = std::move(task_id);
    group.kind = kind;
    group.loss_weight = loss_weight;
    group.prompt_ids = std::move(prompt_ids);
    group.params_version = policy_.params_version();
    group.rollouts.resize(cfg_.group_size);

    for (std::size_t j = 0; j < cfg_.group_size; ++j) {
        policy::SampleOptions opts;
        opts.temperature = cfg_.temperature;
        opts.top_p = cfg_.top_p;
        opts.max_len = cfg_.max_len;
        opts.seed = text::derive_seed(seed, j, 0x7011);
        auto sample = policy_.sample(group.prompt_ids, opts);
        Rollout& r = group.rollouts[j];
        r.completion = std::move(sample.completion);
        r.total_logprob = sample.total_logprob;
        r.length = r.completion.size();
        r.text = policy_.vocab().decode(r.completion);
        r.extraction = tasks::extract_prediction(r.text);
        r.reward = score(r);
    }

    std::vector<double> rewards(cfg_.group_size);
    for (std::size_t j = 0; j < cfg_.group_size; ++j)
        rewards[j] = group.rollouts[j].reward;
    group.advantages = group_advantages(rewards, cfg_.std_floor);
    return group;
}

RolloutGroup Trainer::collect_group(const tasks::TaskInstance& task, std::uint64_t seed) const {
    return collect_from_prompt(
        task.task_id, task.kind, task.loss_weight, policy_.vocab().encode(task.prompt),
        [&](const Rollout& r) {
            return reward::compute_reward(r.text, task, cfg_.reward, judge_.get()).value;
        },
        seed);
}

RolloutGroup Trainer::collect_group(const QaTask& task, std::uint64_t seed) const {
    return collect_from_prompt(
        task.id, tasks::TaskKind::Asr, 1.0, policy_.vocab().encode(task.question),
        [&](const Rollout& r) { return reward::verifiable_reward(r.text, task.gold); },
        seed);
}

void Trainer::grpo_step(std::span<const RolloutGroup> groups, double lr) {
    const std::uint64_t version = policy_.params_version();
    std::vector<policy::Episode> episodes;
    for (const auto& group : groups) {
        if (group.params_version != version)
            throw std::logic_error("grpo_step: off-policy group (stale params version)");
        const double g = static_cast<double>(group.rollouts.size());
        for (std::size_t j = 0; j < group.rollouts.size(); ++j) {
            const double adv = group.advantages[j];
            if (adv == 0.0) continue;
            const Rollout& r = group.rollouts[j];
            if (r.completion.empty()) continue;
            const double w =
                group.loss_weight * adv / (g * static_cast<double>(r.completion.size()));
            episodes.push_back({group.prompt_ids, r.completion, w});
        }
    }
    policy_.ascent_weighted_loglik(episodes, lr);
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

double batch_mean_reward(std::span<const RolloutGroup> groups, tasks::TaskKind kind,
                         bool kind_matters) {
    std::size_t n = 0;
    double sum = 0.0;
    for (const auto& g : groups) {
        if (kind_matters && g.kind != kind) continue;
        for (const auto& r : g.rollouts) {
            sum += r.reward;
            ++n;
        }
    }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN()
                  : sum / static_cast<double>(n);
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path, std::span<const StepMetrics> rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write metrics csv: " + path.string());
    f << "step,tokens_seen,mean_reward_asr,mean_reward_msr,mean_len,p90_len,mode,lambda\n";
    for (const auto& r : rows) {
        f << r.step << ',' << r.tokens_seen << ',' << fmt_double(r.mean_reward_asr) << ','
          << fmt_double(r.mean_reward_msr) << ',' << fmt_double(r.mean_len) << ','
          << fmt_double(r.p90_len) << ',' << r.mode << ',' << fmt_double(r.lambda) << '\n';
    }
}

std::vector<StepMetrics> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read metrics csv: " + path.string());
    std::vector<StepMetrics> rows;
    std::string line;
    if (!std::getline(f, line)) return rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        StepMetrics m;
        auto next = [&]() {
            if (!std::getline(ss, field, ',')) throw std::runtime_error("bad metrics row: " + line);
            return field;
        };
        m.step = std::stoul(next());
        m.tokens_seen = std::stoull(next());
        m.mean_reward_asr = std::stod(next());
        m.mean_reward_msr = std::stod(next());
        m.mean_len = std::stod(next());
        m.p90_len = std::stod(next());
        m.mode = next();
        m.lambda = std::stod(next());
        rows.push_back(std::move(m));
    }
    return rows;
}

void save_train_state(const std::filesystem::path& path, const TrainState& st,
                      const std::string& config_json) {
    nlohmann::json j;
    j["step"] = st.step;
    j["tokens_seen"] = st.tokens_seen;
    j["seed"] = st.seed;
    j["stream_cursor"] = st.stream_cursor;
    if (!config_json.empty())
        j["config"] = nlohmann::json::parse(config_json, nullptr, false);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write train state: " + path.string());
    f << j.dump(2) << '\n';
}

TrainState load_train_state(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read train state: " + path.string());
    const auto j = nlohmann::json::parse(f);
    TrainState st;
    st.step = j.at("step").get<std::size_t>();
    st.tokens_seen = j.at("tokens_seen").get<std::uint64_t>();
    st.seed = j.at("seed").get<std::uint64_t>();
    st.stream_cursor = j.value("stream_cursor", std::size_t{0});
    return st;
}

// ---------------------------------------------------------------------------
// Training loops

TrainResult Trainer::run_loop(
    const std::function<std::vector<RolloutGroup>(std::size_t, TrainState&)>& make_groups,
    TrainState init, std::string_view mode_label) {
    TrainResult res;
    res.state = init;
    res.state.seed = cfg_.seed;

    for (std::size_t s = 0; s < cfg_.steps; ++s) {
        TrainState& st = res.state;
        const std::size_t step = st.step + 1;
        auto groups = make_groups(step, st);
        if (groups.empty()) break;

        StepMetrics m;
        m.step = step;
        m.mode = std::string(mode_label);
        m.lambda = cfg_.lambda;
        m.mean_reward_asr = batch_mean_reward(groups, tasks::TaskKind::Asr, true);
        m.mean_reward_msr = batch_mean_reward(groups, tasks::TaskKind::Msr, true);

        std::vector<double> lengths;
        lengths.reserve(groups.size() * cfg_.group_size);
        for (const auto& g : groups)
            for (const auto& r : g.rollouts) {
                lengths.push_back(static_cast<double>(r.length));
                st.tokens_seen += r.length;
            }
        double mean_len = 0.0;
        for (double l : lengths) mean_len += l;
        m.mean_len = lengths.empty() ? 0.0 : mean_len / static_cast<double>(lengths.size());
        std::sort(lengths.begin(), lengths.end());
        if (!lengths.empty()) {
            const std::size_t rank =
                (lengths.size() * 9 + 9) / 10;  // nearest-rank ceil(0.9 n)
            m.p90_len = lengths[std::min(rank, lengths.size()) - 1];
        }
        m.tokens_seen = st.tokens_seen;

        grpo_step(groups, cfg_.lr);
        if (!policy_.params_finite()) {
            res.aborted_non_finite = true;
            res.metrics.push_back(std::move(m));
            break;
        }
        st.step = step;
        res.metrics.push_back(std::move(m));
    }
    return res;
}

TrainResult Trainer::train_rlpt(const std::vector<seg::SegmentTriple>& triples,
                                TrainState init) {
    tasks::ScheduleConfig sched;
    sched.batch_size = cfg_.batch_size;
    sched.asr_weight = cfg_.asr_weight;
    sched.msr_weight = cfg_.msr_weight;
    sched.options = cfg_.task_options;
    sched.seed = cfg_.seed;

    auto make_groups = [&](std::size_t step, TrainState& st) {
        auto batch = tasks::schedule_batch(triples, sched, st.stream_cursor);
        std::vector<RolloutGroup> groups(batch.size());
        parallel_for(batch.size(), cfg_.workers, [&](std::size_t g) {
            groups[g] = collect_group(batch[g], text::derive_seed(cfg_.seed, step, g));
        });
        return groups;
    };
    return run_loop(make_groups, init, reward::mode_name(cfg_.reward.mode));
}

TrainResult Trainer::train_rlvr(const std::vector<QaTask>& qa, TrainState init) {
    auto make_groups = [&](std::size_t step, TrainState& st) {
        std::vector<RolloutGroup> groups;
        if (qa.empty()) return groups;
        std::vector<const QaTask*> batch;
        batch.reserve(cfg_.batch_size);
        for (std::size_t k = 0; k < cfg_.batch_size; ++k)
            batch.push_back(&qa[st.stream_cursor++ % qa.size()]);
        groups.resize(batch.size());
        parallel_for(batch.size(), cfg_.workers, [&](std::size_t g) {
            groups[g] = collect_group(*batch[g], text::derive_seed(cfg_.seed, step, g));
        });
        return groups;
    };
    return run_loop(make_groups, init, "verifiable");
}

}  // namespace rlpt::trainer
