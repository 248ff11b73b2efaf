#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlpt/policy.hpp"
#include "rlpt/reward.hpp"
#include "rlpt/tasks.hpp"

namespace rlpt::trainer {

struct Rollout {
    policy::TokenSeq completion;
    double total_logprob = 0.0;
    std::string text;  // decoded completion
    tasks::Extraction extraction;
    int reward = 0;
    std::size_t length = 0;  // completion tokens, EOS included
};

struct RolloutGroup {
    std::string task_id;
    tasks::TaskKind kind = tasks::TaskKind::Asr;
    double loss_weight = 1.0;
    policy::TokenSeq prompt_ids;
    std::vector<Rollout> rollouts;
    std::vector<double> advantages;
    std::uint64_t params_version = 0;  // stamp for the on-policy check
};

// (r - mean) / std with population std; all zeros when std < std_floor.
std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     double std_floor = 1e-6);

struct TrainerConfig {
    std::size_t group_size = 8;  // G
    std::size_t batch_size = 64;
    std::size_t steps = 500;
    double lr = 1e-2;
    double temperature = 1.0;
    double top_p = 1.0;
    std::size_t max_len = 128;
    double std_floor = 1e-6;
    double lambda = 0.5;
    double asr_weight = 1.0;
    double msr_weight = 1.0;
    tasks::TaskOptions task_options;  // window geometry; lambda mirrored in
    reward::RewardConfig reward;
    unsigned workers = 1;
    std::uint64_t seed = 0;
};

struct StepMetrics {
    std::size_t step = 0;
    std::uint64_t tokens_seen = 0;
    double mean_reward_asr = 0.0;  // NaN when the batch had no such tasks
    double mean_reward_msr = 0.0;
    double mean_len = 0.0;
    double p90_len = 0.0;
    std::string mode;
    double lambda = 0.0;
};

// Exact column set: step,tokens_seen,mean_reward_asr,mean_reward_msr,
// mean_len,p90_len,mode,lambda
void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const StepMetrics> rows);
std::vector<StepMetrics> read_metrics_csv(const std::filesystem::path& path);

struct QaTask {
    std::string id;
    std::string question;
    std::string gold;
};

struct TrainState {
    std::size_t step = 0;
    std::uint64_t tokens_seen = 0;
    std::uint64_t seed = 0;
    std::size_t stream_cursor = 0;
};

void save_train_state(const std::filesystem::path& path, const TrainState& st,
                      const std::string& config_json);
TrainState load_train_state(const std::filesystem::path& path);

struct TrainResult {
    std::vector<StepMetrics> metrics;
    TrainState state;
    bool aborted_non_finite = false;
};

class Trainer {
public:
    Trainer(policy::TinyLmPolicy& policy, TrainerConfig cfg);

    // Samples G completions at the configured temperature and scores them.
    // The group is stamped with the current params version.
    RolloutGroup collect_group(const tasks::TaskInstance& task, std::uint64_t seed) const;
    RolloutGroup collect_group(const QaTask& task, std::uint64_t seed) const;

    // Single ascent step on
    //   sum_groups loss_weight * (1/G) sum_j A_j * (1/|o_j|) sum_t log pi.
    // Throws std::logic_error if any group was sampled under older params.
    void grpo_step(std::span<const RolloutGroup> groups, double lr);

    TrainResult train_rlpt(const std::vector<seg::SegmentTriple>& triples,
                           TrainState init = {});
    TrainResult train_rlvr(const std::vector<QaTask>& qa, TrainState init = {});

    const TrainerConfig& config() const { return cfg_; }

private:
    policy::TinyLmPolicy& policy_;
    TrainerConfig cfg_;
    std::unique_ptr<reward::JudgeClient> judge_;  // set when judge == Remote

    RolloutGroup collect_from_prompt(std::string task_id, tasks::TaskKind kind,
                                     double loss_weight, policy::TokenSeq prompt_ids,
                                     const std::function<int(const Rollout&)>& score,
                                     std::uint64_t seed) const;
    TrainResult run_loop(const std::function<std::vector<RolloutGroup>(std::size_t, TrainState&)>& make_groups,
                         TrainState init, std::string_view mode_label);
};

}  // namespace rlpt::trainer
