#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "rlpt/trainer.hpp"

using namespace rlpt;
namespace fs = std::filesystem;

namespace {

policy::TinyLmPolicy make_policy(std::uint64_t seed = 1, double scale = 0.1) {
    auto vocab = policy::Vocab::build(
        {"the cat sat on the mat . the dog ran away . <|startofprediction|> "
         "<|endofprediction|> one two three four five answers arrive soon"},
        128);
    policy::ModelConfig mc;
    mc.vocab_size = vocab.size();
    mc.embed_dim = 4;
    mc.window = 4;
    mc.hidden = 8;
    policy::TinyLm lm(mc, seed, scale);
    return {std::move(lm), std::move(vocab)};
}

tasks::TaskInstance simple_task() {
    tasks::TaskInstance t;
    t.kind = tasks::TaskKind::Asr;
    t.task_id = "t0";
    t.prompt = "the cat sat on";
    t.target = "the mat.";
    t.ref_window = "the mat. the dog ran away.";
    t.loss_weight = 1.0;
    return t;
}

}  // namespace

TEST_CASE("group advantages: worked values") {
    const auto all_one = trainer::group_advantages({1, 1, 1, 1, 1, 1, 1, 1});
    for (double a : all_one) CHECK(a == 0.0);

    const auto mixed = trainer::group_advantages({1, 0, 0, 0, 0, 0, 0, 1});
    CHECK(mixed[0] == doctest::Approx(1.7321).epsilon(1e-4));
    CHECK(mixed[7] == doctest::Approx(1.7321).epsilon(1e-4));
    for (int j = 1; j < 7; ++j) CHECK(mixed[j] == doctest::Approx(-0.5774).epsilon(1e-4));

    const auto pair = trainer::group_advantages({1, 0});
    CHECK(pair[0] == doctest::Approx(1.0));
    CHECK(pair[1] == doctest::Approx(-1.0));

    CHECK_THROWS(trainer::group_advantages({1}));
}

TEST_CASE("group advantages: mean zero, std one over random vectors") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t g = 2 + rng() % 15;
        std::vector<double> rewards(g);
        for (auto& r : rewards) r = static_cast<double>(rng() % 2);
        const auto adv = trainer::group_advantages(rewards);
        double mean = 0, var = 0;
        for (double a : adv) mean += a;
        mean /= static_cast<double>(g);
        for (double a : adv) var += (a - mean) * (a - mean);
        var /= static_cast<double>(g);
        const bool all_equal =
            std::all_of(rewards.begin(), rewards.end(),
                        [&](double r) { return r == rewards[0]; });
        if (all_equal) {
            for (double a : adv) CHECK(a == 0.0);
        } else {
            CHECK(std::abs(mean) < 1e-9);
            CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("collect_group is deterministic and has G rollouts") {
    auto pol = make_policy();
    trainer::TrainerConfig cfg;
    cfg.group_size = 8;
    cfg.max_len = 12;
    cfg.seed = 7;
    trainer::Trainer tr(pol, cfg);

    const auto g1 = tr.collect_group(simple_task(), 99);
    const auto g2 = tr.collect_group(simple_task(), 99);
    REQUIRE(g1.rollouts.size() == 8);
    CHECK(g1.advantages.size() == 8);
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(g1.rollouts[j].completion == g2.rollouts[j].completion);
        CHECK((g1.rollouts[j].reward == 0 || g1.rollouts[j].reward == 1));
    }

    // untagged random babble: every reward 0, group survives with zero advantages
    double sum = 0;
    for (const auto& r : g1.rollouts) sum += r.reward;
    if (sum == 0)
        for (double a : g1.advantages) CHECK(a == 0.0);
}

TEST_CASE("grpo_step with all-zero advantages leaves parameters unchanged") {
    auto pol = make_policy();
    trainer::TrainerConfig cfg;
    cfg.group_size = 4;
    cfg.max_len = 8;
    trainer::Trainer tr(pol, cfg);

    auto group = tr.collect_group(simple_task(), 5);
    std::fill(group.advantages.begin(), group.advantages.end(), 0.0);
    const auto before = pol.model().params();
    tr.grpo_step(std::vector<trainer::RolloutGroup>{group}, 0.1);
    CHECK(pol.model().params() == before);
}

TEST_CASE("grpo_step raises rewarded completions and lowers punished ones") {
    auto pol = make_policy(3, 0.2);
    trainer::TrainerConfig cfg;
    cfg.group_size = 2;
    cfg.max_len = 8;
    trainer::Trainer tr(pol, cfg);

    auto group = tr.collect_group(simple_task(), 21);
    // force distinct completions, then fixed rewards [1, 0]
    group.rollouts[1].completion = group.rollouts[0].completion;
    group.rollouts[1].completion[0] =
        group.rollouts[1].completion[0] == 5 ? 6 : 5;
    group.advantages = trainer::group_advantages({1, 0});

    const auto& prompt = group.prompt_ids;
    const auto lp_win_before =
        pol.model().sequence_logprob(prompt, group.rollouts[0].completion);
    const auto lp_lose_before =
        pol.model().sequence_logprob(prompt, group.rollouts[1].completion);

    tr.grpo_step(std::vector<trainer::RolloutGroup>{group}, 0.5);

    CHECK(pol.model().sequence_logprob(prompt, group.rollouts[0].completion) >
          lp_win_before);
    CHECK(pol.model().sequence_logprob(prompt, group.rollouts[1].completion) <
          lp_lose_before);
}

TEST_CASE("msr loss weight scales the parameter delta linearly") {
    auto base = make_policy(11, 0.2);
    trainer::TrainerConfig cfg;
    cfg.group_size = 2;
    cfg.max_len = 8;

    auto run_with_weight = [&](double w) {
        auto pol = make_policy(11, 0.2);
        trainer::Trainer tr(pol, cfg);
        auto group = tr.collect_group(simple_task(), 33);
        group.kind = w == 1.0 ? tasks::TaskKind::Asr : tasks::TaskKind::Msr;
        group.loss_weight = w;
        group.advantages = trainer::group_advantages({1, 0});
        tr.grpo_step(std::vector<trainer::RolloutGroup>{group}, 0.1);
        std::vector<double> delta = pol.model().params();
        const auto& init = base.model().params();
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= init[i];
        return delta;
    };

    const auto d1 = run_with_weight(1.0);
    const auto dh = run_with_weight(0.5);
    for (std::size_t i = 0; i < d1.size(); ++i)
        CHECK(std::abs(dh[i] - 0.5 * d1[i]) < 1e-9);
}

TEST_CASE("stale groups are rejected") {
    auto pol = make_policy();
    trainer::TrainerConfig cfg;
    cfg.group_size = 2;
    cfg.max_len = 8;
    trainer::Trainer tr(pol, cfg);

    auto group = tr.collect_group(simple_task(), 5);
    group.advantages = trainer::group_advantages({1, 0});
    tr.grpo_step(std::vector<trainer::RolloutGroup>{group}, 0.05);  // bumps version
    CHECK_THROWS_AS(tr.grpo_step(std::vector<trainer::RolloutGroup>{group}, 0.05),
                    std::logic_error);
}

TEST_CASE("train_rlvr with unreachable gold answers keeps parameters still") {
    auto pol = make_policy();
    trainer::TrainerConfig cfg;
    cfg.group_size = 4;
    cfg.batch_size = 4;
    cfg.steps = 3;
    cfg.max_len = 8;
    cfg.seed = 2;
    trainer::Trainer tr(pol, cfg);

    const auto before = pol.model().params();
    std::vector<trainer::QaTask> qa{{"q0", "the cat sat", "unreachable_gold_word"}};
    const auto res = tr.train_rlvr(qa);
    REQUIRE(res.metrics.size() == 3);
    for (const auto& m : res.metrics) CHECK(m.mean_reward_asr == 0.0);
    CHECK(pol.model().params() == before);  // all-equal rewards, zero advantages
}

TEST_CASE("train_rlpt zero steps returns unchanged state and empty log") {
    auto pol = make_policy();
    trainer::TrainerConfig cfg;
    cfg.steps = 0;
    trainer::Trainer tr(pol, cfg);
    seg::SegmentedText st{"d",
                          {"the cat sat on the mat.", "the dog ran away fast.",
                           "one two three four five."}};
    const auto res = tr.train_rlpt(seg::build_triples(st));
    CHECK(res.metrics.empty());
    CHECK(res.state.step == 0);
}

TEST_CASE("train_rlpt determinism and metrics schema") {
    seg::SegmentedText st{"d",
                          {"the cat sat on the mat.", "the dog ran away fast.",
                           "one two three four five.", "answers arrive soon enough now."}};
    const auto triples = seg::build_triples(st);

    auto run_once = [&] {
        auto pol = make_policy(5, 0.15);
        trainer::TrainerConfig cfg;
        cfg.group_size = 4;
        cfg.batch_size = 6;
        cfg.steps = 4;
        cfg.max_len = 10;
        cfg.seed = 13;
        cfg.workers = 1;
        trainer::Trainer tr(pol, cfg);
        return tr.train_rlpt(triples);
    };
    const auto r1 = run_once();
    const auto r2 = run_once();
    REQUIRE(r1.metrics.size() == 4);

    const fs::path p1 = fs::temp_directory_path() / "rlpt_m1.csv";
    const fs::path p2 = fs::temp_directory_path() / "rlpt_m2.csv";
    trainer::write_metrics_csv(p1, r1.metrics);
    trainer::write_metrics_csv(p2, r2.metrics);
    std::ifstream f1(p1), f2(p2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());

    std::string header;
    std::ifstream f3(p1);
    std::getline(f3, header);
    CHECK(header ==
          "step,tokens_seen,mean_reward_asr,mean_reward_msr,mean_len,p90_len,mode,lambda");

    // workers must not change the trajectory
    auto pol = make_policy(5, 0.15);
    trainer::TrainerConfig cfg;
    cfg.group_size = 4;
    cfg.batch_size = 6;
    cfg.steps = 4;
    cfg.max_len = 10;
    cfg.seed = 13;
    cfg.workers = 3;
    trainer::Trainer tr(pol, cfg);
    const auto r3 = tr.train_rlpt(triples);
    const fs::path p3 = fs::temp_directory_path() / "rlpt_m3.csv";
    trainer::write_metrics_csv(p3, r3.metrics);
    std::ifstream f4(p3);
    std::stringstream s3;
    s3 << f4.rdbuf();
    CHECK(s3.str() == s1.str());

    // tokens_seen is non-decreasing
    for (std::size_t i = 1; i < r1.metrics.size(); ++i)
        CHECK(r1.metrics[i].tokens_seen >= r1.metrics[i - 1].tokens_seen);

    // round trip through the reader
    const auto rows = trainer::read_metrics_csv(p1);
    REQUIRE(rows.size() == r1.metrics.size());
    CHECK(rows[0].step == r1.metrics[0].step);
    CHECK(rows[0].lambda == doctest::Approx(r1.metrics[0].lambda));
}

TEST_CASE("train state round trip") {
    trainer::TrainState st;
    st.step = 42;
    st.tokens_seen = 12345;
    st.seed = 7;
    st.stream_cursor = 99;
    const fs::path p = fs::temp_directory_path() / "rlpt_state.json";
    trainer::save_train_state(p, st, "{\"seed\":7}");
    const auto back = trainer::load_train_state(p);
    CHECK(back.step == 42);
    CHECK(back.tokens_seen == 12345);
    CHECK(back.seed == 7);
    CHECK(back.stream_cursor == 99);
}
