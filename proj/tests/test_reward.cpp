#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rlpt/reward.hpp"
#include "rlpt/tasks.hpp"

using namespace rlpt;

namespace {

tasks::TaskInstance make_task(std::string target, std::string ref_window,
                              tasks::TaskKind kind = tasks::TaskKind::Asr) {
    tasks::TaskInstance t;
    t.kind = kind;
    t.task_id = "t";
    t.prompt = "unused";
    t.target = std::move(target);
    t.ref_window = std::move(ref_window);
    t.loss_weight = 1.0;
    return t;
}

std::string tagged(const std::string& body) {
    return std::string(tasks::kStartTag) + " " + body + " " + std::string(tasks::kEndTag);
}

}  // namespace

TEST_CASE("normalize") {
    CHECK(reward::normalize("The  Answer.") == "the answer");
    CHECK(reward::normalize("“X”—done!") == "\"x\"-done");
    CHECK(reward::normalize("  spaced   out  ") == "spaced out");
    CHECK(reward::normalize("ends with dots...") == "ends with dots");
    CHECK(reward::normalize("") == "");

    std::mt19937_64 rng(4);
    const std::string alphabet = "aB c.!?’xyz  .. ";
    for (int i = 0; i < 1000; ++i) {
        std::string s;
        const std::size_t len = rng() % 20;
        for (std::size_t k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
        const std::string once = reward::normalize(s);
        CHECK(reward::normalize(once) == once);
    }
}

TEST_CASE("strict_match") {
    CHECK(reward::strict_match("The cat sat.", "The cat sat.") == 1);
    CHECK(reward::strict_match("The cat sat. And more.", "The cat sat.") == 0);
    CHECK(reward::strict_match("the CAT sat", "The cat sat.") == 1);
    CHECK(reward::strict_match("entirely different", "The cat sat.") == 0);
}

TEST_CASE("prefix_match") {
    const std::string target = "The cat sat on the mat.";
    const std::string succ = "Then it slept all day.";
    const std::string window = target + " " + succ;

    CHECK(reward::prefix_match(target, window, target) == 1);
    CHECK(reward::prefix_match(target + " " + succ, window, target) == 1);
    CHECK(reward::prefix_match("The cat sat", window, target) == 0);  // under coverage
    CHECK(reward::prefix_match("The dog sat on the mat.", window, target) == 0);
    // coverage clause disabled: any valid prefix scores
    CHECK(reward::prefix_match("The cat sat", window, target, false) == 1);
    // predictions running past the window fail
    CHECK(reward::prefix_match(window + " And beyond the window.", window, target) == 0);
}

TEST_CASE("relaxation dominance: strict one implies prefix one") {
    std::mt19937_64 rng(6);
    const char* words[] = {"alpha", "beta", "gamma", "delta", "Cat", "dog", "3.5", "x"};
    for (int trial = 0; trial < 500; ++trial) {
        auto sentence = [&](int len) {
            std::string s;
            for (int i = 0; i < len; ++i) {
                if (i) s += " ";
                s += words[rng() % 8];
            }
            return s + ".";
        };
        const std::string target = sentence(1 + static_cast<int>(rng() % 5));
        const std::string window = target + " " + sentence(1 + static_cast<int>(rng() % 4));
        // predictions: sometimes the target with cosmetic changes, sometimes noise
        std::string pred = rng() % 2 ? target : sentence(1 + static_cast<int>(rng() % 6));
        if (rng() % 3 == 0) pred += "!";
        if (reward::strict_match(pred, target) == 1)
            CHECK(reward::prefix_match(pred, window, target) == 1);
    }
}

TEST_CASE("monotone window: appending segments never revokes a prefix reward") {
    std::mt19937_64 rng(12);
    const std::string target = "First step adds two.";
    std::string window = target;
    const std::string pred = "First step adds two. Second step adds three.";
    std::vector<int> values;
    for (int grow = 0; grow < 4; ++grow) {
        values.push_back(reward::prefix_match(pred, window, target));
        window += grow == 0 ? " Second step adds three." : " More trailing text here.";
    }
    values.push_back(reward::prefix_match(pred, window, target));
    for (std::size_t i = 1; i < values.size(); ++i)
        CHECK(values[i] >= values[i - 1]);
}

TEST_CASE("judge response parsing") {
    CHECK(reward::parse_judge_score("Score: 1") == 1);
    CHECK(reward::parse_judge_score("explanation...\nScore: 0") == 0);
    CHECK(reward::parse_judge_score("Score: 0\nScore: 1") == 1);  // last line wins
    CHECK(reward::parse_judge_score("maybe") == std::nullopt);
    CHECK(reward::parse_judge_score("Score: 7") == std::nullopt);
}

TEST_CASE("compute_reward dispatch") {
    reward::RewardConfig strict;
    strict.mode = reward::RewardMode::Strict;
    reward::RewardConfig prefix;
    prefix.mode = reward::RewardMode::Prefix;

    const auto task = make_task("The cat sat on the mat.",
                                "The cat sat on the mat. Then it slept all day.");

    // no tags: zero regardless of content
    CHECK(reward::compute_reward("The cat sat on the mat.", task, strict).value == 0);
    CHECK(reward::compute_reward("The cat sat on the mat.", task, prefix).value == 0);

    CHECK(reward::compute_reward(tagged("The cat sat on the mat."), task, strict).value == 1);

    // the Fig. 5 discrepancy in miniature: multi-segment output
    const std::string multi = tagged("The cat sat on the mat. Then it slept all day.");
    CHECK(reward::compute_reward(multi, task, strict).value == 0);
    CHECK(reward::compute_reward(multi, task, prefix).value == 1);
}

TEST_CASE("remote judge against a local endpoint") {
    httplib::Server server;
    std::atomic<int> calls{0};
    server.Post("/complete", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        const auto body = nlohmann::json::parse(req.body);
        const std::string prompt = body.at("prompt").get<std::string>();
        // scores 1 exactly when the predicted slot text appears in the reference slot
        const auto ref_at = prompt.find("Reference:\n");
        const auto pred_at = prompt.find("Predicted:\n");
        const auto rules_at = prompt.find("\n\n## Scoring Rules");
        const std::string ref = prompt.substr(ref_at + 11, pred_at - ref_at - 13);
        const std::string pred = prompt.substr(pred_at + 11, rules_at - pred_at - 11);
        const int score = ref.find(pred) != std::string::npos ? 1 : 0;
        res.set_content(nlohmann::json{{"text", "Score: " + std::to_string(score)}}.dump(),
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    reward::JudgeConfig jc;
    jc.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/complete";
    reward::JudgeClient client(jc);

    const auto yes = client.score(reward::make_judge_request("The full reference text.",
                                                             "The full reference"));
    CHECK(yes == 1);
    const auto no = client.score(reward::make_judge_request("The full reference text.",
                                                            "Something else entirely"));
    CHECK(no == 0);

    reward::RewardConfig rc;
    rc.mode = reward::RewardMode::Prefix;
    rc.judge = reward::JudgeKind::Remote;
    rc.judge_cfg = jc;
    rc.judge_cfg.compare_oracle = true;
    const auto task = make_task("The cat sat on the mat.",
                                "The cat sat on the mat. Then it slept.");
    const auto out =
        reward::compute_reward(tagged("The cat sat on the mat."), task, rc, &client);
    CHECK(out.value == 1);
    CHECK(out.judge == reward::JudgeKind::Remote);
    REQUIRE(out.oracle_value.has_value());
    CHECK(*out.oracle_value == 1);

    server.stop();
    th.join();
    CHECK(calls.load() >= 3);
}

TEST_CASE("judge transport failure follows the configured policy") {
    reward::JudgeConfig jc;
    jc.endpoint = "http://127.0.0.1:9/unreachable";  // discard port, nothing listens
    jc.timeout_ms = 50;
    jc.retries = 1;
    reward::JudgeClient client(jc);
    reward::JudgeError err;
    CHECK(client.score(reward::make_judge_request("r", "p"), &err) == std::nullopt);
    CHECK_FALSE(err.message.empty());

    const auto task = make_task("t", "t w");
    reward::RewardConfig rc;
    rc.judge = reward::JudgeKind::Remote;
    rc.judge_cfg = jc;
    CHECK_THROWS(reward::compute_reward(tagged("t"), task, rc, &client));

    rc.judge_cfg.score_zero_on_error = true;
    reward::JudgeClient lenient(rc.judge_cfg);
    const auto out = reward::compute_reward(tagged("t"), task, rc, &lenient);
    CHECK(out.value == 0);
    CHECK(out.detail.rfind("judge_error:", 0) == 0);
}

TEST_CASE("verifiable_reward") {
    CHECK(reward::verifiable_reward("steps...\nAnswer: 12", "12") == 1);
    CHECK(reward::verifiable_reward("no answer line here", "12") == 0);
    CHECK(reward::verifiable_reward("Answer: 012", "12") == 0);
    CHECK(reward::verifiable_reward("Answer: 11\nAnswer: 12", "12") == 1);  // final line
    // tags from the next-segment protocol do not leak into the answer
    CHECK(reward::verifiable_reward(tagged("Answer: it makes five exactly."),
                                    "it makes five exactly") == 1);
    CHECK_THROWS(reward::verifiable_reward("Answer: 12", ""));
}
