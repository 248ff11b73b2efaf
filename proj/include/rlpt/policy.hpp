#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rlpt::policy {

using TokenSeq = std::vector<int>;

// Word-level vocabulary. Tokenization splits on whitespace, peels
// punctuation characters into single-char tokens, and keeps the prediction
// tags (and <MASK>) atomic. Specials occupy the first five ids.
class Vocab {
public:
    static constexpr std::string_view kBos = "<BOS>";
    static constexpr std::string_view kEos = "<EOS>";
    static constexpr std::string_view kUnk = "<UNK>";

    static std::vector<std::string> tokenize(std::string_view text);

    // Most frequent tokens kept up to max_size (specials included in the
    // budget); frequency ties break lexicographically. Throws on empty input.
    static Vocab build(const std::vector<std::string>& corpus, std::size_t max_size);

    static Vocab load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::size_t size() const { return tokens_.size(); }
    int bos() const { return 0; }
    int eos() const { return 1; }
    int unk() const { return 2; }
    int start_tag() const { return 3; }
    int end_tag() const { return 4; }

    int id_of(std::string_view token) const;  // unk() when absent
    const std::string& token(std::size_t id) const { return tokens_.at(id); }

    TokenSeq encode(std::string_view text) const;

    // Joins tokens with spaces, attaching punctuation to the previous token
    // and skipping BOS/EOS.
    std::string decode(std::span<const int> ids) const;

private:
    std::vector<std::string> tokens_;
    std::vector<std::pair<std::string, int>> index_;  // sorted token -> id
    void build_index();
};

struct ModelConfig {
    std::size_t vocab_size = 0;
    std::size_t embed_dim = 16;
    std::size_t window = 8;  // m: context tokens fed to the model
    std::size_t hidden = 48;
};

struct SampleOptions {
    double temperature = 1.0;
    double top_p = 1.0;
    std::size_t max_len = 128;
    std::uint64_t seed = 0;
};

struct SampleResult {
    TokenSeq completion;      // includes the terminating EOS when emitted
    double total_logprob = 0; // under the truncated, renormalized distribution
};

struct Episode {
    TokenSeq prompt;
    TokenSeq completion;
    double weight = 1.0;
};

enum class LrSchedule { Constant, Cosine };

struct SftOptions {
    double lr = 0.1;
    LrSchedule schedule = LrSchedule::Constant;
    std::size_t step = 0;         // current step, for the cosine decay
    std::size_t total_steps = 1;  // cosine horizon
};

// Fixed-window feed-forward LM: the last `window` token embeddings are
// concatenated, passed through one tanh layer, and projected to logits.
// Parameters live in one flat vector [embed | w1 | b1 | w2 | b2] so
// gradient steps and finite-difference checks stay trivial.
class TinyLm {
public:
    TinyLm() = default;
    TinyLm(const ModelConfig& cfg, std::uint64_t seed, double init_scale = 0.05);

    const ModelConfig& config() const { return cfg_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // log-probabilities over the vocabulary given the last `window` context
    // tokens (left-padded with BOS). Throws on non-finite logits or
    // temperature <= 0.
    std::vector<double> logprobs(const TokenSeq& context, double temperature = 1.0) const;

    int argmax_token(const TokenSeq& context) const;

    SampleResult sample_completion(const TokenSeq& prompt, const SampleOptions& opts) const;

    // Sum over completion tokens of log pi(token | prefix), teacher-forced.
    double sequence_logprob(const TokenSeq& prompt, const TokenSeq& completion) const;

    // Gradient of sum_e weight_e * sum_t log pi(tok_t | prefix), same layout
    // as params().
    std::vector<double> grad_weighted_loglik(std::span<const Episode> episodes) const;

    // Mean over sequences of per-token NTP cross-entropy (Eq.-style 1/|x|
    // normalization, BOS-padded contexts).
    double ntp_loss(std::span<const TokenSeq> batch) const;

    // One gradient-descent step on ntp_loss.
    void sft_step(std::span<const TokenSeq> batch, const SftOptions& opts);

    // Gradient-ascent step: params += lr * grad_weighted_loglik(episodes).
    void ascent_weighted_loglik(std::span<const Episode> episodes, double lr);

    void save(const std::filesystem::path& path) const;
    static TinyLm load(const std::filesystem::path& path);

    // Token id conventions shared with Vocab.
    int bos_id() const { return 0; }
    int eos_id() const { return 1; }

private:
    ModelConfig cfg_;
    std::vector<double> params_;

    std::size_t off_embed() const { return 0; }
    std::size_t off_w1() const;
    std::size_t off_b1() const;
    std::size_t off_w2() const;
    std::size_t off_b2() const;

    struct Scratch;
    void forward(const int* window, Scratch& s) const;
    void accumulate_episode(const Episode& ep, std::vector<double>& grad,
                            Scratch& s) const;
};

double cosine_lr(double base, std::size_t step, std::size_t total_steps);

// Minimal policy abstraction the trainer drives; hides the architecture so a
// bigger model can slot in behind the same surface.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::size_t vocab_size() const = 0;
    virtual int eos_id() const = 0;
    virtual SampleResult sample(const TokenSeq& prompt, const SampleOptions& opts) const = 0;
    virtual double sequence_logprob(const TokenSeq& prompt, const TokenSeq& completion) const = 0;
    virtual void ascent_weighted_loglik(std::span<const Episode> episodes, double lr) = 0;
    virtual std::uint64_t params_version() const = 0;
    virtual bool params_finite() const = 0;
    virtual void save(const std::filesystem::path& path) const = 0;
};

class TinyLmPolicy final : public Policy {
public:
    TinyLmPolicy(TinyLm model, Vocab vocab)
        : model_(std::move(model)), vocab_(std::move(vocab)) {}

    TinyLm& model() { return model_; }
    const TinyLm& model() const { return model_; }
    const Vocab& vocab() const { return vocab_; }

    std::size_t vocab_size() const override { return vocab_.size(); }
    int eos_id() const override { return vocab_.eos(); }
    SampleResult sample(const TokenSeq& prompt, const SampleOptions& opts) const override {
        return model_.sample_completion(prompt, opts);
    }
    double sequence_logprob(const TokenSeq& prompt, const TokenSeq& completion) const override {
        return model_.sequence_logprob(prompt, completion);
    }
    void ascent_weighted_loglik(std::span<const Episode> episodes, double lr) override {
        model_.ascent_weighted_loglik(episodes, lr);
        ++version_;
    }
    std::uint64_t params_version() const override { return version_; }
    bool params_finite() const override;
    void save(const std::filesystem::path& path) const override { model_.save(path); }

private:
    TinyLm model_;
    Vocab vocab_;
    std::uint64_t version_ = 0;
};

}  // namespace rlpt::policy
