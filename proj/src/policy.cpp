#include "rlpt/policy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "rlpt/kernels.hpp"
#include "rlpt/tasks.hpp"
#include "rlpt/text.hpp"

namespace rlpt::policy {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Vocab

namespace {

constexpr std::string_view kAtomicLiterals[] = {tasks::kStartTag, tasks::kEndTag,
                                                "<MASK>"};

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

bool is_punct_token(const std::string& t) {
    return t.size() == 1 && std::ispunct(static_cast<unsigned char>(t[0]));
}

bool is_opener_token(const std::string& t) {
    return t == "(" || t == "[" || t == "{";
}

bool attaches_left(const std::string& t) {
    if (!is_punct_token(t)) return false;
    return !is_opener_token(t);
}

}  // namespace

std::vector<std::string> Vocab::tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        bool atomic = false;
        for (std::string_view lit : kAtomicLiterals) {
            if (text.substr(i, lit.size()) == lit) {
                out.emplace_back(lit);
                i += lit.size();
                atomic = true;
                break;
            }
        }
        if (atomic) continue;
        if (is_word_byte(c)) {
            std::size_t j = i;
            while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
            out.emplace_back(text.substr(i, j - i));
            i = j;
        } else {
            out.emplace_back(1, text[i]);
            ++i;
        }
    }
    return out;
}

Vocab Vocab::build(const std::vector<std::string>& corpus, std::size_t max_size) {
    if (corpus.empty()) throw std::invalid_argument("build_vocab: empty corpus");
    std::map<std::string, std::size_t> counts;
    for (const auto& text : corpus)
        for (auto& tok : tokenize(text)) ++counts[tok];
    if (counts.empty()) throw std::invalid_argument("build_vocab: no tokens in corpus");

    Vocab v;
    v.tokens_ = {std::string(kBos), std::string(kEos), std::string(kUnk),
                 std::string(tasks::kStartTag), std::string(tasks::kEndTag)};
    for (const auto& s : v.tokens_) counts.erase(s);

    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    const std::size_t budget = max_size > v.tokens_.size() ? max_size - v.tokens_.size() : 0;
    for (std::size_t i = 0; i < std::min(budget, ranked.size()); ++i)
        v.tokens_.push_back(ranked[i].first);
    v.build_index();
    return v;
}

void Vocab::build_index() {
    index_.clear();
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i)
        index_.emplace_back(tokens_[i], static_cast<int>(i));
    std::sort(index_.begin(), index_.end());
}

int Vocab::id_of(std::string_view token) const {
    auto it = std::lower_bound(index_.begin(), index_.end(), token,
                               [](const auto& p, std::string_view t) { return p.first < t; });
    if (it != index_.end() && it->first == token) return it->second;
    return unk();
}

TokenSeq Vocab::encode(std::string_view text) const {
    TokenSeq ids;
    for (auto& tok : tokenize(text)) ids.push_back(id_of(tok));
    return ids;
}

std::string Vocab::decode(std::span<const int> ids) const {
    std::string out;
    bool suppress_space = false;
    for (int id : ids) {
        if (id == bos() || id == eos()) continue;
        const std::string& tok = token(static_cast<std::size_t>(id));
        if (!out.empty() && !suppress_space && !attaches_left(tok)) out.push_back(' ');
        out += tok;
        suppress_space = is_opener_token(tok);
    }
    return out;
}

void Vocab::save(const std::filesystem::path& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write vocab file: " + path.string());
    for (const auto& tok : tokens_) f << tok << '\n';
}

Vocab Vocab::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read vocab file: " + path.string());
    Vocab v;
    std::string line;
    while (std::getline(f, line)) v.tokens_.push_back(line);
    if (v.tokens_.size() < 5) throw std::runtime_error("vocab file truncated: " + path.string());
    v.build_index();
    return v;
}

// ---------------------------------------------------------------------------
// TinyLm

std::size_t TinyLm::off_w1() const { return cfg_.vocab_size * cfg_.embed_dim; }
std::size_t TinyLm::off_b1() const {
    return off_w1() + cfg_.hidden * cfg_.window * cfg_.embed_dim;
}
std::size_t TinyLm::off_w2() const { return off_b1() + cfg_.hidden; }
std::size_t TinyLm::off_b2() const { return off_w2() + cfg_.vocab_size * cfg_.hidden; }

struct TinyLm::Scratch {
    std::vector<double> x, pre, hid, logits, dlogits, dh, dx;
    void resize(const ModelConfig& c) {
        x.resize(c.window * c.embed_dim);
        pre.resize(c.hidden);
        hid.resize(c.hidden);
        logits.resize(c.vocab_size);
        dlogits.resize(c.vocab_size);
        dh.resize(c.hidden);
        dx.resize(c.window * c.embed_dim);
    }
};

TinyLm::TinyLm(const ModelConfig& cfg, std::uint64_t seed, double init_scale) : cfg_(cfg) {
    if (cfg.vocab_size == 0) throw std::invalid_argument("TinyLm: vocab_size is 0");
    params_.resize(off_b2() + cfg_.vocab_size);
    std::mt19937_64 rng(seed);
    for (double& p : params_)
        p = (2.0 * text::to_unit_double(rng()) - 1.0) * init_scale;
}

namespace {
// Last `window` tokens, left-padded with BOS.
void fill_window(const TokenSeq& ctx, std::size_t window, int bos, int* out) {
    const std::size_t n = ctx.size();
    for (std::size_t k = 0; k < window; ++k) {
        const std::size_t back = window - k;
        out[k] = back <= n ? ctx[n - back] : bos;
    }
}
}  // namespace

void TinyLm::forward(const int* window, Scratch& s) const {
    const auto& ops = kernels::active();
    const std::size_t e = cfg_.embed_dim, m = cfg_.window, h = cfg_.hidden,
                      v = cfg_.vocab_size;
    for (std::size_t k = 0; k < m; ++k) {
        const double* emb = params_.data() + off_embed() +
                            static_cast<std::size_t>(window[k]) * e;
        std::copy(emb, emb + e, s.x.data() + k * e);
    }
    std::copy(params_.begin() + static_cast<std::ptrdiff_t>(off_b1()),
              params_.begin() + static_cast<std::ptrdiff_t>(off_b1() + h), s.pre.begin());
    ops.matvec_acc(params_.data() + off_w1(), s.x.data(), s.pre.data(), h, m * e);
    for (std::size_t i = 0; i < h; ++i) s.hid[i] = std::tanh(s.pre[i]);
    std::copy(params_.begin() + static_cast<std::ptrdiff_t>(off_b2()),
              params_.begin() + static_cast<std::ptrdiff_t>(off_b2() + v), s.logits.begin());
    ops.matvec_acc(params_.data() + off_w2(), s.hid.data(), s.logits.data(), v, h);
}

std::vector<double> TinyLm::logprobs(const TokenSeq& context, double temperature) const {
    if (temperature <= 0.0) throw std::invalid_argument("logprobs: temperature must be > 0");
    Scratch s;
    s.resize(cfg_);
    std::vector<int> win(cfg_.window);
    fill_window(context, cfg_.window, bos_id(), win.data());
    forward(win.data(), s);

    std::vector<double> lp(cfg_.vocab_size);
    double max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg_.vocab_size; ++i) {
        if (!std::isfinite(s.logits[i])) throw std::runtime_error("logprobs: non-finite logit");
        lp[i] = s.logits[i] / temperature;
        max = std::max(max, lp[i]);
    }
    double sum = 0.0;
    for (double l : lp) sum += std::exp(l - max);
    const double lse = max + std::log(sum);
    for (double& l : lp) l -= lse;
    return lp;
}

int TinyLm::argmax_token(const TokenSeq& context) const {
    Scratch s;
    s.resize(cfg_);
    std::vector<int> win(cfg_.window);
    fill_window(context, cfg_.window, bos_id(), win.data());
    forward(win.data(), s);
    return static_cast<int>(std::max_element(s.logits.begin(), s.logits.end()) -
                            s.logits.begin());
}

SampleResult TinyLm::sample_completion(const TokenSeq& prompt, const SampleOptions& opts) const {
    if (opts.max_len == 0) throw std::invalid_argument("sample_completion: max_len must be >= 1");
    SampleResult res;
    std::mt19937_64 rng(opts.seed);
    TokenSeq ctx = prompt;
    Scratch s;
    s.resize(cfg_);
    std::vector<int> win(cfg_.window);
    const std::size_t v = cfg_.vocab_size;
    std::vector<std::pair<double, int>> order(v);

    for (std::size_t t = 0; t < opts.max_len; ++t) {
        fill_window(ctx, cfg_.window, bos_id(), win.data());
        forward(win.data(), s);
        double max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < v; ++i)
            max = std::max(max, s.logits[i] / opts.temperature);
        double sum = 0.0;
        for (std::size_t i = 0; i < v; ++i) {
            const double p = std::exp(s.logits[i] / opts.temperature - max);
            order[i] = {p, static_cast<int>(i)};
            sum += p;
        }
        std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        // nucleus: smallest prefix with mass >= top_p, then renormalize
        std::size_t cut = v;
        double mass = 0.0;
        for (std::size_t i = 0; i < v; ++i) {
            mass += order[i].first;
            if (mass >= opts.top_p * sum) {
                cut = i + 1;
                break;
            }
        }
        const double u = text::to_unit_double(rng()) * mass;
        double cum = 0.0;
        std::size_t pick = cut - 1;
        for (std::size_t i = 0; i < cut; ++i) {
            cum += order[i].first;
            if (u < cum) {
                pick = i;
                break;
            }
        }
        const int tok = order[pick].second;
        res.total_logprob += std::log(order[pick].first / mass);
        res.completion.push_back(tok);
        ctx.push_back(tok);
        if (tok == eos_id()) break;
    }
    return res;
}

double TinyLm::sequence_logprob(const TokenSeq& prompt, const TokenSeq& completion) const {
    double total = 0.0;
    TokenSeq ctx = prompt;
    for (int tok : completion) {
        const auto lp = logprobs(ctx, 1.0);
        total += lp[static_cast<std::size_t>(tok)];
        ctx.push_back(tok);
    }
    return total;
}

void TinyLm::accumulate_episode(const Episode& ep, std::vector<double>& grad,
                                Scratch& s) const {
    if (ep.completion.empty())
        throw std::invalid_argument("grad_weighted_loglik: empty completion");
    if (ep.weight == 0.0) return;
    const auto& ops = kernels::active();
    const std::size_t e = cfg_.embed_dim, m = cfg_.window, h = cfg_.hidden,
                      v = cfg_.vocab_size;
    std::vector<int> win(m);
    TokenSeq ctx = ep.prompt;
    for (int target : ep.completion) {
        fill_window(ctx, m, bos_id(), win.data());
        forward(win.data(), s);

        double max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < v; ++i) max = std::max(max, s.logits[i]);
        double sum = 0.0;
        for (std::size_t i = 0; i < v; ++i) {
            s.dlogits[i] = std::exp(s.logits[i] - max);
            sum += s.dlogits[i];
        }
        // d/dlogits of weight * log softmax[target] = weight * (onehot - p)
        for (std::size_t i = 0; i < v; ++i) s.dlogits[i] *= -ep.weight / sum;
        s.dlogits[static_cast<std::size_t>(target)] += ep.weight;

        ops.axpy(1.0, s.dlogits.data(), grad.data() + off_b2(), v);
        ops.rank1_acc(grad.data() + off_w2(), s.dlogits.data(), s.hid.data(), 1.0, v, h);
        std::fill(s.dh.begin(), s.dh.end(), 0.0);
        ops.matvec_t_acc(params_.data() + off_w2(), s.dlogits.data(), s.dh.data(), v, h);
        for (std::size_t i = 0; i < h; ++i) s.dh[i] *= 1.0 - s.hid[i] * s.hid[i];

        ops.axpy(1.0, s.dh.data(), grad.data() + off_b1(), h);
        ops.rank1_acc(grad.data() + off_w1(), s.dh.data(), s.x.data(), 1.0, h, m * e);
        std::fill(s.dx.begin(), s.dx.end(), 0.0);
        ops.matvec_t_acc(params_.data() + off_w1(), s.dh.data(), s.dx.data(), h, m * e);
        for (std::size_t k = 0; k < m; ++k)
            ops.axpy(1.0, s.dx.data() + k * e,
                     grad.data() + off_embed() + static_cast<std::size_t>(win[k]) * e, e);

        ctx.push_back(target);
    }
}

std::vector<double> TinyLm::grad_weighted_loglik(std::span<const Episode> episodes) const {
    std::vector<double> grad(params_.size(), 0.0);
    Scratch s;
    s.resize(cfg_);
    for (const auto& ep : episodes) accumulate_episode(ep, grad, s);
    return grad;
}

double TinyLm::ntp_loss(std::span<const TokenSeq> batch) const {
    if (batch.empty()) return 0.0;
    double total = 0.0;
    std::size_t counted = 0;
    for (const auto& seq : batch) {
        if (seq.empty()) continue;
        total += -sequence_logprob({}, seq) / static_cast<double>(seq.size());
        ++counted;
    }
    return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

double cosine_lr(double base, std::size_t step, std::size_t total_steps) {
    if (total_steps == 0) return base;
    const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(total_steps));
    return base * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

void TinyLm::sft_step(std::span<const TokenSeq> batch, const SftOptions& opts) {
    if (opts.lr < 0.0) throw std::invalid_argument("sft_step: negative lr");
    std::vector<Episode> eps;
    eps.reserve(batch.size());
    std::size_t counted = 0;
    for (const auto& seq : batch)
        if (!seq.empty()) ++counted;
    if (counted == 0) return;
    for (const auto& seq : batch) {
        if (seq.empty()) continue;
        eps.push_back({{}, seq, 1.0 / (static_cast<double>(counted) *
                                       static_cast<double>(seq.size()))});
    }
    const double lr = opts.schedule == LrSchedule::Cosine
                          ? cosine_lr(opts.lr, opts.step, opts.total_steps)
                          : opts.lr;
    ascent_weighted_loglik(eps, lr);
}

void TinyLm::ascent_weighted_loglik(std::span<const Episode> episodes, double lr) {
    if (lr == 0.0 || episodes.empty()) return;
    const auto grad = grad_weighted_loglik(episodes);
    kernels::active().axpy(lr, grad.data(), params_.data(), params_.size());
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

json tensor_json(const std::vector<double>& flat, std::size_t off,
                 std::initializer_list<std::size_t> shape) {
    std::size_t count = 1;
    for (std::size_t d : shape) count *= d;
    json t;
    t["shape"] = std::vector<std::size_t>(shape);
    t["data"] = std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(off),
                                    flat.begin() + static_cast<std::ptrdiff_t>(off + count));
    return t;
}

void load_tensor(const json& t, std::vector<double>& flat, std::size_t off,
                 std::initializer_list<std::size_t> shape, const char* name) {
    std::size_t count = 1;
    for (std::size_t d : shape) count *= d;
    const auto got = t.at("shape").get<std::vector<std::size_t>>();
    if (got != std::vector<std::size_t>(shape))
        throw std::runtime_error(std::string("checkpoint tensor shape mismatch: ") + name);
    const auto data = t.at("data").get<std::vector<double>>();
    if (data.size() != count)
        throw std::runtime_error(std::string("checkpoint tensor size mismatch: ") + name);
    std::copy(data.begin(), data.end(), flat.begin() + static_cast<std::ptrdiff_t>(off));
}

}  // namespace

void TinyLm::save(const std::filesystem::path& path) const {
    json j;
    j["format_version"] = 1;
    j["model"] = {{"vocab_size", cfg_.vocab_size},
                  {"embed_dim", cfg_.embed_dim},
                  {"window", cfg_.window},
                  {"hidden", cfg_.hidden}};
    json tensors;
    tensors["embed"] = tensor_json(params_, off_embed(), {cfg_.vocab_size, cfg_.embed_dim});
    tensors["w1"] = tensor_json(params_, off_w1(), {cfg_.hidden, cfg_.window * cfg_.embed_dim});
    tensors["b1"] = tensor_json(params_, off_b1(), {cfg_.hidden});
    tensors["w2"] = tensor_json(params_, off_w2(), {cfg_.vocab_size, cfg_.hidden});
    tensors["b2"] = tensor_json(params_, off_b2(), {cfg_.vocab_size});
    j["tensors"] = std::move(tensors);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write checkpoint: " + path.string());
    f << j.dump() << '\n';
}

TinyLm TinyLm::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read checkpoint: " + path.string());
    json j = json::parse(f);
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint version");
    ModelConfig cfg;
    cfg.vocab_size = j.at("model").at("vocab_size").get<std::size_t>();
    cfg.embed_dim = j.at("model").at("embed_dim").get<std::size_t>();
    cfg.window = j.at("model").at("window").get<std::size_t>();
    cfg.hidden = j.at("model").at("hidden").get<std::size_t>();
    TinyLm lm(cfg, 0, 0.0);
    const json& t = j.at("tensors");
    load_tensor(t.at("embed"), lm.params_, lm.off_embed(), {cfg.vocab_size, cfg.embed_dim}, "embed");
    load_tensor(t.at("w1"), lm.params_, lm.off_w1(), {cfg.hidden, cfg.window * cfg.embed_dim}, "w1");
    load_tensor(t.at("b1"), lm.params_, lm.off_b1(), {cfg.hidden}, "b1");
    load_tensor(t.at("w2"), lm.params_, lm.off_w2(), {cfg.vocab_size, cfg.hidden}, "w2");
    load_tensor(t.at("b2"), lm.params_, lm.off_b2(), {cfg.vocab_size}, "b2");
    return lm;
}

bool TinyLmPolicy::params_finite() const {
    for (double p : model_.params())
        if (!std::isfinite(p)) return false;
    return true;
}

}  // namespace rlpt::policy
