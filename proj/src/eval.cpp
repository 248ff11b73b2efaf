#include "rlpt/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "rlpt/parallel.hpp"
#include "rlpt/text.hpp"

namespace rlpt::eval {

double pass_at_k(std::size_t n, std::size_t c, std::size_t k) {
    if (c > n) throw std::invalid_argument("pass_at_k: c > n");
    if (k < 1 || k > n) throw std::invalid_argument("pass_at_k: k out of [1, n]");
    if (c == 0) return 0.0;
    if (k > n - c) return 1.0;  // every k-subset hits a correct sample
    // C(n-c,k)/C(n,k) = prod_{i=0..k-1} (n-c-i)/(n-i)
    double ratio = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        ratio *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    return 1.0 - ratio;
}

std::vector<EvalRecord> run_eval(const policy::TinyLmPolicy& policy,
                                 const std::vector<EvalTask>& tasks,
                                 const EvalConfig& cfg) {
    for (std::size_t k : cfg.ks)
        if (k > cfg.n) throw std::invalid_argument("run_eval: k exceeds sample count n");

    std::vector<EvalRecord> records(tasks.size());
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t t) {
        const EvalTask& task = tasks[t];
        EvalRecord rec;
        rec.prompt_id = task.prompt_id;
        rec.n = cfg.n;
        const policy::TokenSeq prompt_ids = policy.vocab().encode(task.prompt);
        for (std::size_t s = 0; s < cfg.n; ++s) {
            policy::SampleOptions opts;
            opts.temperature = cfg.temperature;
            opts.top_p = cfg.top_p;
            opts.max_len = cfg.max_len;
            opts.seed = text::derive_seed(cfg.seed, t, s);
            const auto sample = policy.sample(prompt_ids, opts);
            const std::string decoded = policy.vocab().decode(sample.completion);
            rec.c += task.score(decoded) ? 1 : 0;
        }
        for (std::size_t k : cfg.ks)
            rec.pass_at.emplace_back(k, pass_at_k(rec.n, rec.c, k));
        records[t] = std::move(rec);
    });
    return records;
}

std::vector<std::pair<std::size_t, double>> macro_average(
    const std::vector<EvalRecord>& records, const std::vector<std::size_t>& ks) {
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t k : ks) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& rec : records)
            for (const auto& [rk, v] : rec.pass_at)
                if (rk == k) {
                    sum += v;
                    ++count;
                }
        out.emplace_back(k, count == 0 ? 0.0 : sum / static_cast<double>(count));
    }
    return out;
}

ScalingFit fit_power_law(const std::vector<std::pair<double, double>>& points,
                         double floor) {
    if (points.size() < 3)
        throw std::invalid_argument("fit_power_law: need at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(points.size());
    for (const auto& [x, y0] : points) {
        const double y = y0 - floor;
        if (x <= 0.0 || y <= 0.0)
            throw std::invalid_argument("fit_power_law: non-positive x or y");
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    ScalingFit fit;
    double slope = 0.0, intercept = 0.0;
    if (denom == 0.0) {
        // all x equal: flat fit through the mean
        intercept = sy / n;
    } else {
        slope = (n * sxy - sx * sy) / denom;
        intercept = (sy - slope * sx) / n;
    }
    fit.b = -slope;
    fit.a = std::exp(intercept);
    double ss = 0.0;
    for (const auto& [x, y0] : points) {
        const double r = std::log(y0 - floor) - (intercept + slope * std::log(x));
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / n);
    return fit;
}

}  // namespace rlpt::eval
