#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rlpt/policy.hpp"

namespace rlpt::eval {

// Unbiased estimator 1 - C(n-c,k)/C(n,k), evaluated as a running product so
// n up to ~10^6 stays exact in double. Throws when c > n, k > n or k < 1.
double pass_at_k(std::size_t n, std::size_t c, std::size_t k);

struct EvalRecord {
    std::string prompt_id;
    std::size_t n = 0;
    std::size_t c = 0;
    std::vector<std::pair<std::size_t, double>> pass_at;  // (k, value)
};

struct EvalConfig {
    std::size_t n = 64;
    double temperature = 0.6;
    double top_p = 0.95;
    std::vector<std::size_t> ks = {1, 8};
    std::size_t max_len = 128;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct EvalTask {
    std::string prompt_id;
    std::string prompt;
    std::function<int(const std::string& completion_text)> score;
};

std::vector<EvalRecord> run_eval(const policy::TinyLmPolicy& policy,
                                 const std::vector<EvalTask>& tasks,
                                 const EvalConfig& cfg);

// Macro-average of pass@k over records, per k.
std::vector<std::pair<std::size_t, double>> macro_average(
    const std::vector<EvalRecord>& records, const std::vector<std::size_t>& ks);

struct ScalingFit {
    double a = 0.0;  // error = a * x^(-b)
    double b = 0.0;
    double residual_rms = 0.0;  // in log space
};

// Closed-form least squares on (log x, log y). An optional floor is
// subtracted from y before fitting. Throws on fewer than 3 points or any
// non-positive x or (y - floor).
ScalingFit fit_power_law(const std::vector<std::pair<double, double>>& points,
                         double floor = 0.0);

}  // namespace rlpt::eval
