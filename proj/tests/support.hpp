#pragma once
// Shared fixtures for the test suites: the standard synthetic benchmark,
// finite-difference gradient checks, and small helpers.

#include <cmath>
#include <functional>
#include <vector>

#include "puac/core_types.hpp"
#include "puac/datagen.hpp"

namespace puac::test {

// The benchmark every acceptance criterion runs on: moderate class overlap
// so the Bayes accuracy sits strictly below 1 and differences are visible.
inline GaussianClassSpec benchmark_spec() {
    GaussianClassSpec s;
    s.dim = 2;
    s.mean[0] = {0.0, 0.0};
    s.mean[1] = {3.0, 0.0};
    s.mean[2] = {0.0, 3.0};
    s.var[0] = s.var[1] = s.var[2] = {1.0, 1.0};
    return s;
}

inline PriorMatrix benchmark_theta() {
    return validate_priors({{{1.0, 0.0, 0.0}, {0.5, 0.5, 0.0}, {0.2, 0.3, 0.5}}});
}

inline GenConfig benchmark_gen(std::size_t n_per_bag, std::uint64_t seed,
                               std::size_t n_test = 6000) {
    GenConfig g;
    g.spec = benchmark_spec();
    g.theta = benchmark_theta();
    g.n_p = g.n_u = g.n_a = n_per_bag;
    g.n_test = n_test;
    g.test_priors = aggregate_priors(g.theta, g.n_p, g.n_u, g.n_a);
    g.seed = seed;
    return g;
}

// Well-separated variant (means >= 4 sigma apart) for prior estimation.
inline GenConfig separated_gen(std::size_t n_per_bag, std::uint64_t seed,
                               std::size_t n_test = 0) {
    GenConfig g = benchmark_gen(n_per_bag, seed, n_test);
    g.spec.mean[1] = {4.0, 0.0};
    g.spec.mean[2] = {0.0, 4.0};
    return g;
}

// Central finite differences of a scalar function of a parameter vector.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> params, double h = 1e-6) {
    std::vector<double> g(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = params[i];
        params[i] = orig + h;
        const double fp = f(params);
        params[i] = orig - h;
        const double fm = f(params);
        params[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Componentwise agreement between an analytic and a numeric gradient.
inline double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-3});
        worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
    }
    return worst;
}

} // namespace puac::test
