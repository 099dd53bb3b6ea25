#include <doctest.h>

#include <cmath>

#include "puac/baselines.hpp"
#include "support.hpp"

using namespace puac;

namespace {

Scorer random_binary(std::uint64_t seed) {
    Rng rng(seed);
    Scorer m = Scorer::make_mlp(2, 6, 1);
    m.init_params(rng);
    return m;
}

} // namespace

TEST_SUITE("baselines") {

TEST_CASE("vanishing positive prior reduces upu to the unlabeled term") {
    const GenConfig g = test::benchmark_gen(100, 4, 0);
    const PuacDataset ds = sample_puac(g);
    const Scorer m = random_binary(1);
    BinaryPuConfig cfg;
    cfg.surrogate = SurrogateKind::Logistic;
    cfg.pi_plus = 1e-12;
    const double risk = upu_risk(m, ds.pos.x, ds.unl.x, cfg).value;
    Scorer::Workspace ws;
    double unl_only = 0.0;
    for (std::size_t i = 0; i < ds.unl.size(); ++i) {
        m.forward(ds.unl.x.row(i), ws);
        unl_only += phi(SurrogateKind::Logistic, -ws.scores[0]).value;
    }
    unl_only /= static_cast<double>(ds.unl.size());
    CHECK(risk == doctest::Approx(unl_only).epsilon(1e-9));
}

TEST_CASE("upu is unbiased for the supervised binary risk on a pure-positive pool") {
    // Merged pool drawn from the positive density with pi+ = 1 - eps: the
    // estimator's expectation is E_p[phi(f)] (the negative terms cancel).
    GenConfig g = test::benchmark_gen(2000, 6, 0);
    const Scorer m = random_binary(2);
    BinaryPuConfig cfg;
    cfg.surrogate = SurrogateKind::Logistic;
    cfg.pi_plus = 1.0 - 1e-9;
    double mean = 0.0;
    const int reps = 40;
    std::vector<double> vals;
    for (int r = 0; r < reps; ++r) {
        GenConfig gr = g;
        gr.seed = derive_seed(6, r);
        gr.theta.theta[1] = {1.0, 0.0, 0.0}; // unlabeled pool is pure positive
        const PuacDataset ds = sample_puac(gr);
        vals.push_back(upu_risk(m, ds.pos.x, ds.unl.x, cfg).value);
        mean += vals.back();
    }
    mean /= reps;
    double var = 0.0;
    for (double v : vals)
        var += (v - mean) * (v - mean);
    var /= reps - 1;
    // Large-sample positive-bag-only risk as the oracle.
    GenConfig big = g;
    big.seed = derive_seed(6, 999);
    big.n_p = 100000;
    const PuacDataset pool = sample_puac(big);
    Scorer::Workspace ws;
    double oracle = 0.0;
    for (std::size_t i = 0; i < pool.pos.size(); ++i) {
        m.forward(pool.pos.x.row(i), ws);
        oracle += phi(SurrogateKind::Logistic, ws.scores[0]).value;
    }
    oracle /= static_cast<double>(pool.pos.size());
    CHECK(std::abs(mean - oracle) <= 3.0 * std::sqrt(var / reps) + 1e-3);
}

TEST_CASE("upu and nnpu gradients match finite differences") {
    const GenConfig g = test::benchmark_gen(50, 8, 0);
    const PuacDataset ds = sample_puac(g);
    FeatureMatrix merged = ds.unl.x;
    for (std::size_t i = 0; i < ds.aug.size(); ++i)
        merged.push_row(ds.aug.x.row(i));
    for (int trial = 0; trial < 6; ++trial) {
        const Scorer m = random_binary(100 + trial);
        BinaryPuConfig cfg;
        cfg.surrogate = trial % 2 ? SurrogateKind::Sigmoid : SurrogateKind::Logistic;
        cfg.pi_plus = 0.4;
        cfg.nn_clamp = trial >= 3;
        const RiskGrad rg = cfg.nn_clamp ? nnpu_risk(m, ds.pos.x, merged, cfg)
                                         : upu_risk(m, ds.pos.x, merged, cfg);
        auto f = [&](const std::vector<double>& params) {
            Scorer probe = m;
            probe.params() = params;
            return (cfg.nn_clamp ? nnpu_risk(probe, ds.pos.x, merged, cfg)
                                 : upu_risk(probe, ds.pos.x, merged, cfg))
                .value;
        };
        const std::vector<double> fd = test::numeric_gradient(f, m.params());
        CHECK(test::max_rel_err(rg.grad, fd) <= 1e-5);
    }
}

TEST_CASE("nnpu equals upu when the clamp is inactive and dominates otherwise") {
    const GenConfig g = test::benchmark_gen(300, 12, 0);
    const PuacDataset ds = sample_puac(g);
    Rng rng(9);
    int active_seen = 0, inactive_seen = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const Scorer m = random_binary(500 + trial);
        BinaryPuConfig cfg;
        cfg.surrogate = SurrogateKind::Sigmoid;
        cfg.pi_plus = rng.uniform(0.3, 0.95);
        const double u = upu_risk(m, ds.pos.x, ds.unl.x, cfg).value;
        const double n = nnpu_risk(m, ds.pos.x, ds.unl.x, cfg).value;
        Scorer::Workspace ws;
        double pos_term = 0.0;
        for (std::size_t i = 0; i < ds.pos.size(); ++i) {
            m.forward(ds.pos.x.row(i), ws);
            pos_term += phi(cfg.surrogate, ws.scores[0]).value;
        }
        pos_term = cfg.pi_plus * pos_term / static_cast<double>(ds.pos.size());
        CHECK(n >= pos_term - 1e-12);
        if (u >= pos_term - 1e-12) {
            CHECK(n == doctest::Approx(u).epsilon(1e-12));
            ++inactive_seen;
        } else {
            CHECK(n == doctest::Approx(pos_term).epsilon(1e-12));
            CHECK(n > u);
            ++active_seen;
        }
    }
    CHECK(inactive_seen > 0);
}

TEST_CASE("binary baseline never identifies the augmented class") {
    const GenConfig g = test::benchmark_gen(400, 15, 1200);
    const PuacDataset ds = sample_puac(g);
    BinaryPuConfig cfg;
    cfg.pi_plus = merged_positive_prior(g.theta, g.n_u, g.n_a);
    cfg.surrogate = SurrogateKind::Logistic;
    RunConfig rc;
    rc.seed = 21;
    rc.epochs = 30;
    rc.batch_size = 128;
    const BaselineOutcome out = run_binary_baseline(ds, cfg, rc);
    CHECK(out.metrics.ident_a == 0.0);
    // A third of the test mass is out of reach, structurally.
    CHECK(out.metrics.overall <= 1.0 - static_cast<double>(out.metrics.class_counts[2]) /
                                           static_cast<double>(out.metrics.total) + 1e-12);
}

TEST_CASE("merged pool prior from ground truth") {
    const PriorMatrix theta = test::benchmark_theta();
    CHECK(merged_positive_prior(theta, 1000, 1000) == doctest::Approx(0.35));
    CHECK(merged_positive_prior(theta, 2000, 0) == doctest::Approx(0.5));
}

} // TEST_SUITE
