#include <doctest.h>

#include <cmath>

#include "puac/risk.hpp"
#include "support.hpp"

using namespace puac;

namespace {

// Pooled latent-labeled view of a generated dataset (oracle side only).
LabeledSet pooled_labels(const PuacDataset& ds) {
    LabeledSet out;
    out.x.dim = ds.dim;
    for (const SourceBag s : kAllBags) {
        const Bag& bag = ds.bag(s);
        REQUIRE(bag.latent.size() == bag.size());
        for (std::size_t i = 0; i < bag.size(); ++i) {
            out.x.push_row(bag.x.row(i));
            out.y.push_back(bag.latent[i]);
        }
    }
    return out;
}

Scorer random_model(std::uint64_t seed, LossKind loss, ModelKind kind = ModelKind::Mlp) {
    Rng rng(seed);
    Scorer m = Scorer::make(kind, 2, 8, loss == LossKind::OvrSquared ? 3 : 1);
    m.init_params(rng);
    return m;
}

} // namespace

TEST_SUITE("risk") {

TEST_CASE("rewrite collapses to the supervised weights for pure bags") {
    const PriorMatrix theta = validate_priors({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
    const AggregatedPriors pi = aggregate_priors(theta, 100, 200, 300);
    const RewriteCoefficients c = rewrite_coefficients(theta, pi);
    CHECK(c.alpha_p == doctest::Approx(pi.p).epsilon(1e-15));
    CHECK(c.alpha_n == 0.0);
    CHECK(c.alpha_a == 0.0);
    CHECK(c.beta_p == 0.0);
    CHECK(c.beta_n == doctest::Approx(pi.n).epsilon(1e-15));
    CHECK(c.beta_a == 0.0);
    CHECK(c.gamma_p == 0.0);
    CHECK(c.gamma_n == 0.0);
    CHECK(c.gamma_a == doctest::Approx(pi.a).epsilon(1e-15));
}

TEST_CASE("pure augmented bag kills the cross corrections") {
    const PriorMatrix theta = validate_priors({{{1, 0, 0}, {0.5, 0.5, 0}, {0, 0, 1}}});
    const AggregatedPriors pi = aggregate_priors(theta, 100, 100, 100);
    const RewriteCoefficients c = rewrite_coefficients(theta, pi);
    CHECK(c.alpha_a == 0.0);
    CHECK(c.beta_a == 0.0);
    CHECK(c.gamma_a == doctest::Approx(pi.a / 1.0));
}

TEST_CASE("rewrite sign structure on the benchmark priors") {
    const PriorMatrix theta = test::benchmark_theta();
    const AggregatedPriors pi = aggregate_priors(theta, 2000, 2000, 2000);
    const RewriteCoefficients c = rewrite_coefficients(theta, pi);
    CHECK(c.alpha_p > 0.0);
    CHECK(c.alpha_n <= 0.0);
    CHECK(c.beta_n > 0.0);
    CHECK(c.beta_a <= 0.0);
    CHECK(c.gamma_a > 0.0);
    CHECK(c.beta_p == 0.0);
    CHECK(c.gamma_p == 0.0);
    CHECK(c.gamma_n == 0.0);
}

TEST_CASE("degenerate priors are rejected") {
    PriorMatrix theta = test::benchmark_theta();
    theta.theta[1] = {1.0, 0.0, 0.0};
    const AggregatedPriors pi{0.5, 0.3, 0.2};
    CHECK_THROWS_AS(rewrite_coefficients(theta, pi), DegeneratePrior);
    theta = test::benchmark_theta();
    theta.theta[2] = {0.5, 0.5, 0.0};
    CHECK_THROWS_AS(rewrite_coefficients(theta, pi), DegeneratePrior);
}

TEST_CASE("corrected loss on the augmented bag has a single term") {
    const PriorMatrix theta = test::benchmark_theta();
    const AggregatedPriors pi = aggregate_priors(theta, 1, 1, 1);
    const RewriteCoefficients c = rewrite_coefficients(theta, pi);
    const double f[3] = {0.4, -0.3, 1.1};
    const CorrectedLoss cl =
        corrected_loss(SourceBag::Aug, {f, 3}, c, LossKind::OvrSquared, SurrogateKind::Squared);
    const OvrLoss la = ovr_margin_loss({f, 3}, ClassLabel::A, SurrogateKind::Squared);
    CHECK(cl.value == doctest::Approx(c.gamma_a * la.value).epsilon(1e-15));
}

TEST_CASE("corrected loss composes the supervised pieces") {
    const PriorMatrix theta = validate_priors({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
    const AggregatedPriors pi = aggregate_priors(theta, 1, 1, 1);
    const RewriteCoefficients c = rewrite_coefficients(theta, pi);
    const double f[3] = {0.0, 0.0, 0.0};
    const CorrectedLoss cl =
        corrected_loss(SourceBag::Unl, {f, 3}, c, LossKind::OvrSquared, SurrogateKind::Squared);
    CHECK(cl.value == doctest::Approx(pi.n * 3.0)); // phi(0) three ways
    // ordinal, exact hit on the positive bag
    const double fo[1] = {1.0};
    const CorrectedLoss co =
        corrected_loss(SourceBag::Pos, {fo, 1}, c, LossKind::OrdinalAbs, SurrogateKind::Squared);
    CHECK(co.value == doctest::Approx(0.0));
}

TEST_CASE("corrected loss rejects mismatched score dimension") {
    const RewriteCoefficients c{};
    const double f[3] = {0, 0, 0};
    CHECK_THROWS_AS(
        corrected_loss(SourceBag::Pos, {f, 3}, c, LossKind::OrdinalAbs, SurrogateKind::Squared),
        DimensionMismatch);
    CHECK_THROWS_AS(
        corrected_loss(SourceBag::Pos, {f, 1}, c, LossKind::OvrSquared, SurrogateKind::Squared),
        DimensionMismatch);
}

TEST_CASE("constant zero model risk equals 3 phi(0) times the coefficient sum") {
    const GenConfig g = test::benchmark_gen(200, 42, 0);
    const PuacDataset data = sample_puac(g);
    const AggregatedPriors pi = aggregate_priors(g.theta, g.n_p, g.n_u, g.n_a);
    const RewriteCoefficients c = rewrite_coefficients(g.theta, pi);
    const Scorer zero = Scorer::make_linear(2, 3); // all-zero params
    const double risk =
        empirical_puac_risk_value(zero, data, c, LossKind::OvrSquared, SurrogateKind::Squared);
    const double coef_sum = c.alpha_p + c.alpha_n + c.alpha_a + c.beta_p + c.beta_n +
                            c.beta_a + c.gamma_p + c.gamma_n + c.gamma_a;
    CHECK(risk == doctest::Approx(3.0 * coef_sum).epsilon(1e-12));
}

TEST_CASE("supervised reduction is exact") {
    // Pure bags: the rewritten risk must equal the pooled supervised risk to
    // within accumulation noise.
    GenConfig g = test::benchmark_gen(500, 7, 0);
    g.theta = validate_priors({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
    const PuacDataset data = sample_puac(g);
    const AggregatedPriors pi = aggregate_priors(g.theta, g.n_p, g.n_u, g.n_a);
    const RewriteCoefficients c = rewrite_coefficients(g.theta, pi);
    const LabeledSet pooled = pooled_labels(data);
    for (int trial = 0; trial < 20; ++trial) {
        for (const LossKind loss : {LossKind::OvrSquared, LossKind::OrdinalAbs}) {
            const Scorer m = random_model(900 + trial, loss);
            const double puac =
                empirical_puac_risk_value(m, data, c, loss, SurrogateKind::Squared);
            const double sup = supervised_risk(m, pooled, pi, loss, SurrogateKind::Squared);
            CHECK(std::abs(puac - sup) <= 1e-12);
        }
    }
}

TEST_CASE("risk is linear in the coefficients") {
    const GenConfig g = test::benchmark_gen(100, 3, 0);
    const PuacDataset data = sample_puac(g);
    const AggregatedPriors pi = aggregate_priors(g.theta, g.n_p, g.n_u, g.n_a);
    const RewriteCoefficients c = rewrite_coefficients(g.theta, pi);
    RewriteCoefficients scaled = c;
    const double t = 2.75;
    scaled.alpha_p *= t;
    scaled.alpha_n *= t;
    scaled.alpha_a *= t;
    scaled.beta_n *= t;
    scaled.beta_a *= t;
    scaled.gamma_a *= t;
    const Scorer m = random_model(5, LossKind::OvrSquared);
    const double base =
        empirical_puac_risk_value(m, data, c, LossKind::OvrSquared, SurrogateKind::Squared);
    const double big =
        empirical_puac_risk_value(m, data, scaled, LossKind::OvrSquared, SurrogateKind::Squared);
    CHECK(big == doctest::Approx(t * base).epsilon(1e-12));
}

TEST_CASE("puac risk gradient matches finite differences") {
    const GenConfig g = test::benchmark_gen(60, 11, 0);
    const PuacDataset data = sample_puac(g);
    const AggregatedPriors pi = aggregate_priors(g.theta, g.n_p, g.n_u, g.n_a);
    const RewriteCoefficients c = rewrite_coefficients(g.theta, pi);
    for (int trial = 0; trial < 6; ++trial) {
        const LossKind loss = trial % 2 ? LossKind::OrdinalAbs : LossKind::OvrSquared;
        const ModelKind kind = trial < 3 ? ModelKind::Linear : ModelKind::Mlp;
        const Scorer m = random_model(1000 + trial, loss, kind);
        const RiskGrad rg = empirical_puac_risk(m, data, c, loss, SurrogateKind::Squared);
        auto f = [&](const std::vector<double>& params) {
            Scorer probe = m;
            probe.params() = params;
            return empirical_puac_risk_value(probe, data, c, loss, SurrogateKind::Squared);
        };
        const std::vector<double> fd = test::numeric_gradient(f, m.params());
        CHECK(test::max_rel_err(rg.grad, fd) <= 1e-5);
    }
}

TEST_CASE("unbiasedness oracle: resampled puac risk matches the supervised risk") {
    // Monte Carlo over fresh bags; the mean rewritten risk must sit within
    // three standard errors of the supervised risk on a large labeled set.
    const GenConfig g = test::benchmark_gen(400, 1234, 0);
    const AggregatedPriors pi = aggregate_priors(g.theta, g.n_p, g.n_u, g.n_a);
    const RewriteCoefficients c = rewrite_coefficients(g.theta, pi);

    GenConfig oracle_cfg = g;
    oracle_cfg.seed = derive_seed(g.seed, 0xBEEF);
    oracle_cfg.n_test = 200000;
    oracle_cfg.test_priors = pi;
    const PuacDataset oracle = sample_puac(oracle_cfg);

    for (int model_i = 0; model_i < 2; ++model_i) {
        const Scorer m = random_model(50 + model_i, LossKind::OvrSquared);
        const double sup =
            supervised_risk(m, *oracle.test, pi, LossKind::OvrSquared, SurrogateKind::Squared);
        const int reps = 80;
        double sum = 0.0, sumsq = 0.0;
        for (int r = 0; r < reps; ++r) {
            GenConfig rg = g;
            rg.seed = derive_seed(g.seed, 100 + r);
            const PuacDataset ds = sample_puac(rg);
            const double v =
                empirical_puac_risk_value(m, ds, c, LossKind::OvrSquared, SurrogateKind::Squared);
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / reps;
        const double var = (sumsq - sum * sum / reps) / (reps - 1);
        const double se = std::sqrt(var / reps);
        CHECK(std::abs(mean - sup) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("batch risk over all indices equals the full risk") {
    const GenConfig g = test::benchmark_gen(80, 31, 0);
    const PuacDataset data = sample_puac(g);
    const AggregatedPriors pi = aggregate_priors(g.theta, g.n_p, g.n_u, g.n_a);
    const RewriteCoefficients c = rewrite_coefficients(g.theta, pi);
    const Scorer m = random_model(77, LossKind::OvrSquared);
    std::vector<std::uint32_t> all(80);
    for (std::uint32_t i = 0; i < 80; ++i)
        all[i] = i;
    const RiskGrad full = empirical_puac_risk(m, data, c, LossKind::OvrSquared,
                                              SurrogateKind::Squared);
    const RiskGrad batch = empirical_puac_risk_batch(m, data, c, LossKind::OvrSquared,
                                                     SurrogateKind::Squared, all, all, all);
    CHECK(full.value == batch.value);
    CHECK(full.grad == batch.grad);
}

TEST_CASE("random minibatches are unbiased for the full-bag risk") {
    const GenConfig g = test::benchmark_gen(200, 37, 0);
    const PuacDataset data = sample_puac(g);
    const AggregatedPriors pi = aggregate_priors(g.theta, g.n_p, g.n_u, g.n_a);
    const RewriteCoefficients c = rewrite_coefficients(g.theta, pi);
    const Scorer m = random_model(55, LossKind::OvrSquared);
    const double full =
        empirical_puac_risk_value(m, data, c, LossKind::OvrSquared, SurrogateKind::Squared);
    Rng rng(91);
    const int reps = 400;
    const std::size_t b = 32;
    std::vector<double> vals;
    for (int r = 0; r < reps; ++r) {
        std::vector<std::uint32_t> ip(b), iu(b), ia(b);
        for (std::size_t i = 0; i < b; ++i) {
            ip[i] = static_cast<std::uint32_t>(rng.below(200));
            iu[i] = static_cast<std::uint32_t>(rng.below(200));
            ia[i] = static_cast<std::uint32_t>(rng.below(200));
        }
        vals.push_back(empirical_puac_risk_batch(m, data, c, LossKind::OvrSquared,
                                                 SurrogateKind::Squared, ip, iu, ia)
                           .value);
    }
    double mean = 0.0;
    for (double v : vals)
        mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : vals)
        var += (v - mean) * (v - mean);
    var /= reps - 1;
    CHECK(std::abs(mean - full) <= 3.0 * std::sqrt(var / reps));
}

TEST_CASE("empty bags are rejected") {
    const GenConfig g = test::benchmark_gen(10, 3, 0);
    PuacDataset data = sample_puac(g);
    data.unl.x.rows = 0;
    data.unl.x.data.clear();
    const RewriteCoefficients c{};
    const Scorer m = Scorer::make_linear(2, 3);
    CHECK_THROWS_AS(
        empirical_puac_risk_value(m, data, c, LossKind::OvrSquared, SurrogateKind::Squared),
        EmptyBag);
}

TEST_CASE("supervised risk needs every class") {
    LabeledSet s;
    s.x.dim = 1;
    const double r1[1] = {0.2};
    s.x.push_row(r1);
    s.y.push_back(ClassLabel::P);
    const Scorer m = Scorer::make_linear(1, 3);
    CHECK_THROWS_AS(
        supervised_risk(m, s, {1, 0, 0}, LossKind::OvrSquared, SurrogateKind::Squared),
        MissingClass);
}

TEST_CASE("pure positive priors use only the positive class term") {
    const GenConfig g = test::benchmark_gen(40, 29, 0);
    const PuacDataset ds = sample_puac(g);
    LabeledSet pooled;
    pooled.x.dim = ds.dim;
    for (const SourceBag s : kAllBags) {
        const Bag& bag = ds.bag(s);
        for (std::size_t i = 0; i < bag.size(); ++i) {
            pooled.x.push_row(bag.x.row(i));
            pooled.y.push_back(bag.latent[i]);
        }
    }
    const Scorer m = random_model(61, LossKind::OvrSquared);
    const double risk =
        supervised_risk(m, pooled, {1.0, 0.0, 0.0}, LossKind::OvrSquared, SurrogateKind::Squared);
    double p_only = 0.0;
    std::size_t n_p = 0;
    Scorer::Workspace ws;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        if (pooled.y[i] != ClassLabel::P)
            continue;
        m.forward(pooled.x.row(i), ws);
        p_only += ovr_margin_loss(ws.scores, ClassLabel::P, SurrogateKind::Squared).value;
        ++n_p;
    }
    CHECK(risk == doctest::Approx(p_only / static_cast<double>(n_p)).epsilon(1e-12));
}

TEST_CASE("single sample per class matches the hand value") {
    LabeledSet s;
    s.x.dim = 1;
    for (const ClassLabel c : kAllLabels) {
        const double row[1] = {0.0};
        s.x.push_row(row);
        s.y.push_back(c);
    }
    const Scorer zero = Scorer::make_linear(1, 3);
    const double risk = supervised_risk(zero, s, {1.0 / 3, 1.0 / 3, 1.0 / 3},
                                        LossKind::OvrSquared, SurrogateKind::Squared);
    CHECK(risk == doctest::Approx(3.0));
}

} // TEST_SUITE
