#include <doctest.h>

#include <cmath>

#include "puac/prior_estimation.hpp"
#include "support.hpp"

using namespace puac;

namespace {

FeatureMatrix gaussian_cloud(Rng& rng, std::size_t n, double mx, double my) {
    FeatureMatrix m;
    m.dim = 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double row[2] = {mx + rng.normal(), my + rng.normal()};
        m.push_row(row);
    }
    return m;
}

FeatureMatrix gaussian_mix_1d(Rng& rng, std::size_t n, double kappa, double comp_mu,
                              double rest_mu) {
    FeatureMatrix m;
    m.dim = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double row[1] = {(rng.uniform() < kappa ? comp_mu : rest_mu) + rng.normal()};
        m.push_row(row);
    }
    return m;
}

KernelConfig fast_kernel(std::uint64_t seed) {
    KernelConfig k;
    k.gram_cap = 400;
    k.seed = seed;
    return k;
}

} // namespace

TEST_SUITE("prior_estimation") {

TEST_CASE("rkhs distance of a set to itself is zero") {
    Rng rng(3);
    const FeatureMatrix pts = gaussian_cloud(rng, 200, 0, 0);
    const Embedding e = Embedding::uniform(pts);
    KernelConfig k;
    CHECK(rkhs_distance(e, e, k) == 0.0);
}

TEST_CASE("singleton distance has the closed form") {
    FeatureMatrix a, b;
    a.dim = b.dim = 2;
    const double ra[2] = {0.0, 0.0}, rb[2] = {1.5, -0.5};
    a.push_row(ra);
    b.push_row(rb);
    KernelConfig k;
    k.bandwidth = 0.8;
    const double sq = 1.5 * 1.5 + 0.5 * 0.5;
    const double expect = std::sqrt(2.0 - 2.0 * std::exp(-sq / (2.0 * 0.8 * 0.8)));
    CHECK(rkhs_distance(Embedding::uniform(a), Embedding::uniform(b), k) ==
          doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("rkhs distance is symmetric for signed mixtures") {
    Rng rng(9);
    const FeatureMatrix pa = gaussian_cloud(rng, 80, 0, 0);
    const FeatureMatrix pb = gaussian_cloud(rng, 60, 2, 1);
    Embedding a = Embedding::uniform(pa);
    Embedding b = Embedding::uniform(pb);
    for (std::size_t i = 0; i < a.weights.size(); ++i)
        a.weights[i] *= (i % 3 == 0) ? -0.5 : 1.3;
    KernelConfig k;
    k.bandwidth = 1.1;
    CHECK(rkhs_distance(a, b, k) == doctest::Approx(rkhs_distance(b, a, k)).epsilon(1e-12));
}

TEST_CASE("empty sets are rejected") {
    FeatureMatrix empty;
    empty.dim = 2;
    Rng rng(1);
    const FeatureMatrix pts = gaussian_cloud(rng, 10, 0, 0);
    KernelConfig k;
    k.bandwidth = 1.0;
    CHECK_THROWS_AS(
        rkhs_distance(Embedding::uniform(empty), Embedding::uniform(pts), k),
        EmptySampleSet);
    CHECK_THROWS_AS(estimate_mixture_proportion(empty, Embedding::uniform(pts), k),
                    EmptySampleSet);
}

TEST_CASE("mixture drawn from the component itself estimates near one") {
    Rng rng(11);
    const FeatureMatrix comp = gaussian_cloud(rng, 2000, 0, 0);
    const FeatureMatrix mix = gaussian_cloud(rng, 2000, 0, 0);
    const double kappa =
        estimate_mixture_proportion_value(mix, comp, fast_kernel(5));
    CHECK(kappa >= 0.9);
}

TEST_CASE("orthogonal component estimates near zero") {
    Rng rng(13);
    const FeatureMatrix comp = gaussian_cloud(rng, 2000, 10, 0);
    const FeatureMatrix mix = gaussian_cloud(rng, 2000, 0, 0);
    const double kappa =
        estimate_mixture_proportion_value(mix, comp, fast_kernel(6));
    CHECK(kappa <= 0.1);
}

TEST_CASE("one-dimensional mixture at kappa 0.3") {
    for (const std::uint64_t seed : {21ull, 22ull, 23ull}) {
        Rng rng(seed);
        const FeatureMatrix comp = [&] {
            FeatureMatrix m;
            m.dim = 1;
            for (int i = 0; i < 4000; ++i) {
                const double row[1] = {4.0 + rng.normal()};
                m.push_row(row);
            }
            return m;
        }();
        const FeatureMatrix mix = gaussian_mix_1d(rng, 4000, 0.3, 4.0, 0.0);
        const double kappa =
            estimate_mixture_proportion_value(mix, comp, fast_kernel(seed));
        CHECK(kappa >= 0.25);
        CHECK(kappa <= 0.35);
    }
}

TEST_CASE("kappa estimates respond monotonically to the true proportion") {
    Rng rng(99);
    double prev = -1.0;
    for (const double truth : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        Rng local = rng.split(static_cast<std::uint64_t>(truth * 100));
        FeatureMatrix comp;
        comp.dim = 1;
        for (int i = 0; i < 2000; ++i) {
            const double row[1] = {4.0 + local.normal()};
            comp.push_row(row);
        }
        const FeatureMatrix mix = gaussian_mix_1d(local, 2000, truth, 4.0, 0.0);
        const double kappa =
            estimate_mixture_proportion_value(mix, comp, fast_kernel(7));
        CHECK(kappa >= prev - 0.03);
        CHECK(kappa >= 0.0);
        CHECK(kappa <= 1.0);
        prev = kappa;
    }
}

TEST_CASE("full prior estimation on well-separated bags") {
    const GenConfig g = test::separated_gen(2500, 404);
    const PuacDataset ds = sample_puac(g);
    const PriorEstimate est = estimate_puac_priors(ds, fast_kernel(8));
    CHECK(std::abs(est.theta.at(SourceBag::Unl, ClassLabel::P) - 0.5) <= 0.06);
    CHECK(std::abs(est.theta.at(SourceBag::Aug, ClassLabel::P) - 0.2) <= 0.06);
    CHECK(std::abs(est.theta.at(SourceBag::Aug, ClassLabel::N) - 0.3) <= 0.06);
    CHECK(std::abs(est.theta.at(SourceBag::Aug, ClassLabel::A) - 0.5) <= 0.1);
    // Row constraints hold by construction.
    const PriorMatrix again = validate_priors(est.theta);
    for (int s = 0; s < 3; ++s)
        for (int c = 0; c < 3; ++c)
            CHECK(again.theta[s][c] == est.theta.theta[s][c]);
}

TEST_CASE("pure augmented bag estimates tiny p and n fractions") {
    GenConfig g = test::separated_gen(2000, 71);
    g.theta.theta[2] = {0.0, 0.0, 1.0};
    const PuacDataset ds = sample_puac(g);
    const PriorEstimate est = estimate_puac_priors(ds, fast_kernel(9));
    CHECK(est.theta.at(SourceBag::Aug, ClassLabel::P) <= 0.1);
    CHECK(est.theta.at(SourceBag::Aug, ClassLabel::N) <= 0.1);
}

TEST_CASE("a purely positive unlabeled bag is degenerate downstream") {
    GenConfig g = test::separated_gen(1500, 88);
    g.theta.theta[1] = {1.0, 0.0, 0.0};
    const PuacDataset ds = sample_puac(g);
    CHECK_THROWS_AS(estimate_puac_priors(ds, fast_kernel(10)), DegeneratePrior);
}

} // TEST_SUITE
