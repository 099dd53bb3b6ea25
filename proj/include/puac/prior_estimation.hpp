#pragma once
// Class prior estimation from the bags via kernel mean embeddings and
// mixture proportion estimation. Distances between (possibly signed)
// empirical embeddings are computed through Gram sums; no density
// estimation anywhere.

#include <cstdint>
#include <string>
#include <vector>

#include "puac/core_types.hpp"

namespace puac {

struct KernelConfig {
    // Gaussian RBF bandwidth; 0 selects the median pairwise distance
    // heuristic over a capped subsample.
    double bandwidth = 0.0;
    std::size_t bandwidth_cap = 1000;
    // Subsample cap for Gram computations (hull atoms and embedding means).
    std::size_t gram_cap = 800;
    // Mixture proportion curve: kappa grid and the slope threshold applied
    // in lambda = 1/(1-kappa) parametrization.
    double kappa_step = 0.01;
    double kappa_max = 0.99;
    double slope_threshold = 0.1;
    // Simplex QP solver budget.
    std::size_t max_qp_iters = 20000;
    double qp_gap_tol = 1e-6;
    // Estimated theta_u^n below this is rejected as degenerate.
    double degenerate_tol = 0.05;
    std::uint64_t seed = 0x5EED;
};

// A weighted point set standing for a signed mixture of empirical
// embeddings. Weights may be negative; inner products reduce to Gram sums.
struct Embedding {
    FeatureMatrix points;
    std::vector<double> weights;

    static Embedding uniform(const FeatureMatrix& pts);
};

// Resolved RBF bandwidth for a group of point sets (median heuristic when
// the config leaves it at 0).
double resolve_bandwidth(const std::vector<const FeatureMatrix*>& sets, const KernelConfig& k);

// <mu_a, mu_b> in the RKHS via the signed Gram sum.
double embedding_inner(const Embedding& a, const Embedding& b, double bandwidth);

// || mu_a - mu_b ||, clamped at 0 against floating-point noise.
double rkhs_distance(const Embedding& a, const Embedding& b, const KernelConfig& k);

struct MpeResult {
    double kappa = 0.0;
    double bandwidth = 0.0;
    std::vector<double> curve_kappa;
    std::vector<double> curve_distance;
};

// Estimates the maximal kappa with F = kappa H + (1-kappa) G: evaluates the
// RKHS distance between (mu_F - kappa mu_H)/(1-kappa) and the convex hull of
// the mixture sample embeddings on the kappa grid, then applies the slope
// threshold rule to the curve.
MpeResult estimate_mixture_proportion(const FeatureMatrix& mix, const Embedding& comp,
                                      const KernelConfig& k);
double estimate_mixture_proportion_value(const FeatureMatrix& mix, const FeatureMatrix& comp,
                                         const KernelConfig& k);

struct PriorEstimate {
    PriorMatrix theta;
    // Raw estimates before clamping/renormalization.
    double raw_theta_u_p = 0.0;
    double raw_theta_a_p = 0.0;
    double raw_theta_a_n = 0.0;
    MpeResult curve_u_p, curve_a_p, curve_a_n;
};

// Estimates the three free priors: theta_u^p and theta_a^p directly against
// the positive bag, theta_a^n against the pseudo-negative signed embedding
// (mu_u - theta_u^p mu_p)/theta_u^n. Throws DegeneratePrior when the
// estimated theta_u^n is (near) zero.
PriorEstimate estimate_puac_priors(const PuacDataset& data, const KernelConfig& k);

std::string prior_estimate_json(const PriorEstimate& est);

} // namespace puac
