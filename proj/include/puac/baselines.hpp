#pragma once
// Binary PU baselines (unbiased PU and non-negative PU) trained on the
// positive bag versus the merged unlabeled + augmented pool, evaluated
// against the three-way test labels.

#include "puac/core_types.hpp"
#include "puac/eval.hpp"
#include "puac/models.hpp"
#include "puac/risk.hpp"

namespace puac {

struct BinaryPuConfig {
    double pi_plus = 0.5; // positive-class prior inside the merged pool
    SurrogateKind surrogate = SurrogateKind::Logistic;
    bool nn_clamp = false; // true selects the non-negative estimator
};

// Unbiased binary PU risk:
//   pi+ * E_p[phi(f)] + E_u[phi(-f)] - pi+ * E_p[phi(-f)].
// May be negative on finite samples.
RiskGrad upu_risk(const Scorer& model, const FeatureMatrix& pos, const FeatureMatrix& merged,
                  const BinaryPuConfig& cfg);

// Non-negative variant: the negative-part estimate is clamped at zero and
// the gradient follows the active branch.
RiskGrad nnpu_risk(const Scorer& model, const FeatureMatrix& pos, const FeatureMatrix& merged,
                   const BinaryPuConfig& cfg);

// Ground-truth positive prior of the merged pool, for synthetic runs where
// the generating priors are known.
double merged_positive_prior(const PriorMatrix& theta, std::size_t n_u, std::size_t n_a);

struct BaselineOutcome {
    Metrics metrics;
    double final_risk = 0.0;
    Scorer model;
};

// Trains a binary scorer on d_p versus d_u + d_a with the configured
// estimator, then scores 2-way predictions against the 3-way test labels
// (augmented-class test points are always errors). Epochs, batch size and
// optimizer come from the run config.
BaselineOutcome run_binary_baseline(const PuacDataset& data, const BinaryPuConfig& cfg,
                                    const RunConfig& run);

} // namespace puac
