#pragma once
// The risk rewrite: coefficients that express the fully supervised
// three-class risk as a signed combination of expectations over the three
// observable bag distributions, the corrected per-bag losses built from
// them, the empirical PUAC risk with its exact gradient, and the supervised
// oracle risk.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "puac/core_types.hpp"
#include "puac/losses.hpp"
#include "puac/models.hpp"

namespace puac {

// The nine rewrite constants. alpha_* weight the positive bag, beta_* the
// unlabeled bag, gamma_* the augmented bag; the second letter names the
// class whose loss the constant multiplies. beta_p, gamma_p and gamma_n are
// identically zero; alpha_n and beta_a are nonpositive, which is what makes
// the empirical estimate signed.
struct RewriteCoefficients {
    double alpha_p = 0.0, alpha_n = 0.0, alpha_a = 0.0;
    double beta_p = 0.0, beta_n = 0.0, beta_a = 0.0;
    double gamma_p = 0.0, gamma_n = 0.0, gamma_a = 0.0;

    std::array<double, 3> bag_weights(SourceBag s) const {
        switch (s) {
        case SourceBag::Pos: return {alpha_p, alpha_n, alpha_a};
        case SourceBag::Unl: return {beta_p, beta_n, beta_a};
        default: return {gamma_p, gamma_n, gamma_a};
        }
    }
};

// Computes the rewrite constants from the sampling priors and the aggregated
// class priors. Requires theta_u^n > 0 and theta_a^a > 0 (the denominators);
// throws DegeneratePrior otherwise.
RewriteCoefficients rewrite_coefficients(const PriorMatrix& theta, const AggregatedPriors& pi);

struct CorrectedLoss {
    double value = 0.0;
    std::array<double, 3> grad{}; // w.r.t. the scores; only [0] is used for ordinal
};

// Per-bag corrected loss: sum over classes of coef(bag, c) * l(scores, c),
// where l is the OVR margin loss or the ordinal absolute loss. The value may
// be negative because the coefficients are signed.
CorrectedLoss corrected_loss(SourceBag bag, std::span<const double> scores,
                             const RewriteCoefficients& c, LossKind loss, SurrogateKind surr);

struct RiskGrad {
    double value = 0.0;
    std::vector<double> grad; // w.r.t. model parameters
};

// Empirical PUAC risk over the full bags: mean corrected loss per bag,
// summed over the three bags, with the exact parameter gradient.
RiskGrad empirical_puac_risk(const Scorer& model, const PuacDataset& data,
                             const RewriteCoefficients& c, LossKind loss, SurrogateKind surr);

// Same risk restricted to explicit row indices per bag; used for minibatch
// steps. Each index list must be non-empty.
RiskGrad empirical_puac_risk_batch(const Scorer& model, const PuacDataset& data,
                                   const RewriteCoefficients& c, LossKind loss,
                                   SurrogateKind surr, std::span<const std::uint32_t> idx_pos,
                                   std::span<const std::uint32_t> idx_unl,
                                   std::span<const std::uint32_t> idx_aug);

// Value-only evaluation (skips the backward pass).
double empirical_puac_risk_value(const Scorer& model, const PuacDataset& data,
                                 const RewriteCoefficients& c, LossKind loss,
                                 SurrogateKind surr);

// Fully supervised risk: sum over classes of pi_c times the class-conditional
// empirical mean loss. Every class must be present.
double supervised_risk(const Scorer& model, const LabeledSet& labeled,
                       const AggregatedPriors& pi, LossKind loss, SurrogateKind surr);

} // namespace puac
