#pragma once
// Synthetic data generation from diagonal-Gaussian class conditionals,
// CSV ingestion/export of flat-feature datasets, and the resampling
// transforms used by the robustness experiments.

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "puac/core_types.hpp"
#include "puac/rng.hpp"

namespace puac {

// Per true class: mean vector and strictly positive diagonal covariance.
struct GaussianClassSpec {
    std::size_t dim = 0;
    std::array<std::vector<double>, 3> mean; // indexed by label_index
    std::array<std::vector<double>, 3> var;

    void validate() const;
};

struct GenConfig {
    GaussianClassSpec spec;
    PriorMatrix theta;
    std::size_t n_p = 0, n_u = 0, n_a = 0;
    std::size_t n_test = 0;                  // 0 disables the test split
    AggregatedPriors test_priors{1.0 / 3, 1.0 / 3, 1.0 / 3};
    std::uint64_t seed = 1;
};

// Draws the three bags per the generation process: each sample first draws a
// latent true class from its bag's prior row, then the class-conditional.
// Latent labels are stored on every sample (training code never reads them);
// the test split is drawn from test_priors.
PuacDataset sample_puac(const GenConfig& cfg);

// CSV schema (read and written): header `x0..x{d-1},source,label`; source in
// {pos,unl,aug,test}; label in {p,n,a} or empty. Test rows must be labeled.
PuacDataset load_csv(const std::filesystem::path& path);
void save_csv(const PuacDataset& data, const std::filesystem::path& path);

// Resamples a labeled test set (with replacement within each class) so the
// class frequencies match the renormalized priors pi'_c proportional to
// eta_c * pi_c. Multipliers must be positive.
LabeledSet shift_test(const LabeledSet& test, const std::array<double, 3>& eta,
                      std::uint64_t seed);

// Scales the three free priors and restores the row-sum constraints:
// theta_u^n := 1 - eta_up * theta_u^p, theta_a^a := 1 - eta_ap * theta_a^p
// - eta_an * theta_a^n. Throws StructuralViolation when an entry leaves
// [0,1].
PriorMatrix perturb_priors(const PriorMatrix& theta, double eta_up, double eta_ap,
                           double eta_an);

} // namespace puac
