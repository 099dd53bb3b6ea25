#pragma once
// Domain types shared by all modules: labels, priors, datasets, run
// configuration. Everything here is immutable after construction and safe
// to share across threads.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "puac/errors.hpp"

namespace puac {

// True class of a sample. The ordinal encoding P=1, N=2, A=3 is fixed; the
// ordinal absolute loss depends on it.
enum class ClassLabel : int { P = 1, N = 2, A = 3 };

// Which marginal density a sample was drawn from. Distinct from ClassLabel:
// a sample from Aug may have true label P, N, or A.
enum class SourceBag : int { Pos = 0, Unl = 1, Aug = 2 };

inline constexpr std::array<ClassLabel, 3> kAllLabels = {ClassLabel::P, ClassLabel::N,
                                                         ClassLabel::A};
inline constexpr std::array<SourceBag, 3> kAllBags = {SourceBag::Pos, SourceBag::Unl,
                                                      SourceBag::Aug};

inline int ordinal_code(ClassLabel c) { return static_cast<int>(c); }
inline std::size_t label_index(ClassLabel c) { return static_cast<std::size_t>(c) - 1; }
inline std::size_t bag_index(SourceBag s) { return static_cast<std::size_t>(s); }

const char* label_name(ClassLabel c);
const char* bag_name(SourceBag s);

// Tolerances used when validating and renormalizing priors.
inline constexpr double kPriorStructuralTol = 1e-9;
inline constexpr double kPriorSumTol = 1e-12;

// The nine sampling-distribution class priors theta[s][c]: the probability
// that a sample drawn from bag s has true class c.
struct PriorMatrix {
    std::array<std::array<double, 3>, 3> theta{};

    double at(SourceBag s, ClassLabel c) const { return theta[bag_index(s)][label_index(c)]; }
    double& at(SourceBag s, ClassLabel c) { return theta[bag_index(s)][label_index(c)]; }
};

// Class prior probabilities of the pooled training distribution.
struct AggregatedPriors {
    double p = 0.0;
    double n = 0.0;
    double a = 0.0;

    double at(ClassLabel c) const {
        switch (c) {
        case ClassLabel::P: return p;
        case ClassLabel::N: return n;
        default: return a;
        }
    }
};

// Checks the structural constraints of the data generation process and
// returns a renormalized copy: row sums are restored exactly by recomputing
// the dependent entry as a complement, which makes the operation idempotent.
// Throws StructuralViolation naming the broken constraint. Degenerate rows
// (theta_u^n = 0 or theta_a^a = 0) are structurally fine for sampling.
PriorMatrix validate_prior_structure(const std::array<std::array<double, 3>, 3>& raw);

// Structural validation plus rejection of the degenerate priors that appear
// as denominators in the risk rewrite: throws DegeneratePrior when
// theta_u^n or theta_a^a is zero.
PriorMatrix validate_priors(const std::array<std::array<double, 3>, 3>& raw);
PriorMatrix validate_priors(const PriorMatrix& m);

// Count-weighted mixture of the three sampling distributions: the class
// priors of the pooled dataset when n_p, n_u, n_a samples are drawn from the
// respective marginals.
AggregatedPriors aggregate_priors(const PriorMatrix& theta, std::size_t n_p, std::size_t n_u,
                                  std::size_t n_a);

// Row-major feature storage shared by bags and labeled sets.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> data; // rows * dim

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * dim, dim};
    }
    void push_row(std::span<const double> x) {
        data.insert(data.end(), x.begin(), x.end());
        ++rows;
    }
};

// A single example; used at ingestion boundaries (CSV) before packing into
// the flat containers below.
struct Sample {
    std::vector<double> x;
    SourceBag source = SourceBag::Unl;
    std::optional<ClassLabel> true_label; // oracle/test data only
};

// One training bag. Latent true labels, when known (synthetic generation or
// a labeled CSV), are kept alongside the features for oracle checks but are
// never read by training code.
struct Bag {
    SourceBag source = SourceBag::Unl;
    FeatureMatrix x;
    std::vector<ClassLabel> latent; // empty, or one label per row

    std::size_t size() const { return x.rows; }
};

struct LabeledSet {
    FeatureMatrix x;
    std::vector<ClassLabel> y;

    std::size_t size() const { return x.rows; }
};

// The three sample bags plus optional held-out labeled test data.
struct PuacDataset {
    std::size_t dim = 0;
    Bag pos;
    Bag unl;
    Bag aug;
    std::optional<LabeledSet> test;

    const Bag& bag(SourceBag s) const {
        switch (s) {
        case SourceBag::Pos: return pos;
        case SourceBag::Unl: return unl;
        default: return aug;
        }
    }
};

enum class LossKind { OvrSquared, OrdinalAbs };
enum class SurrogateKind { Squared, Logistic, Sigmoid };
enum class ModelKind { Linear, Mlp };
enum class OptimizerKind { Adadelta, GradientDescent };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adadelta;
    double rho = 0.95;  // Adadelta decay
    double eps = 1e-6;  // Adadelta epsilon
    double lr = 0.05;   // plain gradient descent step
};

// Full description of one training run. Identical RunConfig plus identical
// inputs produce bit-identical outputs.
struct RunConfig {
    std::uint64_t seed = 1;
    LossKind loss = LossKind::OvrSquared;
    SurrogateKind surrogate = SurrogateKind::Squared;
    ModelKind model = ModelKind::Mlp;
    std::size_t hidden_width = 32;
    OptimizerConfig optimizer;
    std::size_t epochs = 200;
    std::size_t batch_size = 128;
    double validation_fraction = 0.0; // > 0 carves a tail split of each bag
    bool early_stop = false;          // keep the best-validation-risk model
    double prior_tol = kPriorStructuralTol;
};

const char* to_string(LossKind k);
const char* to_string(SurrogateKind k);
const char* to_string(ModelKind k);
const char* to_string(OptimizerKind k);

LossKind loss_kind_from_string(const std::string& s);
SurrogateKind surrogate_from_string(const std::string& s);
ModelKind model_kind_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);

} // namespace puac
