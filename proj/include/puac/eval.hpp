#pragma once
// Metrics, the closed-form Bayes oracle for the synthetic Gaussian data,
// and the robustness experiment grids with CSV/JSON report emission.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "puac/core_types.hpp"
#include "puac/datagen.hpp"
#include "puac/models.hpp"

namespace puac {

struct Metrics {
    double overall = 0.0;
    std::array<double, 3> per_class{};       // recall per class, P/N/A order
    double ident_a = 0.0;                    // recall of the augmented class
    std::array<std::array<std::size_t, 3>, 3> confusion{}; // [true][pred]
    std::array<std::size_t, 3> class_counts{};
    std::size_t total = 0;
};

// Scores the model's predictions against the labeled test set. Every class
// must be present.
Metrics evaluate(const Scorer& model, const LabeledSet& test, LossKind loss);

// Same metrics for an arbitrary prediction list (used by baselines whose
// predictions never include the augmented class).
Metrics evaluate_predictions(const std::vector<ClassLabel>& pred, const LabeledSet& test);

// Bayes classifier for the diagonal-Gaussian class conditionals: argmax of
// pi_c N(x; mu_c, var_c), with the same tie rule as predict_ovr.
ClassLabel bayes_predict(const GaussianClassSpec& spec, const AggregatedPriors& pi_test,
                         std::span<const double> x);

struct BayesAccuracy {
    double accuracy = 0.0;
    double std_err = 0.0;
    Metrics metrics;
};

// Monte Carlo accuracy of bayes_predict on n fresh draws from the mixture.
BayesAccuracy bayes_accuracy(const GaussianClassSpec& spec, const AggregatedPriors& pi_test,
                             std::size_t n, std::uint64_t seed);

// One grid cell: training-prior perturbation multipliers, test-shift
// multipliers and bag sizes (0 keeps the base config's size).
struct GridCell {
    std::string id;
    std::array<double, 3> prior_eta{1.0, 1.0, 1.0}; // eta_u^p, eta_a^p, eta_a^n
    std::array<double, 3> shift_eta{1.0, 1.0, 1.0}; // eta_p, eta_n, eta_a
    std::size_t n_p = 0, n_u = 0, n_a = 0;
};

struct ExperimentGrid {
    std::vector<GridCell> cells;
    std::size_t repetitions = 1;
    bool with_baselines = false;
    std::uint64_t base_seed = 1;
};

struct ExperimentRow {
    std::string method; // "upuac", "upu", "nnpu"
    std::string cell;
    std::size_t rep = 0;
    std::array<double, 3> prior_eta{};
    std::array<double, 3> shift_eta{};
    std::size_t n_p = 0, n_u = 0, n_a = 0;
    std::uint64_t seed = 0;
    Metrics metrics;
    double train_risk_final = 0.0;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    std::vector<std::string> cell_errors; // "cell/rep: message"
};

// Runs every cell x repetition: generates data at the base config's true
// priors with a per-cell seed, trains with the (possibly perturbed) priors,
// shifts the test split when requested, and evaluates. Per-cell errors are
// recorded and the run continues. Cells are independent; jobs > 1 runs them
// in a thread pool with the report assembled in cell order.
ExperimentReport run_experiment(const ExperimentGrid& grid, const GenConfig& base,
                                const RunConfig& train_base, std::size_t jobs = 1);

// Report CSV, one row per cell x repetition x method. Column order:
// method,cell,rep,eta_u_p,eta_a_p,eta_a_n,shift_p,shift_n,shift_a,
// n_p,n_u,n_a,seed,overall_acc,acc_p,acc_n,acc_a,ident_a,train_risk_final
std::string report_csv(const ExperimentReport& report);
void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path);

// Per-cell mean/std summary of the UPUAC rows plus recorded errors.
std::string summary_json(const ExperimentReport& report);

std::string metrics_json(const Metrics& m);

} // namespace puac
