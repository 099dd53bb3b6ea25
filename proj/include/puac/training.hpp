#pragma once
// Minibatch ERM loop minimizing the empirical PUAC risk with Adadelta or
// plain gradient descent. Runs are deterministic given the RunConfig.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "puac/core_types.hpp"
#include "puac/models.hpp"
#include "puac/risk.hpp"

namespace puac {

// Per-parameter Adadelta accumulators.
struct AdadeltaState {
    std::vector<double> avg_sq_grad;
    std::vector<double> avg_sq_update;
    double rho = 0.95;
    double eps = 1e-6;

    AdadeltaState(std::size_t n, double rho_, double eps_)
        : avg_sq_grad(n, 0.0), avg_sq_update(n, 0.0), rho(rho_), eps(eps_) {}
};

// One Adadelta update: decays the squared-gradient average, returns
// -(RMS[du]/RMS[g]) * g per coordinate and decays the squared-update average
// with the returned step.
std::vector<double> adadelta_step(AdadeltaState& state, std::span<const double> grad);

struct TrainReport {
    std::vector<double> epoch_risk;      // full-bag empirical PUAC risk per epoch
    std::vector<double> validation_risk; // empty unless a validation split was used
    Scorer model;
    double wall_clock_sec = 0.0;
    std::uint64_t seed = 0;
};

// Trains a scorer by minibatch minimization of the empirical PUAC risk.
// Each step draws batch_size rows from each bag independently with
// replacement, which keeps the per-step risk an unbiased estimate of the
// full objective. Epoch count and batch size come from the config; a fixed
// epoch budget is always run, and with early_stop the returned model is the
// one with the best validation risk.
TrainReport train(const RunConfig& cfg, const PuacDataset& data, const PriorMatrix& theta);

std::string train_report_json(const TrainReport& report);

} // namespace puac
