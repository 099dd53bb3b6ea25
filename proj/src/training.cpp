#include "puac/training.hpp"

#include <chrono>
#include <cmath>

#include <json.hpp>

#include "puac/errors.hpp"

namespace puac {

std::vector<double> adadelta_step(AdadeltaState& state, std::span<const double> grad) {
    if (grad.size() != state.avg_sq_grad.size())
        throw DimensionMismatch("adadelta_step: gradient size mismatch");
    std::vector<double> update(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double g = grad[i];
        state.avg_sq_grad[i] = state.rho * state.avg_sq_grad[i] + (1.0 - state.rho) * g * g;
        const double step = -std::sqrt((state.avg_sq_update[i] + state.eps) /
                                       (state.avg_sq_grad[i] + state.eps)) *
                            g;
        state.avg_sq_update[i] =
            state.rho * state.avg_sq_update[i] + (1.0 - state.rho) * step * step;
        update[i] = step;
    }
    return update;
}

namespace {

// Head/tail split of one bag: the leading rows train, the trailing ones
// validate. Deterministic, no shuffling (rows are i.i.d. by construction).
void split_bag(const Bag& src, double val_fraction, Bag& train, Bag& val) {
    const std::size_t n = src.size();
    std::size_t n_val = static_cast<std::size_t>(std::floor(val_fraction * n));
    if (val_fraction > 0.0 && n_val == 0)
        n_val = 1;
    if (n_val >= n)
        throw InvalidArgument("validation fraction leaves an empty training bag");
    const std::size_t n_train = n - n_val;
    train.source = val.source = src.source;
    train.x.dim = val.x.dim = src.x.dim;
    for (std::size_t i = 0; i < n_train; ++i)
        train.x.push_row(src.x.row(i));
    for (std::size_t i = n_train; i < n; ++i)
        val.x.push_row(src.x.row(i));
}

std::vector<std::uint32_t> draw_indices(Rng& rng, std::size_t n, std::size_t count) {
    std::vector<std::uint32_t> idx(count);
    for (std::size_t i = 0; i < count; ++i)
        idx[i] = static_cast<std::uint32_t>(rng.below(n));
    return idx;
}

} // namespace

TrainReport train(const RunConfig& cfg, const PuacDataset& data, const PriorMatrix& theta) {
    const auto t0 = std::chrono::steady_clock::now();
    const PriorMatrix checked = validate_priors(theta);
    if (data.pos.size() == 0 || data.unl.size() == 0 || data.aug.size() == 0)
        throw EmptyBag("train: all three bags must be non-empty");
    if (cfg.batch_size == 0)
        throw InvalidArgument("train: batch_size must be >= 1");

    PuacDataset train_data;
    PuacDataset val_data;
    const bool with_val = cfg.validation_fraction > 0.0;
    if (with_val) {
        train_data.dim = val_data.dim = data.dim;
        split_bag(data.pos, cfg.validation_fraction, train_data.pos, val_data.pos);
        split_bag(data.unl, cfg.validation_fraction, train_data.unl, val_data.unl);
        split_bag(data.aug, cfg.validation_fraction, train_data.aug, val_data.aug);
    }
    const PuacDataset& td = with_val ? train_data : data;

    const AggregatedPriors pi =
        aggregate_priors(checked, td.pos.size(), td.unl.size(), td.aug.size());
    const RewriteCoefficients coef = rewrite_coefficients(checked, pi);

    // Stream ids 0x11/0x12 keep training draws disjoint from datagen's even
    // when both run off the same seed.
    Rng master(cfg.seed);
    Rng r_init = master.split(0x11);
    Rng r_batch = master.split(0x12);

    const std::size_t out_dim = cfg.loss == LossKind::OvrSquared ? 3 : 1;
    Scorer model = Scorer::make(cfg.model, data.dim, cfg.hidden_width, out_dim);
    model.init_params(r_init);

    AdadeltaState ada(model.param_count(), cfg.optimizer.rho, cfg.optimizer.eps);
    const std::size_t max_bag =
        std::max(td.pos.size(), std::max(td.unl.size(), td.aug.size()));
    const std::size_t steps_per_epoch = (max_bag + cfg.batch_size - 1) / cfg.batch_size;

    TrainReport report;
    report.seed = cfg.seed;
    std::vector<double> best_params;
    double best_val = 0.0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            const auto ip = draw_indices(r_batch, td.pos.size(), cfg.batch_size);
            const auto iu = draw_indices(r_batch, td.unl.size(), cfg.batch_size);
            const auto ia = draw_indices(r_batch, td.aug.size(), cfg.batch_size);
            const RiskGrad rg =
                empirical_puac_risk_batch(model, td, coef, cfg.loss, cfg.surrogate, ip, iu, ia);
            if (cfg.optimizer.kind == OptimizerKind::Adadelta) {
                const std::vector<double> upd = adadelta_step(ada, rg.grad);
                for (std::size_t i = 0; i < upd.size(); ++i)
                    model.params()[i] += upd[i];
            } else {
                for (std::size_t i = 0; i < rg.grad.size(); ++i)
                    model.params()[i] -= cfg.optimizer.lr * rg.grad[i];
            }
        }
        report.epoch_risk.push_back(
            empirical_puac_risk_value(model, td, coef, cfg.loss, cfg.surrogate));
        if (with_val) {
            const double vr =
                empirical_puac_risk_value(model, val_data, coef, cfg.loss, cfg.surrogate);
            report.validation_risk.push_back(vr);
            if (cfg.early_stop && (best_params.empty() || vr < best_val)) {
                best_val = vr;
                best_params = model.params();
            }
        }
    }
    if (cfg.early_stop && !best_params.empty())
        model.params() = best_params;

    report.model = std::move(model);
    report.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::string train_report_json(const TrainReport& report) {
    nlohmann::json j;
    j["seed"] = report.seed;
    j["epoch_risk"] = report.epoch_risk;
    j["validation_risk"] = report.validation_risk;
    j["model"] = nlohmann::json::parse(checkpoint_string(report.model));
    j["wall_clock_sec"] = report.wall_clock_sec;
    return j.dump(2) + "\n";
}

} // namespace puac
