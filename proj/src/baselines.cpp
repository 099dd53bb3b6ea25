#include "puac/baselines.hpp"

#include <cmath>

#include "puac/errors.hpp"
#include "puac/losses.hpp"
#include "puac/training.hpp"

namespace puac {

namespace {

struct BinaryTerms {
    double pos_as_pos = 0.0;  // E_p[phi(f)]
    double pos_as_neg = 0.0;  // E_p[phi(-f)]
    double merged_neg = 0.0;  // E_u[phi(-f)]
    std::vector<double> grad_pos_as_pos;
    std::vector<double> grad_pos_as_neg;
    std::vector<double> grad_merged_neg;
};

BinaryTerms binary_terms(const Scorer& model, const FeatureMatrix& pos,
                         const FeatureMatrix& merged, SurrogateKind surr) {
    if (pos.rows == 0 || merged.rows == 0)
        throw EmptyBag("binary PU risk: empty bag");
    if (model.out_dim() != 1)
        throw DimensionMismatch("binary PU risk requires a single-output scorer");
    BinaryTerms t;
    t.grad_pos_as_pos.assign(model.param_count(), 0.0);
    t.grad_pos_as_neg.assign(model.param_count(), 0.0);
    t.grad_merged_neg.assign(model.param_count(), 0.0);
    Scorer::Workspace ws;
    const double inv_p = 1.0 / static_cast<double>(pos.rows);
    double up[1];
    for (std::size_t i = 0; i < pos.rows; ++i) {
        const auto x = pos.row(i);
        model.forward(x, ws);
        const double f = ws.scores[0];
        const PhiValue lp = phi(surr, f);
        const PhiValue ln = phi(surr, -f);
        t.pos_as_pos += lp.value * inv_p;
        t.pos_as_neg += ln.value * inv_p;
        up[0] = lp.deriv * inv_p;
        model.backward(x, ws, up, t.grad_pos_as_pos);
        up[0] = -ln.deriv * inv_p;
        model.backward(x, ws, up, t.grad_pos_as_neg);
    }
    const double inv_u = 1.0 / static_cast<double>(merged.rows);
    for (std::size_t i = 0; i < merged.rows; ++i) {
        const auto x = merged.row(i);
        model.forward(x, ws);
        const PhiValue ln = phi(surr, -ws.scores[0]);
        t.merged_neg += ln.value * inv_u;
        up[0] = -ln.deriv * inv_u;
        model.backward(x, ws, up, t.grad_merged_neg);
    }
    return t;
}

} // namespace

RiskGrad upu_risk(const Scorer& model, const FeatureMatrix& pos, const FeatureMatrix& merged,
                  const BinaryPuConfig& cfg) {
    const BinaryTerms t = binary_terms(model, pos, merged, cfg.surrogate);
    RiskGrad out;
    out.value = cfg.pi_plus * t.pos_as_pos + t.merged_neg - cfg.pi_plus * t.pos_as_neg;
    out.grad.resize(model.param_count());
    for (std::size_t i = 0; i < out.grad.size(); ++i)
        out.grad[i] = cfg.pi_plus * t.grad_pos_as_pos[i] + t.grad_merged_neg[i] -
                      cfg.pi_plus * t.grad_pos_as_neg[i];
    return out;
}

RiskGrad nnpu_risk(const Scorer& model, const FeatureMatrix& pos, const FeatureMatrix& merged,
                   const BinaryPuConfig& cfg) {
    const BinaryTerms t = binary_terms(model, pos, merged, cfg.surrogate);
    const double neg_part = t.merged_neg - cfg.pi_plus * t.pos_as_neg;
    RiskGrad out;
    out.grad.resize(model.param_count());
    if (neg_part >= 0.0) {
        out.value = cfg.pi_plus * t.pos_as_pos + neg_part;
        for (std::size_t i = 0; i < out.grad.size(); ++i)
            out.grad[i] = cfg.pi_plus * t.grad_pos_as_pos[i] + t.grad_merged_neg[i] -
                          cfg.pi_plus * t.grad_pos_as_neg[i];
    } else {
        out.value = cfg.pi_plus * t.pos_as_pos;
        for (std::size_t i = 0; i < out.grad.size(); ++i)
            out.grad[i] = cfg.pi_plus * t.grad_pos_as_pos[i];
    }
    return out;
}

double merged_positive_prior(const PriorMatrix& theta, std::size_t n_u, std::size_t n_a) {
    if (n_u + n_a == 0)
        throw InvalidArgument("merged_positive_prior: empty merged pool");
    const double nu = static_cast<double>(n_u);
    const double na = static_cast<double>(n_a);
    return (nu * theta.at(SourceBag::Unl, ClassLabel::P) +
            na * theta.at(SourceBag::Aug, ClassLabel::P)) /
           (nu + na);
}

BaselineOutcome run_binary_baseline(const PuacDataset& data, const BinaryPuConfig& cfg,
                                    const RunConfig& run) {
    if (!data.test)
        throw MissingClass("run_binary_baseline: labeled test data required");
    if (!(cfg.pi_plus > 0.0 && cfg.pi_plus < 1.0))
        throw InvalidArgument("run_binary_baseline: pi_plus must be in (0,1)");

    FeatureMatrix merged;
    merged.dim = data.dim;
    merged.data.reserve((data.unl.size() + data.aug.size()) * data.dim);
    for (std::size_t i = 0; i < data.unl.size(); ++i)
        merged.push_row(data.unl.x.row(i));
    for (std::size_t i = 0; i < data.aug.size(); ++i)
        merged.push_row(data.aug.x.row(i));

    Rng master(run.seed);
    Rng r_init = master.split(0x21);
    Rng r_batch = master.split(0x22);
    Scorer model = Scorer::make(run.model, data.dim, run.hidden_width, 1);
    model.init_params(r_init);

    AdadeltaState ada(model.param_count(), run.optimizer.rho, run.optimizer.eps);
    const std::size_t max_bag = std::max(data.pos.size(), merged.rows);
    const std::size_t steps_per_epoch = (max_bag + run.batch_size - 1) / run.batch_size;

    FeatureMatrix batch_pos, batch_merged;
    batch_pos.dim = batch_merged.dim = data.dim;
    double final_risk = 0.0;
    for (std::size_t epoch = 0; epoch < run.epochs; ++epoch) {
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            batch_pos.rows = batch_merged.rows = 0;
            batch_pos.data.clear();
            batch_merged.data.clear();
            for (std::size_t i = 0; i < run.batch_size; ++i)
                batch_pos.push_row(data.pos.x.row(r_batch.below(data.pos.size())));
            for (std::size_t i = 0; i < run.batch_size; ++i)
                batch_merged.push_row(merged.row(r_batch.below(merged.rows)));
            const RiskGrad rg = cfg.nn_clamp ? nnpu_risk(model, batch_pos, batch_merged, cfg)
                                             : upu_risk(model, batch_pos, batch_merged, cfg);
            if (run.optimizer.kind == OptimizerKind::Adadelta) {
                const std::vector<double> upd = adadelta_step(ada, rg.grad);
                for (std::size_t i = 0; i < upd.size(); ++i)
                    model.params()[i] += upd[i];
            } else {
                for (std::size_t i = 0; i < rg.grad.size(); ++i)
                    model.params()[i] -= run.optimizer.lr * rg.grad[i];
            }
        }
        final_risk = (cfg.nn_clamp ? nnpu_risk(model, data.pos.x, merged, cfg)
                                   : upu_risk(model, data.pos.x, merged, cfg))
                         .value;
    }

    // 2-way prediction (argmax of {f, -f}) scored against the 3-way labels.
    std::vector<ClassLabel> pred(data.test->size());
    Scorer::Workspace ws;
    for (std::size_t i = 0; i < data.test->size(); ++i) {
        model.forward(data.test->x.row(i), ws);
        pred[i] = ws.scores[0] >= 0.0 ? ClassLabel::P : ClassLabel::N;
    }
    BaselineOutcome out;
    out.metrics = evaluate_predictions(pred, *data.test);
    out.final_risk = final_risk;
    out.model = std::move(model);
    return out;
}

} // namespace puac
