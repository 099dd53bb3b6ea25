#include "puac/risk.hpp"

#include <cmath>

#include "puac/errors.hpp"

namespace puac {

RewriteCoefficients rewrite_coefficients(const PriorMatrix& theta, const AggregatedPriors& pi) {
    const double tpp = theta.at(SourceBag::Pos, ClassLabel::P);
    const double tup = theta.at(SourceBag::Unl, ClassLabel::P);
    const double tun = theta.at(SourceBag::Unl, ClassLabel::N);
    const double tap = theta.at(SourceBag::Aug, ClassLabel::P);
    const double tan = theta.at(SourceBag::Aug, ClassLabel::N);
    const double taa = theta.at(SourceBag::Aug, ClassLabel::A);
    if (tpp <= 0.0)
        throw DegeneratePrior("rewrite_coefficients: theta_p^p must be positive");
    if (tun <= 0.0)
        throw DegeneratePrior("rewrite_coefficients: theta_u^n must be positive");
    if (taa <= 0.0)
        throw DegeneratePrior("rewrite_coefficients: theta_a^a must be positive");

    RewriteCoefficients c;
    c.alpha_p = pi.p / tpp;
    c.alpha_n = -pi.n * tup / (tpp * tun);
    c.alpha_a = pi.a * (tan * tup - tap * tun) / (tpp * tun * taa);
    c.beta_p = 0.0;
    c.beta_n = pi.n / tun;
    c.beta_a = -tan * pi.a / (tun * taa);
    c.gamma_p = 0.0;
    c.gamma_n = 0.0;
    c.gamma_a = pi.a / taa;
    return c;
}

namespace {

std::size_t score_dim(LossKind loss) { return loss == LossKind::OvrSquared ? 3 : 1; }

} // namespace

CorrectedLoss corrected_loss(SourceBag bag, std::span<const double> scores,
                             const RewriteCoefficients& c, LossKind loss, SurrogateKind surr) {
    if (scores.size() != score_dim(loss))
        throw DimensionMismatch("corrected_loss: score dimension does not match loss kind");
    const std::array<double, 3> w = c.bag_weights(bag);
    CorrectedLoss out;
    if (loss == LossKind::OvrSquared) {
        for (std::size_t k = 0; k < 3; ++k) {
            if (w[k] == 0.0)
                continue;
            const OvrLoss l = ovr_margin_loss(scores, kAllLabels[k], surr);
            out.value += w[k] * l.value;
            for (std::size_t j = 0; j < 3; ++j)
                out.grad[j] += w[k] * l.grad[j];
        }
        return out;
    }
    for (std::size_t k = 0; k < 3; ++k) {
        if (w[k] == 0.0)
            continue;
        const OrdinalLoss l = ordinal_abs_loss(scores[0], kAllLabels[k]);
        out.value += w[k] * l.value;
        out.grad[0] += w[k] * l.subgrad;
    }
    return out;
}

namespace {

struct BagAccum {
    double value = 0.0;
};

// Adds the mean corrected loss of the listed rows of one bag to (value,
// grad). Rows are visited in index order so the reduction is reproducible.
void accumulate_bag(const Scorer& model, const Bag& bag, SourceBag which,
                    const RewriteCoefficients& c, LossKind loss, SurrogateKind surr,
                    std::span<const std::uint32_t> idx, double& value,
                    std::vector<double>* grad, Scorer::Workspace& ws) {
    if (idx.empty())
        throw EmptyBag(std::string("empty bag: ") + bag_name(which));
    const double inv = 1.0 / static_cast<double>(idx.size());
    double sum = 0.0;
    std::array<double, 3> upstream{};
    for (const std::uint32_t i : idx) {
        const auto x = bag.x.row(i);
        model.forward(x, ws);
        const CorrectedLoss cl = corrected_loss(which, ws.scores, c, loss, surr);
        sum += cl.value;
        if (grad) {
            const std::size_t dim = ws.scores.size();
            for (std::size_t k = 0; k < dim; ++k)
                upstream[k] = cl.grad[k] * inv;
            model.backward(x, ws, std::span<const double>(upstream.data(), dim), *grad);
        }
    }
    value += sum * inv;
}

std::vector<std::uint32_t> all_indices(std::size_t n) {
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = static_cast<std::uint32_t>(i);
    return idx;
}

} // namespace

RiskGrad empirical_puac_risk_batch(const Scorer& model, const PuacDataset& data,
                                   const RewriteCoefficients& c, LossKind loss,
                                   SurrogateKind surr, std::span<const std::uint32_t> idx_pos,
                                   std::span<const std::uint32_t> idx_unl,
                                   std::span<const std::uint32_t> idx_aug) {
    RiskGrad out;
    out.grad.assign(model.param_count(), 0.0);
    Scorer::Workspace ws;
    accumulate_bag(model, data.pos, SourceBag::Pos, c, loss, surr, idx_pos, out.value,
                   &out.grad, ws);
    accumulate_bag(model, data.unl, SourceBag::Unl, c, loss, surr, idx_unl, out.value,
                   &out.grad, ws);
    accumulate_bag(model, data.aug, SourceBag::Aug, c, loss, surr, idx_aug, out.value,
                   &out.grad, ws);
    return out;
}

RiskGrad empirical_puac_risk(const Scorer& model, const PuacDataset& data,
                             const RewriteCoefficients& c, LossKind loss, SurrogateKind surr) {
    const auto ip = all_indices(data.pos.size());
    const auto iu = all_indices(data.unl.size());
    const auto ia = all_indices(data.aug.size());
    return empirical_puac_risk_batch(model, data, c, loss, surr, ip, iu, ia);
}

double empirical_puac_risk_value(const Scorer& model, const PuacDataset& data,
                                 const RewriteCoefficients& c, LossKind loss,
                                 SurrogateKind surr) {
    double value = 0.0;
    Scorer::Workspace ws;
    const auto ip = all_indices(data.pos.size());
    const auto iu = all_indices(data.unl.size());
    const auto ia = all_indices(data.aug.size());
    accumulate_bag(model, data.pos, SourceBag::Pos, c, loss, surr, ip, value, nullptr, ws);
    accumulate_bag(model, data.unl, SourceBag::Unl, c, loss, surr, iu, value, nullptr, ws);
    accumulate_bag(model, data.aug, SourceBag::Aug, c, loss, surr, ia, value, nullptr, ws);
    return value;
}

double supervised_risk(const Scorer& model, const LabeledSet& labeled,
                       const AggregatedPriors& pi, LossKind loss, SurrogateKind surr) {
    std::array<double, 3> sums{};
    std::array<std::size_t, 3> counts{};
    Scorer::Workspace ws;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        const ClassLabel y = labeled.y[i];
        model.forward(labeled.x.row(i), ws);
        double v;
        if (loss == LossKind::OvrSquared)
            v = ovr_margin_loss(ws.scores, y, surr).value;
        else
            v = ordinal_abs_loss(ws.scores[0], y).value;
        sums[label_index(y)] += v;
        counts[label_index(y)] += 1;
    }
    double risk = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        if (counts[k] == 0)
            throw MissingClass(std::string("supervised_risk: no samples of class ") +
                               label_name(kAllLabels[k]));
        risk += pi.at(kAllLabels[k]) * sums[k] / static_cast<double>(counts[k]);
    }
    return risk;
}

} // namespace puac
