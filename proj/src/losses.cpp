#include "puac/losses.hpp"

#include <cmath>

#include "puac/errors.hpp"

namespace puac {

PhiValue phi(SurrogateKind kind, double z) {
    switch (kind) {
    case SurrogateKind::Squared: {
        const double t = 1.0 - z;
        return {t * t, -2.0 * t};
    }
    case SurrogateKind::Logistic: {
        // ln(1 + e^-z), computed stably on both tails.
        if (z > 0) {
            const double e = std::exp(-z);
            return {std::log1p(e), -e / (1.0 + e)};
        }
        const double e = std::exp(z);
        return {-z + std::log1p(e), -1.0 / (1.0 + e)};
    }
    default: {
        // Sigmoid: 1/(1 + e^z); derivative -s(z) s(-z).
        double s;
        if (z > 0) {
            const double e = std::exp(-z);
            s = e / (1.0 + e);
        } else {
            s = 1.0 / (1.0 + std::exp(z));
        }
        return {s, -s * (1.0 - s)};
    }
    }
}

OvrLoss ovr_margin_loss(std::span<const double> scores, ClassLabel y, SurrogateKind kind) {
    if (scores.size() != 3)
        throw DimensionMismatch("ovr_margin_loss expects 3 scores");
    OvrLoss out;
    const std::size_t target = label_index(y);
    for (std::size_t k = 0; k < 3; ++k) {
        if (k == target) {
            const PhiValue pv = phi(kind, scores[k]);
            out.value += pv.value;
            out.grad[k] += pv.deriv;
        } else {
            const PhiValue pv = phi(kind, -scores[k]);
            out.value += pv.value;
            out.grad[k] -= pv.deriv;
        }
    }
    return out;
}

OrdinalLoss ordinal_abs_loss(double score, ClassLabel y) {
    const double delta = score - static_cast<double>(ordinal_code(y));
    OrdinalLoss out;
    out.value = std::abs(delta);
    out.subgrad = delta > 0.0 ? 1.0 : (delta < 0.0 ? -1.0 : 0.0);
    return out;
}

} // namespace puac
