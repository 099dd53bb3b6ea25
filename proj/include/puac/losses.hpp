#pragma once
// Surrogate and discrete losses with first derivatives: binary margin
// surrogates phi, the OVR multi-class margin loss, the ordinal absolute
// loss, and the zero-one loss. All pure functions.

#include <array>
#include <span>

#include "puac/core_types.hpp"

namespace puac {

struct PhiValue {
    double value = 0.0;
    double deriv = 0.0;
};

// Binary margin surrogate phi(z) and its derivative.
//   Squared  : (1 - z)^2
//   Logistic : ln(1 + e^-z)
//   Sigmoid  : 1 / (1 + e^z)
PhiValue phi(SurrogateKind kind, double z);

struct OvrLoss {
    double value = 0.0;
    std::array<double, 3> grad{}; // d value / d f_k
};

// One-versus-rest margin loss: phi(f_y) + sum_{i != y} phi(-f_i).
OvrLoss ovr_margin_loss(std::span<const double> scores, ClassLabel y, SurrogateKind kind);

struct OrdinalLoss {
    double value = 0.0;
    double subgrad = 0.0; // 0 at the kink
};

// Absolute ordinal loss |f_o - enc(y)| with enc(p)=1, enc(n)=2, enc(a)=3.
OrdinalLoss ordinal_abs_loss(double score, ClassLabel y);

// Indicator of misclassification.
inline int zero_one(ClassLabel pred, ClassLabel truth) { return pred == truth ? 0 : 1; }

} // namespace puac
