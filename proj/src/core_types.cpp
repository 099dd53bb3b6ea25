#include "puac/core_types.hpp"

#include <cmath>

namespace puac {

const char* label_name(ClassLabel c) {
    switch (c) {
    case ClassLabel::P: return "p";
    case ClassLabel::N: return "n";
    default: return "a";
    }
}

const char* bag_name(SourceBag s) {
    switch (s) {
    case SourceBag::Pos: return "pos";
    case SourceBag::Unl: return "unl";
    default: return "aug";
    }
}

namespace {

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

void check_range(double v, const char* name) {
    if (!(v >= -kPriorStructuralTol && v <= 1.0 + kPriorStructuralTol)) {
        throw StructuralViolation(std::string("prior ") + name + " out of [0,1]: " +
                                  std::to_string(v));
    }
}

} // namespace

PriorMatrix validate_prior_structure(const std::array<std::array<double, 3>, 3>& raw) {
    const double tol = kPriorStructuralTol;
    const auto& tp = raw[0];
    const auto& tu = raw[1];
    const auto& ta = raw[2];

    check_range(tp[0], "theta_p^p");
    check_range(tp[1], "theta_p^n");
    check_range(tp[2], "theta_p^a");
    check_range(tu[0], "theta_u^p");
    check_range(tu[1], "theta_u^n");
    check_range(tu[2], "theta_u^a");
    check_range(ta[0], "theta_a^p");
    check_range(ta[1], "theta_a^n");
    check_range(ta[2], "theta_a^a");

    if (std::abs(tp[0] - 1.0) > tol)
        throw StructuralViolation("theta_p^p must be 1");
    if (std::abs(tp[1]) > tol)
        throw StructuralViolation("theta_p^n must be 0");
    if (std::abs(tp[2]) > tol)
        throw StructuralViolation("theta_p^a must be 0");
    if (std::abs(tu[2]) > tol)
        throw StructuralViolation("theta_u^a must be 0");
    if (std::abs(tu[0] + tu[1] - 1.0) > tol)
        throw StructuralViolation("theta_u^p + theta_u^n must sum to 1");
    if (std::abs(ta[0] + ta[1] + ta[2] - 1.0) > tol)
        throw StructuralViolation("theta_a row must sum to 1");

    PriorMatrix m;
    m.theta[0] = {1.0, 0.0, 0.0};
    const double up = clamp01(tu[0]);
    m.theta[1] = {up, 1.0 - up, 0.0};
    const double ap = clamp01(ta[0]);
    const double an = clamp01(ta[1]);
    m.theta[2] = {ap, an, 1.0 - ap - an};
    if (m.theta[2][2] < 0.0)
        m.theta[2][2] = 0.0;
    return m;
}

PriorMatrix validate_priors(const std::array<std::array<double, 3>, 3>& raw) {
    PriorMatrix m = validate_prior_structure(raw);
    // These two priors divide the rewrite coefficients; the zero cases are
    // the reductions to plain PU learning and are rejected here.
    if (m.theta[1][1] <= kPriorStructuralTol)
        throw DegeneratePrior("theta_u^n is zero: setting reduces to plain PU learning and "
                              "the risk rewrite divides by theta_u^n");
    if (m.theta[2][2] <= kPriorStructuralTol)
        throw DegeneratePrior("theta_a^a is zero: setting reduces to standard PU learning and "
                              "the risk rewrite divides by theta_a^a");
    return m;
}

PriorMatrix validate_priors(const PriorMatrix& m) { return validate_priors(m.theta); }

AggregatedPriors aggregate_priors(const PriorMatrix& theta, std::size_t n_p, std::size_t n_u,
                                  std::size_t n_a) {
    if (n_p == 0 || n_u == 0 || n_a == 0)
        throw InvalidArgument("aggregate_priors: all bag counts must be >= 1");
    const double total = static_cast<double>(n_p + n_u + n_a);
    const std::array<double, 3> w = {static_cast<double>(n_p) / total,
                                     static_cast<double>(n_u) / total,
                                     static_cast<double>(n_a) / total};
    AggregatedPriors pi;
    pi.p = w[0] * theta.theta[0][0] + w[1] * theta.theta[1][0] + w[2] * theta.theta[2][0];
    pi.n = w[0] * theta.theta[0][1] + w[1] * theta.theta[1][1] + w[2] * theta.theta[2][1];
    pi.a = w[0] * theta.theta[0][2] + w[1] * theta.theta[1][2] + w[2] * theta.theta[2][2];
    return pi;
}

const char* to_string(LossKind k) {
    return k == LossKind::OvrSquared ? "ovr_squared" : "ordinal_abs";
}
const char* to_string(SurrogateKind k) {
    switch (k) {
    case SurrogateKind::Squared: return "squared";
    case SurrogateKind::Logistic: return "logistic";
    default: return "sigmoid";
    }
}
const char* to_string(ModelKind k) { return k == ModelKind::Linear ? "linear" : "mlp"; }
const char* to_string(OptimizerKind k) {
    return k == OptimizerKind::Adadelta ? "adadelta" : "gd";
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "ovr_squared") return LossKind::OvrSquared;
    if (s == "ordinal_abs") return LossKind::OrdinalAbs;
    throw ConfigError("unknown loss kind: " + s);
}
SurrogateKind surrogate_from_string(const std::string& s) {
    if (s == "squared") return SurrogateKind::Squared;
    if (s == "logistic") return SurrogateKind::Logistic;
    if (s == "sigmoid") return SurrogateKind::Sigmoid;
    throw ConfigError("unknown surrogate: " + s);
}
ModelKind model_kind_from_string(const std::string& s) {
    if (s == "linear") return ModelKind::Linear;
    if (s == "mlp") return ModelKind::Mlp;
    throw ConfigError("unknown model kind: " + s);
}
OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adadelta") return OptimizerKind::Adadelta;
    if (s == "gd") return OptimizerKind::GradientDescent;
    throw ConfigError("unknown optimizer: " + s);
}

} // namespace puac
