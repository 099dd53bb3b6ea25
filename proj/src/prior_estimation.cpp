#include "puac/prior_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "puac/errors.hpp"
#include "puac/rng.hpp"

namespace puac {

Embedding Embedding::uniform(const FeatureMatrix& pts) {
    Embedding e;
    e.points = pts;
    e.weights.assign(pts.rows, pts.rows > 0 ? 1.0 / static_cast<double>(pts.rows) : 0.0);
    return e;
}

namespace {

double sq_dist(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - y[j];
        s += d * d;
    }
    return s;
}

double rbf(double sq, double bandwidth) { return std::exp(-sq / (2.0 * bandwidth * bandwidth)); }

// Deterministic down-selection to at most cap rows.
std::vector<std::uint32_t> capped_indices(std::size_t n, std::size_t cap, Rng rng) {
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    while (idx.size() > cap) {
        const std::size_t i = rng.below(idx.size());
        idx[i] = idx.back();
        idx.pop_back();
    }
    return idx;
}

} // namespace

double resolve_bandwidth(const std::vector<const FeatureMatrix*>& sets, const KernelConfig& k) {
    if (k.bandwidth > 0.0)
        return k.bandwidth;
    std::vector<std::span<const double>> pool;
    for (const FeatureMatrix* m : sets)
        for (std::size_t i = 0; i < m->rows; ++i)
            pool.push_back(m->row(i));
    if (pool.size() < 2)
        throw EmptySampleSet("resolve_bandwidth: need at least two points");
    Rng rng = Rng(k.seed).split(0x30);
    while (pool.size() > k.bandwidth_cap) {
        const std::size_t i = rng.below(pool.size());
        pool[i] = pool.back();
        pool.pop_back();
    }
    std::vector<double> dists;
    dists.reserve(pool.size() * (pool.size() - 1) / 2);
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (std::size_t j = i + 1; j < pool.size(); ++j)
            dists.push_back(std::sqrt(sq_dist(pool[i], pool[j])));
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
    double bw = dists[mid];
    if (!(bw > 0.0))
        bw = 1.0; // all points identical
    return bw;
}

double embedding_inner(const Embedding& a, const Embedding& b, double bandwidth) {
    if (a.points.rows == 0 || b.points.rows == 0)
        throw EmptySampleSet("embedding_inner: empty sample set");
    if (a.points.dim != b.points.dim)
        throw DimensionMismatch("embedding_inner: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.points.rows; ++i) {
        const auto xi = a.points.row(i);
        const double wi = a.weights[i];
        if (wi == 0.0)
            continue;
        double inner = 0.0;
        for (std::size_t j = 0; j < b.points.rows; ++j)
            inner += b.weights[j] * rbf(sq_dist(xi, b.points.row(j)), bandwidth);
        s += wi * inner;
    }
    return s;
}

double rkhs_distance(const Embedding& a, const Embedding& b, const KernelConfig& k) {
    const double bw = resolve_bandwidth({&a.points, &b.points}, k);
    const double sq = embedding_inner(a, a, bw) - 2.0 * embedding_inner(a, b, bw) +
                      embedding_inner(b, b, bw);
    return sq > 0.0 ? std::sqrt(sq) : 0.0;
}

namespace {

// min_{w in simplex} w'Kw - 2 q'w + c0 by away-step Frank-Wolfe with exact
// line search. w and Kw are carried across calls for warm starts along the
// kappa grid. Returns the objective value (clamped at 0); the FW duality gap
// bounds the suboptimality and is reported through *final_gap.
double simplex_qp(const std::vector<double>& K, std::size_t m, const std::vector<double>& q,
                  double c0, std::vector<double>& w, std::vector<double>& Kw,
                  std::size_t max_iters, double gap_tol, double* final_gap) {
    double wKw = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        const double* row = &K[i * m];
        for (std::size_t j = 0; j < m; ++j)
            s += row[j] * w[j];
        Kw[i] = s;
        wKw += w[i] * s;
    }
    *final_gap = 0.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        std::size_t s_fw = 0, s_aw = 0;
        double g_min = std::numeric_limits<double>::infinity();
        double g_max = -std::numeric_limits<double>::infinity();
        double gw = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double g = 2.0 * (Kw[i] - q[i]);
            if (g < g_min) {
                g_min = g;
                s_fw = i;
            }
            if (w[i] > 0.0 && g > g_max) {
                g_max = g;
                s_aw = i;
            }
            gw += g * w[i];
        }
        const double gap_fw = gw - g_min;
        const double gap_aw = g_max - gw;
        *final_gap = gap_fw;
        if (gap_fw <= gap_tol)
            break;
        if (gap_fw >= gap_aw) {
            const double dKd = K[s_fw * m + s_fw] - 2.0 * Kw[s_fw] + wKw;
            const double gamma = dKd > 0.0 ? std::min(1.0, gap_fw / (2.0 * dKd)) : 1.0;
            if (gamma <= 0.0)
                break;
            for (std::size_t i = 0; i < m; ++i) {
                w[i] *= 1.0 - gamma;
                Kw[i] *= 1.0 - gamma;
            }
            w[s_fw] += gamma;
            const double* col = &K[s_fw * m];
            for (std::size_t i = 0; i < m; ++i)
                Kw[i] += gamma * col[i];
        } else {
            const double step_max = w[s_aw] < 1.0 ? w[s_aw] / (1.0 - w[s_aw]) : 1.0;
            const double dKd = wKw - 2.0 * Kw[s_aw] + K[s_aw * m + s_aw];
            const double gamma =
                dKd > 0.0 ? std::min(step_max, gap_aw / (2.0 * dKd)) : step_max;
            if (gamma <= 0.0)
                break;
            for (std::size_t i = 0; i < m; ++i) {
                w[i] *= 1.0 + gamma;
                Kw[i] *= 1.0 + gamma;
            }
            w[s_aw] -= gamma;
            if (w[s_aw] < 0.0)
                w[s_aw] = 0.0;
            const double* col = &K[s_aw * m];
            for (std::size_t i = 0; i < m; ++i)
                Kw[i] -= gamma * col[i];
        }
        wKw = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            wKw += w[i] * Kw[i];
    }
    double qw = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        qw += q[i] * w[i];
    const double value = wKw - 2.0 * qw + c0;
    return value > 0.0 ? value : 0.0;
}

} // namespace

MpeResult estimate_mixture_proportion(const FeatureMatrix& mix, const Embedding& comp,
                                      const KernelConfig& k) {
    if (mix.rows == 0 || comp.points.rows == 0)
        throw EmptySampleSet("estimate_mixture_proportion: empty sample set");
    if (mix.dim != comp.points.dim)
        throw DimensionMismatch("estimate_mixture_proportion: dimension mismatch");

    MpeResult out;
    out.bandwidth = resolve_bandwidth({&mix, &comp.points}, k);
    const double bw = out.bandwidth;

    // Hull atoms: capped subsample of the mixture.
    const std::vector<std::uint32_t> hull =
        capped_indices(mix.rows, k.gram_cap, Rng(k.seed).split(0x31));
    const std::size_t m = hull.size();

    std::vector<double> K(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto xi = mix.row(hull[i]);
        for (std::size_t j = 0; j < m; ++j)
            K[i * m + j] = rbf(sq_dist(xi, mix.row(hull[j])), bw);
    }

    // <phi(h_i), mu_F> over the full mixture and <phi(h_i), mu_H>.
    std::vector<double> to_mix(m, 0.0), to_comp(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto xi = mix.row(hull[i]);
        double s = 0.0;
        for (std::size_t j = 0; j < mix.rows; ++j)
            s += rbf(sq_dist(xi, mix.row(j)), bw);
        to_mix[i] = s / static_cast<double>(mix.rows);
        double t = 0.0;
        for (std::size_t j = 0; j < comp.points.rows; ++j)
            t += comp.weights[j] * rbf(sq_dist(xi, comp.points.row(j)), bw);
        to_comp[i] = t;
    }

    const Embedding mix_emb = Embedding::uniform(mix);
    const double ff = embedding_inner(mix_emb, mix_emb, bw);
    const double fh = embedding_inner(mix_emb, comp, bw);
    const double hh = embedding_inner(comp, comp, bw);

    std::vector<double> w(m, 1.0 / static_cast<double>(m)), Kw(m), q(m);
    const std::size_t n_grid = static_cast<std::size_t>(k.kappa_max / k.kappa_step + 0.5) + 1;
    out.curve_kappa.reserve(n_grid);
    out.curve_distance.reserve(n_grid);
    for (std::size_t g = 0; g < n_grid; ++g) {
        const double kappa = k.kappa_step * static_cast<double>(g);
        const double om = 1.0 - kappa;
        for (std::size_t i = 0; i < m; ++i)
            q[i] = (to_mix[i] - kappa * to_comp[i]) / om;
        const double c0 = (ff - 2.0 * kappa * fh + kappa * kappa * hh) / (om * om);
        // Gap tolerance scales with the target norm: at large kappa the
        // objective grows like 1/(1-kappa)^2 and only relative accuracy
        // matters for the slope rule.
        const double scale = std::max(1.0, std::abs(c0));
        double gap = 0.0;
        const double value =
            simplex_qp(K, m, q, c0, w, Kw, k.max_qp_iters, k.qp_gap_tol * scale, &gap);
        if (gap > 1e-3 * scale)
            throw NonConvergence("estimate_mixture_proportion: distance curve failed to "
                                 "stabilize at kappa=" +
                                 std::to_string(kappa));
        out.curve_kappa.push_back(kappa);
        out.curve_distance.push_back(std::sqrt(value));
    }

    // Slope threshold rule in lambda = 1/(1-kappa): the estimate is the left
    // end of the first grid interval whose slope exceeds the threshold.
    out.kappa = out.curve_kappa.back();
    for (std::size_t i = 0; i + 1 < out.curve_kappa.size(); ++i) {
        const double l0 = 1.0 / (1.0 - out.curve_kappa[i]);
        const double l1 = 1.0 / (1.0 - out.curve_kappa[i + 1]);
        const double slope = (out.curve_distance[i + 1] - out.curve_distance[i]) / (l1 - l0);
        if (slope > k.slope_threshold) {
            out.kappa = out.curve_kappa[i];
            break;
        }
    }
    return out;
}

double estimate_mixture_proportion_value(const FeatureMatrix& mix, const FeatureMatrix& comp,
                                         const KernelConfig& k) {
    return estimate_mixture_proportion(mix, Embedding::uniform(comp), k).kappa;
}

PriorEstimate estimate_puac_priors(const PuacDataset& data, const KernelConfig& k) {
    if (data.pos.size() == 0 || data.unl.size() == 0 || data.aug.size() == 0)
        throw EmptySampleSet("estimate_puac_priors: all three bags must be non-empty");

    PriorEstimate est;
    KernelConfig ku = k;
    ku.seed = derive_seed(k.seed, 1);
    est.curve_u_p =
        estimate_mixture_proportion(data.unl.x, Embedding::uniform(data.pos.x), ku);
    est.raw_theta_u_p = est.curve_u_p.kappa;
    const double theta_u_n = 1.0 - est.raw_theta_u_p;
    if (theta_u_n < k.degenerate_tol)
        throw DegeneratePrior("estimate_puac_priors: estimated theta_u^n is near zero");

    KernelConfig ka = k;
    ka.seed = derive_seed(k.seed, 2);
    est.curve_a_p =
        estimate_mixture_proportion(data.aug.x, Embedding::uniform(data.pos.x), ka);
    est.raw_theta_a_p = est.curve_a_p.kappa;

    // Pseudo-negative signed embedding (mu_u - theta_u^p mu_p) / theta_u^n.
    Embedding pseudo_neg;
    pseudo_neg.points.dim = data.dim;
    pseudo_neg.points.data = data.unl.x.data;
    pseudo_neg.points.rows = data.unl.size();
    for (std::size_t i = 0; i < data.pos.size(); ++i)
        pseudo_neg.points.push_row(data.pos.x.row(i));
    pseudo_neg.weights.assign(pseudo_neg.points.rows, 0.0);
    const double wu = 1.0 / (static_cast<double>(data.unl.size()) * theta_u_n);
    const double wp =
        -est.raw_theta_u_p / (static_cast<double>(data.pos.size()) * theta_u_n);
    for (std::size_t i = 0; i < data.unl.size(); ++i)
        pseudo_neg.weights[i] = wu;
    for (std::size_t i = 0; i < data.pos.size(); ++i)
        pseudo_neg.weights[data.unl.size() + i] = wp;

    KernelConfig kn = k;
    kn.seed = derive_seed(k.seed, 3);
    est.curve_a_n = estimate_mixture_proportion(data.aug.x, pseudo_neg, kn);
    est.raw_theta_a_n = est.curve_a_n.kappa;

    // Assemble, clamp and renormalize the augmented row.
    double ap = std::clamp(est.raw_theta_a_p, 0.0, 1.0);
    double an = std::clamp(est.raw_theta_a_n, 0.0, 1.0);
    double aa = std::clamp(1.0 - ap - an, 0.0, 1.0);
    const double sum = ap + an + aa;
    ap /= sum;
    an /= sum;

    std::array<std::array<double, 3>, 3> raw{};
    raw[0] = {1.0, 0.0, 0.0};
    raw[1] = {est.raw_theta_u_p, theta_u_n, 0.0};
    raw[2] = {ap, an, 1.0 - ap - an};
    est.theta = validate_priors(raw);
    return est;
}

std::string prior_estimate_json(const PriorEstimate& est) {
    nlohmann::json j;
    j["theta"] = est.theta.theta;
    j["raw"] = {{"theta_u_p", est.raw_theta_u_p},
                {"theta_a_p", est.raw_theta_a_p},
                {"theta_a_n", est.raw_theta_a_n}};
    auto curve = [](const MpeResult& r) {
        return nlohmann::json{{"kappa", r.kappa},
                              {"bandwidth", r.bandwidth},
                              {"curve_kappa", r.curve_kappa},
                              {"curve_distance", r.curve_distance}};
    };
    j["curves"] = {{"theta_u_p", curve(est.curve_u_p)},
                   {"theta_a_p", curve(est.curve_a_p)},
                   {"theta_a_n", curve(est.curve_a_n)}};
    return j.dump(2) + "\n";
}

} // namespace puac
