#include "puac/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <thread>

#include <json.hpp>

#include "puac/baselines.hpp"
#include "puac/errors.hpp"
#include "puac/training.hpp"

namespace puac {

Metrics evaluate_predictions(const std::vector<ClassLabel>& pred, const LabeledSet& test) {
    if (test.size() == 0 || pred.size() != test.size())
        throw DimensionMismatch("evaluate: prediction/test size mismatch");
    Metrics m;
    m.total = test.size();
    for (std::size_t i = 0; i < test.size(); ++i) {
        const std::size_t t = label_index(test.y[i]);
        const std::size_t p = label_index(pred[i]);
        m.confusion[t][p] += 1;
        m.class_counts[t] += 1;
    }
    std::size_t correct = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        if (m.class_counts[k] == 0)
            throw MissingClass(std::string("evaluate: test set has no samples of class ") +
                               label_name(kAllLabels[k]));
        m.per_class[k] =
            static_cast<double>(m.confusion[k][k]) / static_cast<double>(m.class_counts[k]);
        correct += m.confusion[k][k];
    }
    m.overall = static_cast<double>(correct) / static_cast<double>(m.total);
    m.ident_a = m.per_class[label_index(ClassLabel::A)];
    return m;
}

Metrics evaluate(const Scorer& model, const LabeledSet& test, LossKind loss) {
    std::vector<ClassLabel> pred(test.size());
    Scorer::Workspace ws;
    for (std::size_t i = 0; i < test.size(); ++i) {
        model.forward(test.x.row(i), ws);
        pred[i] = loss == LossKind::OvrSquared ? predict_ovr(ws.scores)
                                               : predict_ordinal(ws.scores[0]);
    }
    return evaluate_predictions(pred, test);
}

ClassLabel bayes_predict(const GaussianClassSpec& spec, const AggregatedPriors& pi_test,
                         std::span<const double> x) {
    // log pi_c - 1/2 sum_j ((x_j - mu_j)^2 / var_j + log var_j), argmax over c.
    double best = -std::numeric_limits<double>::infinity();
    ClassLabel best_label = ClassLabel::P;
    for (ClassLabel c : kAllLabels) {
        const std::size_t k = label_index(c);
        const double prior = pi_test.at(c);
        if (prior <= 0.0)
            continue;
        double s = std::log(prior);
        for (std::size_t j = 0; j < spec.dim; ++j) {
            const double d = x[j] - spec.mean[k][j];
            s -= 0.5 * (d * d / spec.var[k][j] + std::log(spec.var[k][j]));
        }
        if (s > best) {
            best = s;
            best_label = c;
        }
    }
    return best_label;
}

BayesAccuracy bayes_accuracy(const GaussianClassSpec& spec, const AggregatedPriors& pi_test,
                             std::size_t n, std::uint64_t seed) {
    if (n == 0)
        throw InvalidArgument("bayes_accuracy: n must be >= 1");
    spec.validate();
    Rng rng(seed);
    const std::array<double, 3> probs = {pi_test.p, pi_test.n, pi_test.a};
    std::vector<double> x(spec.dim);
    Metrics m;
    m.total = n;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        const ClassLabel y =
            u < probs[0] ? ClassLabel::P : (u < probs[0] + probs[1] ? ClassLabel::N : ClassLabel::A);
        const std::size_t k = label_index(y);
        for (std::size_t j = 0; j < spec.dim; ++j)
            x[j] = spec.mean[k][j] + std::sqrt(spec.var[k][j]) * rng.normal();
        const ClassLabel pred = bayes_predict(spec, pi_test, x);
        m.confusion[k][label_index(pred)] += 1;
        m.class_counts[k] += 1;
    }
    std::size_t correct = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        if (m.class_counts[k] > 0)
            m.per_class[k] = static_cast<double>(m.confusion[k][k]) /
                             static_cast<double>(m.class_counts[k]);
        correct += m.confusion[k][k];
    }
    m.overall = static_cast<double>(correct) / static_cast<double>(n);
    m.ident_a = m.per_class[label_index(ClassLabel::A)];
    BayesAccuracy out;
    out.accuracy = m.overall;
    out.std_err = std::sqrt(m.overall * (1.0 - m.overall) / static_cast<double>(n));
    out.metrics = m;
    return out;
}

namespace {

struct CellResult {
    std::vector<ExperimentRow> rows;
    std::vector<std::string> errors;
};

CellResult run_cell(const GridCell& cell, std::size_t rep, const ExperimentGrid& grid,
                    const GenConfig& base, const RunConfig& train_base) {
    CellResult out;
    // The seed depends on the repetition only: cells of one repetition see
    // the same generated data, so a shift-only cell evaluates the identical
    // trained model and perturbed-prior cells differ purely in training.
    const std::uint64_t seed = derive_seed(grid.base_seed, rep);
    try {
        GenConfig gen = base;
        gen.seed = seed;
        if (cell.n_p > 0) gen.n_p = cell.n_p;
        if (cell.n_u > 0) gen.n_u = cell.n_u;
        if (cell.n_a > 0) gen.n_a = cell.n_a;
        const PuacDataset data = sample_puac(gen);
        if (!data.test)
            throw MissingClass("experiment cells require a test split (n_test > 0)");

        const PriorMatrix true_theta = validate_priors(gen.theta);
        const PriorMatrix train_theta = perturb_priors(
            true_theta, cell.prior_eta[0], cell.prior_eta[1], cell.prior_eta[2]);

        RunConfig rc = train_base;
        rc.seed = seed;
        const TrainReport report = train(rc, data, train_theta);

        LabeledSet test = *data.test;
        const bool shifted = cell.shift_eta != std::array<double, 3>{1.0, 1.0, 1.0};
        if (shifted)
            test = shift_test(test, cell.shift_eta, derive_seed(seed, 0x5F));

        ExperimentRow row;
        row.method = "upuac";
        row.cell = cell.id;
        row.rep = rep;
        row.prior_eta = cell.prior_eta;
        row.shift_eta = cell.shift_eta;
        row.n_p = gen.n_p;
        row.n_u = gen.n_u;
        row.n_a = gen.n_a;
        row.seed = seed;
        row.metrics = evaluate(report.model, test, rc.loss);
        row.train_risk_final = report.epoch_risk.empty() ? 0.0 : report.epoch_risk.back();
        out.rows.push_back(std::move(row));

        if (grid.with_baselines) {
            BinaryPuConfig bp;
            bp.pi_plus = merged_positive_prior(true_theta, gen.n_u, gen.n_a);
            PuacDataset eval_data = data;
            eval_data.test = test;
            for (const bool clamp : {false, true}) {
                bp.nn_clamp = clamp;
                bp.surrogate = clamp ? SurrogateKind::Sigmoid : SurrogateKind::Logistic;
                RunConfig brc = train_base;
                brc.seed = seed;
                const BaselineOutcome b = run_binary_baseline(eval_data, bp, brc);
                ExperimentRow brow = out.rows.front();
                brow.method = clamp ? "nnpu" : "upu";
                brow.metrics = b.metrics;
                brow.train_risk_final = b.final_risk;
                out.rows.push_back(std::move(brow));
            }
        }
    } catch (const std::exception& e) {
        out.errors.push_back(cell.id + "/" + std::to_string(rep) + ": " + e.what());
    }
    return out;
}

} // namespace

ExperimentReport run_experiment(const ExperimentGrid& grid, const GenConfig& base,
                                const RunConfig& train_base, std::size_t jobs) {
    if (grid.cells.empty() || grid.repetitions == 0)
        throw InvalidArgument("run_experiment: grid must be non-empty");

    struct Task {
        std::size_t cell_idx;
        std::size_t rep;
    };
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < grid.cells.size(); ++c)
        for (std::size_t r = 0; r < grid.repetitions; ++r)
            tasks.push_back({c, r});

    std::vector<CellResult> results(tasks.size());
    if (jobs <= 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t)
            results[t] =
                run_cell(grid.cells[tasks[t].cell_idx], tasks[t].rep, grid, base, train_base);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t t = next.fetch_add(1);
                if (t >= tasks.size())
                    return;
                results[t] = run_cell(grid.cells[tasks[t].cell_idx], tasks[t].rep, grid, base,
                                      train_base);
            }
        };
        std::vector<std::thread> pool;
        const std::size_t n_threads = std::min(jobs, tasks.size());
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    ExperimentReport report;
    for (auto& r : results) {
        for (auto& row : r.rows)
            report.rows.push_back(std::move(row));
        for (auto& e : r.errors)
            report.cell_errors.push_back(std::move(e));
    }
    return report;
}

namespace {

void append_num(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out += buf;
}

} // namespace

std::string report_csv(const ExperimentReport& report) {
    std::string out = "method,cell,rep,eta_u_p,eta_a_p,eta_a_n,shift_p,shift_n,shift_a,"
                      "n_p,n_u,n_a,seed,overall_acc,acc_p,acc_n,acc_a,ident_a,"
                      "train_risk_final\n";
    for (const ExperimentRow& r : report.rows) {
        out += r.method + "," + r.cell + "," + std::to_string(r.rep) + ",";
        for (double e : r.prior_eta) {
            append_num(out, e);
            out += ',';
        }
        for (double e : r.shift_eta) {
            append_num(out, e);
            out += ',';
        }
        out += std::to_string(r.n_p) + "," + std::to_string(r.n_u) + "," +
               std::to_string(r.n_a) + "," + std::to_string(r.seed) + ",";
        append_num(out, r.metrics.overall);
        out += ',';
        append_num(out, r.metrics.per_class[0]);
        out += ',';
        append_num(out, r.metrics.per_class[1]);
        out += ',';
        append_num(out, r.metrics.per_class[2]);
        out += ',';
        append_num(out, r.metrics.ident_a);
        out += ',';
        append_num(out, r.train_risk_final);
        out += '\n';
    }
    return out;
}

void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open report for writing: " + path.string());
    f << report_csv(report);
}

std::string summary_json(const ExperimentReport& report) {
    struct Acc {
        std::vector<double> overall, ident;
    };
    std::map<std::string, Acc> by_cell; // keyed by method/cell, ordered
    for (const ExperimentRow& r : report.rows) {
        Acc& a = by_cell[r.method + "/" + r.cell];
        a.overall.push_back(r.metrics.overall);
        a.ident.push_back(r.metrics.ident_a);
    }
    auto mean_std = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v)
            m += x;
        m /= static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v)
            s += (x - m) * (x - m);
        s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
        return std::pair<double, double>(m, s);
    };
    nlohmann::json cells = nlohmann::json::object();
    for (const auto& [key, acc] : by_cell) {
        const auto [om, os] = mean_std(acc.overall);
        const auto [im, is] = mean_std(acc.ident);
        cells[key] = {{"repetitions", acc.overall.size()},
                      {"overall_acc_mean", om},
                      {"overall_acc_std", os},
                      {"ident_a_mean", im},
                      {"ident_a_std", is}};
    }
    nlohmann::json j;
    j["cells"] = cells;
    j["errors"] = report.cell_errors;
    return j.dump(2) + "\n";
}

std::string metrics_json(const Metrics& m) {
    nlohmann::json j;
    j["overall_acc"] = m.overall;
    j["acc_p"] = m.per_class[0];
    j["acc_n"] = m.per_class[1];
    j["acc_a"] = m.per_class[2];
    j["ident_a"] = m.ident_a;
    j["confusion"] = m.confusion;
    j["class_counts"] = m.class_counts;
    j["total"] = m.total;
    return j.dump(2) + "\n";
}

} // namespace puac
