#include "puac/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "puac/baselines.hpp"
#include "puac/config_file.hpp"
#include "puac/core_types.hpp"
#include "puac/datagen.hpp"
#include "puac/errors.hpp"
#include "puac/eval.hpp"
#include "puac/prior_estimation.hpp"
#include "puac/training.hpp"

namespace puac {

namespace {

namespace fs = std::filesystem;

std::string hex8(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%08llx", static_cast<unsigned long long>(h & 0xFFFFFFFFULL));
    return buf;
}

fs::path run_root(const std::string& out_flag) {
    if (!out_flag.empty())
        return out_flag;
    if (const char* env = std::getenv("PUAC_RUN_ROOT"); env && *env)
        return env;
    return "runs";
}

fs::path make_run_dir(const std::string& out_flag, const std::string& command,
                      const ConfigFile& resolved, std::uint64_t seed) {
    const std::uint64_t h = fnv1a64(command + "\n" + resolved.canonical());
    fs::path dir = run_root(out_flag) /
                   (command + "-" + hex8(h) + "-s" + std::to_string(seed));
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot write " + path.string());
    f << text;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const ConfigFile& resolved, const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = resolved.entries();
    j["outputs"] = outputs;
    write_text(dir / "manifest.json", j.dump(2) + "\n");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ", ";
        out += fmt(v[i]);
    }
    return out + "]";
}

// ---- config -> domain objects ------------------------------------------

GaussianClassSpec spec_from_config(const ConfigFile& c) {
    GaussianClassSpec spec;
    spec.dim = static_cast<std::size_t>(c.get_int("spec.dim", 2));
    const std::vector<double> unit(spec.dim, 1.0);
    // Default geometry: the three classes sit 3 sigma apart along the first
    // two axes (collapsed when dim == 1; set means explicitly then).
    std::vector<double> mean_n(spec.dim, 0.0), mean_a(spec.dim, 0.0);
    mean_n[0] = 3.0;
    mean_a[spec.dim > 1 ? 1 : 0] = 3.0;
    spec.mean[0] = c.get_array("spec.mean_p", std::vector<double>(spec.dim, 0.0));
    spec.mean[1] = c.get_array("spec.mean_n", mean_n);
    spec.mean[2] = c.get_array("spec.mean_a", mean_a);
    spec.var[0] = c.get_array("spec.var_p", unit);
    spec.var[1] = c.get_array("spec.var_n", unit);
    spec.var[2] = c.get_array("spec.var_a", unit);
    return spec;
}

PriorMatrix theta_from_config(const ConfigFile& c) {
    const double up = c.get_double("priors.theta_u_p", 0.5);
    const double ap = c.get_double("priors.theta_a_p", 0.2);
    const double an = c.get_double("priors.theta_a_n", 0.3);
    std::array<std::array<double, 3>, 3> raw{};
    raw[0] = {1.0, 0.0, 0.0};
    raw[1] = {up, 1.0 - up, 0.0};
    raw[2] = {ap, an, 1.0 - ap - an};
    return validate_priors(raw);
}

GenConfig gen_from_config(const ConfigFile& c) {
    GenConfig g;
    g.spec = spec_from_config(c);
    g.theta = theta_from_config(c);
    g.n_p = static_cast<std::size_t>(c.get_int("sizes.n_p", 2000));
    g.n_u = static_cast<std::size_t>(c.get_int("sizes.n_u", 2000));
    g.n_a = static_cast<std::size_t>(c.get_int("sizes.n_a", 2000));
    g.n_test = static_cast<std::size_t>(c.get_int("sizes.n_test", 6000));
    g.seed = static_cast<std::uint64_t>(c.get_int("run.seed", 1));
    if (c.has("run.test_pi")) {
        const auto pi = c.get_array("run.test_pi");
        if (pi.size() != 3)
            throw ConfigError("run.test_pi must have three entries");
        g.test_priors = {pi[0], pi[1], pi[2]};
    } else {
        g.test_priors = aggregate_priors(g.theta, g.n_p, g.n_u, g.n_a);
    }
    return g;
}

RunConfig run_from_config(const ConfigFile& c) {
    RunConfig r;
    r.seed = static_cast<std::uint64_t>(c.get_int("train.seed", 1));
    r.loss = loss_kind_from_string(c.get_string("train.loss", "ovr_squared"));
    r.surrogate = surrogate_from_string(c.get_string("train.surrogate", "squared"));
    r.model = model_kind_from_string(c.get_string("train.model", "mlp"));
    r.hidden_width = static_cast<std::size_t>(c.get_int("train.hidden", 32));
    r.epochs = static_cast<std::size_t>(c.get_int("train.epochs", 200));
    r.batch_size = static_cast<std::size_t>(c.get_int("train.batch", 128));
    r.optimizer.kind = optimizer_from_string(c.get_string("train.optimizer", "adadelta"));
    r.optimizer.rho = c.get_double("train.rho", 0.95);
    r.optimizer.eps = c.get_double("train.eps", 1e-6);
    r.optimizer.lr = c.get_double("train.lr", 0.05);
    r.validation_fraction = c.get_double("train.validation_fraction", 0.0);
    r.early_stop = c.get_bool("train.early_stop", false);
    return r;
}

KernelConfig kernel_from_config(const ConfigFile& c) {
    KernelConfig k;
    k.bandwidth = c.get_double("kernel.bandwidth", 0.0);
    k.bandwidth_cap = static_cast<std::size_t>(c.get_int("kernel.bandwidth_cap", 1000));
    k.gram_cap = static_cast<std::size_t>(c.get_int("kernel.gram_cap", 800));
    k.slope_threshold = c.get_double("kernel.slope_threshold", 0.1);
    k.seed = static_cast<std::uint64_t>(c.get_int("kernel.seed", 0x5EED));
    return k;
}

// Mirrors every key the command consumed back into the resolved config, so
// the manifest records the full effective configuration.
void resolve_gen(ConfigFile& c, const GenConfig& g) {
    c.set("spec.dim", std::to_string(g.spec.dim));
    c.set("spec.mean_p", fmt(g.spec.mean[0]));
    c.set("spec.mean_n", fmt(g.spec.mean[1]));
    c.set("spec.mean_a", fmt(g.spec.mean[2]));
    c.set("spec.var_p", fmt(g.spec.var[0]));
    c.set("spec.var_n", fmt(g.spec.var[1]));
    c.set("spec.var_a", fmt(g.spec.var[2]));
    c.set("priors.theta_u_p", fmt(g.theta.theta[1][0]));
    c.set("priors.theta_a_p", fmt(g.theta.theta[2][0]));
    c.set("priors.theta_a_n", fmt(g.theta.theta[2][1]));
    c.set("sizes.n_p", std::to_string(g.n_p));
    c.set("sizes.n_u", std::to_string(g.n_u));
    c.set("sizes.n_a", std::to_string(g.n_a));
    c.set("sizes.n_test", std::to_string(g.n_test));
    c.set("run.seed", std::to_string(g.seed));
    c.set("run.test_pi", fmt({g.test_priors.p, g.test_priors.n, g.test_priors.a}));
}

void resolve_run(ConfigFile& c, const RunConfig& r) {
    c.set("train.seed", std::to_string(r.seed));
    c.set("train.loss", std::string("\"") + to_string(r.loss) + "\"");
    c.set("train.surrogate", std::string("\"") + to_string(r.surrogate) + "\"");
    c.set("train.model", std::string("\"") + to_string(r.model) + "\"");
    c.set("train.hidden", std::to_string(r.hidden_width));
    c.set("train.epochs", std::to_string(r.epochs));
    c.set("train.batch", std::to_string(r.batch_size));
    c.set("train.optimizer", std::string("\"") + to_string(r.optimizer.kind) + "\"");
    c.set("train.rho", fmt(r.optimizer.rho));
    c.set("train.eps", fmt(r.optimizer.eps));
    c.set("train.lr", fmt(r.optimizer.lr));
    c.set("train.validation_fraction", fmt(r.validation_fraction));
    c.set("train.early_stop", r.early_stop ? "true" : "false");
}

void resolve_kernel(ConfigFile& c, const KernelConfig& k) {
    c.set("kernel.bandwidth", fmt(k.bandwidth));
    c.set("kernel.bandwidth_cap", std::to_string(k.bandwidth_cap));
    c.set("kernel.gram_cap", std::to_string(k.gram_cap));
    c.set("kernel.slope_threshold", fmt(k.slope_threshold));
    c.set("kernel.seed", std::to_string(k.seed));
}

PriorMatrix theta_from_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open priors file: " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    const auto rows = j.at("theta").get<std::array<std::array<double, 3>, 3>>();
    return validate_priors(rows);
}

std::string theta_json(const PriorMatrix& theta) {
    nlohmann::json j;
    j["theta"] = theta.theta;
    return j.dump(2) + "\n";
}

// ---- subcommands ---------------------------------------------------------

int cmd_gen(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_flag) {
    ConfigFile c = config_path.empty() ? ConfigFile() : ConfigFile::parse_file(config_path);
    GenConfig g = gen_from_config(c);
    if (seed)
        g.seed = *seed;
    resolve_gen(c, g);

    const fs::path dir = make_run_dir(out_flag, "gen", c, g.seed);
    const PuacDataset data = sample_puac(g);
    save_csv(data, dir / "dataset.csv");
    write_text(dir / "theta.json", theta_json(g.theta));
    write_manifest(dir, "gen", c, {"dataset.csv", "theta.json"});
    std::cout << dir.string() << "\n";
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& config_path,
              const std::string& priors_mode, const std::string& theta_path,
              std::optional<std::uint64_t> seed, const std::string& out_flag) {
    ConfigFile c = config_path.empty() ? ConfigFile() : ConfigFile::parse_file(config_path);
    RunConfig r = run_from_config(c);
    if (seed)
        r.seed = *seed;
    resolve_run(c, r);
    c.set("train.priors", "\"" + priors_mode + "\"");
    c.set("train.data", "\"" + data_path + "\"");

    const PuacDataset data = load_csv(data_path);

    PriorMatrix theta;
    std::string estimated_json;
    if (priors_mode == "true") {
        fs::path tp = theta_path.empty() ? fs::path(data_path).parent_path() / "theta.json"
                                         : fs::path(theta_path);
        theta = theta_from_json_file(tp);
    } else if (priors_mode == "estimated") {
        KernelConfig k = kernel_from_config(c);
        resolve_kernel(c, k);
        const PriorEstimate est = estimate_puac_priors(data, k);
        theta = est.theta;
        estimated_json = prior_estimate_json(est);
    } else {
        throw ConfigError("--priors must be 'true' or 'estimated'");
    }

    const fs::path dir = make_run_dir(out_flag, "train", c, r.seed);
    const TrainReport report = train(r, data, theta);
    save_checkpoint(report.model, dir / "checkpoint.json");
    write_text(dir / "train_report.json", train_report_json(report));
    std::vector<std::string> outputs = {"checkpoint.json", "train_report.json"};
    if (!estimated_json.empty()) {
        write_text(dir / "estimated_priors.json", estimated_json);
        outputs.push_back("estimated_priors.json");
    }
    write_manifest(dir, "train", c, outputs);
    std::cout << dir.string() << "\n";
    return 0;
}

int cmd_estimate(const std::string& data_path, const std::string& config_path,
                 std::optional<std::uint64_t> seed, const std::string& out_flag) {
    ConfigFile c = config_path.empty() ? ConfigFile() : ConfigFile::parse_file(config_path);
    KernelConfig k = kernel_from_config(c);
    if (seed)
        k.seed = *seed;
    resolve_kernel(c, k);
    c.set("estimate.data", "\"" + data_path + "\"");

    const PuacDataset data = load_csv(data_path);
    const fs::path dir = make_run_dir(out_flag, "estimate-priors", c, k.seed);
    const PriorEstimate est = estimate_puac_priors(data, k);
    write_text(dir / "estimated_priors.json", prior_estimate_json(est));
    write_manifest(dir, "estimate-priors", c, {"estimated_priors.json"});
    std::cout << dir.string() << "\n";
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::vector<double>& shift, std::optional<std::uint64_t> seed,
             const std::string& out_flag) {
    ConfigFile c;
    c.set("eval.model", "\"" + model_path + "\"");
    c.set("eval.data", "\"" + data_path + "\"");
    const std::uint64_t s = seed.value_or(1);
    c.set("eval.seed", std::to_string(s));

    const Scorer model = load_checkpoint(model_path);
    const PuacDataset data = load_csv(data_path);
    if (!data.test)
        throw MissingClass("eval: dataset has no test rows");
    LabeledSet test = *data.test;
    if (!shift.empty()) {
        if (shift.size() != 3)
            throw ConfigError("--shift expects three comma-separated multipliers");
        c.set("eval.shift", fmt(shift));
        test = shift_test(test, {shift[0], shift[1], shift[2]}, derive_seed(s, 0x5F));
    }
    const LossKind loss = model.out_dim() == 1 ? LossKind::OrdinalAbs : LossKind::OvrSquared;

    const fs::path dir = make_run_dir(out_flag, "eval", c, s);
    const Metrics m = evaluate(model, test, loss);
    write_text(dir / "metrics.json", metrics_json(m));
    write_manifest(dir, "eval", c, {"metrics.json"});
    std::cout << dir.string() << "\n";
    return 0;
}

int cmd_experiment(const std::string& grid_path, std::size_t jobs,
                   std::optional<std::uint64_t> seed, const std::string& out_flag) {
    ConfigFile c = ConfigFile::parse_file(grid_path);
    GenConfig base = gen_from_config(c);
    RunConfig train_base = run_from_config(c);
    resolve_gen(c, base);
    resolve_run(c, train_base);

    ExperimentGrid grid;
    grid.repetitions = static_cast<std::size_t>(c.get_int("grid.repetitions", 1));
    grid.with_baselines = c.get_bool("grid.with_baselines", false);
    grid.base_seed = static_cast<std::uint64_t>(c.get_int("grid.seed", 1));
    if (seed)
        grid.base_seed = *seed;
    const auto n_cells = static_cast<std::size_t>(c.get_int("grid.cells"));
    for (std::size_t i = 1; i <= n_cells; ++i) {
        const std::string t = "cell" + std::to_string(i);
        GridCell cell;
        cell.id = c.get_string(t + ".id", t);
        const auto pe = c.get_array(t + ".prior_eta", {1.0, 1.0, 1.0});
        const auto se = c.get_array(t + ".shift_eta", {1.0, 1.0, 1.0});
        if (pe.size() != 3 || se.size() != 3)
            throw ConfigError(t + ": prior_eta and shift_eta need three entries");
        cell.prior_eta = {pe[0], pe[1], pe[2]};
        cell.shift_eta = {se[0], se[1], se[2]};
        cell.n_p = static_cast<std::size_t>(c.get_int(t + ".n_p", 0));
        cell.n_u = static_cast<std::size_t>(c.get_int(t + ".n_u", 0));
        cell.n_a = static_cast<std::size_t>(c.get_int(t + ".n_a", 0));
        grid.cells.push_back(std::move(cell));
    }
    c.set("grid.seed", std::to_string(grid.base_seed));

    const fs::path dir = make_run_dir(out_flag, "experiment", c, grid.base_seed);
    const ExperimentReport report = run_experiment(grid, base, train_base, jobs);
    write_report_csv(report, dir / "report.csv");
    write_text(dir / "summary.json", summary_json(report));
    write_manifest(dir, "experiment", c, {"report.csv", "summary.json"});
    std::cout << dir.string() << "\n";
    if (!report.cell_errors.empty()) {
        for (const auto& e : report.cell_errors)
            std::cerr << "cell error: " << e << "\n";
        return 1;
    }
    return 0;
}

int cmd_baselines(const std::string& data_path, const std::string& config_path,
                  const std::string& theta_path, std::optional<std::uint64_t> seed,
                  const std::string& out_flag) {
    ConfigFile c = config_path.empty() ? ConfigFile() : ConfigFile::parse_file(config_path);
    RunConfig r = run_from_config(c);
    if (seed)
        r.seed = *seed;
    resolve_run(c, r);
    c.set("baselines.data", "\"" + data_path + "\"");

    const PuacDataset data = load_csv(data_path);

    BinaryPuConfig bp;
    if (c.has("baselines.pi_plus")) {
        bp.pi_plus = c.get_double("baselines.pi_plus");
    } else {
        fs::path tp = theta_path.empty() ? fs::path(data_path).parent_path() / "theta.json"
                                         : fs::path(theta_path);
        bp.pi_plus = merged_positive_prior(theta_from_json_file(tp), data.unl.size(),
                                           data.aug.size());
    }
    c.set("baselines.pi_plus", fmt(bp.pi_plus));

    const fs::path dir = make_run_dir(out_flag, "baselines", c, r.seed);
    nlohmann::json j;
    for (const bool clamp : {false, true}) {
        bp.nn_clamp = clamp;
        bp.surrogate = clamp ? SurrogateKind::Sigmoid : SurrogateKind::Logistic;
        const BaselineOutcome out = run_binary_baseline(data, bp, r);
        nlohmann::json m = nlohmann::json::parse(metrics_json(out.metrics));
        m["final_risk"] = out.final_risk;
        j[clamp ? "nnpu" : "upu"] = m;
    }
    write_text(dir / "baseline_metrics.json", j.dump(2) + "\n");
    write_manifest(dir, "baselines", c, {"baseline_metrics.json"});
    std::cout << dir.string() << "\n";
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Positive-unlabeled learning with an augmented class: data generation, "
                 "risk-rewrite training, prior estimation, baselines and experiment grids"};
    app.require_subcommand(1);

    std::string config_path, data_path, theta_path, model_path, grid_path, out_flag;
    std::string priors_mode = "true";
    std::vector<double> shift;
    std::size_t jobs = 1;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Override the config seed");
        cmd->add_option("--out", out_flag, "Run-directory root (default $PUAC_RUN_ROOT or ./runs)");
    };

    CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic dataset CSV");
    gen->add_option("--config", config_path, "Generation config file");
    add_common(gen);

    CLI::App* tr = app.add_subcommand("train", "Train a scorer on a dataset CSV");
    tr->add_option("--data", data_path, "Dataset CSV")->required();
    tr->add_option("--config", config_path, "Training config file");
    tr->add_option("--priors", priors_mode, "'true' (ground-truth theta.json) or 'estimated'");
    tr->add_option("--theta", theta_path, "Priors JSON (default: theta.json beside the data)");
    add_common(tr);

    CLI::App* est = app.add_subcommand("estimate-priors", "Estimate class priors from the bags");
    est->add_option("--data", data_path, "Dataset CSV")->required();
    est->add_option("--config", config_path, "Kernel config file");
    add_common(est);

    CLI::App* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset's test rows");
    ev->add_option("--model", model_path, "Checkpoint JSON")->required();
    ev->add_option("--data", data_path, "Dataset CSV")->required();
    ev->add_option("--shift", shift, "Test-prior shift multipliers p,n,a")->delimiter(',');
    add_common(ev);

    CLI::App* ex = app.add_subcommand("experiment", "Run a grid of generate/train/eval cells");
    ex->add_option("--grid", grid_path, "Grid config file")->required();
    ex->add_option("--jobs", jobs, "Worker threads for grid cells (default 1)");
    add_common(ex);

    CLI::App* bl = app.add_subcommand("baselines", "Run the binary PU baselines");
    bl->add_option("--data", data_path, "Dataset CSV")->required();
    bl->add_option("--config", config_path, "Baseline config file");
    bl->add_option("--theta", theta_path, "Priors JSON for the merged-pool prior");
    add_common(bl);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen(config_path, seed, out_flag);
        if (tr->parsed())
            return cmd_train(data_path, config_path, priors_mode, theta_path, seed, out_flag);
        if (est->parsed())
            return cmd_estimate(data_path, config_path, seed, out_flag);
        if (ev->parsed())
            return cmd_eval(model_path, data_path, shift, seed, out_flag);
        if (ex->parsed())
            return cmd_experiment(grid_path, jobs, seed, out_flag);
        if (bl->parsed())
            return cmd_baselines(data_path, config_path, theta_path, seed, out_flag);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace puac
