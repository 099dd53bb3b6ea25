#include "puac/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "puac/errors.hpp"

namespace puac {

void GaussianClassSpec::validate() const {
    if (dim == 0)
        throw InvalidArgument("GaussianClassSpec: dim must be >= 1");
    for (std::size_t k = 0; k < 3; ++k) {
        if (mean[k].size() != dim || var[k].size() != dim)
            throw DimensionMismatch("GaussianClassSpec: mean/var length must equal dim");
        for (double v : var[k])
            if (!(v > 0.0))
                throw InvalidArgument("GaussianClassSpec: variances must be positive");
    }
}

namespace {

ClassLabel draw_label(Rng& rng, const std::array<double, 3>& probs) {
    const double u = rng.uniform();
    if (u < probs[0])
        return ClassLabel::P;
    if (u < probs[0] + probs[1])
        return ClassLabel::N;
    return ClassLabel::A;
}

void draw_features(Rng& rng, const GaussianClassSpec& spec, ClassLabel c,
                   std::vector<double>& out) {
    const std::size_t k = label_index(c);
    out.resize(spec.dim);
    for (std::size_t j = 0; j < spec.dim; ++j)
        out[j] = spec.mean[k][j] + std::sqrt(spec.var[k][j]) * rng.normal();
}

Bag draw_bag(Rng& rng, const GaussianClassSpec& spec, SourceBag which,
             const std::array<double, 3>& probs, std::size_t n) {
    Bag bag;
    bag.source = which;
    bag.x.dim = spec.dim;
    bag.x.data.reserve(n * spec.dim);
    bag.latent.reserve(n);
    std::vector<double> row;
    for (std::size_t i = 0; i < n; ++i) {
        const ClassLabel c = draw_label(rng, probs);
        draw_features(rng, spec, c, row);
        bag.x.push_row(row);
        bag.latent.push_back(c);
    }
    return bag;
}

} // namespace

PuacDataset sample_puac(const GenConfig& cfg) {
    cfg.spec.validate();
    // Structure only: a degenerate mixture (pure unlabeled bag, say) samples
    // fine; only the risk rewrite needs the denominators nonzero.
    const PriorMatrix theta = validate_prior_structure(cfg.theta.theta);
    if (cfg.n_p == 0 || cfg.n_u == 0 || cfg.n_a == 0)
        throw InvalidArgument("sample_puac: bag counts must be >= 1");

    Rng master(cfg.seed);
    Rng r_pos = master.split(1);
    Rng r_unl = master.split(2);
    Rng r_aug = master.split(3);
    Rng r_test = master.split(4);

    PuacDataset ds;
    ds.dim = cfg.spec.dim;
    ds.pos = draw_bag(r_pos, cfg.spec, SourceBag::Pos, theta.theta[0], cfg.n_p);
    ds.unl = draw_bag(r_unl, cfg.spec, SourceBag::Unl, theta.theta[1], cfg.n_u);
    ds.aug = draw_bag(r_aug, cfg.spec, SourceBag::Aug, theta.theta[2], cfg.n_a);

    if (cfg.n_test > 0) {
        const std::array<double, 3> tp = {cfg.test_priors.p, cfg.test_priors.n,
                                          cfg.test_priors.a};
        LabeledSet test;
        test.x.dim = cfg.spec.dim;
        std::vector<double> row;
        for (std::size_t i = 0; i < cfg.n_test; ++i) {
            const ClassLabel c = draw_label(r_test, tp);
            draw_features(r_test, cfg.spec, c, row);
            test.x.push_row(row);
            test.y.push_back(c);
        }
        ds.test = std::move(test);
    }
    return ds;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(line_no) + ": bad numeric field '" + s + "'");
    }
}

void append_sample(PuacDataset& ds, const Sample& s, std::size_t line_no) {
    Bag* bag = nullptr;
    switch (s.source) {
    case SourceBag::Pos: bag = &ds.pos; break;
    case SourceBag::Unl: bag = &ds.unl; break;
    case SourceBag::Aug: bag = &ds.aug; break;
    }
    bag->x.dim = ds.dim;
    bag->x.push_row(s.x);
    if (s.true_label) {
        if (bag->latent.size() + 1 != bag->x.rows)
            throw ParseError("row " + std::to_string(line_no) +
                             ": labels must be present on all rows of a bag or none");
        bag->latent.push_back(*s.true_label);
    } else if (!bag->latent.empty()) {
        throw ParseError("row " + std::to_string(line_no) +
                         ": labels must be present on all rows of a bag or none");
    }
}

} // namespace

PuacDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open csv: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw ParseError("empty csv: " + path.string());
    const std::vector<std::string> header = split_fields(line);

    std::size_t dim = 0;
    for (; dim < header.size(); ++dim) {
        if (header[dim] != "x" + std::to_string(dim))
            break;
    }
    if (dim == 0)
        throw ParseError("csv header must start with feature columns x0,x1,...");
    if (dim >= header.size() || header[dim] != "source")
        throw ParseError("csv header must contain a 'source' column after the features");
    const bool has_label = dim + 1 < header.size() && header[dim + 1] == "label";
    const std::size_t expected_fields = dim + 1 + (has_label ? 1 : 0);
    if (header.size() != expected_fields)
        throw ParseError("csv header has unexpected trailing columns");

    PuacDataset ds;
    ds.dim = dim;
    ds.pos.source = SourceBag::Pos;
    ds.unl.source = SourceBag::Unl;
    ds.aug.source = SourceBag::Aug;
    ds.pos.x.dim = ds.unl.x.dim = ds.aug.x.dim = dim;
    LabeledSet test;
    test.x.dim = dim;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const std::vector<std::string> f = split_fields(line);
        if (f.size() != expected_fields)
            throw DimensionMismatch("row " + std::to_string(line_no) + ": expected " +
                                    std::to_string(expected_fields) + " fields, got " +
                                    std::to_string(f.size()));
        Sample s;
        s.x.resize(dim);
        for (std::size_t j = 0; j < dim; ++j)
            s.x[j] = parse_double(f[j], line_no);

        const std::string& tag = f[dim];
        std::optional<ClassLabel> label;
        if (has_label && !f[dim + 1].empty()) {
            const std::string& ls = f[dim + 1];
            if (ls == "p")
                label = ClassLabel::P;
            else if (ls == "n")
                label = ClassLabel::N;
            else if (ls == "a")
                label = ClassLabel::A;
            else
                throw ParseError("row " + std::to_string(line_no) + ": bad label '" + ls + "'");
        }

        if (tag == "test") {
            if (!label)
                throw ParseError("row " + std::to_string(line_no) +
                                 ": test rows require the 'label' column");
            test.x.push_row(s.x);
            test.y.push_back(*label);
        } else if (tag == "pos" || tag == "unl" || tag == "aug") {
            s.source = tag == "pos" ? SourceBag::Pos
                                    : (tag == "unl" ? SourceBag::Unl : SourceBag::Aug);
            s.true_label = label;
            append_sample(ds, s, line_no);
        } else {
            throw UnknownSourceTag("row " + std::to_string(line_no) + ": unknown source '" +
                                   tag + "'");
        }
    }
    if (test.size() > 0)
        ds.test = std::move(test);
    return ds;
}

namespace {

void write_value(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

void write_rows(std::string& out, const FeatureMatrix& x, const char* tag,
                const std::vector<ClassLabel>* labels, bool label_col) {
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto row = x.row(i);
        for (std::size_t j = 0; j < x.dim; ++j) {
            write_value(out, row[j]);
            out += ',';
        }
        out += tag;
        if (label_col) {
            out += ',';
            if (labels)
                out += label_name((*labels)[i]);
        }
        out += '\n';
    }
}

} // namespace

void save_csv(const PuacDataset& data, const std::filesystem::path& path) {
    const bool label_col = !data.pos.latent.empty() || !data.unl.latent.empty() ||
                           !data.aug.latent.empty() || data.test.has_value();
    std::string out;
    for (std::size_t j = 0; j < data.dim; ++j)
        out += "x" + std::to_string(j) + ",";
    out += "source";
    if (label_col)
        out += ",label";
    out += '\n';

    write_rows(out, data.pos.x, "pos", data.pos.latent.empty() ? nullptr : &data.pos.latent,
               label_col);
    write_rows(out, data.unl.x, "unl", data.unl.latent.empty() ? nullptr : &data.unl.latent,
               label_col);
    write_rows(out, data.aug.x, "aug", data.aug.latent.empty() ? nullptr : &data.aug.latent,
               label_col);
    if (data.test)
        write_rows(out, data.test->x, "test", &data.test->y, label_col);

    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open csv for writing: " + path.string());
    f << out;
}

LabeledSet shift_test(const LabeledSet& test, const std::array<double, 3>& eta,
                      std::uint64_t seed) {
    for (double e : eta)
        if (!(e > 0.0))
            throw InvalidArgument("shift_test: multipliers must be positive");
    if (test.size() == 0)
        throw EmptyClass("shift_test: empty test set");

    std::array<std::vector<std::uint32_t>, 3> by_class;
    for (std::size_t i = 0; i < test.size(); ++i)
        by_class[label_index(test.y[i])].push_back(static_cast<std::uint32_t>(i));
    for (std::size_t k = 0; k < 3; ++k)
        if (by_class[k].empty())
            throw EmptyClass(std::string("shift_test: no source rows of class ") +
                             label_name(kAllLabels[k]));

    const double n = static_cast<double>(test.size());
    std::array<double, 3> shifted{};
    double norm = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        shifted[k] = eta[k] * static_cast<double>(by_class[k].size()) / n;
        norm += shifted[k];
    }
    for (double& s : shifted)
        s /= norm;

    // Largest-remainder apportionment of the original total.
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double target = shifted[k] * n;
        counts[k] = static_cast<std::size_t>(std::floor(target));
        frac[k] = target - std::floor(target);
        assigned += counts[k];
    }
    while (assigned < test.size()) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < 3; ++k)
            if (frac[k] > frac[best])
                best = k;
        counts[best] += 1;
        frac[best] = -1.0;
        ++assigned;
    }

    Rng rng(seed);
    LabeledSet out;
    out.x.dim = test.x.dim;
    for (std::size_t k = 0; k < 3; ++k) {
        if (counts[k] == 0)
            continue;
        if (by_class[k].empty())
            throw EmptyClass(std::string("shift_test: no source rows of class ") +
                             label_name(kAllLabels[k]));
        for (std::size_t i = 0; i < counts[k]; ++i) {
            const std::uint32_t src = by_class[k][rng.below(by_class[k].size())];
            out.x.push_row(test.x.row(src));
            out.y.push_back(kAllLabels[k]);
        }
    }
    return out;
}

PriorMatrix perturb_priors(const PriorMatrix& theta, double eta_up, double eta_ap,
                           double eta_an) {
    if (!(eta_up > 0.0) || !(eta_ap > 0.0) || !(eta_an > 0.0))
        throw InvalidArgument("perturb_priors: multipliers must be positive");
    const double up = eta_up * theta.at(SourceBag::Unl, ClassLabel::P);
    const double ap = eta_ap * theta.at(SourceBag::Aug, ClassLabel::P);
    const double an = eta_an * theta.at(SourceBag::Aug, ClassLabel::N);
    if (up > 1.0 + kPriorStructuralTol)
        throw StructuralViolation("perturb_priors: perturbed theta_u^p exceeds 1");
    if (ap + an > 1.0 + kPriorStructuralTol)
        throw StructuralViolation("perturb_priors: perturbed theta_a row exceeds 1");
    std::array<std::array<double, 3>, 3> raw = theta.theta;
    raw[0] = {1.0, 0.0, 0.0};
    raw[1] = {up, 1.0 - up, 0.0};
    raw[2] = {ap, an, 1.0 - ap - an};
    return validate_priors(raw);
}

} // namespace puac
