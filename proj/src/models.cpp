#include "puac/models.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "puac/errors.hpp"

namespace puac {

Scorer Scorer::make_linear(std::size_t in_dim, std::size_t out_dim) {
    Scorer m;
    m.kind_ = ModelKind::Linear;
    m.in_dim_ = in_dim;
    m.out_dim_ = out_dim;
    m.hidden_ = 0;
    m.params_.assign(out_dim * in_dim + out_dim, 0.0);
    return m;
}

Scorer Scorer::make_mlp(std::size_t in_dim, std::size_t hidden, std::size_t out_dim) {
    if (hidden == 0)
        throw InvalidArgument("mlp hidden width must be >= 1");
    Scorer m;
    m.kind_ = ModelKind::Mlp;
    m.in_dim_ = in_dim;
    m.out_dim_ = out_dim;
    m.hidden_ = hidden;
    m.params_.assign(hidden * in_dim + hidden + out_dim * hidden + out_dim, 0.0);
    return m;
}

Scorer Scorer::make(ModelKind kind, std::size_t in_dim, std::size_t hidden,
                    std::size_t out_dim) {
    return kind == ModelKind::Linear ? make_linear(in_dim, out_dim)
                                     : make_mlp(in_dim, hidden, out_dim);
}

void Scorer::init_params(Rng& rng) {
    if (kind_ == ModelKind::Linear) {
        const double s = 1.0 / std::sqrt(static_cast<double>(in_dim_));
        for (double& p : params_)
            p = rng.uniform(-s, s);
        return;
    }
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim_));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    const std::size_t first = hidden_ * in_dim_ + hidden_;
    for (std::size_t i = 0; i < first; ++i)
        params_[i] = rng.uniform(-s1, s1);
    for (std::size_t i = first; i < params_.size(); ++i)
        params_[i] = rng.uniform(-s2, s2);
}

void Scorer::forward(std::span<const double> x, Workspace& ws) const {
    if (x.size() != in_dim_)
        throw DimensionMismatch("scorer input dimension mismatch");
    ws.scores.resize(out_dim_);
    if (kind_ == ModelKind::Linear) {
        const double* w = params_.data();
        const double* b = params_.data() + out_dim_ * in_dim_;
        for (std::size_t k = 0; k < out_dim_; ++k) {
            double s = b[k];
            const double* row = w + k * in_dim_;
            for (std::size_t j = 0; j < in_dim_; ++j)
                s += row[j] * x[j];
            ws.scores[k] = s;
        }
        return;
    }
    ws.hidden.resize(hidden_);
    for (std::size_t i = 0; i < hidden_; ++i) {
        double s = b1()[i];
        const double* row = w1() + i * in_dim_;
        for (std::size_t j = 0; j < in_dim_; ++j)
            s += row[j] * x[j];
        ws.hidden[i] = s > 0.0 ? s : 0.0;
    }
    for (std::size_t k = 0; k < out_dim_; ++k) {
        double s = b2()[k];
        const double* row = w2() + k * hidden_;
        for (std::size_t i = 0; i < hidden_; ++i)
            s += row[i] * ws.hidden[i];
        ws.scores[k] = s;
    }
}

std::vector<double> Scorer::score(std::span<const double> x) const {
    Workspace ws;
    forward(x, ws);
    return ws.scores;
}

void Scorer::backward(std::span<const double> x, const Workspace& ws,
                      std::span<const double> upstream, std::span<double> grad) const {
    if (upstream.size() != out_dim_ || grad.size() != params_.size())
        throw DimensionMismatch("scorer backward shape mismatch");
    if (kind_ == ModelKind::Linear) {
        double* gw = grad.data();
        double* gb = grad.data() + out_dim_ * in_dim_;
        for (std::size_t k = 0; k < out_dim_; ++k) {
            const double u = upstream[k];
            if (u == 0.0)
                continue;
            double* row = gw + k * in_dim_;
            for (std::size_t j = 0; j < in_dim_; ++j)
                row[j] += u * x[j];
            gb[k] += u;
        }
        return;
    }
    double* gw1 = grad.data();
    double* gb1 = grad.data() + hidden_ * in_dim_;
    double* gw2 = gb1 + hidden_;
    double* gb2 = gw2 + out_dim_ * hidden_;
    for (std::size_t k = 0; k < out_dim_; ++k) {
        const double u = upstream[k];
        gb2[k] += u;
        double* row = gw2 + k * hidden_;
        for (std::size_t i = 0; i < hidden_; ++i)
            row[i] += u * ws.hidden[i];
    }
    for (std::size_t i = 0; i < hidden_; ++i) {
        if (ws.hidden[i] <= 0.0)
            continue; // rectifier gate
        double dh = 0.0;
        for (std::size_t k = 0; k < out_dim_; ++k)
            dh += upstream[k] * w2()[k * hidden_ + i];
        gb1[i] += dh;
        double* row = gw1 + i * in_dim_;
        for (std::size_t j = 0; j < in_dim_; ++j)
            row[j] += dh * x[j];
    }
}

ClassLabel predict_ovr(std::span<const double> scores) {
    if (scores.size() != 3)
        throw DimensionMismatch("predict_ovr expects 3 scores");
    std::size_t best = 0;
    for (std::size_t k = 1; k < 3; ++k)
        if (scores[k] > scores[best])
            best = k;
    return kAllLabels[best];
}

ClassLabel predict_ordinal(double score) {
    ClassLabel best = ClassLabel::P;
    double best_dist = std::abs(score - 1.0);
    for (ClassLabel c : {ClassLabel::N, ClassLabel::A}) {
        const double d = std::abs(score - static_cast<double>(ordinal_code(c)));
        if (d < best_dist) {
            best_dist = d;
            best = c;
        }
    }
    return best;
}

ClassLabel predict(const Scorer& model, std::span<const double> x, LossKind kind) {
    const std::vector<double> s = model.score(x);
    if (kind == LossKind::OvrSquared)
        return predict_ovr(s);
    return predict_ordinal(s[0]);
}

std::string checkpoint_string(const Scorer& model) {
    nlohmann::json j;
    j["format"] = "puac-scorer-v1";
    j["kind"] = to_string(model.kind());
    j["in_dim"] = model.in_dim();
    j["hidden"] = model.hidden_width();
    j["out_dim"] = model.out_dim();
    j["params"] = model.params();
    return j.dump(2) + "\n";
}

Scorer scorer_from_checkpoint_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "puac-scorer-v1")
        throw ParseError("unknown checkpoint format");
    const ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
    Scorer m = Scorer::make(kind, j.at("in_dim").get<std::size_t>(),
                            j.at("hidden").get<std::size_t>(),
                            j.at("out_dim").get<std::size_t>());
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != m.param_count())
        throw ParseError("checkpoint parameter count mismatch");
    m.params() = std::move(params);
    return m;
}

void save_checkpoint(const Scorer& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open checkpoint for writing: " + path.string());
    out << checkpoint_string(model);
}

Scorer load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open checkpoint: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return scorer_from_checkpoint_string(text);
}

} // namespace puac
