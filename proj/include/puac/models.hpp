#pragma once
// Small differentiable scorers (linear and one-hidden-layer with rectifier)
// with exact backpropagation, the two prediction rules, and bit-exact JSON
// checkpoints.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "puac/core_types.hpp"
#include "puac/rng.hpp"

namespace puac {

class Scorer {
public:
    Scorer() = default;

    static Scorer make_linear(std::size_t in_dim, std::size_t out_dim);
    static Scorer make_mlp(std::size_t in_dim, std::size_t hidden, std::size_t out_dim);
    static Scorer make(ModelKind kind, std::size_t in_dim, std::size_t hidden,
                       std::size_t out_dim);

    ModelKind kind() const { return kind_; }
    std::size_t in_dim() const { return in_dim_; }
    std::size_t out_dim() const { return out_dim_; }
    std::size_t hidden_width() const { return hidden_; }
    std::size_t param_count() const { return params_.size(); }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer.
    void init_params(Rng& rng);

    // Per-sample forward scratch; reusable across calls to avoid allocation.
    struct Workspace {
        std::vector<double> hidden; // post-rectifier activations (Mlp only)
        std::vector<double> scores;
    };

    void forward(std::span<const double> x, Workspace& ws) const;

    // Convenience allocating forward.
    std::vector<double> score(std::span<const double> x) const;

    // Accumulates into grad (size param_count) the gradient of the scalar
    // whose derivative w.r.t. the scores is `upstream`, for the sample whose
    // forward pass produced `ws`.
    void backward(std::span<const double> x, const Workspace& ws,
                  std::span<const double> upstream, std::span<double> grad) const;

private:
    ModelKind kind_ = ModelKind::Linear;
    std::size_t in_dim_ = 0;
    std::size_t hidden_ = 0;
    std::size_t out_dim_ = 0;
    std::vector<double> params_;

    // Layout: Linear -> [W (out x in), b (out)]
    //         Mlp    -> [W1 (h x in), b1 (h), W2 (out x h), b2 (out)]
    const double* w1() const { return params_.data(); }
    const double* b1() const { return params_.data() + hidden_ * in_dim_; }
    const double* w2() const { return params_.data() + hidden_ * in_dim_ + hidden_; }
    const double* b2() const {
        return params_.data() + hidden_ * in_dim_ + hidden_ + out_dim_ * hidden_;
    }

    friend std::string checkpoint_string(const Scorer&);
};

// Argmax over the three OVR scores; ties broken by the fixed order P < N < A.
ClassLabel predict_ovr(std::span<const double> scores);

// Nearest ordinal code; midpoint ties resolve to the smaller label.
ClassLabel predict_ordinal(double score);

ClassLabel predict(const Scorer& model, std::span<const double> x, LossKind kind);

// Checkpoint format: a JSON document with the kind tag, the shape fields and
// the row-major parameter array. Round-trips bit-exactly.
std::string checkpoint_string(const Scorer& model);
Scorer scorer_from_checkpoint_string(const std::string& text);
void save_checkpoint(const Scorer& model, const std::filesystem::path& path);
Scorer load_checkpoint(const std::filesystem::path& path);

} // namespace puac
