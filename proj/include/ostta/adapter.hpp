#ifndef OSTTA_ADAPTER_HPP
#define OSTTA_ADAPTER_HPP

#include <string>
#include <utility>

#include "ostta/vecmath.hpp"

namespace ostta {

struct ForwardCache {
    Vec raw;
    double mean = 0.0;
    double var = 0.0;
    Vec xhat;       // (raw - mean) / sqrt(var + eps)
    Vec h;          // gamma * xhat + beta
    double h_norm = 0.0;
    Vec f;          // h / ||h||
};

// The only adaptable state: a per-sample LayerNorm affine over the raw
// embedding followed by L2 normalization, trained with plain SGD.
class LayerNormAdapter {
public:
    explicit LayerNormAdapter(int dim, double epsilon = 1e-5, double lr = 0.001);

    int dim() const { return static_cast<int>(gamma_.size()); }
    double lr() const { return lr_; }
    void set_lr(double lr);
    double epsilon() const { return eps_; }
    const Vec& gamma() const { return gamma_; }
    const Vec& beta() const { return beta_; }

    // f = normalize(gamma * (raw - mean) / sqrt(var + eps) + beta) with
    // mean/var over the coordinates (population variance). Throws ZeroVector
    // when the affine output collapses below 1e-12.
    std::pair<Vec, ForwardCache> forward(const Vec& raw) const;

    // Exact gradients of the loss w.r.t. gamma and beta given dL/df, routed
    // through the L2 normalization Jacobian (I - f f^T)/||h||.
    std::pair<Vec, Vec> backward(const ForwardCache& cache, const Vec& dl_df) const;

    // gamma -= lr * grad_gamma; beta -= lr * grad_beta. A non-finite gradient
    // refuses the step and increments the refusal counter.
    void sgd_step(const Vec& grad_gamma, const Vec& grad_beta);
    int refused_steps() const { return refused_; }

    void set_parameters(Vec gamma, Vec beta);

    // Checkpoint format: flat little-endian f64 array, gamma then beta.
    std::string serialize_parameters() const;
    void load_parameters(const std::string& bytes);
    void save_parameters_file(const std::string& path) const;
    void load_parameters_file(const std::string& path);

private:
    Vec gamma_;
    Vec beta_;
    double eps_;
    double lr_;
    int refused_ = 0;
};

}  // namespace ostta

#endif  // OSTTA_ADAPTER_HPP
