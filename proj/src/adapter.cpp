#include "ostta/adapter.hpp"

#include <cmath>
#include <fstream>

#include "ostta/bytes.hpp"

namespace ostta {

LayerNormAdapter::LayerNormAdapter(int dim, double epsilon, double lr)
    : gamma_(static_cast<std::size_t>(dim), 1.0),
      beta_(static_cast<std::size_t>(dim), 0.0),
      eps_(epsilon),
      lr_(lr) {
    if (dim < 1) throw ConfigError("LayerNormAdapter: dim must be >= 1");
    if (epsilon <= 0.0) throw ConfigError("LayerNormAdapter: epsilon must be positive");
}

void LayerNormAdapter::set_lr(double lr) {
    if (!std::isfinite(lr) || lr < 0.0) throw ConfigError("LayerNormAdapter: invalid lr");
    lr_ = lr;
}

std::pair<Vec, ForwardCache> LayerNormAdapter::forward(const Vec& raw) const {
    const std::size_t n = gamma_.size();
    if (raw.size() != n) throw DimensionMismatch("adapter forward: raw dim mismatch");
    if (!all_finite(raw)) throw Error("adapter forward: raw is not finite");

    ForwardCache c;
    c.raw = raw;
    double mean = 0.0;
    for (double x : raw) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : raw) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n);
    c.mean = mean;
    c.var = var;

    const double denom = std::sqrt(var + eps_);
    c.xhat.resize(n);
    c.h.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.xhat[i] = (raw[i] - mean) / denom;
        c.h[i] = gamma_[i] * c.xhat[i] + beta_[i];
    }
    c.h_norm = norm(c.h);
    if (c.h_norm < 1e-12) throw ZeroVector("adapter forward: affine output collapsed");
    c.f.resize(n);
    for (std::size_t i = 0; i < n; ++i) c.f[i] = c.h[i] / c.h_norm;
    return {c.f, std::move(c)};
}

std::pair<Vec, Vec> LayerNormAdapter::backward(const ForwardCache& cache,
                                               const Vec& dl_df) const {
    const std::size_t n = gamma_.size();
    if (cache.f.size() != n || dl_df.size() != n)
        throw DimensionMismatch("adapter backward: dim mismatch");

    // dL/dh = (g - f (f . g)) / ||h||
    const double fg = dot(cache.f, dl_df);
    Vec grad_gamma(n), grad_beta(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dh = (dl_df[i] - cache.f[i] * fg) / cache.h_norm;
        grad_gamma[i] = dh * cache.xhat[i];
        grad_beta[i] = dh;
    }
    return {std::move(grad_gamma), std::move(grad_beta)};
}

void LayerNormAdapter::sgd_step(const Vec& grad_gamma, const Vec& grad_beta) {
    if (grad_gamma.size() != gamma_.size() || grad_beta.size() != beta_.size())
        throw DimensionMismatch("adapter sgd_step: dim mismatch");
    if (!all_finite(grad_gamma) || !all_finite(grad_beta)) {
        ++refused_;
        return;
    }
    for (std::size_t i = 0; i < gamma_.size(); ++i) {
        gamma_[i] -= lr_ * grad_gamma[i];
        beta_[i] -= lr_ * grad_beta[i];
    }
}

void LayerNormAdapter::set_parameters(Vec gamma, Vec beta) {
    if (gamma.size() != gamma_.size() || beta.size() != beta_.size())
        throw DimensionMismatch("adapter set_parameters: dim mismatch");
    if (!all_finite(gamma) || !all_finite(beta))
        throw Error("adapter set_parameters: non-finite parameters");
    gamma_ = std::move(gamma);
    beta_ = std::move(beta);
}

std::string LayerNormAdapter::serialize_parameters() const {
    std::string out;
    out.reserve(16 * gamma_.size());
    for (double g : gamma_) put_f64(out, g);
    for (double b : beta_) put_f64(out, b);
    return out;
}

void LayerNormAdapter::load_parameters(const std::string& bytes) {
    if (bytes.size() != 16 * gamma_.size())
        throw FormatError("adapter checkpoint: size mismatch");
    ByteReader r(bytes);
    for (double& g : gamma_) g = r.f64();
    for (double& b : beta_) b = r.f64();
    if (!all_finite(gamma_) || !all_finite(beta_))
        throw FormatError("adapter checkpoint: non-finite parameters");
}

void LayerNormAdapter::save_parameters_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    const std::string bytes = serialize_parameters();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

void LayerNormAdapter::load_parameters_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    load_parameters(bytes);
}

}  // namespace ostta
