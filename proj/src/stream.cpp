#include "ostta/stream.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ostta/prng.hpp"

namespace ostta {

namespace {

enum : std::uint64_t {
    kSeedCenters = 1,
    kSeedShift = 2,
    kSeedLabels = 3,
    kSeedNoise = 4,
    kSeedOrder = 5,
    kSeedAug = 6,
};

Vec random_unit(Rng& rng, int dim) {
    Vec v(static_cast<std::size_t>(dim));
    for (;;) {
        for (double& x : v) x = rng.normal();
        const double n = norm(v);
        if (n >= 1e-12) {
            for (double& x : v) x /= n;
            return v;
        }
    }
}

// Covariate shift for one domain: x -> x + r*(Hx - x) + s*b with H a random
// Householder reflection, b a random unit bias, and r = min(s, 1) so the
// reflection blend saturates while the bias keeps scaling. s = 0 is the
// identity; class identity is preserved because every class center moves by
// (nearly) the same perturbation.
struct DomainShift {
    Vec reflect_axis;  // v of H = I - 2 v v^T
    Vec bias;

    Vec apply(const Vec& x, double strength) const {
        if (strength == 0.0) return x;
        const double blend = std::min(strength, 1.0);
        Vec out = x;
        const double vx = dot(reflect_axis, x);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += -2.0 * blend * vx * reflect_axis[i] + strength * bias[i];
        return out;
    }
};

// Draws a unit vector around `center` with isotropic Gaussian noise. When
// sigma is zero and the center is already unit norm the center is returned
// bit-for-bit, so zero-noise streams reproduce their prototypes exactly.
Vec sample_around(const Vec& center, bool center_unit, double sigma, Rng& rng) {
    if (sigma == 0.0 && center_unit) return center;
    Vec v = center;
    if (sigma > 0.0)
        for (double& x : v) x += sigma * rng.normal();
    normalize(v);
    return v;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (dim < 1) throw ConfigError("scenario: dim must be >= 1");
    if (num_desired_classes < 2) throw ConfigError("scenario: need >= 2 desired classes");
    if (num_undesired_clusters < 1) throw ConfigError("scenario: need >= 1 undesired cluster");
    if (!(desired_ratio > 0.0 && desired_ratio < 1.0))
        throw ConfigError("scenario: desired_ratio must lie in (0, 1)");
    if (samples_per_domain < 1) throw ConfigError("scenario: samples_per_domain must be >= 1");
    if (num_domains < 1) throw ConfigError("scenario: num_domains must be >= 1");
    if (shift_strength < 0.0) throw ConfigError("scenario: shift_strength must be >= 0");
    if (noise_sigma < 0.0) throw ConfigError("scenario: noise_sigma must be >= 0");
    if (aug_sigma < 0.0) throw ConfigError("scenario: aug_sigma must be >= 0");
}

std::vector<StreamSample> synth_stream(const ScenarioConfig& config,
                                       const ClassPrototypeSet& prototypes) {
    config.validate();
    if (prototypes.num_classes() != config.num_desired_classes)
        throw DimensionMismatch("synth_stream: prototype count does not match config");
    if (prototypes.dim() != config.dim)
        throw DimensionMismatch("synth_stream: prototype dim does not match config");

    const int dim = config.dim;

    // Undesired cluster centres: rejection-sampled unit vectors no closer to
    // any prototype than the prototypes are to each other.
    const double max_cos = prototypes.max_pairwise_cosine();
    Rng rng_centers(derive_seed(config.seed, kSeedCenters));
    std::vector<Vec> centers;
    for (int u = 0; u < config.num_undesired_clusters; ++u) {
        bool placed = false;
        for (int attempt = 0; attempt < 10000; ++attempt) {
            Vec v = random_unit(rng_centers, dim);
            bool ok = true;
            for (const Vec& p : prototypes.prototypes()) {
                if (dot(v, p) > max_cos) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                centers.push_back(std::move(v));
                placed = true;
                break;
            }
        }
        if (!placed)
            throw SeparationInfeasible("synth_stream: could not place undesired cluster " +
                                       std::to_string(u));
    }

    const int domains = config.kind == ScenarioKind::SingleDomain ? 1 : config.num_domains;

    Rng rng_shift(derive_seed(config.seed, kSeedShift));
    std::vector<DomainShift> shifts;
    shifts.reserve(static_cast<std::size_t>(domains));
    for (int d = 0; d < domains; ++d)
        shifts.push_back({random_unit(rng_shift, dim), random_unit(rng_shift, dim)});

    Rng rng_labels(derive_seed(config.seed, kSeedLabels));
    Rng rng_noise(derive_seed(config.seed, kSeedNoise));
    Rng rng_order(derive_seed(config.seed, kSeedOrder));
    Rng rng_aug(derive_seed(config.seed, kSeedAug));

    std::vector<StreamSample> out;
    std::int64_t t = 0;
    for (int d = 0; d < domains; ++d) {
        std::vector<char> slots;  // 1 = desired, 0 = undesired
        if (config.kind == ScenarioKind::VaryingRatio) {
            slots.resize(static_cast<std::size_t>(config.samples_per_domain));
            for (char& s : slots)
                s = rng_order.uniform01() < config.desired_ratio ? 1 : 0;
        } else {
            const int n_des = config.samples_per_domain;
            const int n_und = static_cast<int>(std::lround(
                n_des * (1.0 - config.desired_ratio) / config.desired_ratio));
            slots.assign(static_cast<std::size_t>(n_des), 1);
            slots.insert(slots.end(), static_cast<std::size_t>(n_und), 0);
            // Fisher-Yates
            for (std::size_t i = slots.size(); i > 1; --i)
                std::swap(slots[i - 1], slots[rng_order.below(i)]);
        }

        for (char desired : slots) {
            StreamSample smp;
            smp.t = t++;
            smp.domain_id = static_cast<std::uint16_t>(d);
            Vec center;
            bool center_unit;
            if (desired) {
                const int c = static_cast<int>(rng_labels.below(
                    static_cast<std::uint64_t>(config.num_desired_classes)));
                smp.gt_class = c;
                center = shifts[static_cast<std::size_t>(d)].apply(prototypes.prototype(c),
                                                                   config.shift_strength);
                center_unit = config.shift_strength == 0.0;
            } else {
                const int u = static_cast<int>(rng_labels.below(
                    static_cast<std::uint64_t>(config.num_undesired_clusters)));
                smp.gt_class = kUndesired;
                center = centers[static_cast<std::size_t>(u)];
                center_unit = true;
            }
            smp.raw = sample_around(center, center_unit, config.noise_sigma, rng_noise);
            smp.raw_aug = sample_around(smp.raw, true, config.aug_sigma, rng_aug);
            out.push_back(std::move(smp));
        }
    }
    return out;
}

}  // namespace ostta
