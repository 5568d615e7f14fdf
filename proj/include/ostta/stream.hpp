#ifndef OSTTA_STREAM_HPP
#define OSTTA_STREAM_HPP

#include <cstdint>
#include <vector>

#include "ostta/prototypes.hpp"
#include "ostta/vecmath.hpp"

namespace ostta {

// Ground-truth marker for samples outside the desired label set.
inline constexpr int kUndesired = -1;

struct StreamSample {
    std::int64_t t = 0;
    Vec raw;                     // primary view, unit norm
    Vec raw_aug;                 // augmented view, unit norm
    int gt_class = kUndesired;   // kUndesired or [0, num_desired_classes)
    std::uint16_t domain_id = 0;

    bool is_desired() const { return gt_class != kUndesired; }
};

enum class ScenarioKind { SingleDomain, Continuous, Frequent, VaryingRatio };

// samples_per_domain means: desired samples per domain block for
// SingleDomain/Continuous/Frequent (the block adds undesired samples so the
// desired fraction matches desired_ratio), and total block length for
// VaryingRatio (each slot is a Bernoulli(desired_ratio) draw).
struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::SingleDomain;
    int dim = 64;
    int num_desired_classes = 10;
    int num_undesired_clusters = 2;
    double desired_ratio = 0.5;
    int samples_per_domain = 1000;
    int num_domains = 1;
    double shift_strength = 0.0;
    double noise_sigma = 0.1;
    double aug_sigma = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
};

// Generates the full ordered test stream for a scenario. Deterministic in
// config.seed: all randomness flows through per-purpose sub-seeds.
std::vector<StreamSample> synth_stream(const ScenarioConfig& config,
                                       const ClassPrototypeSet& prototypes);

}  // namespace ostta

#endif  // OSTTA_STREAM_HPP
