#ifndef OSTTA_METRICS_HPP
#define OSTTA_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

#include "ostta/record.hpp"
#include "ostta/vecmath.hpp"

namespace ostta {

struct MetricSummary {
    std::optional<double> auroc;
    std::optional<double> fpr95;
    std::optional<double> acc_d;
    std::optional<double> acc_u;
    std::optional<double> hm;
    std::int64_t n_desired = 0;
    std::int64_t n_undesired = 0;
    std::int64_t n_correct_d = 0;
    std::int64_t n_rejected_u = 0;
};

// Probability a random desired score exceeds a random undesired score, ties
// counted 0.5 (Mann-Whitney), computed by joint ranking.
double auroc(std::span<const double> scores_desired, std::span<const double> scores_undesired);

// False positive rate at the largest threshold that keeps TPR >= 95%
// (lower-interpolation percentile of the desired scores).
double fpr_at_95tpr(std::span<const double> scores_desired,
                    std::span<const double> scores_undesired);

// Acc_D counts a desired sample correct when it was both accepted and given
// its ground-truth class; Acc_U counts rejected undesired samples. HM is
// their harmonic mean, 0 when either accuracy is 0, absent when a side has
// no samples.
MetricSummary accuracies(std::span<const StepRecord> records);

// Mean pairwise (Euclidean distance, cosine distance) between two feature
// sets, exact double sums.
std::pair<double, double> pairwise_distances(std::span<const Vec> f_d,
                                             std::span<const Vec> f_u);

// 1-Wasserstein estimate: seeded equal-count subsample of both sets, exact
// optimal assignment on the Euclidean cost matrix, mean matched cost.
double wasserstein_small(std::span<const Vec> f_d, std::span<const Vec> f_u,
                         int n_sub, std::uint64_t seed);

}  // namespace ostta

#endif  // OSTTA_METRICS_HPP
