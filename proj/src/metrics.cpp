#include "ostta/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ostta/assignment.hpp"
#include "ostta/prng.hpp"

namespace ostta {

double auroc(std::span<const double> scores_desired, std::span<const double> scores_undesired) {
    if (scores_desired.empty() || scores_undesired.empty())
        throw EmptyClass("auroc: both score lists must be non-empty");

    struct Tagged {
        double s;
        bool desired;
    };
    std::vector<Tagged> all;
    all.reserve(scores_desired.size() + scores_undesired.size());
    for (double s : scores_desired) all.push_back({s, true});
    for (double s : scores_undesired) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.s < b.s; });

    // Average ranks across tie groups; rank sums stay exact (half-integers).
    const std::size_t n = all.size();
    double rank_sum_desired = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && all[j].s == all[i].s) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (all[k].desired) rank_sum_desired += avg_rank;
        i = j;
    }

    const double n_d = static_cast<double>(scores_desired.size());
    const double n_u = static_cast<double>(scores_undesired.size());
    const double u_stat = rank_sum_desired - n_d * (n_d + 1.0) / 2.0;
    return u_stat / (n_d * n_u);
}

double fpr_at_95tpr(std::span<const double> scores_desired,
                    std::span<const double> scores_undesired) {
    if (scores_desired.empty() || scores_undesired.empty())
        throw EmptyClass("fpr_at_95tpr: both score lists must be non-empty");

    std::vector<double> d(scores_desired.begin(), scores_desired.end());
    std::sort(d.begin(), d.end(), std::greater<>());
    const std::size_t n_d = d.size();
    const std::size_t m = (19 * n_d + 19) / 20;  // ceil(0.95 * n_d)
    const double theta = d[m - 1];

    std::size_t fp = 0;
    for (double s : scores_undesired)
        if (s >= theta) ++fp;
    return static_cast<double>(fp) / static_cast<double>(scores_undesired.size());
}

MetricSummary accuracies(std::span<const StepRecord> records) {
    if (records.empty()) throw EmptyClass("accuracies: no records");
    MetricSummary m;
    for (const StepRecord& r : records) {
        if (r.is_desired) {
            ++m.n_desired;
            if (r.decision == Decision::Desired && r.prediction == r.gt_class) ++m.n_correct_d;
        } else {
            ++m.n_undesired;
            if (r.decision == Decision::Undesired) ++m.n_rejected_u;
        }
    }
    if (m.n_desired > 0)
        m.acc_d = static_cast<double>(m.n_correct_d) / static_cast<double>(m.n_desired);
    if (m.n_undesired > 0)
        m.acc_u = static_cast<double>(m.n_rejected_u) / static_cast<double>(m.n_undesired);
    if (m.acc_d && m.acc_u) {
        const double a = *m.acc_d, b = *m.acc_u;
        m.hm = (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
    }
    return m;
}

std::pair<double, double> pairwise_distances(std::span<const Vec> f_d,
                                             std::span<const Vec> f_u) {
    if (f_d.empty() || f_u.empty())
        throw EmptyClass("pairwise_distances: both sets must be non-empty");
    double sum_euc = 0.0, sum_cos = 0.0;
    for (const Vec& a : f_d) {
        const double na = norm(a);
        for (const Vec& b : f_u) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
            sum_euc += std::sqrt(d2);
            sum_cos += dot(a, b) / (na * norm(b));
        }
    }
    const double count = static_cast<double>(f_d.size()) * static_cast<double>(f_u.size());
    return {sum_euc / count, 1.0 - sum_cos / count};
}

namespace {

std::vector<std::size_t> sample_indices(std::size_t total, std::size_t take, Rng& rng) {
    std::vector<std::size_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    return idx;
}

}  // namespace

double wasserstein_small(std::span<const Vec> f_d, std::span<const Vec> f_u,
                         int n_sub, std::uint64_t seed) {
    if (f_d.empty() || f_u.empty())
        throw EmptyClass("wasserstein_small: both sets must be non-empty");
    if (n_sub < 1) throw ConfigError("wasserstein_small: n_sub must be >= 1");

    const std::size_t n = std::min({static_cast<std::size_t>(n_sub), f_d.size(), f_u.size()});
    Rng rng_d(derive_seed(seed, 1));
    Rng rng_u(derive_seed(seed, 2));
    const auto idx_d = sample_indices(f_d.size(), n, rng_d);
    const auto idx_u = sample_indices(f_u.size(), n, rng_u);

    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& a = f_d[idx_d[i]];
        for (std::size_t j = 0; j < n; ++j) {
            const Vec& b = f_u[idx_u[j]];
            double d2 = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
            cost[i][j] = std::sqrt(d2);
        }
    }
    return solve_assignment(cost) / static_cast<double>(n);
}

}  // namespace ostta
