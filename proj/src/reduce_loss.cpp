#include "ostta/reduce_loss.hpp"

#include <algorithm>
#include <cmath>

namespace ostta {

namespace detail {

std::vector<double> softmax_over(std::span<const double> sims, double tau) {
    std::vector<double> p(sims.size());
    double mx = sims[0];
    for (double s : sims) mx = std::max(mx, s);
    double z = 0.0;
    for (std::size_t i = 0; i < sims.size(); ++i) {
        p[i] = std::exp((sims[i] - mx) / tau);
        z += p[i];
    }
    for (double& x : p) x /= z;
    return p;
}

namespace {

double log_sum_exp(std::span<const double> sims, double tau) {
    double mx = sims[0];
    for (double s : sims) mx = std::max(mx, s);
    double z = 0.0;
    for (double s : sims) z += std::exp((s - mx) / tau);
    return mx / tau + std::log(z);
}

}  // namespace

double contrastive_mean(std::span<const double> pos_sims, std::span<const double> neg_sims,
                        double tau, bool include_positive) {
    double acc = 0.0;
    std::vector<double> denom(neg_sims.begin(), neg_sims.end());
    if (include_positive) denom.push_back(0.0);  // slot for the current positive
    for (double p : pos_sims) {
        if (include_positive) denom.back() = p;
        acc += p / tau - log_sum_exp(denom, tau);
    }
    return -acc / static_cast<double>(pos_sims.size());
}

}  // namespace detail

namespace {

std::vector<double> neighbor_sims(const Vec& f, const NeighborSet& q) {
    std::vector<double> sims;
    sims.reserve(q.neighbors.size());
    for (const Neighbor& nb : q.neighbors) sims.push_back(dot(f, *nb.feature));
    return sims;
}

}  // namespace

CeResult ce_pseudo(const Vec& f, const Vec& f_aug, const ClassPrototypeSet& prototypes,
                   int y_hat, const ContrastiveConfig& cfg) {
    cfg.validate();
    if (y_hat < 0 || y_hat >= prototypes.num_classes())
        throw ConfigError("ce_pseudo: y_hat out of range");
    const double T = cfg.ce_temperature;
    const int n = prototypes.num_classes();

    auto one_view = [&](const Vec& v, Vec& grad) -> double {
        std::vector<double> sims(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) sims[static_cast<std::size_t>(i)] = dot(v, prototypes.prototype(i));
        const std::vector<double> p = detail::softmax_over(sims, T);
        grad.assign(v.size(), 0.0);
        for (int i = 0; i < n; ++i) {
            const double coeff = (p[static_cast<std::size_t>(i)] - (i == y_hat ? 1.0 : 0.0)) / T;
            add_scaled(grad, coeff, prototypes.prototype(i));
        }
        // -log p_y, computed from the stable softmax
        return -std::log(std::max(p[static_cast<std::size_t>(y_hat)], 1e-300));
    };

    CeResult r;
    r.value = one_view(f, r.grad_f) + one_view(f_aug, r.grad_f_aug);
    return r;
}

LdResult l_desired(const Vec& f, const NeighborSet& q_d, const NeighborSet& q_u,
                   int y_hat, const ContrastiveConfig& cfg) {
    cfg.validate();
    if (q_u.empty()) throw EmptyNegatives("l_desired: undesired neighbour set is empty");

    std::vector<double> pos_sims;
    for (const Neighbor& nb : q_d.neighbors)
        if (nb.pseudo_label && *nb.pseudo_label == y_hat)
            pos_sims.push_back(dot(f, *nb.feature));
    const int k_plus = static_cast<int>(pos_sims.size());
    if (k_plus == 0) return {std::nullopt, 0};

    const std::vector<double> neg_sims = neighbor_sims(f, q_u);
    return {detail::contrastive_mean(pos_sims, neg_sims, cfg.temperature,
                                     cfg.include_positive_in_denominator),
            k_plus};
}

double l_undesired(const Vec& f, const NeighborSet& q_u, const NeighborSet& q_d,
                   const ContrastiveConfig& cfg) {
    cfg.validate();
    if (q_u.empty() || q_d.empty())
        throw EmptyBank("l_undesired: both neighbour sets must be non-empty");
    const std::vector<double> pos_sims = neighbor_sims(f, q_u);
    const std::vector<double> neg_sims = neighbor_sims(f, q_d);
    return detail::contrastive_mean(pos_sims, neg_sims, cfg.temperature,
                                    cfg.include_positive_in_denominator);
}

namespace {

// Shared gradient of -(1/P) sum_p log[ exp(s_p/tau) / sum_n exp(s_n/tau) ]
// with sim(f, z) differentiated as f . z:
//   -(1/P) sum_p (1/tau) ( z_p - sum_n q(n) z_n ),  q = softmax(s_n / tau).
// With the positive included in the denominator, q runs over n u {p} per
// positive.
Vec contrastive_grad(const Vec& f, const std::vector<const Vec*>& positives,
                     const std::vector<const Vec*>& negatives, double tau,
                     bool include_positive) {
    const std::size_t dim = f.size();
    std::vector<double> neg_sims;
    neg_sims.reserve(negatives.size());
    for (const Vec* z : negatives) neg_sims.push_back(dot(f, *z));

    Vec grad(dim, 0.0);
    const double inv_p = 1.0 / static_cast<double>(positives.size());

    if (!include_positive) {
        const std::vector<double> q = detail::softmax_over(neg_sims, tau);
        Vec weighted_neg(dim, 0.0);
        for (std::size_t j = 0; j < negatives.size(); ++j)
            add_scaled(weighted_neg, q[j], *negatives[j]);
        for (const Vec* zp : positives) {
            for (std::size_t i = 0; i < dim; ++i)
                grad[i] += -(inv_p / tau) * ((*zp)[i] - weighted_neg[i]);
        }
        return grad;
    }

    std::vector<double> denom(neg_sims.begin(), neg_sims.end());
    denom.push_back(0.0);
    for (const Vec* zp : positives) {
        denom.back() = dot(f, *zp);
        const std::vector<double> q = detail::softmax_over(denom, tau);
        Vec weighted(dim, 0.0);
        for (std::size_t j = 0; j < negatives.size(); ++j)
            add_scaled(weighted, q[j], *negatives[j]);
        add_scaled(weighted, q.back(), *zp);
        for (std::size_t i = 0; i < dim; ++i)
            grad[i] += -(inv_p / tau) * ((*zp)[i] - weighted[i]);
    }
    return grad;
}

}  // namespace

Vec grad_l_desired(const Vec& f, const NeighborSet& q_d, const NeighborSet& q_u,
                   int y_hat, const ContrastiveConfig& cfg) {
    cfg.validate();
    if (q_u.empty()) throw EmptyNegatives("grad_l_desired: undesired neighbour set is empty");
    std::vector<const Vec*> positives;
    for (const Neighbor& nb : q_d.neighbors)
        if (nb.pseudo_label && *nb.pseudo_label == y_hat) positives.push_back(nb.feature);
    if (positives.empty()) throw EmptyNegatives("grad_l_desired: no label-matched positives");
    std::vector<const Vec*> negatives;
    for (const Neighbor& nb : q_u.neighbors) negatives.push_back(nb.feature);
    return contrastive_grad(f, positives, negatives, cfg.temperature,
                            cfg.include_positive_in_denominator);
}

Vec grad_l_undesired(const Vec& f, const NeighborSet& q_u, const NeighborSet& q_d,
                     const ContrastiveConfig& cfg) {
    cfg.validate();
    if (q_u.empty() || q_d.empty())
        throw EmptyBank("grad_l_undesired: both neighbour sets must be non-empty");
    std::vector<const Vec*> positives;
    for (const Neighbor& nb : q_u.neighbors) positives.push_back(nb.feature);
    std::vector<const Vec*> negatives;
    for (const Neighbor& nb : q_d.neighbors) negatives.push_back(nb.feature);
    return contrastive_grad(f, positives, negatives, cfg.temperature,
                            cfg.include_positive_in_denominator);
}

LossBreakdown reduce_total(Reliability rel, std::optional<double> l_re,
                           std::optional<double> l_d, int k_plus,
                           std::optional<double> l_u) {
    LossBreakdown lb;
    switch (rel) {
        case Reliability::ReliableDesired:
            lb.active_case = LossCase::DesiredCase;
            lb.l_re = l_re;
            lb.l_d = l_d;
            lb.k_plus = k_plus;
            lb.total = l_re.value_or(0.0) + l_d.value_or(0.0);
            break;
        case Reliability::ReliableUndesired:
            lb.active_case = LossCase::UndesiredCase;
            lb.l_u = l_u;
            lb.total = l_u.value_or(0.0);
            break;
        case Reliability::UnreliableDesired:
        case Reliability::UnreliableUndesired:
            lb.active_case = LossCase::NoUpdate;
            lb.total = 0.0;
            break;
    }
    return lb;
}

}  // namespace ostta
