#ifndef OSTTA_REDUCE_LOSS_HPP
#define OSTTA_REDUCE_LOSS_HPP

#include <optional>
#include <span>

#include "ostta/banks.hpp"
#include "ostta/identifier.hpp"
#include "ostta/prototypes.hpp"
#include "ostta/vecmath.hpp"

namespace ostta {

struct ContrastiveConfig {
    double temperature = 0.07;     // tau of the contrastive terms
    double ce_temperature = 0.01;  // logit scale of the pseudo-label CE
    int k = 5;                     // neighbours retrieved per bank
    // The printed contrastive denominator contains negatives only; this flag
    // switches to the conventional form that adds the positive.
    bool include_positive_in_denominator = false;

    void validate() const {
        if (temperature <= 0.0) throw ConfigError("contrastive temperature must be positive");
        if (ce_temperature <= 0.0) throw ConfigError("ce temperature must be positive");
        if (k < 0) throw ConfigError("k must be >= 0");
    }
};

enum class LossCase { DesiredCase, UndesiredCase, NoUpdate };

struct LossBreakdown {
    std::optional<double> l_re;
    std::optional<double> l_d;
    std::optional<double> l_u;
    double total = 0.0;
    int k_plus = 0;  // label-matched positives in the desired contrastive term
    LossCase active_case = LossCase::NoUpdate;
};

struct CeResult {
    double value;
    Vec grad_f;
    Vec grad_f_aug;
};

// Reliable pseudo-label loss: softmax cross entropy over cosine logits for
// both views, each view contributing to its own gradient only. Similarity is
// differentiated as a plain dot product; the normalization Jacobian lives in
// the adapter's backward pass.
CeResult ce_pseudo(const Vec& f, const Vec& f_aug, const ClassPrototypeSet& prototypes,
                   int y_hat, const ContrastiveConfig& cfg);

struct LdResult {
    std::optional<double> value;  // absent when no positive matches y_hat
    int k_plus;
};

// Contrastive term for a reliable desired sample: positives are the
// label-matched neighbours from the desired bank, negatives the neighbours
// from the undesired bank. Throws EmptyNegatives when q_u is empty.
LdResult l_desired(const Vec& f, const NeighborSet& q_d, const NeighborSet& q_u,
                   int y_hat, const ContrastiveConfig& cfg);

// Contrastive term for a reliable undesired sample: all of q_u as positives,
// q_d as negatives. Throws EmptyBank when either set is empty.
double l_undesired(const Vec& f, const NeighborSet& q_u, const NeighborSet& q_d,
                   const ContrastiveConfig& cfg);

// Analytic gradients with respect to f under the dot-product similarity
// convention. Preconditions mirror the loss functions.
Vec grad_l_desired(const Vec& f, const NeighborSet& q_d, const NeighborSet& q_u,
                   int y_hat, const ContrastiveConfig& cfg);
Vec grad_l_undesired(const Vec& f, const NeighborSet& q_u, const NeighborSet& q_d,
                     const ContrastiveConfig& cfg);

// Case combination: reliable desired samples accumulate l_re and l_d,
// reliable undesired samples l_u; absent components are skipped. Unreliable
// categories never update.
LossBreakdown reduce_total(Reliability rel, std::optional<double> l_re,
                           std::optional<double> l_d, int k_plus,
                           std::optional<double> l_u);

namespace detail {

// Mean contrastive value over positives given raw similarities. Exposed so
// invariance properties (e.g. under a common additive shift of all
// similarities) can be tested directly.
double contrastive_mean(std::span<const double> pos_sims, std::span<const double> neg_sims,
                        double tau, bool include_positive);

// softmax of sims / tau (numerically stable)
std::vector<double> softmax_over(std::span<const double> sims, double tau);

}  // namespace detail

}  // namespace ostta

#endif  // OSTTA_REDUCE_LOSS_HPP
