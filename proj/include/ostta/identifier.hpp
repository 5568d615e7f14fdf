#ifndef OSTTA_IDENTIFIER_HPP
#define OSTTA_IDENTIFIER_HPP

#include <utility>
#include <vector>

#include "ostta/prototypes.hpp"
#include "ostta/vecmath.hpp"

namespace ostta {

enum class Decision { Desired, Undesired };

enum class Reliability {
    ReliableDesired,
    UnreliableDesired,
    UnreliableUndesired,
    ReliableUndesired,
};

// Ring buffer of the most recent similarity scores.
class ScoreBank {
public:
    explicit ScoreBank(int capacity = 512);

    void push(double s);  // evicts the oldest entry beyond capacity
    int count() const { return count_; }
    int capacity() const { return capacity_; }
    std::vector<double> scores() const;  // oldest to newest

private:
    std::vector<double> buf_;
    int capacity_;
    int count_ = 0;
    int head_ = 0;  // next write position
};

// Result of the 1D two-class split of the score bank. A degenerate bank
// (single distinct value) reports that value for all three statistics with
// n_u = 0.
struct LdaStats {
    double tau_star = 0.0;
    double mu_d = 0.0;
    double mu_u = 0.0;
    int n_d = 0;
    int n_u = 0;

    bool degenerate() const { return n_u == 0; }
};

// Two-component 1D Gaussian mixture over scores, mu_lo <= mu_hi.
struct GmmStats {
    double mu_lo = 0.0, mu_hi = 0.0;
    double var_lo = 0.0, var_hi = 0.0;
    double w_lo = 0.0, w_hi = 0.0;
};

// Maximum cosine similarity against the prototypes and the argmax class
// (ties go to the lowest index). f must be unit norm within 1e-6; it is
// renormalized defensively inside.
std::pair<double, int> score(const Vec& f, const ClassPrototypeSet& prototypes);

// Splits the scores at the midpoint between consecutive distinct sorted
// values that minimizes mean squared deviation per side; ties on the
// objective keep the smaller threshold. S_d = {s >= tau}, S_u = {s < tau}.
LdaStats lda_threshold(std::vector<double> scores);
LdaStats lda_threshold(const ScoreBank& bank);

Decision classify(double s, const LdaStats& stats);  // Desired iff s >= tau_star

// Four-way category. Boundary conventions: the reliable bands are strict
// (s > mu_d, s < mu_u); equalities land in the unreliable bands.
Reliability reliability(double s, const LdaStats& stats);

// EM fit of the two-component mixture, initialized from the LDA split.
// Throws DegenerateScores when all scores are equal.
GmmStats daf_fit(std::vector<double> scores, int max_iters = 100, double tol = 1e-8);
GmmStats daf_fit(const ScoreBank& bank, int max_iters = 100, double tol = 1e-8);

// Posterior probability of the high-mean component at score s.
double daf_posterior(double s, const GmmStats& g);

struct MspResult {
    Decision decision;
    Reliability reliability;
};

// Fixed-threshold identifier: Desired iff s >= tau_t, reliable beyond tau_d
// and below tau_u. Requires tau_u <= tau_t <= tau_d.
MspResult msp_identify(double s, double tau_u, double tau_t, double tau_d);

}  // namespace ostta

#endif  // OSTTA_IDENTIFIER_HPP
