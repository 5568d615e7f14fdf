#include "ostta/identifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ostta {

ScoreBank::ScoreBank(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw ConfigError("ScoreBank: capacity must be >= 1");
    buf_.resize(static_cast<std::size_t>(capacity));
}

void ScoreBank::push(double s) {
    if (!std::isfinite(s)) throw Error("ScoreBank: non-finite score");
    buf_[static_cast<std::size_t>(head_)] = s;
    head_ = (head_ + 1) % capacity_;
    if (count_ < capacity_) ++count_;
}

std::vector<double> ScoreBank::scores() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count_));
    const int start = count_ < capacity_ ? 0 : head_;
    for (int i = 0; i < count_; ++i)
        out.push_back(buf_[static_cast<std::size_t>((start + i) % capacity_)]);
    return out;
}

std::pair<double, int> score(const Vec& f, const ClassPrototypeSet& prototypes) {
    if (static_cast<int>(f.size()) != prototypes.dim())
        throw DimensionMismatch("score: embedding dim does not match prototypes");
    const double n = norm(f);
    if (std::abs(n - 1.0) > 1e-6)
        throw NotNormalized("score: embedding norm deviates from 1 by more than 1e-6");
    double best = -2.0;
    int arg = 0;
    for (int k = 0; k < prototypes.num_classes(); ++k) {
        const double c = dot(f, prototypes.prototype(k)) / n;
        if (c > best) {
            best = c;
            arg = k;
        }
    }
    return {best, arg};
}

// The split objective is evaluated once per candidate with the low side
// accumulated as an ascending prefix and the high side as a descending
// suffix; the tie rule (keep the smaller tau) operates on those doubles, so
// summation order is part of the pinned semantics.
LdaStats lda_threshold(std::vector<double> s) {
    if (s.empty()) throw EmptyBank("lda_threshold: no scores");
    std::sort(s.begin(), s.end());
    const int n = static_cast<int>(s.size());

    if (s.front() == s.back()) {
        LdaStats st;
        st.tau_star = st.mu_d = st.mu_u = s.front();
        st.n_d = n;
        st.n_u = 0;
        return st;
    }

    std::vector<double> prefix_sum(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> prefix_sumsq(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        prefix_sum[i + 1] = prefix_sum[i] + s[i];
        prefix_sumsq[i + 1] = prefix_sumsq[i] + s[i] * s[i];
    }
    std::vector<double> suffix_sum(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> suffix_sumsq(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        suffix_sum[i] = suffix_sum[i + 1] + s[i];
        suffix_sumsq[i] = suffix_sumsq[i + 1] + s[i] * s[i];
    }

    LdaStats best;
    bool have = false;
    double best_obj = 0.0;
    for (int i = 1; i < n; ++i) {
        if (s[i - 1] == s[i]) continue;
        const double tau = 0.5 * (s[i - 1] + s[i]);
        const int n_lo = i, n_hi = n - i;
        const double mean_lo = prefix_sum[i] / n_lo;
        const double mean_hi = suffix_sum[i] / n_hi;
        const double sse_lo = prefix_sumsq[i] - prefix_sum[i] * prefix_sum[i] / n_lo;
        const double sse_hi = suffix_sumsq[i] - suffix_sum[i] * suffix_sum[i] / n_hi;
        const double obj = sse_lo / n_lo + sse_hi / n_hi;
        if (!have || obj < best_obj) {
            have = true;
            best_obj = obj;
            best.tau_star = tau;
            best.mu_u = mean_lo;
            best.mu_d = mean_hi;
            best.n_u = n_lo;
            best.n_d = n_hi;
        }
    }
    return best;
}

LdaStats lda_threshold(const ScoreBank& bank) {
    return lda_threshold(bank.scores());
}

Decision classify(double s, const LdaStats& stats) {
    return s >= stats.tau_star ? Decision::Desired : Decision::Undesired;
}

Reliability reliability(double s, const LdaStats& stats) {
    if (s > stats.mu_d) return Reliability::ReliableDesired;
    if (s >= stats.tau_star) return Reliability::UnreliableDesired;
    if (s >= stats.mu_u) return Reliability::UnreliableUndesired;
    return Reliability::ReliableUndesired;
}

namespace {

constexpr double kVarFloor = 1e-6;

double gauss_pdf(double x, double mu, double var) {
    const double d = x - mu;
    return std::exp(-0.5 * d * d / var) / std::sqrt(6.28318530717958647692528676655900577 * var);
}

}  // namespace

GmmStats daf_fit(std::vector<double> scores, int max_iters, double tol) {
    const int n = static_cast<int>(scores.size());
    if (n < 4) throw Error("daf_fit: need at least 4 scores");

    const LdaStats split = lda_threshold(scores);
    if (split.degenerate()) throw DegenerateScores("daf_fit: all scores equal");

    // Initialize from the LDA split moments.
    GmmStats g;
    g.mu_lo = split.mu_u;
    g.mu_hi = split.mu_d;
    g.w_lo = static_cast<double>(split.n_u) / n;
    g.w_hi = static_cast<double>(split.n_d) / n;
    double sse_lo = 0.0, sse_hi = 0.0;
    for (double s : scores) {
        if (s < split.tau_star)
            sse_lo += (s - split.mu_u) * (s - split.mu_u);
        else
            sse_hi += (s - split.mu_d) * (s - split.mu_d);
    }
    g.var_lo = std::max(kVarFloor, sse_lo / split.n_u);
    g.var_hi = std::max(kVarFloor, sse_hi / split.n_d);

    double prev_ll = 0.0;
    for (int iter = 0; iter < max_iters; ++iter) {
        double ll = 0.0;
        double r_sum = 0.0, r_s = 0.0, r_ss = 0.0;       // high component
        double q_sum = 0.0, q_s = 0.0, q_ss = 0.0;       // low component
        for (double s : scores) {
            const double a = g.w_lo * gauss_pdf(s, g.mu_lo, g.var_lo);
            const double b = g.w_hi * gauss_pdf(s, g.mu_hi, g.var_hi);
            const double tot = std::max(a + b, 1e-300);
            const double r = b / tot;
            ll += std::log(tot);
            r_sum += r;
            r_s += r * s;
            r_ss += r * s * s;
            q_sum += 1.0 - r;
            q_s += (1.0 - r) * s;
            q_ss += (1.0 - r) * s * s;
        }
        r_sum = std::max(r_sum, 1e-12);
        q_sum = std::max(q_sum, 1e-12);
        g.w_hi = r_sum / n;
        g.w_lo = q_sum / n;
        g.mu_hi = r_s / r_sum;
        g.mu_lo = q_s / q_sum;
        g.var_hi = std::max(kVarFloor, r_ss / r_sum - g.mu_hi * g.mu_hi);
        g.var_lo = std::max(kVarFloor, q_ss / q_sum - g.mu_lo * g.mu_lo);
        if (iter > 0 && std::abs(ll - prev_ll) < tol) break;
        prev_ll = ll;
    }

    if (g.mu_lo > g.mu_hi) {
        std::swap(g.mu_lo, g.mu_hi);
        std::swap(g.var_lo, g.var_hi);
        std::swap(g.w_lo, g.w_hi);
    }
    return g;
}

GmmStats daf_fit(const ScoreBank& bank, int max_iters, double tol) {
    return daf_fit(bank.scores(), max_iters, tol);
}

double daf_posterior(double s, const GmmStats& g) {
    const double a = g.w_lo * gauss_pdf(s, g.mu_lo, g.var_lo);
    const double b = g.w_hi * gauss_pdf(s, g.mu_hi, g.var_hi);
    const double tot = a + b;
    if (tot <= 0.0) {
        // Both densities underflowed; decide by proximity to the means.
        return s > 0.5 * (g.mu_lo + g.mu_hi) ? 1.0 : 0.0;
    }
    return b / tot;
}

MspResult msp_identify(double s, double tau_u, double tau_t, double tau_d) {
    if (!(tau_u <= tau_t && tau_t <= tau_d))
        throw InvalidThresholds("msp_identify: need tau_u <= tau_t <= tau_d");
    MspResult r;
    r.decision = s >= tau_t ? Decision::Desired : Decision::Undesired;
    if (s > tau_d)
        r.reliability = Reliability::ReliableDesired;
    else if (s < tau_u)
        r.reliability = Reliability::ReliableUndesired;
    else if (r.decision == Decision::Desired)
        r.reliability = Reliability::UnreliableDesired;
    else
        r.reliability = Reliability::UnreliableUndesired;
    return r;
}

}  // namespace ostta
