#include "ostta/engine.hpp"

#include <algorithm>
#include <cmath>

namespace ostta {

void MethodConfig::validate() const {
    contrastive.validate();
    if (identifier == IdentifierKind::Msp && !(msp_tau_u <= msp_tau_t && msp_tau_t <= msp_tau_d))
        throw InvalidThresholds("config: MSP thresholds must satisfy tau_u <= tau_t <= tau_d");
    if (!std::isfinite(lr) || lr < 0.0) throw ConfigError("config: invalid lr");
    if (adapter_epsilon <= 0.0) throw ConfigError("config: adapter epsilon must be positive");
    if (warmup < 0) throw ConfigError("config: warmup must be >= 0");
    if (score_bank_capacity < 1) throw ConfigError("config: score bank capacity must be >= 1");
    if (undesired_bank_capacity < 0) throw ConfigError("config: undesired bank capacity must be >= 0");
}

const char* method_name(Method m) {
    switch (m) {
        case Method::ZSEval: return "zseval";
        case Method::Rosita: return "rosita";
        case Method::UniEnt: return "unient";
        case Method::KPlusOnePC: return "kplus1pc";
    }
    return "?";
}

const char* identifier_name(IdentifierKind k) {
    switch (k) {
        case IdentifierKind::Lda: return "lda";
        case IdentifierKind::Daf: return "daf";
        case IdentifierKind::Msp: return "msp";
    }
    return "?";
}

double unient_loss(const Vec& f, const ClassPrototypeSet& prototypes, double ce_temperature,
                   bool maximize, Vec* grad) {
    const int n = prototypes.num_classes();
    std::vector<double> sims(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) sims[static_cast<std::size_t>(i)] = dot(f, prototypes.prototype(i));
    const std::vector<double> p = detail::softmax_over(sims, ce_temperature);

    double entropy = 0.0;
    for (double pi : p)
        if (pi > 0.0) entropy -= pi * std::log(pi);

    const double sign = maximize ? -1.0 : 1.0;  // loss = +H to minimize, -H to maximize
    if (grad) {
        grad->assign(f.size(), 0.0);
        for (int i = 0; i < n; ++i) {
            const double pi = p[static_cast<std::size_t>(i)];
            if (pi <= 0.0) continue;
            // dH/dz_i = -p_i (log p_i + H); z_i = sim_i / T
            const double dh_dz = -pi * (std::log(pi) + entropy);
            add_scaled(*grad, sign * dh_dz / ce_temperature, prototypes.prototype(i));
        }
    }
    return sign * entropy;
}

double kplus1_loss(const Vec& f, const ClassPrototypeSet& prototypes,
                   std::span<const Vec> pool, int target, double ce_temperature,
                   Vec* grad) {
    const int n = prototypes.num_classes();
    const bool has_pool = !pool.empty();
    const int logits = has_pool ? n + 1 : n;
    if (target < 0 || target >= logits)
        throw ConfigError("kplus1_loss: target out of range for available logits");

    std::vector<double> sims(static_cast<std::size_t>(logits));
    for (int i = 0; i < n; ++i) sims[static_cast<std::size_t>(i)] = dot(f, prototypes.prototype(i));
    std::size_t best_pool = 0;
    if (has_pool) {
        double best = dot(f, pool[0]);
        for (std::size_t j = 1; j < pool.size(); ++j) {
            const double c = dot(f, pool[j]);
            if (c > best) {
                best = c;
                best_pool = j;
            }
        }
        sims[static_cast<std::size_t>(n)] = best;
    }

    const std::vector<double> p = detail::softmax_over(sims, ce_temperature);
    if (grad) {
        grad->assign(f.size(), 0.0);
        for (int i = 0; i < logits; ++i) {
            const double coeff =
                (p[static_cast<std::size_t>(i)] - (i == target ? 1.0 : 0.0)) / ce_temperature;
            const Vec& direction = i < n ? prototypes.prototype(i) : pool[best_pool];
            add_scaled(*grad, coeff, direction);
        }
    }
    return -std::log(std::max(p[static_cast<std::size_t>(target)], 1e-300));
}

Engine::Engine(ClassPrototypeSet prototypes, MethodConfig config)
    : prototypes_(std::move(prototypes)),
      cfg_(std::move(config)),
      adapter_(prototypes_.dim(), cfg_.adapter_epsilon, cfg_.lr),
      score_bank_(cfg_.score_bank_capacity),
      m_d_(prototypes_.num_classes(), cfg_.contrastive.k),
      m_u_(cfg_.undesired_bank_capacity) {
    cfg_.validate();
}

Engine::IdentifierOutcome Engine::evaluate_identifier(double s) const {
    IdentifierOutcome out{};
    switch (cfg_.identifier) {
        case IdentifierKind::Lda: {
            const LdaStats st = lda_threshold(score_bank_);
            out.decision = classify(s, st);
            out.rel = reliability(s, st);
            out.tau_star = st.tau_star;
            out.mu_d = st.mu_d;
            out.mu_u = st.mu_u;
            return out;
        }
        case IdentifierKind::Daf: {
            GmmStats g;
            try {
                g = daf_fit(score_bank_);
            } catch (const Error&) {
                // Too few or degenerate scores: fall back to the LDA stats,
                // which handle both.
                const LdaStats st = lda_threshold(score_bank_);
                out.decision = classify(s, st);
                out.rel = reliability(s, st);
                out.tau_star = st.tau_star;
                out.mu_d = st.mu_d;
                out.mu_u = st.mu_u;
                return out;
            }
            const double pi = daf_posterior(s, g);
            out.decision = pi >= 0.5 ? Decision::Desired : Decision::Undesired;
            if (s > g.mu_hi)
                out.rel = Reliability::ReliableDesired;
            else if (s < g.mu_lo)
                out.rel = Reliability::ReliableUndesired;
            else
                out.rel = out.decision == Decision::Desired ? Reliability::UnreliableDesired
                                                            : Reliability::UnreliableUndesired;
            // The DAF decision boundary is posterior-based; the recorded
            // tau_star is informational only.
            out.tau_star = 0.5 * (g.mu_lo + g.mu_hi);
            out.mu_d = g.mu_hi;
            out.mu_u = g.mu_lo;
            return out;
        }
        case IdentifierKind::Msp: {
            const MspResult r = msp_identify(s, cfg_.msp_tau_u, cfg_.msp_tau_t, cfg_.msp_tau_d);
            out.decision = r.decision;
            out.rel = r.reliability;
            out.tau_star = cfg_.msp_tau_t;
            out.mu_d = cfg_.msp_tau_d;
            out.mu_u = cfg_.msp_tau_u;
            return out;
        }
    }
    throw Error("unreachable identifier kind");
}

LossBreakdown Engine::rosita_update(const StreamSample& sample, const Vec& f,
                                    const ForwardCache& cache, int y_hat, Reliability rel) {
    const ContrastiveConfig& ctr = cfg_.contrastive;

    if (rel == Reliability::ReliableDesired) {
        std::optional<double> v_re, v_d;
        int k_plus = 0;
        Vec dl_df(f.size(), 0.0);
        Vec dl_df_aug;
        ForwardCache cache_aug;
        bool have_aug = false;

        if (cfg_.enable_l_re) {
            auto [f_aug, ca] = adapter_.forward(sample.raw_aug);
            cache_aug = std::move(ca);
            have_aug = true;
            const CeResult ce = ce_pseudo(f, f_aug, prototypes_, y_hat, ctr);
            v_re = ce.value;
            for (std::size_t i = 0; i < dl_df.size(); ++i) dl_df[i] += ce.grad_f[i];
            dl_df_aug = ce.grad_f_aug;
        }
        if (cfg_.enable_l_d && ctr.k >= 1) {
            const NeighborSet q_u = knn(f, m_u_, ctr.k);
            if (!q_u.empty()) {
                const NeighborSet q_d = knn(f, m_d_, ctr.k);
                const LdResult ld = l_desired(f, q_d, q_u, y_hat, ctr);
                k_plus = ld.k_plus;
                if (ld.value) {
                    v_d = ld.value;
                    const Vec g = grad_l_desired(f, q_d, q_u, y_hat, ctr);
                    for (std::size_t i = 0; i < dl_df.size(); ++i) dl_df[i] += g[i];
                }
            }
        }

        if (v_re || v_d) {
            auto [gg, gb] = adapter_.backward(cache, dl_df);
            if (have_aug) {
                auto [gg2, gb2] = adapter_.backward(cache_aug, dl_df_aug);
                for (std::size_t i = 0; i < gg.size(); ++i) {
                    gg[i] += gg2[i];
                    gb[i] += gb2[i];
                }
            }
            adapter_.sgd_step(gg, gb);
        }
        // Pre-update snapshot goes into the bank, after retrieval and the step.
        m_d_.push(f, y_hat);
        return reduce_total(rel, v_re, v_d, k_plus, std::nullopt);
    }

    if (rel == Reliability::ReliableUndesired) {
        std::optional<double> v_u;
        if (cfg_.enable_l_u && ctr.k >= 1) {
            const NeighborSet q_u = knn(f, m_u_, ctr.k);
            const NeighborSet q_d = knn(f, m_d_, ctr.k);
            if (!q_u.empty() && !q_d.empty()) {
                v_u = l_undesired(f, q_u, q_d, ctr);
                const Vec g = grad_l_undesired(f, q_u, q_d, ctr);
                auto [gg, gb] = adapter_.backward(cache, g);
                adapter_.sgd_step(gg, gb);
            }
        }
        m_u_.push(f);
        return reduce_total(rel, std::nullopt, std::nullopt, 0, v_u);
    }

    return reduce_total(rel, std::nullopt, std::nullopt, 0, std::nullopt);
}

LossBreakdown Engine::unient_update(const Vec& f, const ForwardCache& cache, Decision decision) {
    Vec grad;
    const bool maximize = decision == Decision::Undesired;
    const double value = unient_loss(f, prototypes_, cfg_.contrastive.ce_temperature,
                                     maximize, &grad);
    auto [gg, gb] = adapter_.backward(cache, grad);
    adapter_.sgd_step(gg, gb);

    LossBreakdown lb;
    lb.active_case = maximize ? LossCase::UndesiredCase : LossCase::DesiredCase;
    lb.total = value;
    return lb;
}

LossBreakdown Engine::kplus1_update(const Vec& f, const ForwardCache& cache, int y_hat,
                                    Decision decision, Reliability rel) {
    std::vector<Vec> pool;
    pool.reserve(static_cast<std::size_t>(m_u_.size()));
    for (const BankEntry& e : m_u_.entries()) pool.push_back(e.feature);

    LossBreakdown lb;
    const bool undesired = decision == Decision::Undesired;
    if (undesired && pool.empty()) {
        // No undesired prototype to target yet; the bank may still grow below.
        lb.active_case = LossCase::UndesiredCase;
    } else {
        const int target = undesired ? prototypes_.num_classes() : y_hat;
        Vec grad;
        lb.total = kplus1_loss(f, prototypes_, pool, target, cfg_.contrastive.ce_temperature,
                               &grad);
        auto [gg, gb] = adapter_.backward(cache, grad);
        adapter_.sgd_step(gg, gb);
        lb.active_case = undesired ? LossCase::UndesiredCase : LossCase::DesiredCase;
    }
    if (rel == Reliability::ReliableUndesired) m_u_.push(f);
    return lb;
}

StepRecord Engine::step(const StreamSample& sample) {
    StepRecord rec;
    rec.t = sample.t;
    rec.gt_class = sample.gt_class;
    rec.is_desired = sample.is_desired();

    try {
        auto [f, cache] = adapter_.forward(sample.raw);
        const auto [s, y_hat] = score(f, prototypes_);
        score_bank_.push(s);  // the bank always reflects the current sample
        rec.s = s;

        IdentifierOutcome id = evaluate_identifier(s);
        const bool warm = score_bank_.count() < cfg_.warmup;
        if (warm) {
            id.decision = Decision::Desired;
            id.rel = Reliability::UnreliableDesired;
        }
        rec.tau_star = id.tau_star;
        rec.mu_d = id.mu_d;
        rec.mu_u = id.mu_u;
        rec.decision = id.decision;
        rec.reliability = id.rel;
        rec.prediction = id.decision == Decision::Desired ? y_hat : kUnknown;

        if (!warm) {
            switch (cfg_.method) {
                case Method::ZSEval:
                    break;  // no adaptation, banks unused
                case Method::Rosita:
                    rec.loss = rosita_update(sample, f, cache, y_hat, id.rel);
                    break;
                case Method::UniEnt:
                    rec.loss = unient_update(f, cache, id.decision);
                    break;
                case Method::KPlusOnePC:
                    rec.loss = kplus1_update(f, cache, y_hat, id.decision, id.rel);
                    break;
            }
        }
    } catch (const std::exception&) {
        // A streaming system does not halt on one degenerate sample.
        rec.failed = true;
        rec.loss = LossBreakdown{};
        ++failed_steps_;
    }

    rec.bank_d_size = m_d_.size();
    rec.bank_u_size = m_u_.size();
    return rec;
}

RunResult run(std::span<const StreamSample> stream, const ClassPrototypeSet& prototypes,
              const MethodConfig& config, int hist_window) {
    if (hist_window < 1) throw ConfigError("run: histogram window must be >= 1");
    Engine engine(prototypes, config);

    RunResult result;
    result.records.reserve(stream.size());
    result.histograms.window = hist_window;

    for (const StreamSample& sample : stream) {
        const StepRecord rec = engine.step(sample);
        const std::size_t w = result.records.size() / static_cast<std::size_t>(hist_window);
        if (w >= result.histograms.windows.size()) {
            result.histograms.windows.push_back(
                {static_cast<std::int64_t>(w) * hist_window, {}, {}});
        }
        int bin = static_cast<int>(std::floor((rec.s + 1.0) * (ScoreHistograms::kBins / 2.0)));
        bin = std::clamp(bin, 0, ScoreHistograms::kBins - 1);
        auto& win = result.histograms.windows[w];
        if (rec.is_desired)
            ++win.desired[static_cast<std::size_t>(bin)];
        else
            ++win.undesired[static_cast<std::size_t>(bin)];
        result.records.push_back(rec);
    }
    result.failed_steps = engine.failed_steps();

    if (!result.records.empty()) {
        result.summary = accuracies(result.records);
        std::vector<double> sd, su;
        for (const StepRecord& r : result.records)
            (r.is_desired ? sd : su).push_back(r.s);
        if (!sd.empty() && !su.empty()) {
            result.summary.auroc = auroc(sd, su);
            result.summary.fpr95 = fpr_at_95tpr(sd, su);
        }
    }
    return result;
}

}  // namespace ostta
