#ifndef OSTTA_ENGINE_HPP
#define OSTTA_ENGINE_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ostta/adapter.hpp"
#include "ostta/banks.hpp"
#include "ostta/identifier.hpp"
#include "ostta/metrics.hpp"
#include "ostta/prototypes.hpp"
#include "ostta/record.hpp"
#include "ostta/reduce_loss.hpp"
#include "ostta/stream.hpp"

namespace ostta {

enum class Method { ZSEval, Rosita, UniEnt, KPlusOnePC };
enum class IdentifierKind { Lda, Daf, Msp };

struct MethodConfig {
    Method method = Method::Rosita;
    IdentifierKind identifier = IdentifierKind::Lda;
    double msp_tau_u = 0.4, msp_tau_t = 0.6, msp_tau_d = 0.8;
    ContrastiveConfig contrastive;
    double lr = 0.001;
    double adapter_epsilon = 1e-5;
    int warmup = 32;                   // samples classified Desired, no updates
    int score_bank_capacity = 512;
    int undesired_bank_capacity = 64;  // |M_u|
    bool enable_l_re = true;
    bool enable_l_d = true;
    bool enable_l_u = true;
    std::uint64_t seed = 0;            // echoed into outputs; the engine itself has no RNG

    void validate() const;
};

const char* method_name(Method m);
const char* identifier_name(IdentifierKind k);

struct ScoreHistograms {
    static constexpr int kBins = 100;  // over [-1, 1]
    int window = 500;

    struct Window {
        std::int64_t start;
        std::array<std::uint32_t, kBins> desired{};
        std::array<std::uint32_t, kBins> undesired{};
    };
    std::vector<Window> windows;
};

struct RunResult {
    std::vector<StepRecord> records;
    MetricSummary summary;
    ScoreHistograms histograms;
    int failed_steps = 0;
};

// Per-sample objective of the UniEnt baseline: prediction entropy over the
// cosine logits, minimized for desired-decided samples and maximized
// (negated) otherwise. Returns the loss; fills dL/df when grad is given.
double unient_loss(const Vec& f, const ClassPrototypeSet& prototypes, double ce_temperature,
                   bool maximize, Vec* grad = nullptr);

// Per-sample objective of the (K+1)-way prototypical CE baseline: logits are
// the class cosines plus, when the pool is non-empty, the best pool cosine.
// target selects the CE class (prototypes.num_classes() for the pool slot).
double kplus1_loss(const Vec& f, const ClassPrototypeSet& prototypes,
                   std::span<const Vec> pool, int target, double ce_temperature,
                   Vec* grad = nullptr);

// One adaptation engine: owns the adapter, the score bank, and both feature
// banks. Strictly single-threaded; run independent instances in parallel.
class Engine {
public:
    Engine(ClassPrototypeSet prototypes, MethodConfig config);

    StepRecord step(const StreamSample& sample);

    const ClassPrototypeSet& prototypes() const { return prototypes_; }
    const LayerNormAdapter& adapter() const { return adapter_; }
    const DesiredBank& desired_bank() const { return m_d_; }
    const UndesiredBank& undesired_bank() const { return m_u_; }
    ScoreBank& score_bank() { return score_bank_; }
    const ScoreBank& score_bank() const { return score_bank_; }
    int failed_steps() const { return failed_steps_; }

private:
    struct IdentifierOutcome {
        Decision decision;
        Reliability rel;
        double tau_star, mu_d, mu_u;
    };
    IdentifierOutcome evaluate_identifier(double s) const;

    LossBreakdown rosita_update(const StreamSample& sample, const Vec& f,
                                const ForwardCache& cache, int y_hat, Reliability rel);
    LossBreakdown unient_update(const Vec& f, const ForwardCache& cache, Decision decision);
    LossBreakdown kplus1_update(const Vec& f, const ForwardCache& cache, int y_hat,
                                Decision decision, Reliability rel);

    ClassPrototypeSet prototypes_;
    MethodConfig cfg_;
    LayerNormAdapter adapter_;
    ScoreBank score_bank_;
    DesiredBank m_d_;
    UndesiredBank m_u_;
    int failed_steps_ = 0;
};

// Applies the configured method to every sample exactly once, in order.
RunResult run(std::span<const StreamSample> stream, const ClassPrototypeSet& prototypes,
              const MethodConfig& config, int hist_window = 500);

}  // namespace ostta

#endif  // OSTTA_ENGINE_HPP
