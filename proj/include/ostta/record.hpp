#ifndef OSTTA_RECORD_HPP
#define OSTTA_RECORD_HPP

#include <cstdint>

#include "ostta/identifier.hpp"
#include "ostta/reduce_loss.hpp"
#include "ostta/stream.hpp"

namespace ostta {

// Prediction marker for rejected samples ("I don't know").
inline constexpr int kUnknown = -1;

// Everything observable about one engine step, emitted before any state the
// step itself mutated could influence the prediction.
struct StepRecord {
    std::int64_t t = 0;
    double s = 0.0;
    double tau_star = 0.0;
    double mu_d = 0.0;
    double mu_u = 0.0;
    Decision decision = Decision::Undesired;
    Reliability reliability = Reliability::UnreliableDesired;
    int prediction = kUnknown;  // class index, or kUnknown iff decision is Undesired
    int gt_class = kUndesired;
    bool is_desired = false;
    LossBreakdown loss;
    int bank_d_size = 0;
    int bank_u_size = 0;
    bool failed = false;
};

}  // namespace ostta

#endif  // OSTTA_RECORD_HPP
