#ifndef OSTTA_PROTOTYPES_HPP
#define OSTTA_PROTOTYPES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ostta/vecmath.hpp"

namespace ostta {

// The fixed classifier: one unit-norm row per desired class. Plays the role
// of the frozen text-embedding heads of a vision-language model; here the
// rows either come from the synthetic generator or from an EMB1 dump.
class ClassPrototypeSet {
public:
    // norm_tol: allowed deviation of row norms from 1. Generated sets hold
    // 1e-9; sets ingested from f32 dumps are validated at 1e-5.
    ClassPrototypeSet(std::vector<Vec> rows, std::vector<std::string> names,
                      double norm_tol = 1e-9);

    int num_classes() const { return static_cast<int>(rows_.size()); }
    int dim() const { return static_cast<int>(rows_.front().size()); }
    const Vec& prototype(int c) const { return rows_[static_cast<std::size_t>(c)]; }
    const std::vector<Vec>& prototypes() const { return rows_; }
    const std::vector<std::string>& class_names() const { return names_; }

    // Largest cosine similarity over all row pairs.
    double max_pairwise_cosine() const;

private:
    std::vector<Vec> rows_;
    std::vector<std::string> names_;
};

// Rejection-samples `num_classes` random unit vectors whose pairwise cosine
// similarity stays at or below 1 - min_cosine_gap. Deterministic in seed;
// throws SeparationInfeasible after 10000 rejected draws for one row.
ClassPrototypeSet generate_prototypes(int num_classes, int dim,
                                      double min_cosine_gap, std::uint64_t seed);

}  // namespace ostta

#endif  // OSTTA_PROTOTYPES_HPP
