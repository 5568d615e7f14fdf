#include "ostta/prototypes.hpp"

#include <cmath>
#include <string>

#include "ostta/prng.hpp"

namespace ostta {

ClassPrototypeSet::ClassPrototypeSet(std::vector<Vec> rows,
                                     std::vector<std::string> names,
                                     double norm_tol)
    : rows_(std::move(rows)), names_(std::move(names)) {
    if (rows_.size() < 2)
        throw DimensionMismatch("prototype set needs at least 2 classes");
    if (names_.size() != rows_.size())
        throw DimensionMismatch("class name count does not match prototype count");
    const std::size_t f = rows_.front().size();
    if (f == 0) throw DimensionMismatch("prototype dimension must be positive");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].size() != f)
            throw DimensionMismatch("prototype rows have inconsistent dimensions");
        if (!all_finite(rows_[i]))
            throw DimensionMismatch("prototype row " + std::to_string(i) + " is not finite");
        if (std::abs(norm(rows_[i]) - 1.0) > norm_tol)
            throw NotNormalized("prototype row " + std::to_string(i) + " is not unit norm");
    }
}

double ClassPrototypeSet::max_pairwise_cosine() const {
    double best = -1.0;
    for (std::size_t i = 0; i < rows_.size(); ++i)
        for (std::size_t j = i + 1; j < rows_.size(); ++j)
            best = std::max(best, dot(rows_[i], rows_[j]));
    return best;
}

ClassPrototypeSet generate_prototypes(int num_classes, int dim,
                                      double min_cosine_gap, std::uint64_t seed) {
    if (num_classes < 2) throw ConfigError("generate_prototypes: num_classes must be >= 2");
    if (dim < 1) throw ConfigError("generate_prototypes: dim must be >= 1");
    if (min_cosine_gap < 0.0 || min_cosine_gap >= 1.0)
        throw ConfigError("generate_prototypes: min_cosine_gap must lie in [0, 1)");

    const double max_cos = 1.0 - min_cosine_gap;
    Rng rng(seed);
    std::vector<Vec> rows;
    rows.reserve(static_cast<std::size_t>(num_classes));
    std::vector<std::string> names;

    for (int c = 0; c < num_classes; ++c) {
        bool placed = false;
        for (int attempt = 0; attempt < 10000; ++attempt) {
            Vec v(static_cast<std::size_t>(dim));
            for (double& x : v) x = rng.normal();
            double n = norm(v);
            if (n < 1e-12) continue;
            for (double& x : v) x /= n;
            bool ok = true;
            for (const Vec& p : rows) {
                if (dot(v, p) > max_cos) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                rows.push_back(std::move(v));
                placed = true;
                break;
            }
        }
        if (!placed)
            throw SeparationInfeasible(
                "generate_prototypes: could not place class " + std::to_string(c) +
                " after 10000 attempts (gap " + std::to_string(min_cosine_gap) + ")");
        names.push_back("class_" + std::to_string(c));
    }
    return ClassPrototypeSet(std::move(rows), std::move(names), 1e-9);
}

}  // namespace ostta
