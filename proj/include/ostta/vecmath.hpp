#ifndef OSTTA_VECMATH_HPP
#define OSTTA_VECMATH_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ostta/errors.hpp"

namespace ostta {

// Embeddings are plain f64 vectors; every numeric path in the adapter and
// loss code runs at f64 so the gradient checks are meaningful.
using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

inline bool all_finite(std::span<const double> a) {
    for (double x : a) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

// In-place unit normalization; throws ZeroVector below the floor.
inline void normalize(Vec& v, double floor = 1e-12) {
    const double n = norm(v);
    if (n < floor) throw ZeroVector("normalize: vector norm below floor");
    for (double& x : v) x /= n;
}

inline Vec normalized(Vec v) {
    normalize(v);
    return v;
}

// y += a * x
inline void add_scaled(Vec& y, double a, std::span<const double> x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace ostta

#endif  // OSTTA_VECMATH_HPP
