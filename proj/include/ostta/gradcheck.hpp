#ifndef OSTTA_GRADCHECK_HPP
#define OSTTA_GRADCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace ostta {

// Finite-difference validation of every analytic gradient path: the
// contrastive gradients with respect to f under the dot-product convention,
// and each loss (pseudo-label CE, desired/undesired contrastive, entropy,
// (K+1)-way CE) composed through the adapter's forward pass with respect to
// gamma and beta. Trials are spread over dimensions {8, 64} and neighbour
// counts {1, 5}.
struct GradCheckReport {
    struct Component {
        std::string name;
        double max_rel_err;
        int trials;
    };

    std::vector<Component> components;
    double tolerance = 1e-5;

    bool all_ok() const {
        for (const auto& c : components)
            if (!(c.max_rel_err <= tolerance)) return false;
        return true;
    }
};

// trials: random configurations per component. perturb, when nonzero, is
// added to one analytic gradient entry so the detector itself can be tested.
GradCheckReport run_gradcheck(std::uint64_t seed, int trials, double perturb = 0.0);

}  // namespace ostta

#endif  // OSTTA_GRADCHECK_HPP
