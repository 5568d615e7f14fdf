#ifndef OSTTA_ASSIGNMENT_HPP
#define OSTTA_ASSIGNMENT_HPP

#include <vector>

namespace ostta {

// Exact minimum-cost perfect assignment on a square cost matrix via the
// O(n^3) potentials / shortest augmenting path method. Optionally reports the
// chosen row -> column mapping. The total is summed in row order.
double solve_assignment(const std::vector<std::vector<double>>& cost,
                        std::vector<int>* row_to_col = nullptr);

}  // namespace ostta

#endif  // OSTTA_ASSIGNMENT_HPP
