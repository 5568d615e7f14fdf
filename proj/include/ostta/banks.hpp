#ifndef OSTTA_BANKS_HPP
#define OSTTA_BANKS_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "ostta/vecmath.hpp"

namespace ostta {

struct BankEntry {
    Vec feature;                 // unit norm, snapshot at insertion time
    int pseudo_label;            // kUndesired for the undesired bank
    std::uint64_t order;         // monotonically increasing insertion index
};

struct Neighbor {
    const Vec* feature;
    double similarity;
    std::optional<int> pseudo_label;
};

// Retrieval result, ordered by similarity descending; ties broken by
// insertion recency (newer first).
struct NeighborSet {
    std::vector<Neighbor> neighbors;

    bool empty() const { return neighbors.empty(); }
    int size() const { return static_cast<int>(neighbors.size()); }
};

// Per-class FIFO queues of reliable desired features, capacity K each.
class DesiredBank {
public:
    DesiredBank(int num_classes, int per_class_capacity);

    void push(const Vec& f, int pseudo_label);
    int size() const { return total_; }
    int class_count(int c) const;
    int num_classes() const { return static_cast<int>(queues_.size()); }
    int per_class_capacity() const { return per_class_capacity_; }
    const std::vector<std::deque<BankEntry>>& queues() const { return queues_; }

private:
    std::vector<std::deque<BankEntry>> queues_;
    int per_class_capacity_;
    int total_ = 0;
    std::uint64_t next_order_ = 0;
};

// Global FIFO of reliable undesired features.
class UndesiredBank {
public:
    explicit UndesiredBank(int capacity);

    void push(const Vec& f);
    int size() const { return static_cast<int>(entries_.size()); }
    int capacity() const { return capacity_; }
    const std::deque<BankEntry>& entries() const { return entries_; }

private:
    std::deque<BankEntry> entries_;
    int capacity_;
    std::uint64_t next_order_ = 0;
};

// Brute-force k nearest neighbours by cosine similarity. Banks hold at most
// a few hundred unit vectors, so a scan is the right algorithm.
NeighborSet knn(const Vec& f, const DesiredBank& bank, int k);
NeighborSet knn(const Vec& f, const UndesiredBank& bank, int k);

// Total f64 slots both banks occupy when full: (num_classes*k + n_u) * dim.
std::int64_t capacity_floats(int num_classes, int k, int n_u, int dim);

}  // namespace ostta

#endif  // OSTTA_BANKS_HPP
