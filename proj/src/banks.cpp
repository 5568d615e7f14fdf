#include "ostta/banks.hpp"

#include <algorithm>
#include <cmath>

#include "ostta/stream.hpp"

namespace ostta {

namespace {

void check_unit(const Vec& f) {
    if (std::abs(norm(f) - 1.0) > 1e-6)
        throw NotNormalized("bank push: feature is not unit norm");
}

NeighborSet top_k(std::vector<Neighbor>& cands,
                  std::vector<std::uint64_t>& orders, int k) {
    std::vector<std::size_t> idx(cands.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (cands[a].similarity != cands[b].similarity)
            return cands[a].similarity > cands[b].similarity;
        return orders[a] > orders[b];  // ties: newer first
    });
    NeighborSet out;
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), idx.size());
    out.neighbors.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.neighbors.push_back(cands[idx[i]]);
    return out;
}

}  // namespace

DesiredBank::DesiredBank(int num_classes, int per_class_capacity)
    : per_class_capacity_(per_class_capacity) {
    if (num_classes < 1) throw ConfigError("DesiredBank: num_classes must be >= 1");
    if (per_class_capacity < 0) throw ConfigError("DesiredBank: capacity must be >= 0");
    queues_.resize(static_cast<std::size_t>(num_classes));
}

void DesiredBank::push(const Vec& f, int pseudo_label) {
    if (pseudo_label < 0 || pseudo_label >= num_classes())
        throw ConfigError("DesiredBank: pseudo_label out of range");
    if (per_class_capacity_ == 0) return;
    check_unit(f);
    auto& q = queues_[static_cast<std::size_t>(pseudo_label)];
    if (static_cast<int>(q.size()) == per_class_capacity_) {
        q.pop_front();
        --total_;
    }
    q.push_back({f, pseudo_label, next_order_++});
    ++total_;
}

int DesiredBank::class_count(int c) const {
    return static_cast<int>(queues_[static_cast<std::size_t>(c)].size());
}

UndesiredBank::UndesiredBank(int capacity) : capacity_(capacity) {
    if (capacity < 0) throw ConfigError("UndesiredBank: capacity must be >= 0");
}

void UndesiredBank::push(const Vec& f) {
    if (capacity_ == 0) return;
    check_unit(f);
    if (static_cast<int>(entries_.size()) == capacity_) entries_.pop_front();
    entries_.push_back({f, kUndesired, next_order_++});
}

NeighborSet knn(const Vec& f, const DesiredBank& bank, int k) {
    if (k < 1) throw ConfigError("knn: k must be >= 1");
    std::vector<Neighbor> cands;
    std::vector<std::uint64_t> orders;
    cands.reserve(static_cast<std::size_t>(bank.size()));
    for (const auto& q : bank.queues()) {
        for (const BankEntry& e : q) {
            cands.push_back({&e.feature, dot(f, e.feature), e.pseudo_label});
            orders.push_back(e.order);
        }
    }
    return top_k(cands, orders, k);
}

NeighborSet knn(const Vec& f, const UndesiredBank& bank, int k) {
    if (k < 1) throw ConfigError("knn: k must be >= 1");
    std::vector<Neighbor> cands;
    std::vector<std::uint64_t> orders;
    cands.reserve(static_cast<std::size_t>(bank.size()));
    for (const BankEntry& e : bank.entries()) {
        cands.push_back({&e.feature, dot(f, e.feature), std::nullopt});
        orders.push_back(e.order);
    }
    return top_k(cands, orders, k);
}

std::int64_t capacity_floats(int num_classes, int k, int n_u, int dim) {
    if (num_classes < 1 || k < 1 || n_u < 1 || dim < 1)
        throw ConfigError("capacity_floats: all arguments must be positive");
    return (static_cast<std::int64_t>(num_classes) * k + n_u) * dim;
}

}  // namespace ostta
