#include "doctest.h"
#include "oracles.hpp"
#include "ostta/assignment.hpp"
#include "ostta/metrics.hpp"
#include "ostta/prng.hpp"

#include <cmath>

using namespace ostta;

namespace {

StepRecord rec(bool is_desired, Decision decision, int prediction, int gt) {
    StepRecord r;
    r.is_desired = is_desired;
    r.decision = decision;
    r.prediction = prediction;
    r.gt_class = gt;
    return r;
}

}  // namespace

TEST_CASE("auroc of separated and inverted score sets") {
    CHECK(auroc(std::vector<double>{0.9, 0.8}, std::vector<double>{0.2, 0.1}) == 1.0);
    CHECK(auroc(std::vector<double>{0.8, 0.4}, std::vector<double>{0.6, 0.2}) == 0.75);
    const std::vector<double> same = {0.1, 0.5, 0.5, 0.9};
    CHECK(auroc(same, same) == 0.5);
    CHECK_THROWS_AS(auroc({}, same), EmptyClass);
}

TEST_CASE("auroc equals the all-pairs oracle exactly") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> d(1 + rng.below(50)), u(1 + rng.below(50));
        for (double& x : d) x = 0.1 * static_cast<double>(rng.below(12));
        for (double& x : u) x = 0.1 * static_cast<double>(rng.below(12));
        CHECK(auroc(d, u) == oracles::auroc_pairs(d, u));
    }
}

TEST_CASE("auroc is invariant under strictly increasing transforms") {
    Rng rng(43);
    std::vector<double> d(40), u(30);
    for (double& x : d) x = rng.uniform01();
    for (double& x : u) x = rng.uniform01();
    const double base = auroc(d, u);
    auto apply = [](std::vector<double> v, double (*f)(double)) {
        for (double& x : v) x = f(x);
        return v;
    };
    CHECK(auroc(apply(d, std::exp), apply(u, std::exp)) == base);
    CHECK(auroc(apply(d, std::atan), apply(u, std::atan)) == base);
}

TEST_CASE("fpr95 on disjoint and inverted supports") {
    std::vector<double> d(20, 0.9), u(10, 0.5);
    CHECK(fpr_at_95tpr(d, u) == 0.0);
    std::vector<double> u_hi(10, 0.95);
    CHECK(fpr_at_95tpr(d, u_hi) == 1.0);
}

TEST_CASE("fpr95 equals the threshold-sweep oracle") {
    Rng rng(47);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> d(1 + rng.below(200)), u(1 + rng.below(200));
        for (double& x : d) x = rng.uniform01();
        for (double& x : u) x = rng.uniform01();
        CHECK(fpr_at_95tpr(d, u) == oracles::fpr_sweep(d, u));
    }
}

TEST_CASE("lowering undesired scores never raises fpr95") {
    Rng rng(53);
    std::vector<double> d(60), u(50);
    for (double& x : d) x = rng.uniform01();
    for (double& x : u) x = rng.uniform01();
    const double base = fpr_at_95tpr(d, u);
    std::vector<double> lower = u;
    for (double& x : lower) x -= 0.1;
    CHECK(fpr_at_95tpr(d, lower) <= base);
}

TEST_CASE("accuracy bookkeeping") {
    std::vector<StepRecord> rs;
    rs.push_back(rec(true, Decision::Desired, 2, 2));
    rs.push_back(rec(true, Decision::Desired, 1, 2));     // accepted, wrong class
    rs.push_back(rec(true, Decision::Undesired, -1, 0));  // rejected desired
    rs.push_back(rec(false, Decision::Undesired, -1, -1));
    rs.push_back(rec(false, Decision::Desired, 3, -1));   // false accept
    const auto m = accuracies(rs);
    CHECK(m.n_desired == 3);
    CHECK(m.n_undesired == 2);
    CHECK(*m.acc_d == doctest::Approx(1.0 / 3.0));
    CHECK(*m.acc_u == doctest::Approx(0.5));
    const double hm = 2.0 * (1.0 / 3.0) * 0.5 / (1.0 / 3.0 + 0.5);
    CHECK(*m.hm == doctest::Approx(hm));
}

TEST_CASE("perfect and harmonic-mean arithmetic") {
    std::vector<StepRecord> rs;
    rs.push_back(rec(true, Decision::Desired, 0, 0));
    rs.push_back(rec(false, Decision::Undesired, -1, -1));
    auto m = accuracies(rs);
    CHECK(*m.acc_d == 1.0);
    CHECK(*m.acc_u == 1.0);
    CHECK(*m.hm == 1.0);

    rs.clear();
    rs.push_back(rec(true, Decision::Desired, 0, 0));
    rs.push_back(rec(true, Decision::Undesired, -1, 0));
    rs.push_back(rec(false, Decision::Undesired, -1, -1));
    m = accuracies(rs);
    CHECK(*m.acc_d == 0.5);
    CHECK(*m.acc_u == 1.0);
    CHECK(*m.hm == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("zero accuracy zeroes the harmonic mean") {
    std::vector<StepRecord> rs;
    rs.push_back(rec(true, Decision::Undesired, -1, 0));
    rs.push_back(rec(false, Decision::Undesired, -1, -1));
    const auto m = accuracies(rs);
    CHECK(*m.acc_d == 0.0);
    CHECK(*m.hm == 0.0);
}

TEST_CASE("one-sided record lists report absent metrics") {
    std::vector<StepRecord> rs;
    rs.push_back(rec(true, Decision::Desired, 0, 0));
    const auto m = accuracies(rs);
    CHECK(m.acc_d.has_value());
    CHECK(!m.acc_u.has_value());
    CHECK(!m.hm.has_value());
    CHECK_THROWS_AS(accuracies(std::span<const StepRecord>{}), EmptyClass);
}

TEST_CASE("accuracies combine across concatenation by counts") {
    Rng rng(59);
    std::vector<StepRecord> a, b;
    auto random_rec = [&](std::vector<StepRecord>& out) {
        const bool des = rng.below(2) == 0;
        const Decision dec = rng.below(2) == 0 ? Decision::Desired : Decision::Undesired;
        const int gt = des ? static_cast<int>(rng.below(3)) : -1;
        const int pred = dec == Decision::Desired ? static_cast<int>(rng.below(3)) : -1;
        out.push_back(rec(des, dec, pred, gt));
    };
    for (int i = 0; i < 37; ++i) random_rec(a);
    for (int i = 0; i < 23; ++i) random_rec(b);
    std::vector<StepRecord> both = a;
    both.insert(both.end(), b.begin(), b.end());
    const auto ma = accuracies(a), mb = accuracies(b), mc = accuracies(both);
    CHECK(mc.n_correct_d == ma.n_correct_d + mb.n_correct_d);
    CHECK(mc.n_rejected_u == ma.n_rejected_u + mb.n_rejected_u);
    CHECK(mc.n_desired == ma.n_desired + mb.n_desired);
    CHECK(mc.n_undesired == ma.n_undesired + mb.n_undesired);
    if (mc.acc_d)
        CHECK(*mc.acc_d == doctest::Approx(static_cast<double>(ma.n_correct_d + mb.n_correct_d) /
                                           static_cast<double>(ma.n_desired + mb.n_desired)));
}

TEST_CASE("pairwise distances of simple sets") {
    const Vec e1 = {1, 0}, e2 = {0, 1};
    const std::vector<Vec> a = {e1}, b = {e2};
    const auto [euc, cos] = pairwise_distances(a, b);
    CHECK(euc == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(cos == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<Vec> v = {{0.6, 0.8}};
    const auto [euc2, cos2] = pairwise_distances(v, v);
    CHECK(euc2 == 0.0);
    CHECK(cos2 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(pairwise_distances({}, v), EmptyClass);
}

TEST_CASE("pairwise distances match a double-loop recomputation") {
    Rng rng(61);
    std::vector<Vec> a, b;
    for (int i = 0; i < 7; ++i) {
        Vec v(5), w(5);
        for (double& x : v) x = rng.normal();
        for (double& x : w) x = rng.normal();
        a.push_back(v);
        b.push_back(w);
    }
    const auto [euc, cos] = pairwise_distances(a, b);
    double se = 0.0, sc = 0.0;
    for (const Vec& x : a)
        for (const Vec& y : b) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
            se += std::sqrt(d2);
            sc += dot(x, y) / (norm(x) * norm(y));
        }
    CHECK(euc == doctest::Approx(se / 49.0).epsilon(1e-12));
    CHECK(cos == doctest::Approx(1.0 - sc / 49.0).epsilon(1e-12));
}

TEST_CASE("wasserstein of matched multisets is zero") {
    const Vec e1 = {1, 0}, e2 = {0, 1};
    CHECK(wasserstein_small(std::vector<Vec>{e1}, std::vector<Vec>{e1}, 4, 3) == 0.0);
    const std::vector<Vec> a = {e1, e2}, b = {e2, e1};
    CHECK(wasserstein_small(a, b, 4, 3) == doctest::Approx(0.0).epsilon(1e-12));

    Rng rng(67);
    std::vector<Vec> big;
    for (int i = 0; i < 9; ++i) {
        Vec v(6);
        for (double& x : v) x = rng.normal();
        big.push_back(v);
    }
    CHECK(wasserstein_small(big, big, 16, 5) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("wasserstein subsampling is deterministic in the seed") {
    Rng rng(71);
    std::vector<Vec> a, b;
    for (int i = 0; i < 30; ++i) {
        Vec v(4), w(4);
        for (double& x : v) x = rng.normal();
        for (double& x : w) x = rng.normal();
        a.push_back(v);
        b.push_back(w);
    }
    const double x = wasserstein_small(a, b, 8, 99);
    const double y = wasserstein_small(a, b, 8, 99);
    CHECK(x == y);
    CHECK(x > 0.0);
}

TEST_CASE("assignment solver equals brute force on small instances") {
    Rng rng(73);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(4));
        std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                              std::vector<double>(static_cast<std::size_t>(n)));
        for (auto& row : cost)
            for (double& x : row) x = rng.uniform01();
        const double got = solve_assignment(cost);
        const double want = oracles::assignment_brute_force(cost);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("assignment reports a valid permutation") {
    std::vector<std::vector<double>> cost = {{1, 5, 3}, {4, 1, 9}, {8, 2, 1}};
    std::vector<int> rc;
    const double total = solve_assignment(cost, &rc);
    CHECK(total == doctest::Approx(3.0));
    std::vector<bool> used(3, false);
    for (int c : rc) {
        REQUIRE(c >= 0);
        REQUIRE(c < 3);
        CHECK(!used[static_cast<std::size_t>(c)]);
        used[static_cast<std::size_t>(c)] = true;
    }
}
