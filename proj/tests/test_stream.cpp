#include "doctest.h"
#include "ostta/stream.hpp"

#include <cmath>

using namespace ostta;

namespace {

ScenarioConfig base_config() {
    ScenarioConfig c;
    c.dim = 16;
    c.num_desired_classes = 4;
    c.num_undesired_clusters = 2;
    c.samples_per_domain = 200;
    c.seed = 77;
    return c;
}

}  // namespace

TEST_CASE("zero noise and shift reproduce prototypes exactly") {
    ScenarioConfig c = base_config();
    c.noise_sigma = 0.0;
    c.shift_strength = 0.0;
    c.aug_sigma = 0.0;
    const auto protos = generate_prototypes(4, 16, 0.3, 5);
    const auto stream = synth_stream(c, protos);
    REQUIRE(!stream.empty());
    for (const auto& s : stream) {
        if (!s.is_desired()) continue;
        const Vec& p = protos.prototype(s.gt_class);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(s.raw[i] == p[i]);
            CHECK(s.raw_aug[i] == s.raw[i]);
        }
    }
}

TEST_CASE("continuous scenario emits domain blocks") {
    ScenarioConfig c = base_config();
    c.kind = ScenarioKind::Continuous;
    c.num_domains = 3;
    c.samples_per_domain = 100;
    c.desired_ratio = 0.5;
    const auto protos = generate_prototypes(4, 16, 0.3, 5);
    const auto stream = synth_stream(c, protos);
    CHECK(stream.size() == 600);  // 100 desired + 100 undesired per domain
    for (std::size_t i = 0; i < stream.size(); ++i) {
        CHECK(stream[i].domain_id == i / 200);
        if (i > 0) CHECK(stream[i].domain_id >= stream[i - 1].domain_id);
        CHECK(stream[i].t == static_cast<std::int64_t>(i));
    }
}

TEST_CASE("varying ratio concentrates around the requested fraction") {
    ScenarioConfig c = base_config();
    c.kind = ScenarioKind::VaryingRatio;
    c.desired_ratio = 0.8;
    c.samples_per_domain = 10000;
    const auto protos = generate_prototypes(4, 16, 0.3, 5);
    const auto stream = synth_stream(c, protos);
    CHECK(stream.size() == 10000);
    std::size_t desired = 0;
    for (const auto& s : stream)
        if (s.is_desired()) ++desired;
    const double frac = static_cast<double>(desired) / 10000.0;
    CHECK(frac > 0.78);
    CHECK(frac < 0.82);
}

TEST_CASE("single domain balance stays within 3 sigma") {
    ScenarioConfig c = base_config();
    c.desired_ratio = 0.3;
    c.samples_per_domain = 300;
    const auto protos = generate_prototypes(4, 16, 0.3, 5);
    const auto stream = synth_stream(c, protos);
    const double n = static_cast<double>(stream.size());
    std::size_t desired = 0;
    for (const auto& s : stream)
        if (s.is_desired()) ++desired;
    const double bound = 3.0 * std::sqrt(n * 0.3 * 0.7);
    CHECK(std::abs(static_cast<double>(desired) - 0.3 * n) <= bound);
}

TEST_CASE("stream generation is byte deterministic") {
    ScenarioConfig c = base_config();
    c.noise_sigma = 0.2;
    c.shift_strength = 1.0;
    const auto protos = generate_prototypes(4, 16, 0.3, 5);
    const auto a = synth_stream(c, protos);
    const auto b = synth_stream(c, protos);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].gt_class == b[i].gt_class);
        CHECK(a[i].domain_id == b[i].domain_id);
        for (std::size_t j = 0; j < a[i].raw.size(); ++j) {
            CHECK(a[i].raw[j] == b[i].raw[j]);
            CHECK(a[i].raw_aug[j] == b[i].raw_aug[j]);
        }
    }
}

TEST_CASE("emitted embeddings are unit norm") {
    ScenarioConfig c = base_config();
    c.noise_sigma = 0.4;
    c.shift_strength = 2.0;
    const auto protos = generate_prototypes(4, 16, 0.3, 5);
    for (const auto& s : synth_stream(c, protos)) {
        CHECK(std::abs(norm(s.raw) - 1.0) <= 1e-9);
        CHECK(std::abs(norm(s.raw_aug) - 1.0) <= 1e-9);
        CHECK(s.raw.size() == s.raw_aug.size());
        CHECK((s.is_desired() ? (s.gt_class >= 0 && s.gt_class < 4) : s.gt_class == kUndesired));
    }
}

TEST_CASE("config and prototype validation") {
    ScenarioConfig c = base_config();
    const auto protos = generate_prototypes(4, 16, 0.3, 5);
    c.desired_ratio = 0.0;
    CHECK_THROWS_AS(synth_stream(c, protos), ConfigError);
    c = base_config();
    c.num_desired_classes = 5;  // prototype set has 4
    CHECK_THROWS_AS(synth_stream(c, protos), DimensionMismatch);
    c = base_config();
    c.dim = 8;
    CHECK_THROWS_AS(synth_stream(c, protos), DimensionMismatch);
}
