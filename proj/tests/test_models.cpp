// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "encost/models.hpp"

using namespace encost;

namespace {

DescriptorSet full_descriptors() {
    DescriptorSet d;
    d.sequence_id = "seq";
    d.c_s_si = 20.0;
    d.c_s_vca = 8.0;
    d.c_s_var = 400.0;
    d.c_t_ti = 3.0;
    d.c_t_vca = 1.5;
    d.c_t_flow = 0.8;
    d.c_ultrafast = 0.004;
    return d;
}

}  // namespace

TEST_CASE("content factor: blind spec is exactly 1") {
    ContentFactorSpec spec;
    spec.spatial = SpatialSource::none;
    spec.temporal = TemporalSource::none;
    CHECK(content_factor(DescriptorSet{}, spec) == 1.0);
}

TEST_CASE("content factor: ln(e) * identity(3) = 3") {
    DescriptorSet d;
    d.c_s_vca = std::exp(1.0);
    d.c_t_vca = 3.0;
    ContentFactorSpec spec;  // vca/vca, ln/identity
    CHECK(content_factor(d, spec) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("content factor: floor clamps a negative log term") {
    DescriptorSet d;
    d.c_s_vca = 0.5;  // ln < 0
    d.c_t_vca = 3.0;
    ContentFactorSpec spec;
    CHECK(content_factor(d, spec) == doctest::Approx(1e-6 * 3.0).epsilon(1e-12));
}

TEST_CASE("content factor: ultrafast bypasses normalization") {
    const auto d = full_descriptors();
    ContentFactorSpec spec;
    spec.spatial = SpatialSource::ultrafast;
    spec.temporal = TemporalSource::ultrafast;
    CHECK(content_factor(d, spec) == doctest::Approx(0.004));
}

TEST_CASE("content factor: ultrafast must occupy both roles") {
    ContentFactorSpec spec;
    spec.spatial = SpatialSource::ultrafast;
    spec.temporal = TemporalSource::ti;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("content factor: missing descriptor names the field") {
    DescriptorSet d;  // everything absent
    ContentFactorSpec spec;
    try {
        content_factor(d, spec);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("c_s_vca") != std::string::npos);
    }
}

TEST_CASE("content factor: one-sided none contributes a unit factor") {
    const auto d = full_descriptors();
    ContentFactorSpec spec;
    spec.spatial = SpatialSource::none;
    spec.temporal = TemporalSource::ti;
    CHECK(content_factor(d, spec) == doctest::Approx(3.0));
}

TEST_CASE("predict_time_kpix: collapsed parameters give exactly the crf term") {
    TimeModelParams tp;  // all zero
    CHECK(predict_time_kpix(tp, 1.0, 1, 1, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(predict_time_kpix(tp, 5.0, 9, 4, 7) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("predict_time_kpix: direct substitution case") {
    TimeModelParams tp;
    tp.xi = 1.0;
    tp.t0 = 0.5;
    CHECK(predict_time_kpix(tp, 2.0, 1, 4, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("predict_time_kpix: monotonicities") {
    TimeModelParams tp;
    tp.beta = -0.4;
    for (int p = 1; p < 13; ++p)
        CHECK(predict_time_kpix(tp, 1.0, 1, 32, p) >
              predict_time_kpix(tp, 1.0, 1, 32, p + 1));

    TimeModelParams content;
    content.xi = 0.7;
    CHECK(predict_time_kpix(content, 2.0, 1, 32, 5) >
          predict_time_kpix(content, 1.0, 1, 32, 5));

    TimeModelParams intra;
    intra.delta = 0.3;
    CHECK(predict_time_kpix(intra, 1.0, 8, 32, 5) >
          predict_time_kpix(intra, 1.0, 2, 32, 5));

    TimeModelParams any;
    any.gamma = 1.0;
    for (int crf : {2, 10, 40})
        CHECK(predict_time_kpix(any, 1.0, 1, crf, 5) >
              predict_time_kpix(any, 1.0, 1, crf + 1, 5));
}

TEST_CASE("predict_time_kpix: domain checks") {
    TimeModelParams tp;
    CHECK_THROWS_AS(predict_time_kpix(tp, 0.0, 1, 32, 5), DomainError);
    CHECK_THROWS_AS(predict_time_kpix(tp, -1.0, 1, 32, 5), DomainError);
    CHECK_THROWS_AS(predict_time_kpix(tp, 1.0, 0, 32, 5), DomainError);
    CHECK_THROWS_AS(predict_time_kpix(tp, 1.0, 1, 0, 5), DomainError);
    CHECK_THROWS_AS(predict_time_kpix(tp, 1.0, 1, 32, 0), DomainError);
    CHECK_THROWS_AS(predict_time_kpix(tp, 1.0, 1, 32, 14), DomainError);
}

TEST_CASE("gauge invariance: scaling C absorbed by gamma") {
    TimeModelParams tp;
    tp.alpha = 0.8;
    tp.beta = -0.3;
    tp.gamma = 1.7;
    tp.delta = 0.25;
    tp.xi = 1.3;
    tp.t0 = 0.01;
    const double s = 3.7;
    TimeModelParams scaled = tp;
    scaled.gamma = tp.gamma - tp.xi * std::log(s);
    for (int preset : {1, 6, 13})
        for (int crf : {32, 63}) {
            const double a = predict_time_kpix(tp, 2.0, 4, crf, preset);
            const double b = predict_time_kpix(scaled, 2.0 * s, 4, crf, preset);
            CHECK(b == doctest::Approx(a).epsilon(1e-12));
        }
}

TEST_CASE("predict_energy: intercept, linearity, affinity") {
    EnergyModelParams ep;
    ep.e0 = 1.68e-19;
    ep.p = 1.77e-2;
    // reference parameter values: 100 s of CPU time -> about 1.77 J
    CHECK(predict_energy(ep, 0.001, 1000, 1000, 100) == doctest::Approx(1.77).epsilon(1e-9));
    CHECK(predict_energy(ep, 0.0, 1920, 1080, 60) == doctest::Approx(ep.e0));

    EnergyModelParams line{5.0, 2.0};
    const double e1 = predict_energy(line, 0.003, 1000, 1000, 10);
    const double e2 = predict_energy(line, 0.007, 1000, 1000, 10);
    const double e12 = predict_energy(line, 0.010, 1000, 1000, 10);
    CHECK(e1 + e2 - line.e0 == doctest::Approx(e12).epsilon(1e-12));

    // doubling frames doubles E - e0
    const double a = predict_energy(line, 0.004, 1280, 720, 100) - line.e0;
    const double b = predict_energy(line, 0.004, 1280, 720, 200) - line.e0;
    CHECK(b == doctest::Approx(2.0 * a).epsilon(1e-12));

    CHECK_THROWS_AS(predict_energy(line, -0.1, 100, 100, 1), DomainError);
}

TEST_CASE("predict_record composes time and energy") {
    TimeModelParams tp;  // collapsed: t_kpix = 1/crf
    EncodingRecord r;
    r.sequence_id = "seq";
    r.width = 1000;
    r.height = 1000;
    r.n_frames = 100;
    r.preset = 1;
    r.crf = 1;
    r.n_intra = 1;
    r.time_s = 1.0;

    DescriptorSet d = full_descriptors();
    ContentFactorSpec blind;
    blind.spatial = SpatialSource::none;
    blind.temporal = TemporalSource::none;

    const auto pred = predict_record(tp, std::nullopt, blind, d, r);
    CHECK(pred.time_s == doctest::Approx(100000.0).epsilon(1e-12));  // kpix * n
    CHECK_FALSE(pred.energy_j.has_value());

    EnergyModelParams ep{2.0, 3.0};
    const auto with_energy = predict_record(tp, ep, blind, d, r);
    CHECK(with_energy.energy_j.has_value());
    CHECK(*with_energy.energy_j == doctest::Approx(2.0 + 3.0 * 100000.0).epsilon(1e-12));

    DescriptorSet wrong = d;
    wrong.sequence_id = "other";
    CHECK_THROWS_AS(predict_record(tp, std::nullopt, blind, wrong, r), JoinError);

    DescriptorSet bad_geometry = d;
    bad_geometry.width = 640;
    bad_geometry.height = 480;
    CHECK_THROWS_AS(predict_record(tp, std::nullopt, blind, bad_geometry, r), JoinError);
}

TEST_CASE("t_kpix = 0.001 at 1000x1000x100 is 100 seconds total") {
    // predict_record's time scaling: t_kpix * (W*H/1000) * n
    EncodingRecord r;
    r.width = 1000;
    r.height = 1000;
    r.n_frames = 100;
    CHECK(0.001 * r.kilopixels() == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
    TimeModelParams tp;
    tp.t0 = -0.1;
    CHECK_THROWS_AS(tp.validate(), DomainError);
    EnergyModelParams ep;
    ep.p = 0.0;
    CHECK_THROWS_AS(ep.validate(), DomainError);
    EncodingRecord r;
    CHECK_THROWS_AS(r.validate(), DomainError);
}
