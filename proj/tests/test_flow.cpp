// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "encost/descriptors.hpp"
#include "encost/optical_flow.hpp"
#include "synthetic.hpp"

using namespace encost;

TEST_CASE("flow: identical frames give exactly zero everywhere") {
    std::mt19937_64 rng(2024);
    const auto f = synth::random_frame(64, 64, rng);
    const auto flow = farneback_flow(f, f);
    for (float u : flow.u) CHECK(u == 0.0f);
    for (float v : flow.v) CHECK(v == 0.0f);
}

TEST_CASE("flow descriptor: repeated-frame sequence is exactly zero") {
    std::mt19937_64 rng(77);
    const auto f = synth::random_frame(96, 96, rng);
    MemoryFrameSource src({f, f, f, f});
    CHECK(optical_flow_displacement(src) == 0.0);
}

TEST_CASE("flow: 2 px/frame horizontal translation is recovered") {
    const auto frames = synth::translating_sequence(128, 128, 8, 2, 31337);
    REQUIRE(frames.size() == 8);

    const auto flow = farneback_flow(frames[0], frames[1]);
    const auto m = mean_absolute_flow(flow);
    // interior flow should sit near (2, 0); border attenuation drags the mean
    CHECK(m.u > 1.5);
    CHECK(m.u < 2.5);
    CHECK(m.v < 0.35);

    MemoryFrameSource src(frames);
    const double displacement = optical_flow_displacement(src);
    // Eq-style aggregate: sum of 7 per-pair values over 8 frames
    CHECK(displacement > 1.3);
    CHECK(displacement < 2.4);
}

TEST_CASE("flow: geometry mismatch and tiny frames rejected") {
    std::mt19937_64 rng(5);
    const auto a = synth::random_frame(32, 32, rng);
    const auto b = synth::random_frame(16, 32, rng);
    CHECK_THROWS_AS(farneback_flow(a, b), DomainError);
    const auto tiny = synth::random_frame(4, 4, rng);
    CHECK_THROWS_AS(farneback_flow(tiny, tiny), DomainError);
}

TEST_CASE("flow: single frame sequence defines displacement 0") {
    std::mt19937_64 rng(6);
    MemoryFrameSource src({synth::random_frame(64, 64, rng)});
    CHECK(optical_flow_displacement(src) == 0.0);
}
