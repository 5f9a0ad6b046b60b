#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>

#include "ibex/estimate.hpp"
#include "ibex/rng.hpp"

using ibex::CounterRng;
using ibex::philox4x64_10;

// The zero-input vector is the published 10-round philox4x64 known answer.
TEST_CASE("philox known answers") {
    const auto out = philox4x64_10({0, 0}, {0, 0, 0, 0});
    CHECK(out[0] == 0x16554d9eca36314cULL);
    CHECK(out[1] == 0xdb20fe9d672d0fdcULL);
    CHECK(out[2] == 0xd7e772cee186176bULL);
    CHECK(out[3] == 0x7e68b68aec7ba23bULL);
}

// numpy.random.Philox (numpy 2.2.6) advances its counter before producing a
// block, so its first block from counter C is the block at C+1 (with carry).
// These vectors were captured from numpy and pin both the block function and
// that offset.
TEST_CASE("philox matches the numpy stream") {
    {
        // numpy key=[0,0], counter=[0,0,0,0], first block.
        const auto out = philox4x64_10({0, 0}, {1, 0, 0, 0});
        CHECK(out[0] == 0x02f4ba6408e4d89bULL);
        CHECK(out[1] == 0x3dd62b0b9ca8c5b2ULL);
        CHECK(out[2] == 0x1c8667a55d902e79ULL);
        CHECK(out[3] == 0x907d7a052fd5b4dcULL);
    }
    {
        // numpy key=[42,3], counter=[0,7,0,0], first block.
        const auto out = philox4x64_10({42, 3}, {1, 7, 0, 0});
        CHECK(out[0] == 0x6ca08c446f6c2d2dULL);
        CHECK(out[1] == 0x7486ef29dff57c56ULL);
        CHECK(out[2] == 0x4f676695e9cc4a65ULL);
        CHECK(out[3] == 0xbf425ba161276ee6ULL);
    }
    {
        // numpy key=[42,3], counter=[2^64-1,7,0,0], first block: the
        // increment carries into the second counter word.
        const auto out = philox4x64_10({42, 3}, {0, 8, 0, 0});
        CHECK(out[0] == 0x4f4d2f50b77d9776ULL);
        CHECK(out[1] == 0xcdd0510f6ddfa56fULL);
        CHECK(out[2] == 0x24266decfd991183ULL);
        CHECK(out[3] == 0x8ce274eba5ce0ab8ULL);
    }
}

TEST_CASE("stream layout matches key and counter words") {
    // key = (seed, stream), counter = (block, sample, 0, 0); blocks are
    // produced at the current counter, then the block word advances.
    CounterRng rng(42, 3, 7);
    const std::array<std::uint64_t, 4> block0 = philox4x64_10({42, 3}, {0, 7, 0, 0});
    const std::array<std::uint64_t, 4> block1 = philox4x64_10({42, 3}, {1, 7, 0, 0});
    for (int i = 0; i < 4; ++i) CHECK(rng.next_u64() == block0[i]);
    for (int i = 0; i < 4; ++i) CHECK(rng.next_u64() == block1[i]);
}

TEST_CASE("identical parameters reproduce identical draws") {
    CounterRng a(123, 5, 17);
    CounterRng b(123, 5, 17);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    CounterRng c(123, 5, 18);
    CounterRng d(123, 6, 17);
    bool all_equal = true;
    CounterRng a2(123, 5, 17);
    for (int i = 0; i < 16; ++i) {
        const std::uint64_t x = a2.next_u64();
        all_equal = all_equal && (x == c.next_u64()) && (x == d.next_u64());
    }
    CHECK_FALSE(all_equal);
}

TEST_CASE("uniform lies in the open unit interval") {
    CounterRng rng(7, 0);
    for (int i = 0; i < 100000; ++i) {
        const double x = rng.uniform();
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("normal moments") {
    CounterRng rng(11, 2);
    ibex::Accumulator acc;
    const int n = 400000;
    for (int i = 0; i < n; ++i) acc.add(rng.normal());
    CHECK(std::abs(acc.mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(acc.variance() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("exponential draws are positive with the right mean") {
    CounterRng rng(19, 4);
    ibex::Accumulator acc;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.exponential(2.0);
        REQUIRE(x > 0.0);
        acc.add(x);
    }
    CHECK(acc.mean == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("accumulator merge reproduces sequential fill exactly") {
    CounterRng rng(3, 9);
    std::array<double, 1000> xs{};
    for (auto& x : xs) x = rng.normal();

    ibex::Accumulator whole;
    for (double x : xs) whole.add(x);

    ibex::Accumulator left, right, merged;
    for (int i = 0; i < 500; ++i) left.add(xs[static_cast<std::size_t>(i)]);
    for (int i = 500; i < 1000; ++i) right.add(xs[static_cast<std::size_t>(i)]);
    merged.merge(left);
    merged.merge(right);

    CHECK(merged.n == whole.n);
    CHECK(merged.mean == doctest::Approx(whole.mean).epsilon(1e-14));
    CHECK(merged.m2 == doctest::Approx(whole.m2).epsilon(1e-12));
}
