#include <doctest.h>

#include <cmath>
#include <set>

#include "../test_util.hpp"
#include "qcm/estimators.hpp"
#include "qcm/rng.hpp"

using namespace qcm;

TEST_CASE("Philox4x32-10 known answers") {
    using Block = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of seed and index") {
    RngStream a(7, 3);
    RngStream b(7, 3);
    for (int i = 0; i < 1000; ++i) CHECK(a.nextU64() == b.nextU64());
    RngStream c(7, 4);
    RngStream d(8, 3);
    RngStream e(7, 3);
    std::set<std::uint64_t> seen{c.nextU64(), d.nextU64(), e.nextU64()};
    CHECK(seen.size() == 3);
}

TEST_CASE("uniform draws stay in the open unit interval") {
    RngStream rng(1, 0);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
}

TEST_CASE("a million normals have mean zero and unit variance") {
    RngStream rng(2024, 0);
    RunningStats s;
    RunningStats sq;
    for (int i = 0; i < 1000000; ++i) {
        const double x = rng.normal();
        s.add(x);
        sq.add(x * x);
    }
    const Estimate m = s.estimate();
    CHECK(std::abs(m.mean) <= 3.0 * m.se);
    const Estimate v = sq.estimate();
    CHECK(std::abs(v.mean - 1.0) <= 3.0 * v.se);
}

TEST_CASE("estimateWithSE examples") {
    const Estimate ones = estimateWithSE({1, 1, 1, 1});
    CHECK(ones.mean == 1.0);
    CHECK(ones.se == 0.0);
    const Estimate pair = estimateWithSE({0, 2});
    CHECK(pair.mean == 1.0);
    CHECK(pair.se == doctest::Approx(1.0));
    CHECK(pair.n == 2);
    CHECK(testutil::errorCodeOf([] { estimateWithSE({3.0}); }) == ErrorCode::TooFewSamples);
}

TEST_CASE("RunningStats is numerically stable with a large offset") {
    RunningStats s;
    for (double x : {1e9 + 4, 1e9 + 7, 1e9 + 13, 1e9 + 16}) s.add(x);
    CHECK(s.variance() == doctest::Approx(30.0));
}

TEST_CASE("RunningStats merge equals a single pass") {
    RngStream rng(5, 0);
    RunningStats whole, left, right;
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.normal() * 3.0 + 1.0;
        whole.add(x);
        (i < 377 ? left : right).add(x);
    }
    left.merge(right);
    CHECK(left.count() == whole.count());
    CHECK(left.mean() == doctest::Approx(whole.mean()).epsilon(1e-14));
    CHECK(left.variance() == doctest::Approx(whole.variance()).epsilon(1e-12));
}

TEST_CASE("RunningStats edge cases") {
    RunningStats empty;
    CHECK(testutil::errorCodeOf([&] { empty.estimate(); }) == ErrorCode::EmptySample);
    RunningStats one;
    one.add(2.5);
    CHECK(one.estimate().se == 0.0);
    CHECK(one.estimate().mean == 2.5);
}

TEST_CASE("difference of independent estimates") {
    const Estimate d = difference({3.0, 0.3, 10}, {1.0, 0.4, 10});
    CHECK(d.mean == 2.0);
    CHECK(d.se == doctest::Approx(0.5));
}
