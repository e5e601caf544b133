#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tloc/time_codec.hpp"

using namespace tloc;

namespace {

// Independent oracle: worst observed round-trip error over a fine scan.
double scan_max_roundtrip_error(const TimeGrid& grid, double step = 0.001) {
    double worst = 0.0;
    for (double tau = 0.0; tau <= grid.length; tau += step)
        worst = std::max(worst, std::abs(decode_time(encode_time(tau, grid), grid) - tau));
    return worst;
}

} // namespace

TEST_CASE("encode_time matches hand-evaluated examples") {
    CHECK(encode_time(0.0, {100, 120.0}) == 1);
    CHECK(encode_time(120.0, {100, 120.0}) == 100);
    // round(45.3 * 99 / 120) + 1 = round(37.3725) + 1
    CHECK(encode_time(45.3, {100, 120.0}) == 38);
    // round(27.5) + 1 with the half-away-from-zero tie rule
    CHECK(encode_time(10.0, {100, 36.0}) == 29);
}

TEST_CASE("decode_time matches hand-evaluated examples") {
    CHECK(decode_time(1, {100, 120.0}) == 0.0);
    CHECK(decode_time(100, {100, 120.0}) == 120.0);
    CHECK_THAT(decode_time(38, {100, 120.0}), Catch::Matchers::WithinAbs(120.0 * 37 / 99, 1e-12));
}

TEST_CASE("encode_time clamps out-of-range timestamps") {
    CHECK(encode_time(-5.0, {100, 120.0}) == encode_time(0.0, {100, 120.0}));
    CHECK(encode_time(125.0, {100, 120.0}) == encode_time(120.0, {100, 120.0}));
}

TEST_CASE("codec rejects invalid inputs") {
    CHECK_THROWS_AS(encode_time(std::nan(""), TimeGrid{100, 120.0}), NonFiniteTimestamp);
    CHECK_THROWS_AS(encode_time(INFINITY, TimeGrid{100, 120.0}), NonFiniteTimestamp);
    CHECK_THROWS_AS(encode_time(1.0, TimeGrid{1, 120.0}), InvalidGrid);
    CHECK_THROWS_AS(encode_time(1.0, TimeGrid{100, 0.0}), InvalidGrid);
    CHECK_THROWS_AS(encode_time(1.0, TimeGrid{100, -3.0}), InvalidGrid);
    CHECK_THROWS_AS(decode_time(0, TimeGrid{100, 120.0}), IndexOutOfRange);
    CHECK_THROWS_AS(decode_time(101, TimeGrid{100, 120.0}), IndexOutOfRange);
}

TEST_CASE("max_discretization_error matches the exhaustive-scan oracle") {
    const TimeGrid g1{100, 120.0};
    CHECK_THAT(max_discretization_error(g1), Catch::Matchers::WithinAbs(0.60606060606, 1e-9));
    CHECK(scan_max_roundtrip_error(g1) <= max_discretization_error(g1) + 1e-12);

    const TimeGrid g2{100, 99.0};
    CHECK(max_discretization_error(g2) == 0.5);
    CHECK(scan_max_roundtrip_error(g2) <= 0.5 + 1e-12);

    // With two tokens the midpoint is the farthest point from both grid
    // ends: the scan shows the worst error is L/2, exactly the formula.
    const TimeGrid g3{2, 10.0};
    CHECK(max_discretization_error(g3) == 5.0);
    CHECK_THAT(scan_max_roundtrip_error(g3, 1e-4), Catch::Matchers::WithinAbs(5.0, 1e-3));
}

TEST_CASE("round trip error is within the bound for random grids") {
    std::mt19937_64 rng(20260810);
    std::uniform_real_distribution<double> length_dist(0.5, 5000.0);
    std::uniform_int_distribution<int> steps_dist(2, 500);
    for (int i = 0; i < 2000; ++i) {
        TimeGrid grid{steps_dist(rng), length_dist(rng)};
        std::uniform_real_distribution<double> tau_dist(0.0, grid.length);
        double tau = tau_dist(rng);
        double err = std::abs(decode_time(encode_time(tau, grid), grid) - tau);
        REQUIRE(err <= max_discretization_error(grid) * (1.0 + 1e-12));
    }
}

TEST_CASE("encode_time is monotone in tau") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-10.0, 130.0);
    const TimeGrid grid{100, 120.0};
    for (int i = 0; i < 2000; ++i) {
        double a = dist(rng), b = dist(rng);
        if (a > b) std::swap(a, b);
        REQUIRE(encode_time(a, grid) <= encode_time(b, grid));
    }
}

TEST_CASE("decode then encode is the identity on grid points") {
    for (int steps : {2, 3, 7, 100, 499}) {
        const TimeGrid grid{steps, 123.75};
        for (int t = 1; t <= steps; ++t)
            REQUIRE(encode_time(decode_time(t, grid), grid) == t);
    }
}
