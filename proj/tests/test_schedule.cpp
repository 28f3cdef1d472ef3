#include <catch_amalgamated.hpp>

#include "dsee/schedule.hpp"

#include <cmath>
#include <vector>

using dsee::DParameter;
using dsee::EpochClock;
using dsee::Phase;
using Catch::Approx;

namespace {

// phase/length pairs of completed epochs when running a clock over a horizon
std::vector<std::pair<char, long long>> epoch_trace(EpochClock clock, long long horizon) {
    std::vector<std::pair<char, long long>> out;
    for (long long t = 1; t <= horizon; ++t) {
        const char phase = clock.phase() == Phase::exploration ? 'O' : 'I';
        const long long len = clock.epoch_length();
        if (clock.tick(t, [](Phase) {})) out.emplace_back(phase, len);
    }
    return out;
}

} // namespace

TEST_CASE("exploration_quota gives the exact per-arm exploration time") {
    REQUIRE(dsee::exploration_quota(0) == 0);
    REQUIRE(dsee::exploration_quota(1) == 1);
    REQUIRE(dsee::exploration_quota(2) == 5);
    REQUIRE(dsee::exploration_quota(3) == 21);
    REQUIRE(dsee::exploration_quota(10) == (1048576 - 1) / 3);
}

TEST_CASE("should_exploit compares the quota with D ln t") {
    REQUIRE(dsee::should_exploit(1.0, 1.0, DParameter::fixed(1e9)));  // ln 1 = 0
    REQUIRE_FALSE(dsee::should_exploit(5.0, std::exp(1.0), DParameter::fixed(10.0)));
    REQUIRE(dsee::should_exploit(50.0, std::exp(1.0), DParameter::fixed(10.0)));
    REQUIRE_THROWS_AS(dsee::should_exploit(1.0, 0.5, DParameter::fixed(1.0)),
                      std::invalid_argument);
}

TEST_CASE("required_d") {
    REQUIRE(dsee::required_d(10.0, 0.45) == Approx(197.53086419753086).epsilon(1e-14));
    REQUIRE(dsee::required_d(1.0, 2.0) == Approx(1.0).margin(1e-15));
    SECTION("homogeneity in L and the gap") {
        REQUIRE(dsee::required_d(20.0, 0.45) == Approx(2.0 * dsee::required_d(10.0, 0.45)));
        REQUIRE(dsee::required_d(10.0, 0.225) == Approx(4.0 * dsee::required_d(10.0, 0.45)));
    }
    SECTION("scale invariance: rewards x c scales L by c^2 and the gap by c") {
        const double c = 3.7;
        REQUIRE(dsee::required_d(10.0 * c * c, 0.45 * c) ==
                Approx(dsee::required_d(10.0, 0.45)).epsilon(1e-12));
    }
    REQUIRE_THROWS_AS(dsee::required_d(10.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(dsee::required_d(10.0, -1.0), std::invalid_argument);
}

TEST_CASE("DParameter presets are non-decreasing and divergent-shaped") {
    const auto lnln = DParameter::preset_ln_ln();
    const auto sqln = DParameter::preset_sqrt_ln();
    REQUIRE(lnln.at(3.0) == Approx(std::log(std::log(3.0))));
    REQUIRE(sqln.at(100.0) == Approx(std::sqrt(std::log(100.0))));
    double prev_l = -1e9, prev_s = -1e9;
    for (double t : {1.0, 2.0, 3.0, 10.0, 100.0, 1e4, 1e6, 1e9}) {
        REQUIRE(lnln.at(t) >= prev_l);
        REQUIRE(sqln.at(t) >= prev_s);
        prev_l = lnln.at(t);
        prev_s = sqln.at(t);
    }
    SECTION("piecewise table") {
        const auto tab = DParameter::piecewise({{1.0, 2.0}, {100.0, 5.0}, {1000.0, 9.0}});
        REQUIRE(tab.at(1.0) == 2.0);
        REQUIRE(tab.at(99.0) == 2.0);
        REQUIRE(tab.at(100.0) == 5.0);
        REQUIRE(tab.at(5000.0) == 9.0);
    }
}

TEST_CASE("epoch sequences follow the hand traces") {
    SECTION("D=0 exploits forever after the forced first epoch, lengths 2, 8, 32") {
        const auto tr = epoch_trace(EpochClock(5, 2, DParameter::fixed(0.0)), 5 + 2 + 8 + 32 + 128);
        const std::vector<std::pair<char, long long>> want{
            {'O', 5}, {'I', 2}, {'I', 8}, {'I', 32}, {'I', 128}};
        REQUIRE(tr == want);
    }
    SECTION("N=5, D=10 interleaving") {
        const auto tr = epoch_trace(EpochClock(5, 2, DParameter::fixed(10.0)), 11000);
        const std::vector<std::pair<char, long long>> want{
            {'O', 5},  {'O', 20}, {'O', 80},  {'O', 320}, {'I', 2},
            {'I', 8},  {'I', 32}, {'I', 128}, {'I', 512}, {'I', 2048}};
        REQUIRE(tr == want);
    }
    SECTION("time-varying D interleaves exploration back in") {
        // D(t) = ln ln t brings exploration epochs back at widening intervals
        const auto tr = epoch_trace(EpochClock(5, 2, DParameter::preset_ln_ln()), 44200);
        const std::vector<std::pair<char, long long>> want{
            {'O', 5},   {'O', 20},  {'I', 2},    {'I', 8},    {'I', 32},   {'O', 80},
            {'I', 128}, {'I', 512}, {'I', 2048}, {'I', 8192}, {'I', 32768}, {'O', 320}};
        REQUIRE(tr == want);
    }
    SECTION("the epoch sequence is deterministic") {
        const auto a = epoch_trace(EpochClock(7, 2, DParameter::fixed(3.5)), 100000);
        const auto b = epoch_trace(EpochClock(7, 2, DParameter::fixed(3.5)), 100000);
        REQUIRE(a == b);
    }
}
