#include <catch_amalgamated.hpp>

#include "dsee/random.hpp"
#include "dsee/rca.hpp"

#include <vector>

using dsee::RcaPolicy;
using Catch::Approx;

TEST_CASE("block mechanics follow the regenerative-cycle rule") {
    SECTION("pilot 0, observations 1,1,0,1,0: cycle covers slots 3-4") {
        RcaPolicy rca(1, 10.0, {0});
        const std::size_t obs[] = {1, 1, 0, 1, 0};
        const double rew[] = {1.0, 1.0, 0.1, 1.0, 0.1};
        bool in_cycle_flags[5];
        for (int i = 0; i < 5; ++i) {
            rca.observe(obs[i], rew[i]);
            in_cycle_flags[i] = rca.last_slot_in_cycle();
        }
        REQUIRE_FALSE(in_cycle_flags[0]);
        REQUIRE_FALSE(in_cycle_flags[1]);
        REQUIRE(in_cycle_flags[2]);
        REQUIRE(in_cycle_flags[3]);
        REQUIRE_FALSE(in_cycle_flags[4]);  // terminal pilot visit excluded
        REQUIRE(rca.w(0) == 2);
        REQUIRE(rca.t_hat() == 2);
        REQUIRE(rca.pre_cycle_count(0) == 2);
        REQUIRE(rca.terminal_count(0) == 1);
        REQUIRE(rca.in_cycle_mean(0) == Approx((0.1 + 1.0) / 2.0));
    }
    SECTION("first observation equal to the pilot makes the pre-cycle empty") {
        RcaPolicy rca(1, 10.0, {1});
        rca.observe(1, 1.0);
        REQUIRE(rca.pre_cycle_count(0) == 0);
        REQUIRE(rca.w(0) == 1);
        REQUIRE(rca.last_slot_in_cycle());
    }
    SECTION("slot accounting identity per arm") {
        RcaPolicy rca(2, 5.0, {0, 0});
        dsee::Rng rng(8);
        long long total = 0;
        for (int i = 0; i < 5000; ++i) {
            const auto arm = static_cast<std::size_t>(rca.current_arm());
            rca.observe(rng.uniform_index(2), rng.uniform01());
            (void)arm;
            ++total;
        }
        long long accounted = 0;
        for (std::size_t j = 0; j < 2; ++j) {
            accounted += rca.w(j) + rca.pre_cycle_count(j) + rca.terminal_count(j);
            REQUIRE(rca.plays(j) ==
                    rca.w(j) + rca.pre_cycle_count(j) + rca.terminal_count(j));
        }
        REQUIRE(accounted == total);
    }
}

TEST_CASE("initialization forces one block per arm in index order") {
    RcaPolicy rca(3, 10.0, {0, 0, 0});
    REQUIRE(rca.current_arm() == 0);
    rca.observe(0, 0.1);  // cycle opens
    REQUIRE(rca.current_arm() == 0);
    rca.observe(0, 0.1);  // terminal: block 1 done
    REQUIRE(rca.current_arm() == 1);
    rca.observe(0, 0.1);
    rca.observe(0, 0.1);
    REQUIRE(rca.current_arm() == 2);
}

TEST_CASE("index selection") {
    SECTION("a single arm is always selected") {
        RcaPolicy rca(1, 10.0, {0});
        for (int i = 0; i < 10; ++i) {
            rca.observe(0, 0.5);
            REQUIRE(rca.current_arm() == 0);
        }
    }
    SECTION("equal means: the less-sampled arm wins on the larger bonus") {
        RcaPolicy rca(2, 10.0, {0, 0});
        // arm 0: long cycle (many in-cycle slots), arm 1: short cycle
        rca.observe(0, 0.5);
        rca.observe(1, 0.5);
        rca.observe(1, 0.5);
        rca.observe(1, 0.5);
        rca.observe(0, 0.5);  // arm 0 block ends, w(0)=4
        REQUIRE(rca.current_arm() == 1);
        rca.observe(0, 0.5);
        rca.observe(0, 0.5);  // arm 1 block ends, w(1)=1
        REQUIRE(rca.w(0) == 4);
        REQUIRE(rca.w(1) == 1);
        REQUIRE(rca.index(1) > rca.index(0));
        REQUIRE(rca.current_arm() == 1);
    }
    SECTION("L=0 degenerates to greedy on in-cycle means") {
        RcaPolicy rca(2, 0.0, {0, 0});
        rca.observe(0, 0.9);
        rca.observe(0, 0.9);  // arm 0 mean 0.9, block done
        rca.observe(0, 0.1);
        rca.observe(0, 0.1);  // arm 1 mean 0.1, block done
        REQUIRE(rca.current_arm() == 0);
    }
}
