#include <catch_amalgamated.hpp>

#include "dsee/decentralized.hpp"

#include <cmath>
#include <set>
#include <vector>

using dsee::AsyncDseePlayer;
using dsee::CollisionModel;
using dsee::DParameter;
using dsee::kIdle;
using dsee::Phase;
using dsee::RestlessModel;
using dsee::Rng;
using dsee::SyncDseePlayer;
using Catch::Approx;

TEST_CASE("oslash offset arithmetic") {
    REQUIRE(dsee::oslash(3, 3) == 3);
    REQUIRE(dsee::oslash(4, 3) == 1);
    REQUIRE(dsee::oslash(1, 5) == 1);
    REQUIRE(dsee::oslash(12, 5) == 2);
}

TEST_CASE("sync players follow the offset round-robin") {
    SECTION("exploration subepoch 1, N=3, M=2") {
        SyncDseePlayer p1(3, 2, 1, DParameter::fixed(10.0));
        SyncDseePlayer p2(3, 2, 2, DParameter::fixed(10.0));
        // m=1: player k plays arm (m+k) (/) N -> players 1,2 on arms 2,3 (1-based)
        REQUIRE(p1.select() == 1);
        REQUIRE(p2.select() == 2);
    }
    SECTION("exploitation ranks rotate without conflict") {
        SyncDseePlayer p1(3, 2, 1, DParameter::fixed(0.0));
        SyncDseePlayer p2(3, 2, 2, DParameter::fixed(0.0));
        // drive both through the length-3 exploration epoch with fixed rewards
        const double mu[] = {0.9, 0.8, 0.1};  // local top-2 = (arm0, arm1) for both
        for (long long t = 1; t <= 3; ++t) {
            for (auto* p : {&p1, &p2}) {
                const int a = p->select();
                p->update(static_cast<std::size_t>(a), mu[a]);
                p->advance(t);
            }
        }
        REQUIRE(p1.phase() == Phase::exploitation);
        REQUIRE(p2.phase() == Phase::exploitation);
        // subepoch m=1: player 1 plays rank (1+1)(/)2 = 2 -> arm1; player 2 rank 1 -> arm0
        REQUIRE(p1.select() == 1);
        REQUIRE(p2.select() == 0);
        REQUIRE(p1.select() != p2.select());
    }
    SECTION("divergent local rankings may collide; the engine records them") {
        SyncDseePlayer p1(3, 2, 1, DParameter::fixed(0.0));
        SyncDseePlayer p2(3, 2, 2, DParameter::fixed(0.0));
        p1.force_ranking({0, 1, 2});
        p2.force_ranking({1, 0, 2});  // disagrees on the rank order
        for (long long t = 1; t <= 3; ++t) {
            for (auto* p : {&p1, &p2}) {
                p->update(static_cast<std::size_t>(p->select()), 0.5);
                p->advance(t);
            }
        }
        // m=1: p1 -> its rank-2 arm (1), p2 -> its rank-1 arm (1): conflict
        const auto out = dsee::resolve_slot({p1.select(), p2.select()}, {1.0, 1.0, 1.0},
                                            CollisionModel::zero);
        REQUIRE(p1.select() == p2.select());
        REQUIRE(out.collisions == 1);
    }
}

TEST_CASE("one full sync exploration epoch is a Latin-square rotation") {
    const std::size_t n = 5, m = 3;
    std::vector<SyncDseePlayer> players;
    for (std::size_t k = 1; k <= m; ++k)
        players.emplace_back(n, m, static_cast<long long>(k), DParameter::fixed(1.0));
    std::vector<std::vector<long long>> plays(m, std::vector<long long>(n, 0));
    // second exploration epoch has subepoch length 4
    long long t = 1;
    for (; t <= static_cast<long long>(n); ++t)
        for (auto& p : players) {
            plays[static_cast<std::size_t>(p.offset() - 1)][static_cast<std::size_t>(p.select())]++;
            p.update(static_cast<std::size_t>(p.select()), 0.1);
            p.advance(t);
        }
    for (auto& row : plays)
        for (long long c : row) REQUIRE(c == 1);  // epoch 1: every pair exactly 4^0 times

    REQUIRE(players[0].phase() == Phase::exploration);  // D=1: keep exploring
    std::vector<std::vector<long long>> plays2(m, std::vector<long long>(n, 0));
    for (; t <= static_cast<long long>(n) + 20; ++t) {
        std::set<int> chosen;
        for (auto& p : players) {
            const int a = p.select();
            chosen.insert(a);
            plays2[static_cast<std::size_t>(p.offset() - 1)][static_cast<std::size_t>(a)]++;
            p.update(static_cast<std::size_t>(a), 0.1);
            p.advance(t);
        }
        REQUIRE(chosen.size() == m);  // distinct choices in every slot
    }
    for (auto& row : plays2)
        for (long long c : row) REQUIRE(c == 4);  // epoch 2: 4^1 plays per (player, arm)
}

TEST_CASE("resolve_slot applies the collision models") {
    SECTION("no conflict pays both models alike") {
        const auto share = dsee::resolve_slot({0, 1}, {1.0, 0.1}, CollisionModel::share);
        const auto zero = dsee::resolve_slot({0, 1}, {1.0, 0.1}, CollisionModel::zero);
        REQUIRE(share.system_reward == Approx(1.1));
        REQUIRE(zero.system_reward == Approx(1.1));
        REQUIRE(share.collisions == 0);
    }
    SECTION("conflict pays once under share and nothing under zero") {
        const auto share = dsee::resolve_slot({0, 0}, {1.0, 0.1}, CollisionModel::share);
        const auto zero = dsee::resolve_slot({0, 0}, {1.0, 0.1}, CollisionModel::zero);
        REQUIRE(share.system_reward == Approx(1.0));  // shared, never duplicated
        REQUIRE(zero.system_reward == Approx(0.0));
        REQUIRE(share.collisions == 1);
        REQUIRE(zero.collisions == 1);
    }
    SECTION("zero-model reward never exceeds the share-model reward") {
        Rng rng(3);
        for (int rep = 0; rep < 200; ++rep) {
            std::vector<int> choices;
            for (int k = 0; k < 4; ++k) choices.push_back(static_cast<int>(rng.uniform_index(5)));
            std::vector<double> rewards;
            for (int j = 0; j < 5; ++j) rewards.push_back(rng.uniform01());
            const auto share = dsee::resolve_slot(choices, rewards, CollisionModel::share);
            const auto zero = dsee::resolve_slot(choices, rewards, CollisionModel::zero);
            REQUIRE(zero.system_reward <= share.system_reward + 1e-15);
        }
    }
    SECTION("idle markers do not touch any arm") {
        const auto out = dsee::resolve_slot({kIdle, 2}, {1.0, 1.0, 0.5}, CollisionModel::share);
        REQUIRE(out.system_reward == Approx(0.5));
        REQUIRE(out.times_chosen == std::vector<int>{0, 0, 1});
    }
}

TEST_CASE("evolve_system steps played and passive arms correctly") {
    const dsee::Matrix flip = dsee::Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    // deterministic alternation is periodic, so build arms directly
    std::vector<dsee::ArmSpec> arms;
    arms.emplace_back(std::vector<double>{0.0, 1.0}, flip, dsee::PassiveMode::same_chain);
    arms.emplace_back(std::vector<double>{0.0, 1.0}, flip, dsee::PassiveMode::frozen);
    std::vector<dsee::ChainDiagnostics> diags(2);

    SECTION("exogenous: unplayed arms freeze system-wide") {
        std::vector<std::size_t> states{0, 0};
        Rng rng(1);
        dsee::evolve_system(arms, diags, {0, 0}, RestlessModel::exogenous, states, rng);
        REQUIRE(states == std::vector<std::size_t>{0, 0});
    }
    SECTION("a collision still advances the arm exactly one active step") {
        std::vector<std::size_t> states{0, 0};
        Rng rng(1);
        dsee::evolve_system(arms, diags, {2, 0}, RestlessModel::exogenous, states, rng);
        REQUIRE(states == std::vector<std::size_t>{1, 0});  // one flip, not two
    }
    SECTION("endogenous: passive modes drive unplayed arms") {
        std::vector<std::size_t> states{0, 1};
        Rng rng(1);
        dsee::evolve_system(arms, diags, {0, 0}, RestlessModel::endogenous, states, rng);
        REQUIRE(states[0] == 1);  // same_chain flipped
        REQUIRE(states[1] == 1);  // frozen stayed
    }
}

TEST_CASE("async exploitation choice rule") {
    SECTION("a single candidate is always chosen") {
        Rng rng(2);
        for (int i = 0; i < 10; ++i)
            REQUIRE(dsee::async_exploit_choice(std::nullopt, {3}, rng, false) == 3);
    }
    SECTION("after a collision the redraw is uniform over the top set") {
        Rng rng(17);
        const std::vector<int> top{1, 4};
        long long first = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i)
            first += dsee::async_exploit_choice(1, top, rng, true) == 1;
        REQUIRE(std::abs(static_cast<double>(first) / n - 0.5) < 0.01);
    }
    SECTION("without a collision the choice persists mid-epoch") {
        Rng rng(2);
        REQUIRE(dsee::async_exploit_choice(4, {1, 4}, rng, false) == 4);
    }
}

TEST_CASE("async players run on their own local clocks") {
    AsyncDseePlayer late(5, 2, 137, DParameter::fixed(2.0));
    Rng rng(1);
    REQUIRE_FALSE(late.joined(136));
    REQUIRE(late.select(10, rng) == kIdle);
    REQUIRE(late.joined(137));
    REQUIRE(late.local_time(137) == 1);
    // local slot 1 is the first exploration subepoch: arm 1 (/) 5 = arm 0
    REQUIRE(late.select(137, rng) == 0);
}

TEST_CASE("observation streams are identical whether or not a collision happens") {
    // contract: players observe the chosen arm's state regardless of conflicts.
    // During exploration the collision signal is ignored entirely, so a player
    // that is told it collides every slot must still see the same stream.
    AsyncDseePlayer a(3, 2, 1, DParameter::fixed(1e18));  // explores forever
    AsyncDseePlayer b(3, 2, 1, DParameter::fixed(1e18));
    Rng ra(7), rb(7);
    std::vector<double> rewards{0.3, 0.6, 0.9};
    for (long long t = 1; t <= 500; ++t) {
        const int ca = a.select(t, ra);
        const int cb = b.select(t, rb);
        REQUIRE(ca == cb);
        a.update(static_cast<std::size_t>(ca), rewards[static_cast<std::size_t>(ca)]);
        b.update(static_cast<std::size_t>(cb), rewards[static_cast<std::size_t>(cb)]);
        b.observe_collision();  // b is told it collided every slot
        a.advance(t);
        b.advance(t);
    }
    REQUIRE(a.stats().cum_reward == b.stats().cum_reward);
    REQUIRE(a.stats().play_count == b.stats().play_count);
}
