#include "adaptswitch/bus.hpp"
#include "adaptswitch/errors.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace adaptswitch;

namespace {

BusConfig three_apps(int budget, int d2 = 2, int length = 1) {
    BusConfig c;
    c.d2 = d2;
    c.minislots_per_cycle = budget;
    for (int i = 0; i < 3; ++i) c.apps.push_back({i, i + 1, length, 0.05});
    return c;
}

}  // namespace

TEST_CASE("select_mode threshold", "[bus]") {
    CHECK(select_mode(0.5, 0.5) == Mode::ET);
    CHECK(select_mode(-0.5, 0.5) == Mode::ET);
    CHECK(select_mode(0.6, 0.5) == Mode::TT);
    CHECK(select_mode(0.0, 1e-9) == Mode::ET);
    CHECK(select_mode(std::nextafter(0.5, 1.0), 0.5) == Mode::TT);
    CHECK_THROWS_AS(select_mode(0.0, 0.0), std::invalid_argument);
    for (double e : {-1.0, 0.01, 0.05, 0.2}) CHECK(select_mode(e, 0.05) == select_mode(e, 0.05));
}

TEST_CASE("bus configuration validation", "[bus]") {
    CHECK_NOTHROW(three_apps(8).validate());
    CHECK_THROWS_AS(three_apps(8, 1).validate(), ConfigError);
    auto dup = three_apps(8);
    dup.apps[2].dyn_priority = 1;
    CHECK_THROWS_AS(dup.validate(), ConfigError);
    auto slot = three_apps(8);
    slot.apps[1].static_slot = 0;
    CHECK_THROWS_AS(slot.validate(), ConfigError);
    auto eth = three_apps(8);
    eth.apps[0].eth = 0.0;
    CHECK_THROWS_AS(eth.validate(), ConfigError);
}

TEST_CASE("transmit delivery samples", "[bus]") {
    SECTION("TT is one sample") {
        Bus bus(three_apps(8));
        for (long k = 0; k < 5; ++k) {
            CHECK(bus.transmit(0, Mode::TT, k).delivery_sample == k + 1);
            const auto r = bus.advance_cycle(k);
            CHECK(r.static_senders == std::vector<int>{0});
        }
    }
    SECTION("single ET app with d2 = 2") {
        BusConfig c;
        c.apps.push_back({0, 1, 1, 0.05});
        c.d2 = 2;
        Bus bus(c);
        const auto d = bus.transmit(0, Mode::ET, 0);
        CHECK(d.delivery_sample == 2);
        CHECK(d.nominal_delay == 2);
        const auto r = bus.advance_cycle(0);
        REQUIRE(r.transmitted.size() == 1);
        CHECK(r.transmitted[0].delay() == 1);
    }
    SECTION("three ET apps exceed d2 when the dynamic segment is too short") {
        Bus bus(three_apps(2));
        for (int a = 0; a < 3; ++a) bus.transmit(a, Mode::ET, 0);
        const auto r0 = bus.advance_cycle(0);
        CHECK(r0.transmitted.size() == 2);
        CHECK(r0.overflow);
        for (int a = 0; a < 3; ++a) bus.transmit(a, Mode::ET, 1);
        try {
            bus.advance_cycle(1);
            FAIL("expected infeasibility");
        } catch (const BusInfeasibleError& e) {
            CHECK(e.app() == 2);
        }
    }
    SECTION("carried message within d2 is delivered late") {
        Bus bus(three_apps(4, 3, 2));
        for (int a = 0; a < 3; ++a) bus.transmit(a, Mode::ET, 0);
        bus.advance_cycle(0);
        const auto r1 = bus.advance_cycle(1);
        REQUIRE(r1.transmitted.size() == 1);
        CHECK(r1.transmitted[0].app == 2);
        CHECK(r1.transmitted[0].delay() == 2);
    }
    SECTION("unknown app and out-of-order sample") {
        Bus bus(three_apps(8));
        CHECK_THROWS_AS(bus.transmit(7, Mode::TT, 0), std::out_of_range);
        CHECK_THROWS_AS(bus.transmit(0, Mode::TT, 3), std::logic_error);
    }
}

TEST_CASE("advance_cycle minislot accounting", "[bus]") {
    SECTION("idle segment") {
        Bus bus(three_apps(10));
        const auto r = bus.advance_cycle(0);
        CHECK(r.consumed == 3);
        CHECK(r.transmitted.empty());
    }
    SECTION("one long message at the top priority") {
        Bus bus(three_apps(10, 2, 4));
        bus.transmit(0, Mode::ET, 0);
        const auto r = bus.advance_cycle(0);
        CHECK(r.consumed == 6);
        CHECK(r.transmitted.size() == 1);
        CHECK(r.idle_slots == 2);
    }
    SECTION("no dynamic slots") {
        Bus bus(BusConfig{{}, 10, 2});
        CHECK(bus.advance_cycle(0).consumed == 0);
    }
}

TEST_CASE("minislot conservation and delay bound under random traffic", "[bus][property]") {
    std::mt19937_64 rng(606);
    for (int trial = 0; trial < 50; ++trial) {
        BusConfig c;
        c.d2 = 2 + static_cast<int>(rng() % 3);
        const int n = 1 + static_cast<int>(rng() % 5);
        for (int i = 0; i < n; ++i) c.apps.push_back({i, 10 - i, 1 + static_cast<int>(rng() % 3), 0.1});
        c.minislots_per_cycle = 3 * n + 2;
        Bus bus(c);
        for (long k = 0; k < 200; ++k) {
            for (int a = 0; a < n; ++a) {
                const auto mode = (rng() % 2 == 0) ? Mode::TT : Mode::ET;
                const auto d = bus.transmit(a, mode, k);
                CHECK(d.delivery_sample - k == (mode == Mode::TT ? 1 : c.d2));
            }
            const auto r = bus.advance_cycle(k);
            CHECK(r.consumed == r.idle_slots + r.length_sum);
            CHECK(r.consumed <= c.minislots_per_cycle);
            for (const auto& t : r.transmitted) {
                CHECK(t.delay() >= 1);
                CHECK(t.delay() <= c.d2);
            }
        }
    }
}

TEST_CASE("switch log alternation", "[bus]") {
    SwitchLog log;
    CHECK(log.current() == Mode::TT);
    const auto& e1 = log.record(100, Mode::ET);
    CHECK(e1.p == 1);
    CHECK(e1.k_prime() == 101);
    CHECK(log.size() == 1);
    CHECK(log.record(150, Mode::TT).p == 2);

    SwitchLog bad;
    bad.record(100, Mode::ET);
    CHECK_THROWS_AS(bad.record(150, Mode::ET), std::logic_error);
    CHECK_THROWS_AS(bad.record(100, Mode::TT), std::logic_error);
    CHECK_THROWS_AS(SwitchLog{}.record(5, Mode::TT), std::logic_error);
}
