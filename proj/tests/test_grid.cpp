#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "surefire/grid.hpp"
#include "test_util.hpp"

#include <random>
#include <vector>

using namespace surefire;

namespace {

// Independent oracle: settlement pnl of n alternating ladder positions at
// an exit price, summed position by position.
Pips ladder_pnl_oracle(Direction first, Pips entry, Pips k, std::size_t n, Pips exit) {
    Pips pnl = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Direction side = i % 2 == 0 ? first : opposite(first);
        Pips level = i % 2 == 0 ? entry
                     : first == Direction::Buy ? entry - k
                                               : entry + k;
        Pips units = ladder_units(i);
        pnl += side == Direction::Buy ? units * (exit - level) : units * (level - exit);
    }
    return pnl;
}

// Alternating fills to exhaustion, then the adverse boundary exit.
std::vector<Pips> forced_loss_path(Pips entry, Pips k, std::size_t max_additional) {
    std::vector<Pips> closes;
    for (std::size_t rung = 1; rung <= max_additional; ++rung)
        closes.push_back(rung % 2 == 1 ? entry - k - 1 : entry);
    closes.push_back(max_additional % 2 == 1 ? entry + k : entry - 2 * k);
    return closes;
}

}  // namespace

TEST_CASE("open_grid per the walkthrough") {
    GridState g = open_grid({113000, Direction::Buy, 20, 3, 1});
    CHECK(g.lower_bound == 112960);
    CHECK(g.upper_bound == 113020);
    REQUIRE(g.filled.size() == 1);
    CHECK(g.filled[0].side == Direction::Buy);
    CHECK(g.filled[0].units == 1);
    CHECK(g.filled[0].entry == 113000);
    REQUIRE(g.pending_limit.has_value());
    CHECK(g.pending_limit->side == Direction::Sell);
    CHECK(g.pending_limit->units == 3);
    CHECK(g.pending_limit->level == 112980);
}

TEST_CASE("open_grid sell-first mirror and base-unit scaling") {
    GridState g = open_grid({113000, Direction::Sell, 20, 3, 1});
    CHECK(g.lower_bound == 112980);
    CHECK(g.upper_bound == 113040);
    CHECK(g.pending_limit->side == Direction::Buy);
    CHECK(g.pending_limit->units == 3);
    CHECK(g.pending_limit->level == 113020);

    GridState g2 = open_grid({113000, Direction::Buy, 20, 3, 2});
    CHECK(g2.filled[0].units == 2);
    CHECK(g2.pending_limit->units == 6);
}

TEST_CASE("fig-3 walkthrough nets +1k") {
    GridState g = open_grid({113000, Direction::Buy, 20, 3, 1});
    GridEvent e1 = step_close(g, 112980);
    CHECK(std::holds_alternative<LimitFilled>(e1));
    REQUIRE(g.filled.size() == 2);
    CHECK(g.pending_limit->side == Direction::Buy);
    CHECK(g.pending_limit->units == 6);
    CHECK(g.pending_limit->level == 113000);
    GridEvent e2 = step_close(g, 113020);
    REQUIRE(std::holds_alternative<Settled>(e2));
    CHECK(std::get<Settled>(e2).pnl == 20);
    CHECK(g.filled.size() == 3);
}

TEST_CASE("close inside the band with no level crossed is NoChange") {
    GridState g = open_grid({113000, Direction::Buy, 20, 3, 1});
    CHECK(std::holds_alternative<NoChange>(step_close(g, 112990)));
    CHECK(g.filled.size() == 1);
}

TEST_CASE("stepping a settled grid throws") {
    GridState g = open_grid({113000, Direction::Buy, 20, 3, 1});
    step_close(g, 113020);
    CHECK(g.settled());
    CHECK_THROWS_AS(step_close(g, 113020), std::logic_error);
}

TEST_CASE("budget exhausted then adverse exit loses 5k") {
    GridState g = open_grid({113000, Direction::Buy, 20, 1, 1});
    step_close(g, 112980);
    CHECK(!g.pending_limit.has_value());
    GridEvent e = step_close(g, 113020);
    REQUIRE(std::holds_alternative<Settled>(e));
    CHECK(std::get<Settled>(e).pnl == -100);
}

TEST_CASE("forced loss table -5k/-11k/-23k matches the recurrence and oracle") {
    for (Pips k : {20, 25, 30}) {
        Pips expected = -5 * k;  // loss(m+1) = 2*loss(m) - k
        for (std::size_t m = 1; m <= 3; ++m) {
            auto closes = forced_loss_path(113000, k, m);
            TradeOutcome out = simulate_grid(closes, {113000, Direction::Buy, k, m, 1});
            CHECK(out.settled);
            CHECK(out.positions_filled == m + 1);
            CHECK(out.pnl_pips == expected);
            Pips adverse = m % 2 == 1 ? 113000 + k : 113000 - 2 * k;
            CHECK(out.pnl_pips == ladder_pnl_oracle(Direction::Buy, 113000, k, m + 1, adverse));
            expected = 2 * expected - k;
        }
    }
}

TEST_CASE("immediate stop-gain") {
    std::vector<Pips> closes{113020};
    TradeOutcome out = simulate_grid(closes, {113000, Direction::Buy, 20, 3, 1});
    CHECK(out.settled);
    CHECK(out.pnl_pips == 20);
    CHECK(out.positions_filled == 1);
    CHECK(out.bars_elapsed == 1);
}

TEST_CASE("data end marks to market unsettled") {
    std::vector<Pips> closes{113010, 113005};
    TradeOutcome out = simulate_grid(closes, {113000, Direction::Buy, 20, 3, 1});
    CHECK(!out.settled);
    CHECK(out.pnl_pips == 5);
    CHECK(out.bars_elapsed == 2);
    CHECK_THROWS_AS(simulate_grid({}, GridConfig{113000, Direction::Buy, 20, 3, 1}),
                    std::invalid_argument);
}

TEST_CASE("martingale invariant on random walks with unlimited budget") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> coin(0, 1);
    for (Pips step : {20, 7}) {
        for (int trial = 0; trial < 2000; ++trial) {
            GridConfig cfg{110000, coin(rng) ? Direction::Buy : Direction::Sell, 20, 1000000, 1};
            GridState g = open_grid(cfg);
            Pips price = cfg.entry_price;
            for (int t = 0; t < 100000 && !g.settled(); ++t) {
                price += coin(rng) ? step : -step;
                step_close(g, price);
            }
            REQUIRE(g.settled());
            CHECK(*g.settled_pnl == cfg.take_profit);
        }
    }
}

TEST_CASE("ladder prefix and alternation invariant") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 500; ++trial) {
        GridConfig cfg{110000, Direction::Buy, 25, 3, 2};
        GridState g = open_grid(cfg);
        Pips price = cfg.entry_price;
        for (int t = 0; t < 200 && !g.settled(); ++t) {
            price += coin(rng) ? 13 : -13;
            step_close(g, price);
        }
        for (std::size_t i = 0; i < g.filled.size(); ++i) {
            CHECK(g.filled[i].units == ladder_units(i) * cfg.base_units);
            if (i > 0) CHECK(g.filled[i].side == opposite(g.filled[i - 1].side));
        }
        CHECK(g.filled.size() <= cfg.max_additional + 1);
    }
}

TEST_CASE("boundary symmetry: mirrored path with flipped direction gives equal pnl") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> coin(0, 1);
    const Pips entry = 110000;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Pips> closes, mirrored;
        Pips price = entry;
        for (int t = 0; t < 60; ++t) {
            price += coin(rng) ? 11 : -11;
            closes.push_back(price);
            mirrored.push_back(2 * entry - price);
        }
        for (std::size_t m : {std::size_t(1), std::size_t(2), std::size_t(3)}) {
            TradeOutcome a = simulate_grid(closes, {entry, Direction::Buy, 20, m, 1});
            TradeOutcome b = simulate_grid(mirrored, {entry, Direction::Sell, 20, m, 1});
            CHECK(a.pnl_pips == b.pnl_pips);
            CHECK(a.positions_filled == b.positions_filled);
            CHECK(a.settled == b.settled);
        }
    }
}

TEST_CASE("invalid configs are rejected") {
    CHECK_THROWS_AS(open_grid({0, Direction::Buy, 20, 3, 1}), std::invalid_argument);
    CHECK_THROWS_AS(open_grid({113000, Direction::Buy, 0, 3, 1}), std::invalid_argument);
    CHECK_THROWS_AS(open_grid({113000, Direction::Buy, 20, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(open_grid({113000, Direction::Buy, 20, 3, 0}), std::invalid_argument);
}
