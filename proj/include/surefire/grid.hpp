#pragma once

#include "surefire/candle.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace surefire {

enum class Direction { Buy, Sell };

inline Direction opposite(Direction d) {
    return d == Direction::Buy ? Direction::Sell : Direction::Buy;
}

// Unit ladder 1, 3, 6, 12, 24, ...: each rung sized so a full ladder
// settles at exactly +k per base unit.
inline std::int64_t ladder_units(std::size_t rung) {
    if (rung == 0) return 1;
    if (rung == 1) return 3;
    return 3ll << (rung - 1);
}

struct GridConfig {
    Pips entry_price = 0;
    Direction first_direction = Direction::Buy;
    Pips take_profit = 20;              // k, pips
    std::size_t max_additional = 3;     // {1,2,3}; larger values are test-only
    std::int64_t base_units = 1;

    bool valid() const {
        return entry_price > 0 && take_profit > 0 && max_additional >= 1 && base_units > 0;
    }
};

struct Position {
    Direction side;
    std::int64_t units;
    Pips entry;
};

struct PendingLimit {
    Direction side;
    std::int64_t units;
    Pips level;
};

struct GridState {
    GridConfig config;
    std::vector<Position> filled;
    std::optional<PendingLimit> pending_limit;
    Pips upper_bound = 0;
    Pips lower_bound = 0;
    std::optional<Pips> settled_pnl;

    bool settled() const { return settled_pnl.has_value(); }
};

struct NoChange {};
struct LimitFilled {};
struct Settled { Pips pnl; };
using GridEvent = std::variant<NoChange, LimitFilled, Settled>;

struct TradeOutcome {
    Pips pnl_pips = 0;
    std::size_t positions_filled = 0;
    std::size_t bars_elapsed = 0;
    bool settled = false;

    std::size_t additional_fills() const { return positions_filled - 1; }
};

namespace detail {

// Entry levels alternate between the grid entry and the first backhand level.
inline Pips rung_level(const GridConfig& cfg, std::size_t rung) {
    Pips backhand = cfg.first_direction == Direction::Buy ? cfg.entry_price - cfg.take_profit
                                                          : cfg.entry_price + cfg.take_profit;
    return rung % 2 == 0 ? cfg.entry_price : backhand;
}

inline void arm_next_limit(GridState& g) {
    std::size_t rung = g.filled.size();
    if (rung > g.config.max_additional) {
        g.pending_limit.reset();
        return;
    }
    Direction side = rung % 2 == 0 ? g.config.first_direction : opposite(g.config.first_direction);
    g.pending_limit = PendingLimit{side, ladder_units(rung) * g.config.base_units,
                                   detail::rung_level(g.config, rung)};
}

}  // namespace detail

inline GridState open_grid(const GridConfig& config) {
    if (!config.valid()) throw std::invalid_argument("invalid grid config");
    GridState g;
    g.config = config;
    g.filled.push_back({config.first_direction, config.base_units, config.entry_price});
    if (config.first_direction == Direction::Buy) {
        g.upper_bound = config.entry_price + config.take_profit;
        g.lower_bound = config.entry_price - 2 * config.take_profit;
    } else {
        g.lower_bound = config.entry_price - config.take_profit;
        g.upper_bound = config.entry_price + 2 * config.take_profit;
    }
    detail::arm_next_limit(g);
    return g;
}

inline Pips grid_mark_to_market(const GridState& g, Pips price) {
    Pips pnl = 0;
    for (const Position& p : g.filled)
        pnl += p.side == Direction::Buy ? p.units * (price - p.entry)
                                        : p.units * (p.entry - price);
    return pnl;
}

// A close crossing the pending limit fills it before the same close is
// tested against the bounds. Boundary touches settle (inclusive).
inline GridEvent step_close(GridState& g, Pips close) {
    if (g.settled()) throw std::logic_error("step_close on a settled grid");
    bool fill = false;
    if (g.pending_limit) {
        const PendingLimit& lim = *g.pending_limit;
        bool crossed = lim.side == Direction::Sell ? close <= lim.level : close >= lim.level;
        if (crossed) {
            g.filled.push_back({lim.side, lim.units, lim.level});
            detail::arm_next_limit(g);
            fill = true;
        }
    }
    if (close <= g.lower_bound || close >= g.upper_bound) {
        Pips bound = close <= g.lower_bound ? g.lower_bound : g.upper_bound;
        g.settled_pnl = grid_mark_to_market(g, bound);
        return Settled{*g.settled_pnl};
    }
    return fill ? GridEvent{LimitFilled{}} : GridEvent{NoChange{}};
}

// Runs until settlement or data end; unsettled grids are marked to market
// at the final close.
inline TradeOutcome simulate_grid(std::span<const Pips> closes, const GridConfig& config) {
    if (closes.empty()) throw std::invalid_argument("empty close sequence");
    GridState g = open_grid(config);
    TradeOutcome out;
    for (Pips close : closes) {
        ++out.bars_elapsed;
        GridEvent ev = step_close(g, close);
        if (std::holds_alternative<Settled>(ev)) {
            out.pnl_pips = std::get<Settled>(ev).pnl;
            out.settled = true;
            break;
        }
    }
    if (!out.settled) out.pnl_pips = grid_mark_to_market(g, closes.back());
    out.positions_filled = g.filled.size();
    return out;
}

}  // namespace surefire
