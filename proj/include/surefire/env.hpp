#pragma once

#include "surefire/candle.hpp"
#include "surefire/gaf.hpp"
#include "surefire/grid.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace surefire {

// (max additional buy-ins, first direction, take-profit pips); 18-way discrete.
struct SurefireAction {
    std::size_t max_additional;  // {1,2,3}
    Direction direction;
    Pips take_profit;  // {20,25,30}

    bool operator==(const SurefireAction&) const = default;
};

constexpr std::size_t kActionCount = 18;

inline std::size_t action_index(const SurefireAction& a) {
    if (a.max_additional < 1 || a.max_additional > 3)
        throw std::invalid_argument("max_additional out of range");
    std::size_t tp;
    switch (a.take_profit) {
        case 20: tp = 0; break;
        case 25: tp = 1; break;
        case 30: tp = 2; break;
        default: throw std::invalid_argument("take_profit out of range");
    }
    return (a.max_additional - 1) * 6 + (a.direction == Direction::Buy ? 0 : 1) * 3 + tp;
}

inline SurefireAction action_from_index(std::size_t index) {
    if (index >= kActionCount) throw std::invalid_argument("action index out of range");
    static constexpr Pips kTp[3] = {20, 25, 30};
    return {index / 6 + 1, (index / 3) % 2 == 0 ? Direction::Buy : Direction::Sell,
            kTp[index % 3]};
}

// 1.0 - 0.1 x (additional buy-ins); tabulated so the usual cases are the
// exact doubles 1.0, 0.9, 0.8, 0.7
inline double reward_discount(std::size_t additional_fills) {
    static constexpr double kTable[4] = {1.0, 0.9, 0.8, 0.7};
    return additional_fills < 4 ? kTable[additional_fills]
                                : 1.0 - 0.1 * static_cast<double>(additional_fills);
}

struct StepResult {
    GafState observation;
    double reward = 0.0;
    bool done = false;
    TradeOutcome info;
};

struct TradeRecord {
    SurefireAction action;
    TradeOutcome outcome;
    double reward;
};

// One grid at a time; the decision at bar t opens at close[t] and is
// settled against closes t+1, t+2, ...
class TradingEnv {
public:
    TradingEnv(const CandleSeries& series, std::size_t start_cursor = kWindowSize - 1,
               std::size_t end_cursor_exclusive = 0)
        : series_(&series),
          start_cursor_(start_cursor),
          end_(end_cursor_exclusive == 0 ? series.size() : end_cursor_exclusive) {
        if (end_ > series.size()) throw std::invalid_argument("end cursor beyond series");
    }

    GafState reset() { return reset(start_cursor_); }

    GafState reset(std::size_t start_cursor) {
        if (start_cursor < kWindowSize - 1 || start_cursor >= end_)
            throw std::invalid_argument("start cursor out of range");
        cursor_ = start_cursor;
        done_ = cursor_ + 1 >= end_;
        log_.clear();
        return observe();
    }

    StepResult step(const SurefireAction& action) {
        if (done_) throw std::logic_error("step on a finished episode");
        GridConfig cfg{series_->candles[cursor_].close, action.direction, action.take_profit,
                       action.max_additional, 1};
        std::vector<Pips> closes;
        for (std::size_t i = cursor_ + 1; i < end_; ++i) closes.push_back(series_->candles[i].close);
        TradeOutcome outcome = simulate_grid(closes, cfg);
        StepResult r;
        r.info = outcome;
        r.reward = static_cast<double>(outcome.pnl_pips) * reward_discount(outcome.additional_fills());
        cursor_ += outcome.bars_elapsed + 1;  // bar after settlement
        done_ = !outcome.settled || cursor_ + 1 >= end_;
        log_.push_back({action, outcome, r.reward});
        r.done = done_;
        r.observation = observe();
        return r;
    }

    bool done() const { return done_; }
    std::size_t cursor() const { return cursor_; }
    const std::vector<TradeRecord>& trade_log() const { return log_; }
    const CandleSeries& series() const { return *series_; }

private:
    GafState observe() const {
        std::size_t c = cursor_ < end_ ? cursor_ : end_ - 1;
        return encode_window(
            CandleWindow(series_->candles.data() + c + 1 - kWindowSize, kWindowSize));
    }

    const CandleSeries* series_;
    std::size_t start_cursor_;
    std::size_t end_;
    std::size_t cursor_ = kWindowSize - 1;
    bool done_ = true;
    std::vector<TradeRecord> log_;
};

}  // namespace surefire
