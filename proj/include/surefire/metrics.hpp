#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace surefire {

// Per-trade pnl in pips, undiscounted, in trade order.
using TradeLog = std::vector<double>;

struct PerformanceReport {
    std::string model_code;
    double net_profit = 0.0;        // pips
    double profit_factor = 0.0;     // +inf if no losses; NaN if undefined
    double max_drawdown = 0.0;      // percent, <= 0
    double sqn = std::numeric_limits<double>::quiet_NaN();
    std::size_t trades = 0;
};

inline double net_profit(std::span<const double> log) {
    double sum = 0.0;
    for (double p : log) sum += p;
    return sum;
}

// Gross profit / |gross loss|. +inf when no losing trade exists but some
// winner does; NaN when every trade is zero.
inline double profit_factor(std::span<const double> log) {
    if (log.empty()) throw std::invalid_argument("profit_factor of empty log");
    double gain = 0.0, loss = 0.0;
    for (double p : log) (p >= 0.0 ? gain : loss) += p;
    if (loss == 0.0) {
        if (gain == 0.0) return std::numeric_limits<double>::quiet_NaN();
        return std::numeric_limits<double>::infinity();
    }
    return gain / -loss;
}

// Largest peak-to-trough equity decline as a (non-positive) percentage.
inline double max_drawdown(std::span<const double> log, double initial_equity = 10000.0) {
    if (initial_equity <= 0.0) throw std::invalid_argument("initial equity must be positive");
    double equity = initial_equity, peak = initial_equity, worst = 0.0;
    for (double p : log) {
        equity += p;
        if (equity <= 0.0) throw std::runtime_error("equity exhausted (bankruptcy)");
        if (equity > peak) peak = equity;
        double dd = (equity - peak) / peak;
        if (dd < worst) worst = dd;
    }
    return worst * 100.0;
}

// (mean / sample stddev) * sqrt(n); NaN when the sample deviation is zero.
inline double sqn(std::span<const double> log) {
    if (log.size() < 2) throw std::invalid_argument("sqn needs at least 2 trades");
    double n = static_cast<double>(log.size());
    double mean = net_profit(log) / n;
    double ss = 0.0;
    for (double p : log) ss += (p - mean) * (p - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    if (sd == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return mean / sd * std::sqrt(n);
}

inline PerformanceReport make_report(const std::string& model_code, std::span<const double> log,
                                     double initial_equity = 10000.0) {
    PerformanceReport r;
    r.model_code = model_code;
    r.trades = log.size();
    r.net_profit = net_profit(log);
    r.profit_factor = log.empty() ? std::numeric_limits<double>::quiet_NaN() : profit_factor(log);
    r.max_drawdown = max_drawdown(log, initial_equity);
    r.sqn = log.size() >= 2 ? sqn(log) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

// "C"/"D"/"P" + first letters of base and quote currency, e.g. EUR/USD -> EU.
inline std::string model_code(char agent_letter, const std::string& currency_pair) {
    std::string code(1, agent_letter);
    bool at_start = true;
    for (char c : currency_pair) {
        if (c == '/' || c == '_' || c == '-') {
            at_start = true;
        } else if (at_start) {
            code += c;
            at_start = false;
        }
    }
    return code;
}

namespace detail {

inline std::string fmt_num(double v, int prec) {
    if (std::isnan(v)) return "n/a";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

inline std::string pad(const std::string& s, std::size_t w) {
    return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace detail

// Aligned plain-text table mirroring the report column set.
inline std::string render_report_table(std::span<const PerformanceReport> reports) {
    const std::vector<std::string> headers = {"Model Code", "Net Profit", "Profit Factor",
                                              "Max Draw-down", "SQN", "Trades"};
    std::vector<std::vector<std::string>> rows;
    for (const PerformanceReport& r : reports)
        rows.push_back({r.model_code, detail::fmt_num(r.net_profit, 0),
                        detail::fmt_num(r.profit_factor, 2),
                        detail::fmt_num(r.max_drawdown, 2) + "%", detail::fmt_num(r.sqn, 2),
                        std::to_string(r.trades)});
    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        width[c] = headers[c].size();
        for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += " | ";
            out += detail::pad(row[c], width[c]);
        }
        out += '\n';
    };
    emit(headers);
    for (std::size_t c = 0; c < headers.size(); ++c) {
        if (c) out += "-+-";
        out += std::string(width[c], '-');
    }
    out += '\n';
    for (const auto& row : rows) emit(row);
    return out;
}

inline std::string report_csv(std::span<const PerformanceReport> reports) {
    std::string out = "model_code,net_profit_pips,profit_factor,max_drawdown_pct,sqn,trades\n";
    for (const PerformanceReport& r : reports) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%.5f,%s,%.5f,%s,%zu\n", r.model_code.c_str(),
                      r.net_profit, detail::fmt_num(r.profit_factor, 6).c_str(), r.max_drawdown,
                      detail::fmt_num(r.sqn, 6).c_str(), r.trades);
        out += buf;
    }
    return out;
}

}  // namespace surefire
