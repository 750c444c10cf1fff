#pragma once

#include "surefire/agents.hpp"
#include "surefire/candle.hpp"
#include "surefire/env.hpp"
#include "surefire/metrics.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace surefire {

struct RunConfig {
    std::string data_path;
    std::string currency = "EUR/USD";
    std::string train_start = "2018-08-01";
    std::string train_end = "2018-11-30";
    std::string eval_start = "2018-12-01";
    std::string eval_end = "2018-12-31";
    std::string agent = "constant";  // constant | dqn | ppo
    std::size_t episodes = 1300;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    bool allow_gaps = false;
    double initial_equity = 10000.0;
    bool rescale_global = false;  // reserved switch; per-window rescale is the default
    TrainConfig train_cfg;

    void validate() const {
        if (!seed) throw std::invalid_argument("seed is required (no unseeded runs)");
        if (agent != "constant" && agent != "dqn" && agent != "ppo")
            throw std::invalid_argument("agent must be constant|dqn|ppo");
        if (parse_date(eval_start) <= parse_date(train_end))
            throw std::invalid_argument("eval range must start after the train range ends");
        if (parse_date(train_end) < parse_date(train_start) ||
            parse_date(eval_end) < parse_date(eval_start))
            throw std::invalid_argument("date range reversed");
    }

    AgentKind kind() const {
        if (agent == "constant") return AgentKind::Constant;
        if (agent == "dqn") return AgentKind::Dqn;
        return AgentKind::Ppo;
    }

    char agent_letter() const { return agent == "constant" ? 'C' : agent == "dqn" ? 'D' : 'P'; }
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["data"] = c.data_path;
    j["currency"] = c.currency;
    j["train_start"] = c.train_start;
    j["train_end"] = c.train_end;
    j["eval_start"] = c.eval_start;
    j["eval_end"] = c.eval_end;
    j["agent"] = c.agent;
    j["episodes"] = c.episodes;
    if (c.seed) j["seed"] = *c.seed;
    // out_dir is deliberately excluded: where artifacts land must not
    // change the run identity (config hash)
    j["allow_gaps"] = c.allow_gaps;
    j["initial_equity"] = c.initial_equity;
    j["gamma"] = c.train_cfg.gamma;
    j["learning_rate"] = c.train_cfg.adam.lr;
    j["reward_scale"] = c.train_cfg.reward_scale;
    j["batch_size"] = c.train_cfg.batch_size;
    j["buffer_capacity"] = c.train_cfg.buffer_capacity;
    j["sync_period"] = c.train_cfg.sync_period;
    j["ppo_epochs"] = c.train_cfg.ppo_epochs;
    j["minibatch"] = c.train_cfg.minibatch;
    j["eps_clip"] = c.train_cfg.eps_clip;
    j["gae_lambda"] = c.train_cfg.gae_lambda;
    j["value_coef"] = c.train_cfg.value_coef;
    j["entropy_coef"] = c.train_cfg.entropy_coef;
    j["constant_action"] = action_index(c.train_cfg.constant_action);
    return j;
}

inline void apply_json(RunConfig& c, const nlohmann::json& j) {
    auto get = [&](const char* key, auto& dst) {
        if (j.contains(key)) dst = j.at(key).template get<std::decay_t<decltype(dst)>>();
    };
    get("data", c.data_path);
    get("currency", c.currency);
    get("train_start", c.train_start);
    get("train_end", c.train_end);
    get("eval_start", c.eval_start);
    get("eval_end", c.eval_end);
    get("agent", c.agent);
    get("episodes", c.episodes);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    get("out", c.out_dir);
    get("allow_gaps", c.allow_gaps);
    get("initial_equity", c.initial_equity);
    get("gamma", c.train_cfg.gamma);
    get("learning_rate", c.train_cfg.adam.lr);
    get("reward_scale", c.train_cfg.reward_scale);
    get("batch_size", c.train_cfg.batch_size);
    get("buffer_capacity", c.train_cfg.buffer_capacity);
    get("sync_period", c.train_cfg.sync_period);
    get("ppo_epochs", c.train_cfg.ppo_epochs);
    get("minibatch", c.train_cfg.minibatch);
    get("eps_clip", c.train_cfg.eps_clip);
    get("gae_lambda", c.train_cfg.gae_lambda);
    get("value_coef", c.train_cfg.value_coef);
    get("entropy_coef", c.train_cfg.entropy_coef);
    if (j.contains("constant_action"))
        c.train_cfg.constant_action = action_from_index(j.at("constant_action").get<std::size_t>());
}

// FNV-1a over the canonical (key-sorted) JSON dump.
inline std::uint64_t config_hash(const RunConfig& c) {
    std::string s = to_json(c).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_stamp(const RunConfig& c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "config_hash=%016llx seed=%llu",
                  static_cast<unsigned long long>(config_hash(c)),
                  static_cast<unsigned long long>(c.seed.value_or(0)));
    return buf;
}

// [first index with ts >= start, first index with ts >= end_exclusive)
struct CursorRange {
    std::size_t begin = 0;
    std::size_t end = 0;
};

inline CursorRange cursor_range(const CandleSeries& series, const std::string& start_date,
                                const std::string& end_date) {
    std::int64_t start = parse_date(start_date);
    std::int64_t end = parse_date(end_date) + 86400;
    CursorRange r;
    r.begin = series.size();
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i].timestamp >= start && r.begin == series.size()) r.begin = i;
        if (series[i].timestamp < end) r.end = i + 1;
    }
    if (r.begin >= r.end) throw std::invalid_argument("date range outside data: " + start_date +
                                                      ".." + end_date);
    // a full observation window must exist before the first decision
    if (r.begin < kWindowSize - 1) r.begin = kWindowSize - 1;
    if (r.begin >= r.end) throw std::invalid_argument("range too short for a 12-bar window");
    return r;
}

inline CandleSeries load_csv_file(const std::string& path, std::int64_t bar_period = 4 * 3600,
                                  bool allow_gaps = false) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open data file: " + path);
    return load_csv(in, bar_period, allow_gaps);
}

inline std::string history_csv(const RunConfig& cfg, const std::vector<double>& rewards) {
    std::ostringstream out;
    out << "# " << config_stamp(cfg) << "\n";
    out << "episode,cumulative_reward\n";
    char buf[64];
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f\n", i, rewards[i]);
        out << buf;
    }
    return out.str();
}

// One deterministic greedy/mode pass over [range); returns undiscounted
// per-trade pnl.
inline TradeLog evaluate_greedy(const CandleSeries& series, CursorRange range, Network& net,
                                AgentKind kind, const SurefireAction& constant_action) {
    TradingEnv env(series, range.begin, range.end);
    GafState obs = env.reset();
    while (!env.done()) {
        std::size_t a = greedy_action(net, obs, kind, constant_action);
        obs = env.step(action_from_index(a)).observation;
    }
    TradeLog log;
    for (const TradeRecord& t : env.trade_log())
        log.push_back(static_cast<double>(t.outcome.pnl_pips));
    return log;
}

}  // namespace surefire
