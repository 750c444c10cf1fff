#include "surefire/agents.hpp"
#include "surefire/candle.hpp"
#include "surefire/env.hpp"
#include "surefire/gaf.hpp"
#include "surefire/grid.hpp"
#include "surefire/metrics.hpp"
#include "surefire/network.hpp"
#include "surefire/run_config.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace surefire;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

int cmd_validate(const std::string& data, bool allow_gaps) {
    CandleSeries series;
    try {
        series = load_csv_file(data, 4 * 3600, allow_gaps);
    } catch (const CsvError& e) {
        std::cerr << "validate: " << data << ": " << e.what() << "\n";
        return kExitData;
    }
    std::size_t gaps = 0;
    for (std::size_t i = 1; i < series.size(); ++i)
        if (series[i].timestamp - series[i - 1].timestamp != series.bar_period) ++gaps;
    std::cout << "bars: " << series.size() << "\n";
    if (!series.candles.empty())
        std::cout << "range: " << format_timestamp(series.candles.front().timestamp) << " .. "
                  << format_timestamp(series.candles.back().timestamp) << "\n";
    std::cout << "gaps: " << gaps << "\n";
    return kExitOk;
}

std::string tensor_csv(const GafState& state) {
    std::ostringstream out;
    out << "channel,row,col,value\n";
    char buf[64];
    for (std::size_t c = 0; c < GafState::kChannels; ++c)
        for (std::size_t y = 0; y < kWindowSize; ++y)
            for (std::size_t x = 0; x < kWindowSize; ++x) {
                std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.17g\n", c, y, x, state.at(y, x, c));
                out << buf;
            }
    return out.str();
}

int cmd_encode(const std::string& data, std::size_t index, const std::string& out_dir,
               bool allow_gaps, std::size_t zoom) {
    CandleSeries series = load_csv_file(data, 4 * 3600, allow_gaps);
    if (index < kWindowSize - 1 || index >= series.size())
        throw CsvError("index " + std::to_string(index) + " out of range (need " +
                       std::to_string(kWindowSize - 1) + ".." + std::to_string(series.size() - 1) +
                       ")");
    GafState state = encode_window(
        CandleWindow(series.candles.data() + index + 1 - kWindowSize, kWindowSize));
    fs::create_directories(out_dir);
    static const char* kNames[4] = {"open", "high", "low", "close"};
    for (std::size_t c = 0; c < 4; ++c)
        export_heatmap(state, c, out_dir + "/gaf_" + kNames[c] + ".ppm", zoom);
    write_file(out_dir + "/gaf_tensor.csv", tensor_csv(state));
    std::cout << "wrote 4 heatmaps and gaf_tensor.csv to " << out_dir << "\n";
    return kExitOk;
}

int cmd_backtest(const std::string& data, std::size_t entry_index, const std::string& direction,
                 Pips k, std::size_t max_additional, bool allow_gaps) {
    CandleSeries series = load_csv_file(data, 4 * 3600, allow_gaps);
    if (entry_index + 1 >= series.size())
        throw CsvError("entry index leaves no bars to simulate");
    GridConfig cfg{series[entry_index].close,
                   direction == "sell" ? Direction::Sell : Direction::Buy, k, max_additional, 1};
    std::vector<Pips> closes;
    for (std::size_t i = entry_index + 1; i < series.size(); ++i)
        closes.push_back(series[i].close);
    TradeOutcome out = simulate_grid(closes, cfg);
    std::cout << "entry: " << format_price(cfg.entry_price) << " " << direction << " k=" << k
              << " max_additional=" << max_additional << "\n"
              << "pnl_pips: " << out.pnl_pips << "\n"
              << "positions_filled: " << out.positions_filled << "\n"
              << "bars_elapsed: " << out.bars_elapsed << "\n"
              << "settled: " << (out.settled ? "true" : "false") << "\n";
    return kExitOk;
}

int cmd_train(RunConfig cfg) {
    cfg.validate();
    cfg.train_cfg.episodes = cfg.episodes;
    cfg.train_cfg.seed = *cfg.seed;
    CandleSeries series = load_csv_file(cfg.data_path, 4 * 3600, cfg.allow_gaps);
    CursorRange range = cursor_range(series, cfg.train_start, cfg.train_end);
    TradingEnv env(series, range.begin, range.end);
    TrainRun run = train(env, cfg.kind(), cfg.train_cfg);
    fs::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/history.csv", history_csv(cfg, run.episode_rewards));
    save_network(run.net, cfg.out_dir + "/params.bin", config_stamp(cfg));
    std::cout << "trained " << cfg.agent << " for " << run.episode_rewards.size()
              << " episodes; artifacts in " << cfg.out_dir << "\n";
    return kExitOk;
}

PerformanceReport evaluate_model(const RunConfig& cfg, const std::string& params_path) {
    CandleSeries series = load_csv_file(cfg.data_path, 4 * 3600, cfg.allow_gaps);
    CursorRange range = cursor_range(series, cfg.eval_start, cfg.eval_end);
    Network net;
    AgentKind kind = cfg.kind();
    if (kind != AgentKind::Constant) {
        net = build_default_network(kind == AgentKind::Ppo ? kActionCount + 1 : kActionCount);
        load_network(net, params_path);
    }
    TradeLog log = evaluate_greedy(series, range, net, kind, cfg.train_cfg.constant_action);
    if (log.empty()) throw std::runtime_error("empty eval range: no trades taken");
    return make_report(model_code(cfg.agent_letter(), cfg.currency), log, cfg.initial_equity);
}

int cmd_evaluate(RunConfig cfg, const std::string& params_path) {
    cfg.validate();
    PerformanceReport rep = evaluate_model(cfg, params_path);
    std::vector<PerformanceReport> reps{rep};
    std::cout << render_report_table(reps);
    fs::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/report.csv", "# " + config_stamp(cfg) + "\n" + report_csv(reps));
    return kExitOk;
}

PerformanceReport parse_report_row(const std::string& line) {
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i)
        if (i == line.size() || line[i] == ',') {
            f.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    if (f.size() != 6) throw std::runtime_error("bad report row: " + line);
    PerformanceReport r;
    r.model_code = f[0];
    r.net_profit = std::stod(f[1]);
    r.profit_factor = f[2] == "inf" ? std::numeric_limits<double>::infinity()
                      : f[2] == "n/a" ? std::numeric_limits<double>::quiet_NaN()
                                      : std::stod(f[2]);
    r.max_drawdown = std::stod(f[3]);
    r.sqn = f[4] == "n/a" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[4]);
    r.trades = static_cast<std::size_t>(std::stoull(f[5]));
    return r;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_path) {
    std::vector<PerformanceReport> reports;
    for (const std::string& path : inputs) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open report: " + path);
        std::string line;
        bool header_seen = false;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (!header_seen) {  // column header
                header_seen = true;
                continue;
            }
            reports.push_back(parse_report_row(line));
        }
    }
    std::string table = render_report_table(reports);
    std::cout << table;
    if (!out_path.empty()) write_file(out_path, table);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sure-Fire martingale-grid trading research stack"};
    app.require_subcommand(1);

    std::string data, out_dir = "out", config_path, params_path, direction = "buy";
    std::string report_out;
    std::vector<std::string> report_inputs;
    bool allow_gaps = false;
    std::size_t index = kWindowSize - 1, zoom = 16, entry_index = 0, max_additional = 3;
    Pips k = 20;
    RunConfig cfg;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto* validate = app.add_subcommand("validate", "load and validate a candle CSV");
    validate->add_option("--data", data, "CSV path")->required();
    validate->add_flag("--allow-gaps", allow_gaps, "accept gapped timestamps");

    auto* encode = app.add_subcommand("encode", "export GAF heatmaps and tensor CSV");
    encode->add_option("--data", data)->required();
    encode->add_option("--index", index, "window end index (>= 11)");
    encode->add_option("--out", out_dir, "output directory");
    encode->add_option("--zoom", zoom, "heatmap zoom factor");
    encode->add_flag("--allow-gaps", allow_gaps);

    auto* backtest = app.add_subcommand("backtest", "simulate one grid from a bar index");
    backtest->add_option("--data", data)->required();
    backtest->add_option("--entry-index", entry_index)->required();
    backtest->add_option("--direction", direction)->check(CLI::IsMember({"buy", "sell"}));
    backtest->add_option("--k", k, "take-profit pips")->check(CLI::IsMember({20, 25, 30}));
    backtest->add_option("--max-additional", max_additional)->check(CLI::Range(1, 3));
    backtest->add_flag("--allow-gaps", allow_gaps);

    std::string agent_opt;
    std::size_t episodes_opt = 0;
    auto add_run_opts = [&](CLI::App* sub) {
        sub->add_option("--data", data);
        sub->add_option("--config", config_path, "JSON config (flat keys)");
        sub->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--agent", agent_opt)->check(CLI::IsMember({"constant", "dqn", "ppo"}));
        sub->add_option("--episodes", episodes_opt);
        sub->add_option("--out", out_dir);
        sub->add_flag("--allow-gaps", allow_gaps);
    };

    auto* train_cmd = app.add_subcommand("train", "train an agent on the train range");
    add_run_opts(train_cmd);

    auto* eval_cmd = app.add_subcommand("evaluate", "greedy evaluation over the eval range");
    add_run_opts(eval_cmd);
    eval_cmd->add_option("--params", params_path, "trained parameter file");

    auto* report_cmd = app.add_subcommand("report", "merge report CSVs into one table");
    report_cmd->add_option("--in", report_inputs, "report.csv files")->required();
    report_cmd->add_option("--out", report_out, "write the table here too");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(data, allow_gaps);
        if (encode->parsed()) return cmd_encode(data, index, out_dir, allow_gaps, zoom);
        if (backtest->parsed())
            return cmd_backtest(data, entry_index, direction, k, max_additional, allow_gaps);
        if (train_cmd->parsed() || eval_cmd->parsed()) {
            if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in) throw CsvError("cannot open config: " + config_path);
                nlohmann::json j = nlohmann::json::parse(in);
                apply_json(cfg, j);
            }
            // flags override config file values
            CLI::App* sub = train_cmd->parsed() ? train_cmd : eval_cmd;
            if (!data.empty()) cfg.data_path = data;
            if (seed_set) cfg.seed = seed;
            if (sub->count("--agent")) cfg.agent = agent_opt;
            if (sub->count("--episodes")) cfg.episodes = episodes_opt;
            if (sub->count("--out") || cfg.out_dir == ".") cfg.out_dir = out_dir;
            cfg.allow_gaps = cfg.allow_gaps || allow_gaps;
            if (train_cmd->parsed()) return cmd_train(cfg);
            return cmd_evaluate(cfg, params_path);
        }
        if (report_cmd->parsed()) return cmd_report(report_inputs, report_out);
    } catch (const CsvError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
