#include "drqn/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "drqn/config.hpp"
#include "drqn/errors.hpp"
#include "drqn/indicators.hpp"
#include "drqn/market_data.hpp"
#include "drqn/pipeline.hpp"
#include "drqn/synthetic_data.hpp"

namespace drqn {
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string data;
  std::string model;
  std::string model_dqn;
  std::vector<std::string> positional;
};

RunConfig resolve(const Options& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (!o.data.empty()) c.data_path = o.data;
  validate(c);
  return c;
}

fs::path out_dir(const Options& o) {
  if (o.out.empty()) throw UsageError("--out <dir> is required");
  fs::create_directories(o.out);
  return o.out;
}

void write_resolved(const fs::path& dir, const RunConfig& c) {
  write_text(dir / "config.resolved", serialize_config(c));
}

std::vector<Bar> source_bars(const RunConfig& c) {
  if (!c.data_path.empty()) return load_ohlcv_csv(c.data_path);
  if (c.synth) return generate(c.generator_spec());
  throw ConfigError("no data source: pass --data or set synth.kind");
}

std::vector<GroupBar> complete_groups(const RunConfig& c, std::span<const Bar> bars) {
  GroupedBars g = group_bars(bars, c.group_size);
  if (g.partial_tail) g.groups.pop_back();
  return std::move(g.groups);
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : ""; }

int cmd_ingest(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  if (c.data_path.empty()) throw ConfigError("ingest needs --data or data.path");
  const fs::path dir = out_dir(o);
  const auto bars = load_ohlcv_csv(c.data_path);
  const ValidationReport report = validate_series(bars);
  const GroupedBars grouped = group_bars(bars, c.group_size);
  std::ostringstream groups;
  write_group_csv(groups, grouped.groups);
  write_text(dir / "groups.csv", groups.str());

  nlohmann::ordered_json j;
  j["bar_count"] = report.bar_count;
  j["duplicate_count"] = report.duplicate_count;
  j["gap_count"] = report.gap_count;
  j["group_count"] = grouped.groups.size();
  j["non_monotonic_count"] = report.non_monotonic_count;
  j["open_close_mismatches"] = report.open_close_mismatches;
  j["partial_tail"] = grouped.partial_tail;
  auto& v = j["violations"] = nlohmann::ordered_json::array();
  for (const auto& x : report.violations) v.push_back({{"description", x.description}, {"index", x.index}});
  write_text(dir / "validation.json", j.dump(2) + "\n");
  write_resolved(dir, c);
  out << "ingested " << bars.size() << " bars into " << grouped.groups.size() << " groups\n";
  return 0;
}

int cmd_synth(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  if (!c.synth) throw ConfigError("synth needs synth.kind in the config");
  const fs::path dir = out_dir(o);
  const GeneratedSeries series = generate_series(c.generator_spec());
  std::ostringstream bars;
  write_ohlcv_csv(bars, series.bars);
  write_text(dir / "bars.csv", bars.str());
  if (c.synth->kind == GeneratorKind::RegimeSwitch) {
    std::ostringstream regimes;
    regimes << "begin,end,direction\n";
    for (const Regime& r : series.regimes) regimes << r.begin << ',' << r.end << ',' << r.direction << '\n';
    write_text(dir / "regimes.csv", regimes.str());
  }
  write_resolved(dir, c);
  out << "generated " << series.bars.size() << " bars\n";
  return 0;
}

int cmd_indicators(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  const fs::path dir = out_dir(o);
  const auto bars = source_bars(c);
  const auto groups = complete_groups(c, bars);
  const Eigen::MatrixXd ind = indicator_series(to_arrays(groups));
  std::ostringstream csv;
  csv << "group_index,AR,BR";
  for (const auto& name : kIndicatorNames) csv << ',' << name;
  csv << '\n';
  const std::span<const GroupBar> all(groups);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const ArBrValue s = arbr(all.first(g + 1), c.state.arbr_window);
    csv << groups[g].group_index << ',' << optional_real(s.ar) << ',' << optional_real(s.br);
    for (Eigen::Index k = 0; k < ind.cols(); ++k) {
      const double x = ind(static_cast<Eigen::Index>(g), k);
      csv << ',' << (std::isnan(x) ? std::string() : format_real(x));
    }
    csv << '\n';
  }
  write_text(dir / "indicators.csv", csv.str());
  write_resolved(dir, c);
  out << "wrote indicators for " << groups.size() << " groups\n";
  return 0;
}

int cmd_states(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  const fs::path dir = out_dir(o);
  const auto bars = source_bars(c);
  const auto groups = complete_groups(c, bars);
  const auto states = build_states(groups, c.state);
  std::ostringstream csv;
  csv << "group_index";
  for (std::size_t i = 1; i <= c.state.log_return_lags; ++i) csv << ",logret_" << i;
  if (c.state.use_indicators) {
    for (const auto& name : kIndicatorNames) csv << ',' << name;
  }
  csv << ",ar,br,valid\n";
  for (const StockState& s : states) {
    csv << s.group_index;
    for (Eigen::Index k = 0; k < s.features.size(); ++k) csv << ',' << format_real(s.features(k));
    csv << ',' << (s.valid ? 1 : 0) << '\n';
  }
  write_text(dir / "states.csv", csv.str());
  write_resolved(dir, c);
  std::size_t valid = 0;
  for (const auto& s : states) valid += s.valid ? 1 : 0;
  out << "wrote " << states.size() << " states (" << valid << " valid)\n";
  return 0;
}

void save_model(const fs::path& dir, const std::string& stem, const TrainedModel& m) {
  save_checkpoint((dir / (stem + ".ckpt")).string(),
                  Checkpoint{m.agent.online, m.agent.optimizer, m.agent.train_steps});
  std::ostringstream metrics;
  write_metrics_csv(metrics, m.log);
  write_text(dir / ("metrics" + stem.substr(5) + ".csv"), metrics.str());
}

int cmd_train(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  if (!c.has_data_source()) throw ConfigError("train needs --data or synth.kind in the config");
  const fs::path dir = out_dir(o);
  const PreparedData data = prepare_data(c);
  const TrainedModel drqn = train_model(c, data, CellKind::Lstm);
  save_model(dir, "model", drqn);
  if (needs_dqn(c)) save_model(dir, "model_dqn", train_model(c, data, CellKind::Dense));
  write_resolved(dir, c);
  out << "trained " << drqn.agent.train_steps << " steps over " << drqn.log.episodes << " episodes\n";
  return 0;
}

int cmd_backtest(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  if (!c.has_data_source()) throw ConfigError("backtest needs --data or synth.kind in the config");
  const fs::path dir = out_dir(o);
  const PreparedData data = prepare_data(c);
  bool any_network = false;
  for (const auto& s : c.strategies) any_network = any_network || needs_network(s);
  std::optional<Checkpoint> drqn, dqn;
  const auto load = [](const fs::path& p) {
    if (!fs::exists(p)) throw MissingRunArtifacts("no checkpoint at '" + p.string() + "'");
    return load_checkpoint(p.string());
  };
  if (any_network) drqn = load(o.model.empty() ? dir / "model.ckpt" : fs::path(o.model));
  if (needs_dqn(c)) dqn = load(o.model_dqn.empty() ? dir / "model_dqn.ckpt" : fs::path(o.model_dqn));
  const Evaluation ev = evaluate(c, data, drqn ? &drqn->params : nullptr, dqn ? &dqn->params : nullptr);
  write_evaluation(dir, ev);
  write_resolved(dir, c);
  for (const auto& run : ev.runs) {
    out << run.name << " income=" << run.result.report.accumulated_income.to_string()
        << " trades=" << run.result.report.trade_count << '\n';
  }
  return 0;
}

int cmd_compare(const Options& o, std::ostream& out) {
  if (o.positional.empty()) throw UsageError("compare needs run directories");
  const fs::path dir = out_dir(o);
  std::vector<RunReport> reports;
  for (const auto& run : o.positional) {
    RunReport r = report_from_json(read_text(fs::path(run) / "report.json"));
    r.name = run;
    reports.push_back(std::move(r));
  }
  const auto ranked = compare_runs(reports);
  std::ostringstream csv;
  write_ranking_csv(csv, ranked);
  write_text(dir / "ranking.csv", csv.str());
  write_text(dir / "ranking.json", ranking_to_json(ranked));
  for (const auto& r : ranked) out << r.name << ' ' << r.accumulated_income.to_string() << '\n';
  return 0;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw MissingRunArtifacts("'" + path.string() + "' is empty");
  return rows;
}

int cmd_plot_data(const Options& o, std::ostream& out) {
  const fs::path dir = !o.positional.empty() ? fs::path(o.positional.front()) : fs::path(o.out);
  if (dir.empty()) throw UsageError("plot-data needs a run directory");
  if (!fs::is_directory(dir)) throw MissingRunArtifacts("no run directory at '" + dir.string() + "'");
  const RunConfig c = load_config((dir / "config.resolved").string());
  const auto signals = read_csv_rows(dir / "signals.csv");

  // signals.csv: group_index,AR,BR,s1,s2,fused,executed,position,price
  std::ostringstream arbr_csv, price_csv, markers_csv, equity_csv;
  arbr_csv << "group_index,AR,BR\n";
  price_csv << "group_index,price,position\n";
  markers_csv << "group_index,side,price\n";
  for (std::size_t i = 1; i < signals.size(); ++i) {
    const auto& r = signals[i];
    if (r.size() != 9) throw MissingRunArtifacts("signals.csv row " + std::to_string(i) + " is malformed");
    arbr_csv << r[0] << ',' << r[1] << ',' << r[2] << '\n';
    price_csv << r[0] << ',' << r[8] << ',' << r[7] << '\n';
    if (r[6] != "0") markers_csv << r[0] << ',' << (r[6] == "1" ? "buy" : "sell") << ',' << r[8] << '\n';
  }
  equity_csv << "strategy,group_index,equity\n";
  for (const auto& name : c.strategies) {
    const auto rows = read_csv_rows(dir / ("equity_" + name + ".csv"));
    // equity CSV: group_index,timestamp,price,equity,position,reward
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() < 4) throw MissingRunArtifacts("equity_" + name + ".csv is malformed");
      equity_csv << name << ',' << rows[i][0] << ',' << rows[i][3] << '\n';
    }
  }
  write_text(dir / "plot_arbr.csv", arbr_csv.str());
  write_text(dir / "plot_price.csv", price_csv.str());
  write_text(dir / "plot_markers.csv", markers_csv.str());
  write_text(dir / "plot_equity.csv", equity_csv.str());
  out << "wrote plot data for " << signals.size() - 1 << " groups\n";
  return 0;
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 2;
  if (dynamic_cast<const ConfigError*>(&e)) return 3;
  if (dynamic_cast<const DataError*>(&e)) return 4;
  return 1;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DRQN-ARBR trading research harness", "drqn_cli"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "config file");
  app.add_option("--seed", o.seed, "run seed (overrides run.seed)");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--data", o.data, "input OHLCV CSV (overrides data.path)");

  using Handler = int (*)(const Options&, std::ostream&);
  std::vector<std::pair<CLI::App*, Handler>> commands;
  commands.emplace_back(app.add_subcommand("ingest", "validate and group a minute CSV"), cmd_ingest);
  commands.emplace_back(app.add_subcommand("synth", "generate a synthetic series"), cmd_synth);
  commands.emplace_back(app.add_subcommand("indicators", "emit AR/BR and the indicator suite"), cmd_indicators);
  commands.emplace_back(app.add_subcommand("states", "emit the state matrix"), cmd_states);
  commands.emplace_back(app.add_subcommand("train", "train the agent and save a checkpoint"), cmd_train);
  auto* backtest = app.add_subcommand("backtest", "evaluate strategies on the held-out range");
  backtest->add_option("--model", o.model, "DRQN checkpoint (default <out>/model.ckpt)");
  backtest->add_option("--model-dqn", o.model_dqn, "DQN checkpoint (default <out>/model_dqn.ckpt)");
  commands.emplace_back(backtest, cmd_backtest);
  auto* compare = app.add_subcommand("compare", "rank completed runs");
  compare->add_option("runs", o.positional, "run directories");
  commands.emplace_back(compare, cmd_compare);
  auto* plot = app.add_subcommand("plot-data", "export plot-ready CSVs from a run");
  plot->add_option("run", o.positional, "run directory (default --out)");
  commands.emplace_back(plot, cmd_plot_data);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      throw UsageError(e.what());
    }
    for (const auto& [sub, handler] : commands) {
      if (sub->parsed()) return handler(o, out);
    }
    throw UsageError("no subcommand");
  } catch (const Error& e) {
    const int code = exit_code_for(e);
    err << "error kind=" << e.kind() << " exit=" << code << ": " << one_line(e.what()) << '\n';
    return code;
  } catch (const std::exception& e) {
    err << "error kind=RuntimeFailure exit=1: " << one_line(e.what()) << '\n';
    return 1;
  }
}

}  // namespace drqn
