#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "drqn/cli.hpp"
#include "drqn/config.hpp"
#include "drqn/errors.hpp"
#include "drqn/pipeline.hpp"

using namespace drqn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

const char* kSmallRun =
    "synth.kind = sine_trend\n"
    "synth.length = 9000\n"
    "synth.noise = 0.001\n"
    "agent.train_steps = 120\n"
    "agent.hidden = 8\n"
    "agent.gamma = 0.9\n"
    "backtest.strategies = arbr_drqn,drqn,dqn,macd,buy_hold\n";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("drqn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = root_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path root_;
};

}  // namespace

TEST_F(CliTest, UsageErrors) {
  auto r = run({});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error kind=UsageError exit=2: ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"synth", "--bogus"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, ConfigErrors) {
  const auto cfg = write_config("bad.cfg", "agent.nope = 1\n");
  const auto r = run({"synth", "--config", cfg.string(), "--out", (root_ / "x").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("error kind=ConfigError exit=3: ", 0), 0u) << r.err;
  EXPECT_EQ(run({"train", "--out", (root_ / "t").string()}).code, 3);
  EXPECT_EQ(run({"synth", "--config", (root_ / "missing.cfg").string(), "--out", root_.string()}).code, 3);
}

TEST_F(CliTest, DataErrors) {
  const fs::path csv = root_ / "bad.csv";
  std::ofstream(csv) << "timestamp,open,high,low,close,volume\n"
                        "2017-01-03T09:30:00Z,10,9,10,10,100\n";
  const auto r = run({"ingest", "--data", csv.string(), "--out", (root_ / "i").string()});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("kind=InvalidPrice"), std::string::npos) << r.err;
  EXPECT_EQ(run({"ingest", "--data", (root_ / "none.csv").string(), "--out", root_.string()}).code, 4);
  EXPECT_EQ(run({"plot-data", (root_ / "empty").string()}).code, 4);

  const auto cfg = write_config("run.cfg", kSmallRun);
  const auto b = run({"backtest", "--config", cfg.string(), "--out", (root_ / "nomodel").string()});
  EXPECT_EQ(b.code, 4);
  EXPECT_NE(b.err.find("MissingRunArtifacts"), std::string::npos) << b.err;
}

TEST_F(CliTest, IngestGroupsAndValidates) {
  const auto cfg = write_config("s.cfg", "synth.kind = random_walk\nsynth.length = 95\nsynth.noise = 0.001\n");
  ASSERT_EQ(run({"synth", "--config", cfg.string(), "--out", (root_ / "s").string()}).code, 0);
  ASSERT_EQ(run({"ingest", "--data", (root_ / "s" / "bars.csv").string(), "--out", (root_ / "i").string()}).code, 0);
  EXPECT_EQ(lines(root_ / "i" / "groups.csv").size(), 1u + 4u);  // 3 full groups + flagged tail
  const std::string v = slurp(root_ / "i" / "validation.json");
  EXPECT_NE(v.find("\"bar_count\": 95"), std::string::npos) << v;
  EXPECT_NE(v.find("\"partial_tail\": true"), std::string::npos);
  EXPECT_TRUE(fs::exists(root_ / "i" / "config.resolved"));
}

TEST_F(CliTest, SynthIsDeterministic) {
  const auto cfg = write_config("r.cfg", "synth.kind = regime_switch\nsynth.length = 5000\nsynth.noise = 0.002\n");
  for (const char* d : {"a", "b"}) {
    ASSERT_EQ(run({"synth", "--config", cfg.string(), "--seed", "5", "--out", (root_ / d).string()}).code, 0);
  }
  for (const char* f : {"bars.csv", "regimes.csv", "config.resolved"}) {
    EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
  }
  EXPECT_EQ(lines(root_ / "a" / "bars.csv").size(), 5001u);
  ASSERT_EQ(run({"synth", "--config", cfg.string(), "--seed", "6", "--out", (root_ / "c").string()}).code, 0);
  EXPECT_NE(slurp(root_ / "a" / "bars.csv"), slurp(root_ / "c" / "bars.csv"));
}

TEST_F(CliTest, IndicatorsAndStates) {
  const auto cfg = write_config("s.cfg", "synth.kind = sine_trend\nsynth.length = 6000\n");
  const std::string out = (root_ / "f").string();
  ASSERT_EQ(run({"indicators", "--config", cfg.string(), "--out", out}).code, 0);
  ASSERT_EQ(run({"states", "--config", cfg.string(), "--out", out}).code, 0);
  const auto ind = lines(root_ / "f" / "indicators.csv");
  const auto st = lines(root_ / "f" / "states.csv");
  ASSERT_EQ(ind.size(), 201u);
  ASSERT_EQ(st.size(), 201u);
  EXPECT_EQ(split(ind[0]).size(), 23u);
  EXPECT_EQ(split(st[0]).size(), 1u + 30u + 1u);
  EXPECT_EQ(split(st[0]).back(), "valid");
  // First valid row is the warm-up length.
  std::size_t first_valid = 0;
  for (std::size_t i = 1; i < st.size(); ++i) {
    if (split(st[i]).back() == "1") {
      first_valid = i - 1;
      break;
    }
  }
  EXPECT_EQ(first_valid, 96u);
}

TEST_F(CliTest, FullPipelinePlotDataAndCheckpointFidelity) {
  const auto cfg = write_config("run.cfg", kSmallRun);
  const fs::path dir = root_ / "run";
  const std::string out = dir.string();
  ASSERT_EQ(run({"synth", "--config", cfg.string(), "--out", out}).code, 0);
  ASSERT_EQ(run({"train", "--config", cfg.string(), "--out", out}).code, 0);
  ASSERT_TRUE(fs::exists(dir / "model.ckpt"));
  ASSERT_TRUE(fs::exists(dir / "model_dqn.ckpt"));
  EXPECT_EQ(lines(dir / "metrics.csv").size(), 3u);  // header, step 100, final step 120
  const auto bt = run({"backtest", "--config", cfg.string(), "--out", out});
  ASSERT_EQ(bt.code, 0) << bt.err;
  const auto pd = run({"plot-data", out});
  ASSERT_EQ(pd.code, 0) << pd.err;

  // In-process train-then-evaluate matches the checkpointed path.
  std::ifstream cin(cfg);
  const RunConfig c = parse_config(cin);
  const auto data = prepare_data(c);
  const auto drqn = train_model(c, data, CellKind::Lstm);
  const auto dqn = train_model(c, data, CellKind::Dense);
  const auto ev = evaluate(c, data, &drqn.agent.online, &dqn.agent.online);
  const fs::path again = root_ / "again";
  write_evaluation(again, ev);
  for (const auto& e : fs::directory_iterator(again)) {
    EXPECT_EQ(slurp(e.path()), slurp(dir / e.path().filename())) << e.path().filename();
  }

  const std::size_t test_groups = data.groups.size() - data.split;
  EXPECT_EQ(lines(dir / "plot_arbr.csv").size(), 1 + test_groups);
  EXPECT_EQ(lines(dir / "plot_price.csv").size(), 1 + test_groups);
  EXPECT_EQ(lines(dir / "plot_equity.csv").size(), 1 + test_groups * c.strategies.size());
  EXPECT_EQ(lines(dir / "comparison.csv").size(), 1 + c.strategies.size());

  // Marker rows are exactly the fills of the primary strategy.
  const auto markers = lines(dir / "plot_markers.csv");
  const auto fills = lines(dir / "fills_arbr_drqn.csv");
  ASSERT_EQ(markers.size(), fills.size());
  std::set<std::string> fill_keys;
  for (std::size_t i = 1; i < fills.size(); ++i) {
    const auto f = split(fills[i]);
    fill_keys.insert(f[1] + "@" + f[2]);
  }
  const auto eq = lines(dir / "equity_arbr_drqn.csv");
  for (std::size_t i = 1; i < markers.size(); ++i) {
    const auto m = split(markers[i]);
    EXPECT_TRUE(fill_keys.count(m[1] + "@" + m[2])) << markers[i];
    // The marker's group executes a trade: position changes there.
    const std::size_t g = std::stoul(m[0]) - data.split;
    const int pos = std::stoi(split(eq[1 + g])[4]);
    const int prev = g == 0 ? 0 : std::stoi(split(eq[g])[4]);
    EXPECT_NE(pos, prev) << markers[i];
  }
}

TEST_F(CliTest, ZeroTradeRunHasHeaderOnlyMarkers) {
  const auto cfg = write_config("h.cfg", "synth.kind = sine_trend\nsynth.length = 9000\nbacktest.strategies = hold,macd\n");
  const std::string out = (root_ / "h").string();
  ASSERT_EQ(run({"synth", "--config", cfg.string(), "--out", out}).code, 0);
  ASSERT_EQ(run({"backtest", "--config", cfg.string(), "--out", out}).code, 0);
  ASSERT_EQ(run({"plot-data", "--out", out}).code, 0);
  EXPECT_EQ(lines(root_ / "h" / "plot_markers.csv").size(), 1u);
}

TEST_F(CliTest, CompareRanksFourRuns) {
  std::vector<std::string> args{"compare", "--out", (root_ / "cmp").string()};
  const char* strategies[] = {"hold", "macd", "buy_hold", "arbr"};
  for (int k = 0; k < 4; ++k) {
    const auto cfg = write_config("c" + std::to_string(k) + ".cfg",
                                  std::string("synth.kind = sine_trend\nsynth.length = 9000\nbacktest.strategies = ") +
                                      strategies[k] + "\n");
    const std::string out = (root_ / strategies[k]).string();
    ASSERT_EQ(run({"backtest", "--config", cfg.string(), "--out", out}).code, 0);
    args.push_back(out);
  }
  ASSERT_EQ(run(args).code, 0);
  const auto rows = lines(root_ / "cmp" / "ranking.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(split(rows[0])[0], "rank");
  EXPECT_TRUE(fs::exists(root_ / "cmp" / "ranking.json"));
  EXPECT_EQ(run({"compare", "--out", (root_ / "cmp").string(), (root_ / "nowhere").string(),
                 (root_ / "hold").string()}).code, 4);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(UsageError("x")), 2);
  EXPECT_EQ(exit_code_for(ConfigError("x")), 3);
  EXPECT_EQ(exit_code_for(MalformedRow(3, "x")), 4);
  EXPECT_EQ(exit_code_for(MissingRunArtifacts("x")), 4);
  EXPECT_EQ(exit_code_for(NonFiniteQ("x")), 1);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
}
