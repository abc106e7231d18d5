#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "dcrl/dynamics.hpp"
#include "dcrl/error.hpp"
#include "dcrl/harness.hpp"
#include "json.hpp"

using namespace dcrl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dcrl_harness_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

MetricsRecord rec(std::size_t step, double v, double dv) {
  MetricsRecord r;
  r.step = step;
  r.V = v;
  r.dV = dv;
  return r;
}

ExperimentConfig small_swiss(const std::string& extra = "") {
  return parse_config(
      "[experiment]\nN = 60\nm = 2\nsteps = 300\nseeds = 0,1,2\nmetrics_every = 50\n"
      "[manifold]\nkind = swiss_roll\n" +
      extra);
}

}  // namespace

TEST(Phase, ThresholdsArePureFunctionsOfTheStream) {
  EXPECT_EQ(classify_phase({rec(0, 1, 0), rec(100, 0.5, -1e-3)}, 100, false), Phase::StableAlignment);
  EXPECT_EQ(classify_phase({rec(0, 1, 0), rec(100, 0.5, 1e-9)}, 100, false), Phase::StochasticOscillation);
  EXPECT_EQ(classify_phase({rec(0, 1, 0), rec(100, 0.5, 5e-11)}, 100, false), Phase::StableAlignment);
  EXPECT_EQ(classify_phase({rec(0, 1, 0), rec(50, 2e6, 1), rec(100, 0.5, -1)}, 100, false),
            Phase::ExplosiveDivergence);
  EXPECT_EQ(classify_phase({rec(0, 1, 0)}, 100, true), Phase::ExplosiveDivergence);
  // Positive dV before the tail is ignored.
  EXPECT_EQ(classify_phase({rec(0, 1, 0), rec(50, 1, 1.0), rec(100, 0.5, -1)}, 100, false), Phase::StableAlignment);
}

TEST(Harness, Median) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_TRUE(std::isnan(median({})));
}

TEST(Harness, RunWritesCsvAndSummaryRecomputableFromCsv) {
  const auto cfg = small_swiss();
  const auto out = scratch("run");
  const auto s = run(cfg, out);
  ASSERT_EQ(s.seeds.size(), 3u);
  const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(j["config_hash"], cfg.hash_hex());
  EXPECT_EQ(j["seeds"].size(), 3u);
  EXPECT_EQ(j["phase"], to_string(s.phase));

  std::vector<std::string> header;
  std::vector<std::vector<double>> finals;
  for (auto seed : cfg.seeds) {
    const auto rows = read_csv(out / ("seed_" + std::to_string(seed) + ".csv"));
    header = rows.front();
    EXPECT_EQ(rows.size(), 1u + 8u);  // steps 0, 50, ..., 300; the tail start 240 is extra
    std::vector<double> last;
    for (const auto& c : rows.back()) last.push_back(std::stod(c));
    finals.push_back(last);
  }
  EXPECT_EQ(header.size(), 11u);
  for (std::size_t col = 1; col < header.size(); ++col) {
    if (header[col] == "dV") continue;
    double mean = 0.0;
    for (const auto& f : finals) mean += f[col];
    mean /= 3.0;
    double var = 0.0;
    for (const auto& f : finals) var += (f[col] - mean) * (f[col] - mean);
    const double sd = std::sqrt(var / 2.0);
    EXPECT_EQ(j["metrics"][header[col]]["mean"].get<double>(), mean) << header[col];
    EXPECT_EQ(j["metrics"][header[col]]["std"].get<double>(), sd) << header[col];
  }
  fs::remove_all(out);
}

TEST(Harness, IdenticalConfigAndSeedGiveByteIdenticalCsv) {
  const auto cfg = small_swiss("[experiment]\n");
  const auto a = scratch("det_a"), b = scratch("det_b");
  run(cfg, a);
  run(cfg, b);
  for (auto seed : cfg.seeds) {
    const auto name = "seed_" + std::to_string(seed) + ".csv";
    EXPECT_EQ(slurp(a / name), slurp(b / name));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Harness, AblationFrozenWeightsStayAtInitialization) {
  const auto cfg = small_swiss();
  const auto res = ablation(cfg, std::nullopt);
  for (const auto& r : res.sde_only.seeds) {
    SeededRng rng(r.seed);
    sample_uniform(cfg.manifold, cfg.agents, rng);
    const Matrix w0 = random_weights(rng, cfg.latent_dim, cfg.manifold.ambient_dim, cfg.init_scale);
    EXPECT_EQ(r.final_w, w0);
  }
  for (const auto& r : res.ode_only.seeds) EXPECT_EQ(r.final_positions, r.initial_positions);
  const auto j = nlohmann::json::parse(res.json);
  for (const char* k : {"coupled", "ode_only", "sde_only"}) {
    EXPECT_TRUE(j["regimes"][k].contains("ortho_error"));
    EXPECT_TRUE(j["regimes"][k].contains("eff_rank"));
  }
}

TEST(Harness, SweepSchedulesOneRunPerRatio) {
  auto cfg = small_swiss();
  const auto out = scratch("sweep");
  const auto res = sweep(cfg, {1.5, 0.05, 0.001}, out);
  ASSERT_EQ(res.runs.size(), 3u);
  EXPECT_TRUE(fs::exists(out / "ratio_1.5" / "summary.json"));
  EXPECT_TRUE(fs::exists(out / "ratio_0.001" / "seed_2.csv"));
  EXPECT_TRUE(fs::exists(out / "sweep.json"));
  EXPECT_FALSE(res.runs[0].warnings.empty());  // ratio 1.5 violates timescale separation
  EXPECT_NE(res.runs[0].config_hash, res.runs[1].config_hash);
  fs::remove_all(out);
}

TEST(Harness, DivergentRunHaltsAsExplosive) {
  const auto cfg = parse_config(
      "[experiment]\nN = 50\nm = 2\nsteps = 2000\nseeds = 0\n"
      "[dynamics]\neta_w = 0.05\neta_x = 0.01\n"
      "[manifold]\nkind = synthetic_spectrum\nspectrum = powerlaw\ndim = 10\nscale = 1000\n");
  const auto s = run(cfg, std::nullopt);
  EXPECT_EQ(s.phase, Phase::ExplosiveDivergence);
  EXPECT_TRUE(s.seeds[0].halted);
  EXPECT_LT(s.seeds[0].records.back().step, 2000u);
}

TEST(Harness, AsyncRunAddsDisagreementColumn) {
  const auto cfg = small_swiss("[gossip]\ntopology = ring\n");
  auto c = cfg;
  c.set("experiment", "mode", "async");
  const auto out = scratch("async");
  const auto s = run(c, out);
  const auto rows = read_csv(out / "seed_0.csv");
  EXPECT_EQ(rows.front().back(), "disagreement");
  EXPECT_EQ(rows[1].back(), "0");  // shared initialization
  EXPECT_EQ(s.seeds[0].disagreement.size(), s.seeds[0].records.size());
  fs::remove_all(out);
}

TEST(Harness, AveragedOdeModeConvergesToUnitNorm) {
  const auto cfg = parse_config(
      "[experiment]\nmode = averaged_ode\nN = 10\nm = 2\nsteps = 5000\nseeds = 0\n"
      "[manifold]\nkind = synthetic_spectrum\nspectrum = explicit\neigenvalues = 4, 3, 1, 0.5\n"
      "[ode]\nstep = 0.01\n");
  const auto s = run(cfg, std::nullopt);
  EXPECT_NEAR(s.seeds[0].records.back().frob_W, 1.0, 1e-10);
  EXPECT_EQ(s.phase, Phase::StableAlignment);
}

TEST(Harness, GeneratorRepeatedEntryGivesIdenticalMedians) {
  const auto cfg = parse_config(
      "[experiment]\nN = 10\nm = 1\nseeds = 0,1,2\n[manifold]\nkind = circle\n"
      "[generator]\nschedule = 400:0.4, 400:0.4\n");
  const auto out = scratch("gen");
  const auto g = generator_test(cfg, out);
  ASSERT_EQ(g.entries.size(), 2u);
  EXPECT_EQ(g.entries[0].median, g.entries[1].median);
  EXPECT_FALSE(g.warnings.empty());  // non-increasing scaling diagnostic
  EXPECT_EQ(read_csv(out / "generator.csv").size(), 3u);
  fs::remove_all(out);
}

TEST(Harness, GeneratorNeedsAnalyticTestFunction) {
  const auto cfg = parse_config("[experiment]\nN = 10\nm = 1\n[manifold]\nkind = torus\n");
  EXPECT_THROW(generator_test(cfg, std::nullopt), ConfigError);
}

TEST(Harness, UnwritableOutputIsAnIoError) {
  EXPECT_THROW(run(small_swiss("[experiment]\n"), fs::path("/proc/dcrl_cannot_write")), IoError);
}
