#include <gtest/gtest.h>

#include "dcrl/config.hpp"
#include "dcrl/error.hpp"

using namespace dcrl;

namespace {

const char* kMinimal =
    "[experiment]\n"
    "N = 500\n"
    "m = 2\n"
    "[manifold]\n"
    "kind = swiss_roll\n";

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_text(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalConfigFillsDocumentedDefaults) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.mode, Mode::Synchronous);
  EXPECT_EQ(c.agents, 500u);
  EXPECT_EQ(c.latent_dim, 2u);
  EXPECT_EQ(c.dynamics.steps, 15000u);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(c.dynamics.eta_x, 1e-4);
  EXPECT_DOUBLE_EQ(c.dynamics.eta_w, 1e-5);
  EXPECT_DOUBLE_EQ(c.dynamics.diffusion, 0.5);
  EXPECT_EQ(c.manifold.kind, ManifoldKind::SwissRoll);
  EXPECT_DOUBLE_EQ(c.manifold.height, 21.0);
  EXPECT_TRUE(c.warnings.empty());
  // Every echoed key is either a documented default or its resolved value.
  for (const auto& [k, v] : config_defaults()) EXPECT_TRUE(c.values.count(k)) << k;
  EXPECT_NE(c.echo().find("dynamics.eta_x = 1e-04\n"), std::string::npos);
  EXPECT_NE(c.echo().find("experiment.steps = 15000\n"), std::string::npos);
}

TEST(Config, MissingRequiredFieldIsNamed) {
  EXPECT_NE(error_text("[experiment]\nN = 5\n[manifold]\nkind = circle\n").find("experiment.m"), std::string::npos);
  EXPECT_NE(error_text("[experiment]\nN = 5\nm = 1\n").find("manifold.kind"), std::string::npos);
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("[experiment]\nN = 5\nthis line is wrong\n"), 3);
  EXPECT_EQ(error_line("N = 5\n"), 1);
  EXPECT_EQ(error_line("[experiment\n"), 1);
  EXPECT_EQ(error_line("[nonsense]\n"), 1);
  EXPECT_EQ(error_line("[experiment]\n\n# comment\nbogus = 1\n"), 4);
  EXPECT_EQ(error_line("[experiment]\nN = 5\nN = 6\n"), 3);
}

TEST(Config, InvalidValuesAreRejected) {
  const std::string base = kMinimal;
  EXPECT_THROW(parse_config(base + "[dynamics]\neta_x = fast\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[dynamics]\nD = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("[experiment]\nN = 5\nm = 4\n[manifold]\nkind = circle\n"), ConfigError);
  EXPECT_THROW(parse_config("[experiment]\nN = 5\nm = 1\nseeds =\n[manifold]\nkind = circle\n"), ConfigError);
  EXPECT_THROW(parse_config("[experiment]\nN = 5\nm = 1\n[manifold]\nkind = klein\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[gossip]\ninit = sometimes\n"), ConfigError);
}

TEST(Config, FastPlasticityWarns) {
  const auto c = parse_config(std::string(kMinimal) + "[dynamics]\neta_w = 1.5e-4\n");
  ASSERT_EQ(c.warnings.size(), 1u);
  EXPECT_NE(c.warnings[0].find("eta_w > eta_x"), std::string::npos);
}

TEST(Config, SweepRatiosScheduleThreeRuns) {
  const auto c = parse_config(std::string(kMinimal) + "[sweep]\nratios = 1.5, 0.05, 0.001\n");
  EXPECT_EQ(c.ratios, (std::vector<double>{1.5, 0.05, 0.001}));
}

TEST(Config, HashIsCanonical) {
  const auto a = parse_config(kMinimal);
  const auto b = parse_config("# same thing\n[manifold]\nkind = swiss_roll\n[experiment]\nm = 2\nN = 500\n"
                              "[dynamics]\neta_x = 0.00010\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash_hex().size(), 16u);
  auto c = a;
  c.set("dynamics", "eta_w", "2e-5");
  EXPECT_NE(c.hash(), a.hash());
  EXPECT_DOUBLE_EQ(c.dynamics.eta_w, 2e-5);
  EXPECT_THROW(c.set("dynamics", "nope", "1"), ConfigError);
  EXPECT_THROW(c.set("dynamics", "eta_w", "x"), ConfigError);
  EXPECT_DOUBLE_EQ(c.dynamics.eta_w, 2e-5);
}

TEST(Config, SyntheticSpectrumShapes) {
  const auto p = parse_config(
      "[experiment]\nN = 10\nm = 3\n[manifold]\nkind = synthetic_spectrum\nspectrum = explicit\n"
      "eigenvalues = 4, 3, 1\n");
  EXPECT_EQ(p.manifold.spectrum, (std::vector<double>{4, 3, 1}));
  EXPECT_EQ(p.values.at("manifold.dim"), "3");
  const auto q = parse_config(
      "[experiment]\nN = 10\nm = 3\n[manifold]\nkind = synthetic_spectrum\nspectrum = powerlaw\ndim = 20\n"
      "scale = 30000\n");
  EXPECT_EQ(q.manifold.ambient_dim, 20u);
  EXPECT_DOUBLE_EQ(q.manifold.spectrum[1], 15000.0);
}

TEST(Config, GeneratorScheduleAndFunction) {
  const auto c = parse_config("[experiment]\nN = 10\nm = 1\n[manifold]\nkind = circle\n");
  ASSERT_EQ(c.schedule.size(), 3u);
  EXPECT_EQ(c.schedule[2].agents, 8000u);
  EXPECT_DOUBLE_EQ(c.schedule[2].epsilon, 0.2);
  EXPECT_EQ(c.test_function, "circle_cosine");
  EXPECT_THROW(parse_config("[experiment]\nN = 10\nm = 1\n[manifold]\nkind = circle\n[generator]\nschedule = 5\n"),
               ConfigError);
}

TEST(Config, MissingFileIsAnIoError) { EXPECT_THROW(load_config("/nonexistent/dcrl.ini"), IoError); }
