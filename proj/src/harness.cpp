#include "dcrl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <unistd.h>

#include "dcrl/dynamics.hpp"
#include "dcrl/error.hpp"
#include "dcrl/gossip.hpp"
#include "dcrl/substrate.hpp"
#include "json.hpp"

namespace dcrl {

using nlohmann::ordered_json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int severity(Phase p) {
  switch (p) {
    case Phase::StableAlignment: return 0;
    case Phase::StochasticOscillation: return 1;
    case Phase::ExplosiveDivergence: return 2;
  }
  return 0;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

ordered_json stat(const std::vector<double>& v) {
  const auto [m, s] = mean_std(v);
  return {{"mean", m}, {"std", s}};
}

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : c.values) j[k] = v;
  return j;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string seed_csv(const SeedRun& run, std::size_t m) {
  std::string out = MetricsRecord::csv_header(m);
  const bool async = !run.disagreement.empty();
  if (async) out += ",disagreement";
  out += "\n";
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    out += run.records[i].csv_row();
    if (async) {
      char buf[32];
      std::snprintf(buf, sizeof buf, ",%.17g", run.disagreement[i]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

SeedRun run_sync_seed(const ExperimentConfig& c, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  SeedRun run;
  run.seed = seed;
  SeededRng rng(seed);
  Swarm swarm = sample_uniform(c.manifold, c.agents, rng);
  Matrix w = random_weights(rng, c.latent_dim, c.manifold.ambient_dim, c.init_scale);
  run.initial_positions = swarm.positions;
  const auto& dyn = c.dynamics;
  const std::size_t steps = dyn.steps;

  run.records.push_back(compute_metrics(0, second_moment(swarm.positions), w, dyn.lambda_reg, 0.0));
  double dv_max = -INFINITY;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double v0 = lyapunov(w);
    run.projection_failures += coupled_step(swarm, w, dyn, rng).projection_failures;
    const double dv = lyapunov(w) - v0;
    dv_max = std::isnan(dv) ? INFINITY : std::max(dv_max, dv);
    const bool blown = diverged(w) || !swarm.positions.all_finite();
    if (blown || is_record_step(k, c.metrics_every, steps)) {
      run.records.push_back(compute_metrics(k, second_moment(swarm.positions), w, dyn.lambda_reg, dv_max));
      dv_max = -INFINITY;
    }
    if (blown) {
      run.halted = true;
      break;
    }
  }
  run.final_positions = swarm.positions;
  run.final_w = w;
  run.stationarity = w.all_finite() && swarm.positions.all_finite()
                         ? stationarity_residual(w, second_moment(swarm.positions))
                         : std::nan("");
  run.phase = classify_phase(run.records, steps, run.halted);
  run.wall_seconds = seconds_since(t0);
  return run;
}

GossipTopology make_topology(const ExperimentConfig& c) {
  switch (c.topology) {
    case TopologyKind::Ring: return ring_topology(c.agents);
    case TopologyKind::Complete: return complete_topology(c.agents);
    case TopologyKind::RandomRegular: {
      SeededRng trng(c.topology_seed);
      return random_regular_topology(c.agents, c.topology_degree, trng);
    }
    case TopologyKind::Custom: break;
  }
  throw ConfigError("unsupported gossip topology");
}

SeedRun run_async_seed(const ExperimentConfig& c, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  SeedRun run;
  run.seed = seed;
  const GossipTopology topo = make_topology(c);
  SeededRng rng(seed);
  ReplicaSet replicas;
  replicas.swarm = sample_uniform(c.manifold, c.agents, rng);
  run.initial_positions = replicas.swarm.positions;
  const Matrix w0 = random_weights(rng, c.latent_dim, c.manifold.ambient_dim, c.init_scale);
  for (std::size_t i = 0; i < c.agents; ++i)
    replicas.weights.push_back(c.shared_init || i == 0 ? w0
                                                       : random_weights(rng, c.latent_dim, c.manifold.ambient_dim,
                                                                        c.init_scale));
  AsyncRun ar = run_async(std::move(replicas), topo, c.dynamics, rng, c.dynamics.steps, c.metrics_every);
  for (auto& r : ar.records) {
    run.records.push_back(r.metrics);
    run.disagreement.push_back(r.disagreement);
  }
  run.halted = ar.halted;
  run.projection_failures = ar.projection_failures;
  run.final_positions = ar.replicas.swarm.positions;
  run.final_w = ar.replicas.mean();
  run.stationarity = run.final_w.all_finite() ? stationarity_residual(run.final_w, second_moment(run.final_positions))
                                              : std::nan("");
  run.phase = classify_phase(run.records, c.dynamics.steps, run.halted);
  run.wall_seconds = seconds_since(t0);
  return run;
}

SeedRun run_ode_seed(const ExperimentConfig& c, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  SeedRun run;
  run.seed = seed;
  SeededRng rng(seed);
  Matrix sigma;
  if (c.manifold.curved()) {
    const Swarm sample = sample_uniform(c.manifold, c.agents, rng);
    run.initial_positions = sample.positions;
    sigma = second_moment(sample.positions);
  } else {
    sigma = c.manifold.population_covariance();
  }
  Matrix w = random_weights(rng, c.latent_dim, c.manifold.ambient_dim, c.init_scale);
  const auto& dyn = c.dynamics;
  const std::size_t steps = dyn.steps;
  run.records.push_back(compute_metrics(0, sigma, w, dyn.lambda_reg, 0.0));
  double dv_max = -INFINITY;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double v0 = lyapunov(w);
    w = rk4_step(w, sigma, dyn.gamma, c.ode_step);
    const double dv = lyapunov(w) - v0;
    dv_max = std::isnan(dv) ? INFINITY : std::max(dv_max, dv);
    const bool blown = diverged(w);
    if (blown || is_record_step(k, c.metrics_every, steps)) {
      run.records.push_back(compute_metrics(k, sigma, w, dyn.lambda_reg, dv_max));
      dv_max = -INFINITY;
    }
    if (blown) {
      run.halted = true;
      break;
    }
  }
  run.final_w = w;
  run.stationarity = w.all_finite() ? stationarity_residual(w, sigma) : std::nan("");
  run.phase = classify_phase(run.records, steps, run.halted);
  run.wall_seconds = seconds_since(t0);
  return run;
}

RunSummary summarize(const ExperimentConfig& c, std::vector<SeedRun> seeds, double wall) {
  RunSummary s;
  s.config_hash = c.hash_hex();
  s.warnings = c.warnings;
  s.seeds = std::move(seeds);
  for (const auto& r : s.seeds) {
    if (severity(r.phase) > severity(s.phase)) s.phase = r.phase;
    if (r.projection_failures > 0)
      s.warnings.push_back("seed " + std::to_string(r.seed) + ": " + std::to_string(r.projection_failures) +
                           " retractions failed; agents kept their previous positions");
    if (!r.records.empty() && r.records.back().rank_warning)
      s.warnings.push_back("seed " + std::to_string(r.seed) + ": W is numerically rank deficient; sin_theta set to 1");
  }

  const std::size_t m = c.latent_dim;
  ordered_json metrics = ordered_json::object();
  auto collect = [&](const std::string& name, auto getter) {
    std::vector<double> v;
    for (const auto& r : s.seeds) v.push_back(getter(r));
    metrics[name] = stat(v);
  };
  collect("V", [](const SeedRun& r) { return r.records.back().V; });
  collect("E", [](const SeedRun& r) { return r.records.back().E; });
  collect("frob_W", [](const SeedRun& r) { return r.records.back().frob_W; });
  collect("sin_theta", [](const SeedRun& r) { return r.records.back().sin_theta; });
  collect("ortho_error", [](const SeedRun& r) { return r.records.back().ortho_error; });
  collect("eff_rank", [](const SeedRun& r) { return r.records.back().eff_rank; });
  collect("noise_proj", [](const SeedRun& r) { return r.records.back().noise_proj; });
  for (std::size_t i = 0; i < m; ++i)
    collect("latent_eig_" + std::to_string(i + 1), [i](const SeedRun& r) { return r.records.back().latent_eigs[i]; });
  collect("tail_max_dV", [&](const SeedRun& r) { return tail_max_dv(r.records, c.dynamics.steps); });
  if (!s.seeds.empty() && !s.seeds.front().disagreement.empty())
    collect("disagreement", [](const SeedRun& r) { return r.disagreement.back(); });

  ordered_json per_seed = ordered_json::array();
  for (const auto& r : s.seeds) {
    per_seed.push_back({{"seed", r.seed},
                        {"phase", to_string(r.phase)},
                        {"halted", r.halted},
                        {"final_step", r.records.back().step},
                        {"tail_max_dV", tail_max_dv(r.records, c.dynamics.steps)},
                        {"stationarity_residual", r.stationarity},
                        {"projection_failures", r.projection_failures},
                        {"wall_seconds", r.wall_seconds}});
  }
  ordered_json seeds_json = ordered_json::array();
  for (const auto& r : s.seeds) seeds_json.push_back(r.seed);

  ordered_json j;
  j["config_hash"] = s.config_hash;
  j["mode"] = to_string(c.mode);
  j["seeds"] = seeds_json;
  j["phase"] = to_string(s.phase);
  j["metrics"] = metrics;
  j["per_seed"] = per_seed;
  j["warnings"] = s.warnings;
  j["wall_seconds"] = wall;
  j["config"] = config_json(c);
  s.json = j.dump(2);
  return s;
}

void write_run(const RunSummary& s, const ExperimentConfig& c, const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory '" + out.string() + "': " + ec.message());
  for (const auto& r : s.seeds)
    write_atomic(out / ("seed_" + std::to_string(r.seed) + ".csv"), seed_csv(r, c.latent_dim));
  write_atomic(out / "summary.json", s.json + "\n");
}

ExperimentConfig with_mode(ExperimentConfig c, Mode mode) {
  c.set("experiment", "mode", to_string(mode));
  return c;
}

}  // namespace

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::StableAlignment: return "StableAlignment";
    case Phase::StochasticOscillation: return "StochasticOscillation";
    case Phase::ExplosiveDivergence: return "ExplosiveDivergence";
  }
  return "unknown";
}

double tail_max_dv(const std::vector<MetricsRecord>& records, std::size_t steps) {
  const std::size_t start = tail_start(steps);
  double worst = -INFINITY;
  for (const auto& r : records)
    if (r.step > start) worst = std::isnan(r.dV) ? INFINITY : std::max(worst, r.dV);
  return worst;
}

Phase classify_phase(const std::vector<MetricsRecord>& records, std::size_t steps, bool halted) {
  if (halted) return Phase::ExplosiveDivergence;
  for (const auto& r : records)
    if (!(r.V <= kExplosiveV)) return Phase::ExplosiveDivergence;
  const double tail = tail_max_dv(records, steps);
  if (tail > kExplosiveV) return Phase::ExplosiveDivergence;
  if (tail > kStableSlack) return Phase::StochasticOscillation;
  return Phase::StableAlignment;
}

SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  switch (config.mode) {
    case Mode::Synchronous:
    case Mode::Sweep: return run_sync_seed(config, seed);
    case Mode::Async: return run_async_seed(config, seed);
    case Mode::AveragedOde: return run_ode_seed(config, seed);
    case Mode::GeneratorTest: break;
  }
  throw ConfigError("generator_test mode has no per-seed trajectory; use generator_test()");
}

RunSummary run(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out) {
  if (config.mode == Mode::GeneratorTest) {
    const auto g = generator_test(config, out);
    RunSummary s;
    s.config_hash = g.config_hash;
    s.warnings = g.warnings;
    s.json = g.json;
    return s;
  }
  if (config.mode == Mode::Sweep) {
    const auto sw = sweep(config, config.ratios, out);
    RunSummary s;
    s.config_hash = config.hash_hex();
    s.warnings = config.warnings;
    for (const auto& r : sw.runs)
      if (severity(r.phase) > severity(s.phase)) s.phase = r.phase;
    s.json = sw.json;
    return s;
  }
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<SeedRun> seeds;
  for (auto seed : config.seeds) seeds.push_back(run_seed(config, seed));
  RunSummary s = summarize(config, std::move(seeds), seconds_since(t0));
  if (out) write_run(s, config, *out);
  return s;
}

SweepResult sweep(const ExperimentConfig& config, const std::vector<double>& ratios,
                  const std::optional<std::filesystem::path>& out) {
  if (ratios.empty()) throw ConfigError("sweep needs at least one ratio");
  SweepResult res;
  res.ratios = ratios;
  ordered_json runs = ordered_json::array();
  for (double r : ratios) {
    ExperimentConfig c = with_mode(config, Mode::Synchronous);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", r * config.dynamics.eta_x);
    c.set("dynamics", "eta_w", buf);
    std::optional<std::filesystem::path> sub;
    if (out) sub = *out / ("ratio_" + fmt_short(r));
    res.runs.push_back(run(c, sub));
    const auto& s = res.runs.back();
    std::vector<double> tails;
    for (const auto& sr : s.seeds) tails.push_back(tail_max_dv(sr.records, c.dynamics.steps));
    runs.push_back({{"ratio", r},
                    {"eta_w", c.dynamics.eta_w},
                    {"config_hash", s.config_hash},
                    {"phase", to_string(s.phase)},
                    {"tail_max_dV", stat(tails)},
                    {"summary", ordered_json::parse(s.json)}});
  }
  ordered_json j;
  j["config_hash"] = config.hash_hex();
  j["seeds"] = config.seeds;
  j["runs"] = runs;
  j["warnings"] = config.warnings;
  res.json = j.dump(2);
  if (out) write_atomic(*out / "sweep.json", res.json + "\n");
  return res;
}

AblationResult ablation(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out) {
  AblationResult res;
  const ExperimentConfig base = with_mode(config, Mode::Synchronous);
  ExperimentConfig ode = base;
  ode.set("dynamics", "eta_x", "0");
  ode.set("dynamics", "D", "0");
  ExperimentConfig sde = base;
  sde.set("dynamics", "eta_w", "0");
  auto sub = [&](const char* name) -> std::optional<std::filesystem::path> {
    if (!out) return std::nullopt;
    return *out / name;
  };
  res.coupled = run(base, sub("coupled"));
  res.ode_only = run(ode, sub("ode_only"));
  res.sde_only = run(sde, sub("sde_only"));

  auto regime = [](const RunSummary& s) {
    std::vector<double> ortho, rank, frob;
    for (const auto& r : s.seeds) {
      ortho.push_back(r.records.back().ortho_error);
      rank.push_back(r.records.back().eff_rank);
      frob.push_back(r.records.back().frob_W);
    }
    return ordered_json{{"config_hash", s.config_hash},
                        {"phase", to_string(s.phase)},
                        {"ortho_error", stat(ortho)},
                        {"eff_rank", stat(rank)},
                        {"frob_W", stat(frob)}};
  };
  ordered_json j;
  j["config_hash"] = base.hash_hex();
  j["seeds"] = base.seeds;
  j["regimes"] = {{"coupled", regime(res.coupled)}, {"ode_only", regime(res.ode_only)},
                  {"sde_only", regime(res.sde_only)}};
  res.json = j.dump(2);
  if (out) write_atomic(*out / "ablation.json", res.json + "\n");
  return res;
}

GeneratorResult generator_test(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out) {
  if (config.schedule.empty()) throw ConfigError("'generator.schedule' is empty");
  ScalarField f;
  if (config.test_function == "circle_cosine") {
    if (config.manifold.kind != ManifoldKind::Circle) throw ConfigError("circle_cosine needs a circle manifold");
    f = circle_cosine(config.manifold.radius);
  } else if (config.test_function == "sphere_height") {
    if (config.manifold.kind != ManifoldKind::Sphere) throw ConfigError("sphere_height needs a sphere manifold");
    f = sphere_height(config.manifold.radius);
  } else {
    throw ConfigError("generator test needs a circle or sphere manifold with an analytic test function");
  }
  const ScalarField zero = constant_field(0.0);
  const std::size_t d = config.manifold.intrinsic_dim;

  GeneratorResult res;
  res.config_hash = config.hash_hex();
  res.warnings = config.warnings;
  double prev_diag = -INFINITY;
  for (const auto& e : config.schedule) {
    GeneratorEntryResult er;
    er.entry = e;
    er.diagnostic = scaling_diagnostic(static_cast<double>(e.agents), e.epsilon, d);
    if (!(er.diagnostic > prev_diag))
      res.warnings.push_back("schedule entry (" + std::to_string(e.agents) + ", " + fmt_short(e.epsilon) +
                             ") does not increase the scaling diagnostic");
    prev_diag = er.diagnostic;
    for (auto seed : config.seeds) {
      SeededRng rng(seed);
      const Swarm sw = sample_uniform(config.manifold, e.agents, rng);
      const GeometricGraph g = build_graph(sw, e.epsilon);
      er.isolated.push_back(g.isolated_count());
      if (g.isolated_count() > 0) {
        er.errors.push_back(INFINITY);
        continue;
      }
      const auto std_pot = std::vector<double>(sw.size(), 0.0);
      const GibbsChain chain = build_chain(g, std_pot, config.dynamics.beta, config.dynamics.diffusion, d);
      er.errors.push_back(generator_sup_error(chain, f, zero, config.dynamics.diffusion, config.dynamics.beta, sw));
    }
    er.median = median(er.errors);
    if (*std::max_element(er.isolated.begin(), er.isolated.end()) > 0)
      res.warnings.push_back("schedule entry (" + std::to_string(e.agents) + ", " + fmt_short(e.epsilon) +
                             ") produced isolated nodes (graph shattering)");
    res.entries.push_back(std::move(er));
  }

  std::string csv = "N,epsilon,diagnostic,median_sup_error,max_isolated";
  for (auto s : config.seeds) csv += ",sup_error_seed_" + std::to_string(s);
  csv += "\n";
  ordered_json entries = ordered_json::array();
  for (const auto& er : res.entries) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%zu", er.entry.agents, er.entry.epsilon, er.diagnostic,
                  er.median, *std::max_element(er.isolated.begin(), er.isolated.end()));
    csv += buf;
    for (double v : er.errors) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      csv += buf;
    }
    csv += "\n";
    ordered_json errs = ordered_json::array();
    for (double v : er.errors) errs.push_back(std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr));
    entries.push_back({{"N", er.entry.agents},
                       {"epsilon", er.entry.epsilon},
                       {"diagnostic", er.diagnostic},
                       {"median_sup_error", std::isfinite(er.median) ? ordered_json(er.median) : ordered_json(nullptr)},
                       {"sup_errors", errs},
                       {"isolated", er.isolated}});
  }
  ordered_json j;
  j["config_hash"] = res.config_hash;
  j["mode"] = "generator_test";
  j["seeds"] = config.seeds;
  j["phase"] = nullptr;
  j["entries"] = entries;
  j["warnings"] = res.warnings;
  j["config"] = config_json(config);
  res.json = j.dump(2);
  if (out) {
    std::error_code ec;
    std::filesystem::create_directories(*out, ec);
    if (ec) throw IoError("cannot create output directory '" + out->string() + "': " + ec.message());
    write_atomic(*out / "generator.csv", csv);
    write_atomic(*out / "summary.json", res.json + "\n");
  }
  return res;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp + "' for writing");
    f << content;
    f.flush();
    if (!f) throw IoError("failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace dcrl
