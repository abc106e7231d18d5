#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dcrl/dcrl.h"

namespace {

int exit_code(dcrl_status st) {
  switch (st) {
    case DCRL_OK: return 0;
    case DCRL_ERR_CONFIG: return 1;
    case DCRL_ERR_IO: return 2;
    default: return 3;
  }
}

int report(dcrl_status st) {
  if (st != DCRL_OK) std::fprintf(stderr, "error: %s\n", dcrl_last_error());
  return exit_code(st);
}

int finish(dcrl_status st, dcrl_result* result, bool quiet) {
  if (st != DCRL_OK) return report(st);
  for (size_t i = 0; i < dcrl_result_warning_count(result); ++i)
    std::fprintf(stderr, "warning: %s\n", dcrl_result_warning(result, i));
  if (!quiet) std::printf("%s\n", dcrl_result_json(result));
  dcrl_result_free(result);
  return 0;
}

struct Common {
  std::string config;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
  cmd->add_option("--config", c.config, "Experiment config file")->required();
  auto* out = cmd->add_option("--out", c.out, "Output directory");
  if (out_required) out->required();
  cmd->add_flag("--quiet,-q", c.quiet, "Do not print the JSON summary");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized coupled representation learning simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dcrl_version());

  Common run_opts, sweep_opts, abl_opts, gen_opts, gossip_opts;
  std::vector<std::string> seeds;
  std::string ratios;

  auto* run = app.add_subcommand("run", "Run the configured experiment for every seed");
  add_common(run, run_opts, true);
  run->add_option("--seed", seeds, "Run only this seed (repeatable)");

  auto* sweep = app.add_subcommand("sweep", "Timescale-ratio sweep (eta_w = ratio * eta_x)");
  add_common(sweep, sweep_opts, false);
  sweep->add_option("--ratios", ratios, "Comma-separated ratios; defaults to sweep.ratios");

  auto* abl = app.add_subcommand("ablation", "Coupled, ODE-only and SDE-only regimes");
  add_common(abl, abl_opts, false);

  auto* gen = app.add_subcommand("generator-test", "Sup error of the discrete generator over a schedule");
  add_common(gen, gen_opts, false);

  auto* gossip = app.add_subcommand("gossip", "Asynchronous gossip run");
  add_common(gossip, gossip_opts, false);

  CLI11_PARSE(app, argc, argv);

  auto load = [](const Common& c, dcrl_config** cfg) {
    const dcrl_status st = dcrl_config_load(c.config.c_str(), cfg);
    if (st == DCRL_OK)
      for (size_t i = 0; i < dcrl_config_warning_count(*cfg); ++i)
        std::fprintf(stderr, "warning: %s\n", dcrl_config_warning(*cfg, i));
    return st;
  };
  auto out_dir = [](const Common& c) { return c.out.empty() ? nullptr : c.out.c_str(); };

  dcrl_config* cfg = nullptr;
  dcrl_result* result = nullptr;
  int code = 0;
  if (*run) {
    if (auto st = load(run_opts, &cfg); st != DCRL_OK) return report(st);
    if (!seeds.empty()) {
      std::string joined;
      for (const auto& s : seeds) joined += (joined.empty() ? "" : ",") + s;
      if (auto st = dcrl_config_set(cfg, "experiment", "seeds", joined.c_str()); st != DCRL_OK) {
        dcrl_config_free(cfg);
        return report(st);
      }
    }
    code = finish(dcrl_run(cfg, out_dir(run_opts), &result), result, run_opts.quiet);
  } else if (*sweep) {
    if (auto st = load(sweep_opts, &cfg); st != DCRL_OK) return report(st);
    std::vector<double> r;
    if (!ratios.empty()) {
      std::stringstream ss(ratios);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          std::size_t used = 0;
          r.push_back(std::stod(item, &used));
          if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
          std::fprintf(stderr, "error: invalid ratio '%s'\n", item.c_str());
          dcrl_config_free(cfg);
          return 1;
        }
      }
    }
    code = finish(dcrl_sweep(cfg, r.data(), r.size(), out_dir(sweep_opts), &result), result, sweep_opts.quiet);
  } else if (*abl) {
    if (auto st = load(abl_opts, &cfg); st != DCRL_OK) return report(st);
    code = finish(dcrl_ablation(cfg, out_dir(abl_opts), &result), result, abl_opts.quiet);
  } else if (*gen) {
    if (auto st = load(gen_opts, &cfg); st != DCRL_OK) return report(st);
    code = finish(dcrl_generator_test(cfg, out_dir(gen_opts), &result), result, gen_opts.quiet);
  } else if (*gossip) {
    if (auto st = load(gossip_opts, &cfg); st != DCRL_OK) return report(st);
    code = finish(dcrl_gossip(cfg, out_dir(gossip_opts), &result), result, gossip_opts.quiet);
  }
  dcrl_config_free(cfg);
  return code;
}
