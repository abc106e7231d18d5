#include "dcrl/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dcrl/error.hpp"

namespace dcrl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size() || !std::isfinite(v))
    throw ConfigError("invalid number '" + text + "' for '" + key + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size())
    throw ConfigError("invalid non-negative integer '" + text + "' for '" + key + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean '" + text + "' for '" + key + "'");
}

const std::set<std::string>& required_keys() {
  static const std::set<std::string> keys{"experiment.N", "experiment.m", "manifold.kind"};
  return keys;
}

// Keys whose values are numbers (canonicalized to the shortest round-trip form).
const std::set<std::string>& real_keys() {
  static const std::set<std::string> keys{
      "experiment.init_scale", "dynamics.eta_x",        "dynamics.eta_w",     "dynamics.D",
      "dynamics.beta",         "dynamics.gamma",        "dynamics.lambda",    "manifold.radius",
      "manifold.major_radius", "manifold.minor_radius", "manifold.height",    "manifold.half_width",
      "manifold.scale",        "manifold.alpha",        "manifold.high",      "manifold.low",
      "ode.step"};
  return keys;
}

const std::set<std::string>& uint_keys() {
  static const std::set<std::string> keys{"experiment.N",     "experiment.m",           "experiment.steps",
                                          "experiment.metrics_every", "manifold.dim", "manifold.plateau_size",
                                          "manifold.rotation_seed",   "gossip.degree", "gossip.topology_seed"};
  return keys;
}

std::string canonical_real_list(const std::string& key, const std::string& text) {
  std::string out;
  for (const auto& item : split_list(text)) {
    if (!out.empty()) out += ",";
    out += format_double(parse_double(key, item));
  }
  return out;
}

void resolve(ExperimentConfig& c) {
  auto& v = c.values;
  for (const auto& k : required_keys())
    if (trim(v[k]).empty()) throw ConfigError("missing required field '" + k + "'");

  for (const auto& k : real_keys())
    if (!v[k].empty()) v[k] = format_double(parse_double(k, v[k]));
  for (const auto& k : uint_keys()) v[k] = std::to_string(parse_uint(k, v[k]));

  c.warnings.clear();
  c.mode = mode_from_string(v["experiment.mode"]);
  c.agents = parse_uint("experiment.N", v["experiment.N"]);
  c.latent_dim = parse_uint("experiment.m", v["experiment.m"]);
  const auto steps = parse_uint("experiment.steps", v["experiment.steps"]);
  c.metrics_every = parse_uint("experiment.metrics_every", v["experiment.metrics_every"]);
  c.init_scale = parse_double("experiment.init_scale", v["experiment.init_scale"]);
  if (c.agents < 1) throw ConfigError("'experiment.N' must be at least 1");
  if (c.latent_dim < 1) throw ConfigError("'experiment.m' must be at least 1");
  if (steps < 1) throw ConfigError("'experiment.steps' must be at least 1");
  if (c.metrics_every < 1) throw ConfigError("'experiment.metrics_every' must be at least 1");
  if (!(c.init_scale > 0)) throw ConfigError("'experiment.init_scale' must be positive");

  c.seeds.clear();
  std::string seeds_canon;
  for (const auto& s : split_list(v["experiment.seeds"])) {
    c.seeds.push_back(parse_uint("experiment.seeds", s));
    seeds_canon += (seeds_canon.empty() ? "" : ",") + std::to_string(c.seeds.back());
  }
  if (c.seeds.empty()) throw ConfigError("'experiment.seeds' must list at least one seed");
  v["experiment.seeds"] = seeds_canon;

  c.dynamics.eta_x = parse_double("dynamics.eta_x", v["dynamics.eta_x"]);
  c.dynamics.eta_w = parse_double("dynamics.eta_w", v["dynamics.eta_w"]);
  c.dynamics.diffusion = parse_double("dynamics.D", v["dynamics.D"]);
  c.dynamics.beta = parse_double("dynamics.beta", v["dynamics.beta"]);
  c.dynamics.gamma = parse_double("dynamics.gamma", v["dynamics.gamma"]);
  c.dynamics.lambda_reg = parse_double("dynamics.lambda", v["dynamics.lambda"]);
  c.dynamics.noise = parse_bool("dynamics.noise", v["dynamics.noise"]);
  c.dynamics.steps = steps;
  try {
    c.dynamics.validate();
  } catch (const InputError& e) {
    throw ConfigError(std::string("dynamics: ") + e.what());
  }
  if (c.dynamics.eta_x > 0 && c.dynamics.eta_w > c.dynamics.eta_x)
    c.warnings.push_back("eta_w > eta_x: timescale separation violated (Markovian-violation regime)");

  // Manifold.
  ManifoldKind kind;
  try {
    kind = manifold_kind_from_string(v["manifold.kind"]);
  } catch (const CapabilityError& e) {
    throw ConfigError(std::string("manifold.kind: ") + e.what());
  }
  if (v["manifold.height"].empty()) v["manifold.height"] = kind == ManifoldKind::SwissRoll ? "21" : "2";
  const double height = parse_double("manifold.height", v["manifold.height"]);
  try {
    switch (kind) {
      case ManifoldKind::Circle: c.manifold = ManifoldSpec::circle(parse_double("manifold.radius", v["manifold.radius"])); break;
      case ManifoldKind::Sphere: c.manifold = ManifoldSpec::sphere(parse_double("manifold.radius", v["manifold.radius"])); break;
      case ManifoldKind::SwissRoll: c.manifold = ManifoldSpec::swiss_roll(height); break;
      case ManifoldKind::SCurve: c.manifold = ManifoldSpec::s_curve(height); break;
      case ManifoldKind::Torus:
        c.manifold = ManifoldSpec::torus(parse_double("manifold.major_radius", v["manifold.major_radius"]),
                                         parse_double("manifold.minor_radius", v["manifold.minor_radius"]));
        break;
      case ManifoldKind::MoebiusStrip:
        c.manifold =
            ManifoldSpec::moebius(parse_double("manifold.radius", v["manifold.radius"]), parse_double("manifold.half_width", v["manifold.half_width"]));
        break;
      case ManifoldKind::SyntheticSpectrum: {
        const std::string shape = v["manifold.spectrum"];
        const auto dim = parse_uint("manifold.dim", v["manifold.dim"]);
        std::vector<double> lambda;
        if (shape == "powerlaw") {
          lambda = powerlaw_spectrum(dim, parse_double("manifold.scale", v["manifold.scale"]),
                                     parse_double("manifold.alpha", v["manifold.alpha"]));
        } else if (shape == "plateau") {
          lambda = plateau_spectrum(dim, parse_uint("manifold.plateau_size", v["manifold.plateau_size"]),
                                    parse_double("manifold.high", v["manifold.high"]),
                                    parse_double("manifold.low", v["manifold.low"]));
        } else if (shape == "explicit") {
          v["manifold.eigenvalues"] = canonical_real_list("manifold.eigenvalues", v["manifold.eigenvalues"]);
          for (const auto& s : split_list(v["manifold.eigenvalues"]))
            lambda.push_back(parse_double("manifold.eigenvalues", s));
          if (lambda.empty()) throw ConfigError("'manifold.eigenvalues' is required for an explicit spectrum");
          v["manifold.dim"] = std::to_string(lambda.size());
        } else if (shape == "preset") {
          lambda = preset_spectrum(v["manifold.preset"]);
          v["manifold.dim"] = std::to_string(lambda.size());
        } else {
          throw ConfigError("'manifold.spectrum' must be powerlaw, plateau, explicit or preset");
        }
        if (lambda.empty()) throw ConfigError("'manifold.dim' must be at least 1");
        c.manifold = ManifoldSpec::synthetic_spectrum(
            std::move(lambda), parse_uint("manifold.rotation_seed", v["manifold.rotation_seed"]));
        break;
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("manifold: ") + e.what());
  }
  if (c.latent_dim > c.manifold.ambient_dim)
    throw ConfigError("'experiment.m' exceeds the ambient dimension " + std::to_string(c.manifold.ambient_dim));

  // Sweep.
  v["sweep.ratios"] = canonical_real_list("sweep.ratios", v["sweep.ratios"]);
  c.ratios.clear();
  for (const auto& s : split_list(v["sweep.ratios"])) {
    c.ratios.push_back(parse_double("sweep.ratios", s));
    if (!(c.ratios.back() >= 0)) throw ConfigError("'sweep.ratios' entries must be non-negative");
  }

  // Gossip.
  try {
    c.topology = topology_kind_from_string(v["gossip.topology"]);
  } catch (const CapabilityError& e) {
    throw ConfigError(std::string("gossip.topology: ") + e.what());
  }
  if (c.topology == TopologyKind::Custom) throw ConfigError("'gossip.topology' must be ring, complete or random_regular");
  c.topology_degree = parse_uint("gossip.degree", v["gossip.degree"]);
  c.topology_seed = parse_uint("gossip.topology_seed", v["gossip.topology_seed"]);
  if (v["gossip.init"] != "shared" && v["gossip.init"] != "independent")
    throw ConfigError("'gossip.init' must be shared or independent");
  c.shared_init = v["gossip.init"] == "shared";

  // Averaged ODE.
  c.ode_step = parse_double("ode.step", v["ode.step"]);
  if (!(c.ode_step > 0)) throw ConfigError("'ode.step' must be positive");

  // Generator test.
  c.schedule.clear();
  std::string sched_canon;
  for (const auto& item : split_list(v["generator.schedule"])) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("'generator.schedule' entries must be N:epsilon");
    ScheduleEntry e{parse_uint("generator.schedule", trim(item.substr(0, colon))),
                    parse_double("generator.schedule", trim(item.substr(colon + 1)))};
    if (e.agents < 3 || !(e.epsilon > 0)) throw ConfigError("'generator.schedule' needs N >= 3 and epsilon > 0");
    c.schedule.push_back(e);
    sched_canon += (sched_canon.empty() ? "" : ",") + std::to_string(e.agents) + ":" + format_double(e.epsilon);
  }
  v["generator.schedule"] = sched_canon;
  if (v["generator.function"].empty()) {
    v["generator.function"] = kind == ManifoldKind::Circle   ? "circle_cosine"
                              : kind == ManifoldKind::Sphere ? "sphere_height"
                                                             : "none";
  }
  c.test_function = v["generator.function"];
  if (c.test_function != "circle_cosine" && c.test_function != "sphere_height" && c.test_function != "none")
    throw ConfigError("'generator.function' must be circle_cosine, sphere_height or none");
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Synchronous: return "synchronous";
    case Mode::Async: return "async";
    case Mode::GeneratorTest: return "generator_test";
    case Mode::AveragedOde: return "averaged_ode";
    case Mode::Sweep: return "sweep";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& name) {
  for (auto m : {Mode::Synchronous, Mode::Async, Mode::GeneratorTest, Mode::AveragedOde, Mode::Sweep})
    if (to_string(m) == name) return m;
  throw ConfigError("'experiment.mode' must be synchronous, async, generator_test, averaged_ode or sweep (got '" +
                    name + "')");
}

const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> d{
      {"experiment.mode", "synchronous"},
      {"experiment.N", ""},
      {"experiment.m", ""},
      {"experiment.steps", "15000"},
      {"experiment.seeds", "0,1,2,3,4"},
      {"experiment.metrics_every", "100"},
      {"experiment.init_scale", "0.5"},
      {"dynamics.eta_x", "1e-4"},
      {"dynamics.eta_w", "1e-5"},
      {"dynamics.D", "0.5"},
      {"dynamics.beta", "1"},
      {"dynamics.gamma", "1"},
      {"dynamics.lambda", "1"},
      {"dynamics.noise", "true"},
      {"manifold.kind", ""},
      {"manifold.radius", "1"},
      {"manifold.major_radius", "2"},
      {"manifold.minor_radius", "0.5"},
      {"manifold.height", ""},
      {"manifold.half_width", "0.5"},
      {"manifold.spectrum", "powerlaw"},
      {"manifold.dim", "100"},
      {"manifold.scale", "1"},
      {"manifold.alpha", "1"},
      {"manifold.plateau_size", "3"},
      {"manifold.high", "4"},
      {"manifold.low", "1"},
      {"manifold.eigenvalues", ""},
      {"manifold.preset", "resnet512"},
      {"manifold.rotation_seed", "0"},
      {"sweep.ratios", "1.5,0.05,0.001"},
      {"gossip.topology", "ring"},
      {"gossip.degree", "3"},
      {"gossip.topology_seed", "0"},
      {"gossip.init", "shared"},
      {"ode.step", "1e-3"},
      {"generator.schedule", "500:0.45,2000:0.30,8000:0.20"},
      {"generator.function", ""},
  };
  return d;
}

std::string ExperimentConfig::echo() const {
  std::string out;
  for (const auto& [k, val] : values) out += k + " = " + val + "\n";
  return out;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : echo()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

void ExperimentConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  const std::string full = section + "." + key;
  if (!config_defaults().count(full)) throw ConfigError("unknown key '" + full + "'");
  ExperimentConfig next = *this;
  next.values[full] = trim(value);
  resolve(next);
  *this = std::move(next);
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  c.values = config_defaults();
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash_pos = line.find_first_of("#;");
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& [k, _] : config_defaults())
        if (k.compare(0, section.size() + 1, section + ".") == 0) known = true;
      if (!known) throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'", line_no);
    if (section.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key outside of any [section]", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key", line_no);
    if (!config_defaults().count(full))
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + full + "'", line_no);
    if (!seen.insert(full).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + full + "'", line_no);
    c.values[full] = value;
  }
  resolve(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace dcrl
