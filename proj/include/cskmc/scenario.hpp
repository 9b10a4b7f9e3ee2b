#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "cascade.hpp"
#include "stochastic.hpp"
#include "units.hpp"

namespace cskmc {

struct InputPulse {
  int bit = 0;
  double t_on = 3600.0;
  double duration = 10.0;
  double amplitude = 50.0;  ///< nM/s
};

enum class LayoutKind { Csk, Probe };

/// Single emitter facing one absorbing wall with several tallied surfaces.
struct ProbeSpec {
  Surface emit{0.0, 5.0};
  double distance = 10.0;
  SpeciesId species = "DOX";
  std::vector<std::pair<std::string, Surface>> absorbers{{"Sa1", {0.0, 1.25}}, {"Sa2", {13.75, 15.0}}};
  double molecules = 500.0;  ///< impulse released during the first interval
};

struct DetectionSpec {
  double window = 60.0;
  double sample_offset = 5 * 3600.0;  ///< after the symbol start
  std::vector<double> sample_times;   ///< absolute; empty means symbol start + offset
  double N_d = 1.0;
};

struct BerSpec {
  int bits = 100;
  std::uint64_t seed = 2023;
  std::vector<double> T_b{5 * 3600.0, 10 * 3600.0};
  std::vector<double> N_d{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  double t_first = 3600.0;  ///< start of the first symbol
  double duration = 1800.0;
  double amplitude = 50.0;  ///< nM/s
  double ts = 1.0;
};

struct Scenario {
  std::string name = "custom";
  LayoutKind layout = LayoutKind::Csk;
  int m = 1;
  std::vector<SpeciesId> species_pool{"aCa", "DOX", "aSc"};
  double lane_width = 2.5;
  double unit_emit_area = 15.0;
  ProbeSpec probe;

  ChannelGeometry geometry = default_geometry();
  std::map<SpeciesId, SpeciesParams> species = default_species();
  BlockOptions block;
  std::map<int, double> thresholds;
  DensityModel density;
  double detector_volume = DensityModel{}.volume(15.0);  ///< µm³ used for the count↔nM conversion at sinks

  double ts = 0.01;
  double horizon = 4 * 3600.0;
  std::vector<InputPulse> inputs;

  std::size_t realizations = 200;
  std::uint64_t seed = 1;
  StochasticOptions stochastic;

  DetectionSpec detection;
  BerSpec ber;
  std::string kernel_cache;

  CircuitLayout build_layout() const;
  CascadeParams cascade_params() const;
  std::map<int, SignalTrace> input_traces() const;
  double molecules_per_nM() const { return concentration_to_count(1.0, detector_volume); }
};

inline CircuitLayout Scenario::build_layout() const {
  if (layout == LayoutKind::Csk) {
    SynthesisOptions o;
    o.geometry = geometry;
    o.species_pool = species_pool;
    o.lane_width = lane_width;
    o.unit_emit_area = unit_emit_area;
    return synthesize_layout(m, o);
  }
  CircuitLayout lay;
  lay.m = 1;
  lay.geometry = geometry;
  lay.unit_emit_area = unit_emit_area;
  Population e;
  e.name = "E";
  e.kind = NodeKind::Source;
  e.lane = probe.emit;
  e.output = probe.species;
  e.source_bit = 0;
  std::size_t ev = lay.add(e);
  for (const auto& [name, s] : probe.absorbers) {
    Population a;
    a.name = name;
    a.kind = NodeKind::Sink;
    a.lane = s;
    a.input = probe.species;
    a.x_absorb = probe.distance;
    lay.connect(ev, lay.add(a));
  }
  lay.validate();
  return lay;
}

inline CascadeParams Scenario::cascade_params() const {
  CascadeParams p;
  p.species = species;
  p.block = block;
  p.thresholds = thresholds;
  p.density = density;
  p.ts = ts;
  p.horizon = horizon;
  return p;
}

inline std::map<int, SignalTrace> Scenario::input_traces() const {
  std::map<int, SignalTrace> in;
  auto n = static_cast<std::size_t>(std::llround(horizon / ts));
  if (layout == LayoutKind::Probe) {
    SignalTrace t = SignalTrace::zeros(0.0, ts, n);
    double area = geometry.H * probe.emit.width();
    if (n > 0) t.values[0] = density.concentration(probe.molecules, area) / ts;
    in[0] = t;
    return in;
  }
  for (const auto& p : inputs) {
    auto it = in.find(p.bit);
    if (it == in.end()) it = in.emplace(p.bit, SignalTrace::zeros(0.0, ts, n)).first;
    it->second += rectangular(ts, horizon, p.t_on, p.duration, p.amplitude);
  }
  return in;
}

/// Inputs for one m-bit symbol: every set bit gets the same rectangular pulse.
inline std::vector<InputPulse> symbol_pulses(unsigned symbol, int m, double t_on, double duration, double amplitude) {
  std::vector<InputPulse> v;
  for (int i = 0; i < m; ++i)
    if ((symbol >> i) & 1u) v.push_back({i, t_on, duration, amplitude});
  return v;
}

// ---------------------------------------------------------------- presets

inline Scenario preset(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "fig9") {
    s.layout = LayoutKind::Probe;
    s.ts = 0.01;
    s.horizon = 10.0;
    s.realizations = 20;
    s.stochastic.report_step = 0.05;
    return s;
  }
  if (name == "fig10") {
    s.m = 1;
    s.ts = 0.01;
    s.horizon = 4 * 3600.0;
    s.inputs = {{0, 3600.0, 10.0, 50.0}};
    s.thresholds = {{0, 0.01}};
    s.realizations = 200;
    s.stochastic.report_step = 60.0;
    s.detection.sample_times = {};
    return s;
  }
  if (name == "fig11" || name == "fig12") {
    s.m = 2;
    s.ts = 0.1;
    s.horizon = 12 * 3600.0;
    s.block.beta_scale = 40.0;
    s.thresholds = {{0, 0.1}, {1, 0.45}, {2, 0.7}};
    s.inputs = symbol_pulses(3u, 2, 3600.0, 1800.0, 50.0);
    s.realizations = 20;
    s.stochastic.report_step = 60.0;
    return s;
  }
  if (name == "fig13") {
    s = preset("fig12");
    s.name = name;
    s.ts = s.ber.ts;
    s.inputs.clear();
    return s;
  }
  throw ConfigError("unknown preset '" + name + "' (fig9, fig10, fig11, fig12, fig13)");
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> n{"fig9", "fig10", "fig11", "fig12", "fig13"};
  return n;
}

// ---------------------------------------------------------------- parsing

namespace detail {

inline std::string at(const YAML::Node& n) {
  auto m = n.Mark();
  if (m.is_null()) return "config";
  return "config line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1);
}

inline void allow(const YAML::Node& map, const std::string& section, std::initializer_list<const char*> keys) {
  if (!map.IsMap()) throw ConfigError(at(map) + ": '" + section + "' must be an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = map.begin(); it != map.end(); ++it) {
    auto k = it->first.as<std::string>();
    if (!ok.count(k)) throw ConfigError(at(it->first) + ": unknown key '" + k + "' in '" + section + "'");
  }
}

inline double quantity(const YAML::Node& n, Dim d, const std::string& what) {
  if (!n.IsScalar()) throw ConfigError(at(n) + ": '" + what + "' must be a quantity");
  try {
    return parse_quantity(n.Scalar(), d);
  } catch (const UnitError& e) {
    throw ConfigError(at(n) + ": " + what + ": " + e.what());
  }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(at(n) + ": '" + what + "' has the wrong type");
  }
}

inline std::vector<double> quantities(const YAML::Node& n, Dim d, const std::string& what) {
  if (!n.IsSequence()) throw ConfigError(at(n) + ": '" + what + "' must be a list");
  std::vector<double> v;
  for (const auto& x : n) v.push_back(quantity(x, d, what));
  return v;
}

inline Surface surface(const YAML::Node& n, const std::string& what) {
  auto v = quantities(n, Dim::length, what);
  if (v.size() != 2 || !(v[0] <= v[1])) throw ConfigError(at(n) + ": '" + what + "' must be [y_lo, y_hi]");
  return {v[0], v[1]};
}

inline int threshold_index(const YAML::Node& key) {
  auto k = key.as<std::string>();
  std::string digits = (!k.empty() && (k[0] == 'B' || k[0] == 'b')) ? k.substr(1) : k;
  try {
    std::size_t pos = 0;
    int j = std::stoi(digits, &pos);
    if (pos == digits.size() && j >= 0) return j;
  } catch (const std::exception&) {
  }
  throw ConfigError(at(key) + ": threshold key '" + k + "' is not of the form B<j>");
}

}  // namespace detail

/// Applies a parsed config document on top of `s`.
inline void apply_config(Scenario& s, const YAML::Node& root) {
  using namespace detail;
  allow(root, "root",
        {"name", "preset", "layout", "geometry", "species", "cell", "blocks", "thresholds", "density", "time",
         "inputs", "stochastic", "detection", "ber", "kernel_cache"});
  if (root["name"]) s.name = scalar<std::string>(root["name"], "name");
  if (auto n = root["layout"]) {
    allow(n, "layout", {"kind", "m", "species_pool", "lane_width", "unit_emit_area", "emit", "distance", "species",
                        "absorbers", "molecules"});
    if (n["kind"]) {
      auto k = scalar<std::string>(n["kind"], "layout.kind");
      if (k == "csk") s.layout = LayoutKind::Csk;
      else if (k == "probe") s.layout = LayoutKind::Probe;
      else throw ConfigError(at(n["kind"]) + ": layout.kind must be 'csk' or 'probe'");
    }
    if (n["m"]) {
      s.m = scalar<int>(n["m"], "layout.m");
      if (s.m < 1 || s.m > 8) throw ConfigError(at(n["m"]) + ": layout.m must be in [1, 8]");
    }
    if (n["species_pool"]) s.species_pool = scalar<std::vector<std::string>>(n["species_pool"], "layout.species_pool");
    if (n["lane_width"]) s.lane_width = quantity(n["lane_width"], Dim::length, "layout.lane_width");
    if (n["unit_emit_area"]) s.unit_emit_area = quantity(n["unit_emit_area"], Dim::area, "layout.unit_emit_area");
    if (n["emit"]) s.probe.emit = surface(n["emit"], "layout.emit");
    if (n["distance"]) s.probe.distance = quantity(n["distance"], Dim::length, "layout.distance");
    if (n["species"]) s.probe.species = scalar<std::string>(n["species"], "layout.species");
    if (n["molecules"]) s.probe.molecules = quantity(n["molecules"], Dim::dimensionless, "layout.molecules");
    if (auto a = n["absorbers"]) {
      if (!a.IsMap()) throw ConfigError(at(a) + ": layout.absorbers must map names to [y_lo, y_hi]");
      s.probe.absorbers.clear();
      for (auto it = a.begin(); it != a.end(); ++it)
        s.probe.absorbers.emplace_back(it->first.as<std::string>(), surface(it->second, "layout.absorbers"));
    }
  }
  if (auto g = root["geometry"]) {
    allow(g, "geometry", {"L", "W", "H", "R", "u"});
    if (g["L"]) s.geometry.L = quantities(g["L"], Dim::length, "geometry.L");
    if (g["W"]) s.geometry.W = quantities(g["W"], Dim::length, "geometry.W");
    if (g["H"]) s.geometry.H = quantity(g["H"], Dim::length, "geometry.H");
    if (g["R"]) s.geometry.R = quantity(g["R"], Dim::length, "geometry.R");
    if (g["u"]) s.geometry.u = quantity(g["u"], Dim::velocity, "geometry.u");
    try {
      s.geometry.validate();
    } catch (const std::exception& e) {
      throw ConfigError(at(g) + ": " + e.what());
    }
  }
  if (auto sp = root["species"]) {
    if (!sp.IsMap()) throw ConfigError(at(sp) + ": 'species' must be an object");
    for (auto it = sp.begin(); it != sp.end(); ++it) {
      auto id = it->first.as<std::string>();
      const YAML::Node& q = it->second;
      allow(q, "species." + id, {"beta", "theta", "n", "k_d", "D", "k_a"});
      SpeciesParams p = s.species.count(id) ? s.species[id] : SpeciesParams{};
      if (q["beta"]) p.beta = quantity(q["beta"], Dim::conc_rate, id + ".beta");
      if (q["theta"]) p.theta = quantity(q["theta"], Dim::inv_conc, id + ".theta");
      if (q["n"]) p.n = quantity(q["n"], Dim::dimensionless, id + ".n");
      if (q["k_d"]) p.k_d = quantity(q["k_d"], Dim::rate, id + ".k_d");
      if (q["D"]) p.D = quantity(q["D"], Dim::diffusivity, id + ".D");
      if (q["k_a"]) p.k_a = quantity(q["k_a"], Dim::velocity, id + ".k_a");
      try {
        p.validate(id);
      } catch (const std::exception& e) {
        throw ConfigError(at(q) + ": " + e.what());
      }
      s.species[id] = p;
    }
  }
  if (auto c = root["cell"]) {
    allow(c, "cell", {"eta", "xi", "k_f"});
    if (c["eta"]) s.block.cell.eta = quantity(c["eta"], Dim::dimensionless, "cell.eta");
    if (c["xi"]) s.block.cell.xi = quantity(c["xi"], Dim::rate, "cell.xi");
    if (c["k_f"]) s.block.cell.k_f = quantity(c["k_f"], Dim::bimolecular, "cell.k_f");
  }
  if (auto b = root["blocks"]) {
    allow(b, "blocks", {"not_repression", "repressor", "beta_scale", "prime_threshold", "reaction_step_limit"});
    if (b["not_repression"]) {
      auto v = scalar<std::string>(b["not_repression"], "blocks.not_repression");
      if (v == "output_species") s.block.not_repression = NotRepression::OutputSpecies;
      else if (v == "repressor_row") s.block.not_repression = NotRepression::RepressorRow;
      else throw ConfigError(at(b["not_repression"]) + ": not_repression must be 'output_species' or 'repressor_row'");
    }
    if (b["repressor"]) s.block.repressor = scalar<std::string>(b["repressor"], "blocks.repressor");
    if (b["beta_scale"]) s.block.beta_scale = quantity(b["beta_scale"], Dim::dimensionless, "blocks.beta_scale");
    if (b["prime_threshold"]) s.block.prime_threshold = scalar<bool>(b["prime_threshold"], "blocks.prime_threshold");
    if (b["reaction_step_limit"]) {
      s.block.reaction_step_limit =
          quantity(b["reaction_step_limit"], Dim::dimensionless, "blocks.reaction_step_limit");
      if (s.block.reaction_step_limit < 0) throw ConfigError(at(b["reaction_step_limit"]) + ": must be >= 0");
    }
  }
  if (auto t = root["thresholds"]) {
    if (!t.IsMap()) throw ConfigError(at(t) + ": 'thresholds' must map B<j> to a concentration");
    s.thresholds.clear();
    for (auto it = t.begin(); it != t.end(); ++it)
      s.thresholds[threshold_index(it->first)] = quantity(it->second, Dim::concentration, "thresholds");
  }
  if (auto d = root["density"]) {
    allow(d, "density", {"areal_density", "volume_per_area", "detector_volume"});
    if (d["areal_density"])
      s.density.areal_density = quantity(d["areal_density"], Dim::areal_density, "density.areal_density");
    if (d["volume_per_area"])
      s.density.volume_per_area = quantity(d["volume_per_area"], Dim::length, "density.volume_per_area");
    if (d["detector_volume"])
      s.detector_volume = quantity(d["detector_volume"], Dim::volume, "density.detector_volume");
  }
  if (auto t = root["time"]) {
    allow(t, "time", {"ts", "horizon"});
    if (t["ts"]) s.ts = quantity(t["ts"], Dim::time, "time.ts");
    if (t["horizon"]) s.horizon = quantity(t["horizon"], Dim::time, "time.horizon");
    if (!(s.ts > 0) || !(s.horizon > s.ts)) throw ConfigError(at(t) + ": need 0 < ts < horizon");
  }
  if (auto in = root["inputs"]) {
    if (!in.IsSequence()) throw ConfigError(at(in) + ": 'inputs' must be a list");
    s.inputs.clear();
    for (const auto& p : in) {
      allow(p, "inputs[]", {"bit", "t_on", "duration", "amplitude"});
      InputPulse ip;
      if (p["bit"]) ip.bit = scalar<int>(p["bit"], "inputs.bit");
      if (p["t_on"]) ip.t_on = quantity(p["t_on"], Dim::time, "inputs.t_on");
      if (p["duration"]) ip.duration = quantity(p["duration"], Dim::time, "inputs.duration");
      if (p["amplitude"]) ip.amplitude = quantity(p["amplitude"], Dim::conc_rate, "inputs.amplitude");
      if (ip.bit < 0 || ip.amplitude < 0 || ip.duration < 0)
        throw ConfigError(at(p) + ": input pulse needs bit >= 0 and non-negative amplitude and duration");
      s.inputs.push_back(ip);
    }
  }
  if (auto st = root["stochastic"]) {
    allow(st, "stochastic", {"realizations", "seed", "report_step", "sigma_fraction", "random_initial_residual"});
    if (st["realizations"]) {
      auto r = scalar<long long>(st["realizations"], "stochastic.realizations");
      if (r < 1) throw ConfigError(at(st["realizations"]) + ": realizations must be >= 1");
      s.realizations = static_cast<std::size_t>(r);
    }
    if (st["seed"]) s.seed = scalar<std::uint64_t>(st["seed"], "stochastic.seed");
    if (st["report_step"]) s.stochastic.report_step = quantity(st["report_step"], Dim::time, "stochastic.report_step");
    if (st["sigma_fraction"])
      s.stochastic.sigma_fraction = quantity(st["sigma_fraction"], Dim::dimensionless, "stochastic.sigma_fraction");
    if (st["random_initial_residual"])
      s.stochastic.random_initial_residual = scalar<bool>(st["random_initial_residual"], "stochastic.random_initial_residual");
  }
  if (auto d = root["detection"]) {
    allow(d, "detection", {"window", "sample_offset", "sample_times", "N_d"});
    if (d["window"]) s.detection.window = quantity(d["window"], Dim::time, "detection.window");
    if (d["sample_offset"]) s.detection.sample_offset = quantity(d["sample_offset"], Dim::time, "detection.sample_offset");
    if (d["sample_times"]) s.detection.sample_times = quantities(d["sample_times"], Dim::time, "detection.sample_times");
    if (d["N_d"]) s.detection.N_d = quantity(d["N_d"], Dim::dimensionless, "detection.N_d");
  }
  if (auto b = root["ber"]) {
    allow(b, "ber", {"bits", "seed", "T_b", "N_d", "t_first", "duration", "amplitude", "ts"});
    if (b["bits"]) s.ber.bits = scalar<int>(b["bits"], "ber.bits");
    if (b["seed"]) s.ber.seed = scalar<std::uint64_t>(b["seed"], "ber.seed");
    if (b["T_b"]) s.ber.T_b = quantities(b["T_b"], Dim::time, "ber.T_b");
    if (b["N_d"]) s.ber.N_d = quantities(b["N_d"], Dim::dimensionless, "ber.N_d");
    if (b["t_first"]) s.ber.t_first = quantity(b["t_first"], Dim::time, "ber.t_first");
    if (b["duration"]) s.ber.duration = quantity(b["duration"], Dim::time, "ber.duration");
    if (b["amplitude"]) s.ber.amplitude = quantity(b["amplitude"], Dim::conc_rate, "ber.amplitude");
    if (b["ts"]) s.ber.ts = quantity(b["ts"], Dim::time, "ber.ts");
    if (s.ber.bits < 1) throw ConfigError(at(b) + ": ber.bits must be >= 1");
  }
  if (root["kernel_cache"]) s.kernel_cache = scalar<std::string>(root["kernel_cache"], "kernel_cache");
}

/// Parses a JSON (or YAML) config; a "preset" key selects the base scenario.
inline Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("config line " + std::to_string(e.mark.line + 1) + ", column " +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError("config: top level must be an object");
  Scenario s;
  if (root["preset"]) s = preset(detail::scalar<std::string>(root["preset"], "preset"));
  apply_config(s, root);
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// ---------------------------------------------------------------- canonical form

/// Full scenario with every quantity written in canonical units; parse_scenario reads it back.
inline nlohmann::json scenario_to_json(const Scenario& s) {
  using nlohmann::json;
  auto q = [](double v, Dim d) { return format_quantity(v, d); };
  auto qs = [&](const std::vector<double>& v, Dim d) {
    json a = json::array();
    for (double x : v) a.push_back(q(x, d));
    return a;
  };
  json j;
  j["name"] = s.name;
  json lay;
  lay["kind"] = s.layout == LayoutKind::Csk ? "csk" : "probe";
  lay["m"] = s.m;
  lay["species_pool"] = s.species_pool;
  lay["lane_width"] = q(s.lane_width, Dim::length);
  lay["unit_emit_area"] = q(s.unit_emit_area, Dim::area);
  lay["emit"] = qs({s.probe.emit.y_lo, s.probe.emit.y_hi}, Dim::length);
  lay["distance"] = q(s.probe.distance, Dim::length);
  lay["species"] = s.probe.species;
  lay["molecules"] = q(s.probe.molecules, Dim::dimensionless);
  json ab = json::object();
  for (const auto& [n, sf] : s.probe.absorbers) ab[n] = qs({sf.y_lo, sf.y_hi}, Dim::length);
  lay["absorbers"] = ab;
  j["layout"] = lay;
  j["geometry"] = {{"L", qs(s.geometry.L, Dim::length)},
                   {"W", qs(s.geometry.W, Dim::length)},
                   {"H", q(s.geometry.H, Dim::length)},
                   {"R", q(s.geometry.R, Dim::length)},
                   {"u", q(s.geometry.u, Dim::velocity)}};
  json sp = json::object();
  for (const auto& [id, p] : s.species)
    sp[id] = {{"beta", q(p.beta, Dim::conc_rate)}, {"theta", q(p.theta, Dim::inv_conc)},
              {"n", q(p.n, Dim::dimensionless)},   {"k_d", q(p.k_d, Dim::rate)},
              {"D", q(p.D, Dim::diffusivity)},     {"k_a", q(p.k_a, Dim::velocity)}};
  j["species"] = sp;
  j["cell"] = {{"eta", q(s.block.cell.eta, Dim::dimensionless)},
               {"xi", q(s.block.cell.xi, Dim::rate)},
               {"k_f", q(s.block.cell.k_f, Dim::bimolecular)}};
  j["blocks"] = {{"not_repression",
                  s.block.not_repression == NotRepression::OutputSpecies ? "output_species" : "repressor_row"},
                 {"repressor", s.block.repressor},
                 {"beta_scale", q(s.block.beta_scale, Dim::dimensionless)},
                 {"prime_threshold", s.block.prime_threshold},
                 {"reaction_step_limit", q(s.block.reaction_step_limit, Dim::dimensionless)}};
  json th = json::object();
  for (const auto& [k, v] : s.thresholds) th["B" + std::to_string(k)] = q(v, Dim::concentration);
  j["thresholds"] = th;
  j["density"] = {{"areal_density", q(s.density.areal_density, Dim::areal_density)},
                  {"volume_per_area", q(s.density.volume_per_area, Dim::length)},
                  {"detector_volume", q(s.detector_volume, Dim::volume)}};
  j["time"] = {{"ts", q(s.ts, Dim::time)}, {"horizon", q(s.horizon, Dim::time)}};
  json in = json::array();
  for (const auto& p : s.inputs)
    in.push_back({{"bit", p.bit},
                  {"t_on", q(p.t_on, Dim::time)},
                  {"duration", q(p.duration, Dim::time)},
                  {"amplitude", q(p.amplitude, Dim::conc_rate)}});
  j["inputs"] = in;
  j["stochastic"] = {{"realizations", s.realizations},
                     {"seed", s.seed},
                     {"report_step", q(s.stochastic.report_step, Dim::time)},
                     {"sigma_fraction", q(s.stochastic.sigma_fraction, Dim::dimensionless)},
                     {"random_initial_residual", s.stochastic.random_initial_residual}};
  j["detection"] = {{"window", q(s.detection.window, Dim::time)},
                    {"sample_offset", q(s.detection.sample_offset, Dim::time)},
                    {"sample_times", qs(s.detection.sample_times, Dim::time)},
                    {"N_d", q(s.detection.N_d, Dim::dimensionless)}};
  j["ber"] = {{"bits", s.ber.bits},
              {"seed", s.ber.seed},
              {"T_b", qs(s.ber.T_b, Dim::time)},
              {"N_d", qs(s.ber.N_d, Dim::dimensionless)},
              {"t_first", q(s.ber.t_first, Dim::time)},
              {"duration", q(s.ber.duration, Dim::time)},
              {"amplitude", q(s.ber.amplitude, Dim::conc_rate)},
              {"ts", q(s.ber.ts, Dim::time)}};
  j["kernel_cache"] = s.kernel_cache;
  return j;
}

}  // namespace cskmc
