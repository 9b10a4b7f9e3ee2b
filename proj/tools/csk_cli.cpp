#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>

#include <cskmc/harness.hpp>

using namespace cskmc;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, validation_failed = 3 };

struct Common {
  std::string config;
  std::string preset;
  std::string out = "out";
  double ts = 0.0;
  long long seed = -1;
  long long realizations = 0;
  std::string symbol;
  std::string kernel_cache;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "scenario config file (JSON)");
  sub->add_option("--preset", c.preset, "built-in scenario: fig9, fig10, fig11, fig12, fig13");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--ts", c.ts, "override the sampling interval, s");
  sub->add_option("--symbol", c.symbol, "transmit one symbol, bits S_{m-1}..S_0 (e.g. 10)");
  sub->add_option("--kernel-cache", c.kernel_cache, "directory for cached propagation kernels");
}

void add_stochastic(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "base seed of the realizations");
  sub->add_option("--realizations", c.realizations, "number of independent realizations");
}

Scenario load(const Common& c) {
  Scenario s;
  if (!c.config.empty()) s = load_scenario(c.config);
  else if (!c.preset.empty()) s = preset(c.preset);
  else throw ConfigError("give --config FILE or --preset NAME");
  if (c.ts > 0) s.ts = c.ts;
  if (c.seed >= 0) s.seed = static_cast<std::uint64_t>(c.seed);
  if (c.realizations > 0) s.realizations = static_cast<std::size_t>(c.realizations);
  if (!c.kernel_cache.empty()) s.kernel_cache = c.kernel_cache;
  if (!c.symbol.empty()) {
    if (static_cast<int>(c.symbol.size()) != s.m || c.symbol.find_first_not_of("01") != std::string::npos)
      throw ConfigError("--symbol needs " + std::to_string(s.m) + " binary digits");
    unsigned sym = 0;
    for (char ch : c.symbol) sym = (sym << 1) | (ch == '1' ? 1u : 0u);
    double t_on = s.inputs.empty() ? 3600.0 : s.inputs.front().t_on;
    double dur = s.inputs.empty() ? s.ber.duration : s.inputs.front().duration;
    double amp = s.inputs.empty() ? s.ber.amplitude : s.inputs.front().amplitude;
    s.inputs = symbol_pulses(sym, s.m, t_on, dur, amp);
  }
  return s;
}

void print_warnings(const std::vector<std::string>& w) {
  std::set<std::string> seen;
  for (const auto& x : w)
    if (seen.insert(x).second) std::fprintf(stderr, "warning: %s\n", x.c_str());
}

int cmd_synth(int m, const std::string& format, const std::string& out) {
  CircuitLayout lay = synthesize_layout(m);
  std::string text = format == "dot" ? layout_to_dot(lay) : layout_to_json(lay).dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    std::ofstream(out) << text;
  }
  auto Y = ilf_backend(m);
  for (std::size_t i = 0; i < Y.size(); ++i) std::fprintf(stderr, "Y%zu = %s\n", i, Y[i].str().c_str());
  return ok;
}

int cmd_analytic(const Common& c) {
  Scenario s = load(c);
  AnalyticRun r = run_analytic(s);
  print_warnings(r.warnings);
  auto files = export_analytic(c.out, s, r);
  auto man = base_manifest(s, "analytic");
  man["files"] = files;
  man["runtime_s"] = r.seconds;
  man["warnings"] = r.warnings;
  man["kernel_cap_bound"] = r.cap_bound;
  man["layout"] = layout_to_json(r.layout);
  if (s.layout == LayoutKind::Csk && !s.inputs.empty()) {
    double t = s.detection.sample_times.empty() ? s.inputs.front().t_on + s.detection.sample_offset
                                                : s.detection.sample_times.front();
    auto d = decide_symbol(s, r, t, s.detection.N_d);
    nlohmann::json dj = nlohmann::json::array();
    for (std::size_t i = 0; i < d.size(); ++i) {
      dj.push_back({{"bit", i}, {"time_s", d[i].time}, {"count", d[i].count}, {"decided", d[i].bit ? 1 : 0}});
      std::printf("Y%zu at %.0f s: %.3f molecules -> %d\n", i, d[i].time, d[i].count, d[i].bit ? 1 : 0);
    }
    man["decisions"] = dj;
  }
  write_json(fs::path(c.out) / "manifest.json", man);
  std::printf("analytic run finished in %.2f s, %zu files in %s\n", r.seconds, files.size(), c.out.c_str());
  return ok;
}

int cmd_simulate(const Common& c) {
  Scenario s = load(c);
  StochasticRun r = run_stochastic(s);
  print_warnings(r.warnings);
  auto files = export_stochastic(c.out, s, r);
  auto man = base_manifest(s, "stochastic");
  man["files"] = files;
  man["runtime_s"] = r.seconds;
  man["substeps"] = r.substeps;
  man["warnings"] = r.warnings;
  const auto& cs = r.summary.census;
  man["census"] = {{"emitted", cs.emitted},       {"degraded", cs.degraded},
                   {"absorbed", cs.absorbed},     {"alive", cs.alive},
                   {"checks", r.summary.census_checks}, {"failures", r.summary.census_failures}};
  write_json(fs::path(c.out) / "manifest.json", man);
  std::printf("%zu realizations in %.1f s, census failures %llu/%llu\n", s.realizations, r.seconds,
              static_cast<unsigned long long>(r.summary.census_failures),
              static_cast<unsigned long long>(r.summary.census_checks));
  return r.summary.census_failures ? validation_failed : ok;
}

int cmd_validate(const Common& c) {
  Scenario s = load(c);
  AnalyticRun a = run_analytic(s);
  StochasticRun st = run_stochastic(s);
  print_warnings(a.warnings);
  print_warnings(st.warnings);
  ValidationReport rep = validate_scenario(s, a, st);
  nlohmann::json sj = nlohmann::json::array();
  for (const auto& ser : rep.series) {
    std::printf("%-24s %zu/%zu bins within 3 SE (%.1f%%)\n", ser.series.c_str(), ser.passed, ser.bins.size(),
                100.0 * ser.fraction());
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& b : ser.bins)
      bins.push_back({{"t_end_s", b.t_end}, {"analytic", b.analytic}, {"simulated", b.simulated}, {"se", b.se},
                      {"pass", b.pass}});
    sj.push_back({{"series", ser.series}, {"passed", ser.passed}, {"checked", ser.bins.size()}, {"bins", bins}});
  }
  std::printf("census: %llu failures over %llu checks\n", static_cast<unsigned long long>(rep.census_failures),
              static_cast<unsigned long long>(rep.census_checks));
  auto man = base_manifest(s, "validate");
  man["series"] = sj;
  man["required_fraction"] = rep.min_fraction;
  man["census_failures"] = rep.census_failures;
  man["ok"] = rep.ok();
  man["runtime_s"] = a.seconds + st.seconds;
  write_json(fs::path(c.out) / "validation.json", man);
  std::printf("%s\n", rep.ok() ? "validation passed" : "validation FAILED");
  return rep.ok() ? ok : validation_failed;
}

int cmd_ber(const Common& c, const std::vector<std::string>& Tb, long long ber_seed) {
  Scenario s = load(c);
  if (!Tb.empty()) {
    s.ber.T_b.clear();
    for (const auto& t : Tb) s.ber.T_b.push_back(parse_quantity(t, Dim::time));
  }
  if (ber_seed >= 0) s.ber.seed = static_cast<std::uint64_t>(ber_seed);
  if (c.ts > 0) s.ber.ts = c.ts;
  BerRun r = run_ber(s);
  fs::create_directories(c.out);
  write_ber_csv(fs::path(c.out) / "ber.csv", r);
  auto man = base_manifest(s, "ber");
  man["files"] = {"ber.csv"};
  man["bits"] = r.bits;
  man["ones"] = r.ones;
  man["runtime_s"] = r.seconds;
  write_json(fs::path(c.out) / "manifest.json", man);
  for (const auto& p : r.points)
    std::printf("T_b = %5.1f h  N_d = %4.1f  errors %3d/%d  BER %.3f\n", p.T_b / 3600, p.N_d, p.errors, p.bits,
                p.ber());
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CSK molecular-communication simulator"};
  app.require_subcommand(1);

  int m = 2;
  std::string format = "json", synth_out;
  auto* synth = app.add_subcommand("synth", "synthesize a CSK circuit layout");
  synth->add_option("--m", m, "bits per symbol")->check(CLI::Range(1, 8));
  synth->add_option("--format", format, "json or dot")->check(CLI::IsMember({"json", "dot"}));
  synth->add_option("--out", synth_out, "output file (default stdout)");

  Common ca, cs, cv, cb;
  auto* analytic = app.add_subcommand("analytic", "evaluate a scenario with the analytic engine");
  add_common(analytic, ca);
  auto* simulate = app.add_subcommand("simulate", "run stochastic realizations of a scenario");
  add_common(simulate, cs);
  add_stochastic(simulate, cs);
  auto* validate = app.add_subcommand("validate", "compare stochastic means with the analytic engine");
  add_common(validate, cv);
  add_stochastic(validate, cv);
  std::vector<std::string> Tb;
  long long ber_seed = -1;
  auto* ber = app.add_subcommand("ber", "bit error rate of a random bit sequence (analytic engine)");
  add_common(ber, cb);
  ber->add_option("--Tb", Tb, "bit intervals with units, e.g. 10h");
  ber->add_option("--bits-seed", ber_seed, "seed of the random bit sequence");

  std::string dump_preset;
  auto* dump = app.add_subcommand("config", "print the canonical config of a preset");
  dump->add_option("preset", dump_preset, "preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : config_error;
  }

  try {
    if (*synth) return cmd_synth(m, format, synth_out);
    if (*analytic) return cmd_analytic(ca);
    if (*simulate) return cmd_simulate(cs);
    if (*validate) return cmd_validate(cv);
    if (*ber) return cmd_ber(cb, Tb, ber_seed);
    if (*dump) {
      std::cout << scenario_to_json(preset(dump_preset)).dump(2) << "\n";
      return ok;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const UnitError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const LayoutError& e) {
    std::fprintf(stderr, "layout error: %s\n", e.what());
    return config_error;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return failure;
  }
  return ok;
}
