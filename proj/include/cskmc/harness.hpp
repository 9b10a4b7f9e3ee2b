#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenario.hpp"

namespace cskmc {

inline constexpr const char* library_version = "1.0.0";

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace detail

struct AnalyticRun {
  CircuitLayout layout;
  CascadeResult result;
  std::vector<std::string> warnings;
  std::vector<bool> cap_bound;  ///< per edge
  double seconds = 0.0;
};

inline AnalyticRun run_analytic(const Scenario& s, const std::map<int, SignalTrace>& inputs) {
  auto t0 = std::chrono::steady_clock::now();
  std::optional<KernelCache> cache;
  if (!s.kernel_cache.empty()) cache.emplace(s.kernel_cache);
  AnalyticCascade ac(s.build_layout(), s.cascade_params(), cache ? &*cache : nullptr);
  AnalyticRun r;
  r.layout = ac.layout();
  r.result = ac.evaluate(inputs);
  for (const auto& k : ac.kernels()) r.cap_bound.push_back(k->cap_bound);
  r.warnings = ac.diagnostics().warnings;
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline AnalyticRun run_analytic(const Scenario& s) { return run_analytic(s, s.input_traces()); }

struct StochasticRun {
  CircuitLayout layout;
  RealizationSummary summary;
  std::vector<int> substeps;
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

inline StochasticRun run_stochastic(const Scenario& s, const std::map<int, SignalTrace>& inputs) {
  auto t0 = std::chrono::steady_clock::now();
  StochasticEngine eng(s.build_layout(), s.cascade_params(), s.stochastic);
  StochasticRun r;
  r.layout = eng.layout();
  r.summary = run_realizations(eng, inputs, s.realizations, s.seed);
  r.substeps = eng.substeps();
  r.warnings = eng.diagnostics().warnings;
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline StochasticRun run_stochastic(const Scenario& s) { return run_stochastic(s, s.input_traces()); }

// ---------------------------------------------------------------- per-bin series

/// Molecules per report bin of a population: its emission, or what it absorbed (sinks).
inline std::vector<double> analytic_bin_counts(const AnalyticRun& r, std::size_t v, const DensityModel& dm,
                                               long long bin_samples, bool absorbed) {
  const Population& pop = r.layout.populations[v];
  const SignalTrace& tr = absorbed ? r.result.node_input[v] : r.result.node_output[v];
  double area = r.layout.geometry.H * pop.lane.width();
  std::size_t nb = (tr.size() + static_cast<std::size_t>(bin_samples) - 1) / static_cast<std::size_t>(bin_samples);
  std::vector<double> out(nb, 0.0);
  for (std::size_t k = 0; k < tr.size(); ++k) out[k / static_cast<std::size_t>(bin_samples)] += tr.values[k];
  for (double& x : out) x = dm.molecules(x, area);
  return out;
}

struct BinCheck {
  std::size_t bin = 0;
  double t_end = 0.0;
  double analytic = 0.0;
  double simulated = 0.0;
  double se = 0.0;
  bool pass = false;
};

struct SeriesComparison {
  std::string series;
  std::vector<BinCheck> bins;
  std::size_t passed = 0;
  double fraction() const { return bins.empty() ? 1.0 : static_cast<double>(passed) / static_cast<double>(bins.size()); }
};

/// Checks |mean − analytic| ≤ k·SE on every `every`-th bin, SE = sqrt(max(s², floor)/n). The floor is
/// the analytic counting variance: Poisson (trials = 0) or binomial with `trials` emitted particles.
inline SeriesComparison compare_series(const std::string& name, const std::vector<double>& analytic,
                                       const std::vector<double>& mean, const std::vector<double>& se_sample,
                                       std::size_t n, double report_step, std::size_t every = 1, double k = 3.0,
                                       double trials = 0.0) {
  SeriesComparison c;
  c.series = name;
  const double dn = static_cast<double>(n);
  for (std::size_t b = 0; b < analytic.size() && b < mean.size(); b += every) {
    double e = analytic[b];
    double floor_var = trials > 0 ? e * std::max(0.0, 1.0 - e / trials) : e;
    double var = std::max(se_sample[b] * se_sample[b] * dn, floor_var);
    BinCheck bc;
    bc.bin = b;
    bc.t_end = static_cast<double>(b + 1) * report_step;
    bc.analytic = e;
    bc.simulated = mean[b];
    bc.se = std::sqrt(var / dn);
    bc.pass = std::abs(bc.simulated - e) <= k * bc.se + 1e-12;
    c.passed += bc.pass ? 1 : 0;
    c.bins.push_back(bc);
  }
  return c;
}

// ---------------------------------------------------------------- export

inline void write_trace_csv(const std::filesystem::path& path, const SignalTrace& nM, double molecules_per_nM,
                            const std::vector<double>* stderr_molecules = nullptr) {
  std::ofstream o(path);
  if (!o) throw std::runtime_error("cannot write " + path.string());
  o << "time_s,value_nM,value_molecules,cumulative_molecules,stderr\n";
  double cum = 0.0;
  char buf[256];
  for (std::size_t k = 0; k < nM.size(); ++k) {
    double mol = nM.values[k] * molecules_per_nM;
    cum += mol;
    double se = stderr_molecules ? (*stderr_molecules)[k] : 0.0;
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.6g\n", nM.time(k + 1), nM.values[k], mol, cum, se);
    o << buf;
  }
}

/// Writes one CSV per population (emitted) and per sink (detected). Returns the file names.
inline std::vector<std::string> export_analytic(const std::filesystem::path& dir, const Scenario& s,
                                                const AnalyticRun& r) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  for (std::size_t v = 0; v < r.layout.populations.size(); ++v) {
    const Population& p = r.layout.populations[v];
    double mpn = s.density.molecules(1.0, r.layout.geometry.H * p.lane.width());
    std::string f;
    if (p.kind == NodeKind::Sink) {
      f = p.name + "_detected.csv";
      write_trace_csv(dir / f, r.result.node_input[v], s.molecules_per_nM());
    } else {
      f = p.name + "_emitted.csv";
      write_trace_csv(dir / f, r.result.node_output[v], mpn);
    }
    files.push_back(f);
  }
  return files;
}

inline std::vector<std::string> export_stochastic(const std::filesystem::path& dir, const Scenario& s,
                                                  const StochasticRun& r) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  const auto& sm = r.summary;
  for (std::size_t v = 0; v < r.layout.populations.size(); ++v) {
    const Population& p = r.layout.populations[v];
    bool sink = p.kind == NodeKind::Sink;
    const auto& mean = sink ? sm.absorbed_mean[v] : sm.emitted_mean[v];
    const auto& se = sink ? sm.absorbed_se[v] : sm.emitted_se[v];
    double area = r.layout.geometry.H * p.lane.width();
    SignalTrace nM = SignalTrace::zeros(0.0, sm.report_step, mean.size());
    for (std::size_t b = 0; b < mean.size(); ++b) nM.values[b] = s.density.concentration(mean[b], area);
    std::string f = p.name + (sink ? "_absorbed_sim.csv" : "_emitted_sim.csv");
    write_trace_csv(dir / f, nM, s.density.molecules(1.0, area), &se);
    files.push_back(f);
  }
  return files;
}

inline nlohmann::json base_manifest(const Scenario& s, const std::string& mode) {
  nlohmann::json m;
  m["tool"] = "cskmc";
  m["version"] = library_version;
  m["mode"] = mode;
  m["scenario"] = scenario_to_json(s);
  return m;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream o(path);
  if (!o) throw std::runtime_error("cannot write " + path.string());
  o << j.dump(2) << "\n";
}

// ---------------------------------------------------------------- symbol detection

/// Decides every Y_i of a symbol from the sink counts in the window ending at `t`.
inline std::vector<Decision> decide_symbol(const Scenario& s, const AnalyticRun& r, double t, double N_d) {
  std::vector<Decision> d(static_cast<std::size_t>(r.layout.m));
  for (std::size_t v : r.layout.sinks()) {
    const Population& p = r.layout.populations[v];
    if (p.output_bit < 0) continue;
    d[static_cast<std::size_t>(p.output_bit)] =
        sample_and_decide(r.result.node_input[v], {t}, N_d, s.molecules_per_nM(), s.detection.window)[0];
  }
  return d;
}

// ---------------------------------------------------------------- BER

struct BerPoint {
  double N_d = 0.0;
  double T_b = 0.0;
  int errors = 0;
  int bits = 0;
  double ber() const { return bits ? static_cast<double>(errors) / bits : 0.0; }
};

struct BerRun {
  std::vector<int> bits;
  int ones = 0;
  std::map<double, std::vector<std::vector<double>>> counts;  ///< T_b -> symbol -> per-Y count
  std::vector<BerPoint> points;
  double seconds = 0.0;

  double ber(double T_b, double N_d) const {
    for (const auto& p : points)
      if (p.T_b == T_b && p.N_d == N_d) return p.ber();
    throw std::out_of_range("no BER point");
  }
};

/// Random bit sequence driven through the analytic cascade symbol after symbol, one run per T_b.
inline BerRun run_ber(const Scenario& base) {
  auto t0 = std::chrono::steady_clock::now();
  const int m = base.layout == LayoutKind::Csk ? base.m : 1;
  BerRun out;
  std::mt19937_64 rng(base.ber.seed);
  std::bernoulli_distribution coin(0.5);
  int nbits = base.ber.bits;
  if (nbits % m) throw ConfigError("ber.bits must be a multiple of m");
  for (int i = 0; i < nbits; ++i) out.bits.push_back(coin(rng) ? 1 : 0);
  for (int b : out.bits) out.ones += b;
  const int nsym = nbits / m;

  for (double Tb : base.ber.T_b) {
    Scenario s = base;
    s.ts = base.ber.ts;
    double t_last = base.ber.t_first + (nsym - 1) * Tb + base.detection.sample_offset;
    double horizon = std::max(base.ber.t_first + nsym * Tb, t_last);
    s.horizon = std::ceil(horizon / s.ts - 1e-9) * s.ts;
    if (t_last > s.horizon + 1e-9) throw ConfigError("BER horizon does not cover the last sample time");
    s.inputs.clear();
    for (int k = 0; k < nsym; ++k) {
      unsigned sym = 0;
      for (int i = 0; i < m; ++i)
        if (out.bits[static_cast<std::size_t>(k * m + i)]) sym |= 1u << i;
      for (auto& p : symbol_pulses(sym, m, base.ber.t_first + k * Tb, base.ber.duration, base.ber.amplitude))
        s.inputs.push_back(p);
    }
    AnalyticRun r = run_analytic(s);
    auto& cnt = out.counts[Tb];
    for (int k = 0; k < nsym; ++k) {
      double t = base.ber.t_first + k * Tb + base.detection.sample_offset;
      auto d = decide_symbol(s, r, t, 0.0);
      std::vector<double> c;
      for (const auto& x : d) c.push_back(x.count);
      cnt.push_back(c);
    }
    for (double Nd : base.ber.N_d) {
      BerPoint p;
      p.N_d = Nd;
      p.T_b = Tb;
      for (int k = 0; k < nsym; ++k)
        for (int i = 0; i < m; ++i) {
          bool decided = cnt[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] > Nd;
          bool sent = out.bits[static_cast<std::size_t>(k * m + i)] != 0;
          p.errors += decided != sent ? 1 : 0;
          ++p.bits;
        }
      out.points.push_back(p);
    }
  }
  out.seconds = detail::seconds_since(t0);
  return out;
}

inline void write_ber_csv(const std::filesystem::path& path, const BerRun& r) {
  std::ofstream o(path);
  if (!o) throw std::runtime_error("cannot write " + path.string());
  o << "N_d,T_b_s,errors,bits,ber\n";
  char buf[128];
  for (const auto& p : r.points) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%d,%d,%.10g\n", p.N_d, p.T_b, p.errors, p.bits, p.ber());
    o << buf;
  }
}

// ---------------------------------------------------------------- validation

struct ValidationReport {
  std::vector<SeriesComparison> series;
  std::uint64_t census_checks = 0;
  std::uint64_t census_failures = 0;
  double min_fraction = 1.0;  ///< required share of passing bins per series
  bool ok() const {
    if (census_failures) return false;
    for (const auto& c : series)
      if (c.fraction() + 1e-12 < min_fraction) return false;
    return true;
  }
};

/// Stochastic-vs-analytic agreement: every population's emission and every sink's absorption.
/// Probe layouts are checked bin by bin with binomial errors and a 95% pass share; cascades on every
/// 10th report bin, all of which must pass.
inline ValidationReport validate_scenario(const Scenario& s, const AnalyticRun& a, const StochasticRun& st) {
  ValidationReport rep;
  const auto& sm = st.summary;
  auto bin = std::max<long long>(1, std::llround(sm.report_step / s.ts));
  bool probe = s.layout == LayoutKind::Probe;
  std::size_t every = probe ? 1 : 10;
  rep.min_fraction = probe ? 0.95 : 1.0;
  double trials = probe ? s.probe.molecules : 0.0;
  for (std::size_t v = 0; v < a.layout.populations.size(); ++v) {
    const Population& p = a.layout.populations[v];
    bool sink = p.kind == NodeKind::Sink;
    auto an = analytic_bin_counts(a, v, s.density, bin, sink);
    const auto& mean = sink ? sm.absorbed_mean[v] : sm.emitted_mean[v];
    const auto& se = sink ? sm.absorbed_se[v] : sm.emitted_se[v];
    if (probe && !sink) continue;
    rep.series.push_back(compare_series(p.name + (sink ? " absorbed" : " emitted"), an, mean, se, sm.n, sm.report_step,
                                        every, 3.0, trials));
  }
  rep.census_checks = sm.census_checks;
  rep.census_failures = sm.census_failures;
  return rep;
}

}  // namespace cskmc
