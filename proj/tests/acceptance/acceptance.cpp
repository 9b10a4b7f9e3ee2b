// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <cskmc/eigen.hpp>
#include <cskmc/harness.hpp>
#include <cskmc/logic.hpp>

#include "../oracles.hpp"

using namespace cskmc;

namespace {

// Pinned tolerances.
constexpr double kLogicSeconds = 1.0;
constexpr double kRk4RelSup = 0.02;
constexpr double kMinOrder = 1.0;
constexpr double kThresholdSeconds = 60.0;
constexpr double kEigenResidual = 1e-10;
constexpr double kEigenLimit = 1e-3;
constexpr double kEigenSeconds = 10.0;
constexpr double kProbeBinShare = 0.95;
constexpr double kSigmas = 3.0;
constexpr double kLevelRatioLo = 1.8, kLevelRatioHi = 2.2;
constexpr double kModulationSeconds = 60.0;
constexpr double kResponseSpread = 1.5;  // max/min over bit-1 sink counts
constexpr double kBerSeconds = 3600.0;

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail, double seconds) {
  std::printf("[%s] %d. %s: %s (%.2f s)\n", ok ? "PASS" : "FAIL", id, title, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::uint64_t census_checks = 0, census_failures = 0;

// 1 ---------------------------------------------------------------------------------------------
void logic() {
  auto t0 = Clock::now();
  int rows = 0, bad = 0;
  for (int m = 1; m <= 4; ++m) {
    auto ilf = ilf_backend(m);
    auto sop = sop_backend(m);
    auto lay = synthesize_layout(m);
    for (const auto& row : thermometer_decode_table(m)) {
      ++rows;
      bool ok = evaluate_layout_logic(lay, row.B) == row.Y;
      for (int i = 0; i < m; ++i) {
        auto u = static_cast<std::size_t>(i);
        ok = ok && ilf[u].eval(row.B) == row.Y[u] && sop[u].eval(row.B) == row.Y[u];
      }
      bad += ok ? 0 : 1;
    }
  }
  double s = since(t0);
  report(1, "logic synthesis", bad == 0 && s < kLogicSeconds,
         fmt("%d codes for m = 1..4, %d mismatches between ILF, SOP, layout and decode table", rows, bad), s);
}

// 2 ---------------------------------------------------------------------------------------------
// Trajectories of the three state variables (input, repressor, intracellular output) at every
// sample, against RK4 at ts/100. The released output per interval is reported alongside.
void threshold_vs_rk4() {
  auto t0 = Clock::now();
  BlockOptions o;
  o.c_th = 0.01;
  o.reaction_step_limit = 0.0;  // one closed-form reaction update per interval
  auto cfg = make_block_config(BlockKind::Threshold, "DOX", "aSc", default_species(), o);
  oracle::State s0;
  s0.r = cfg.f_R(0) / cfg.k_rep;
  s0.o = cfg.beta_out * repression(s0.r, cfg.theta_rep, cfg.n_rep) / (cfg.k_out + cfg.xi);
  std::vector<double> err_state, err_out;
  for (double ts : {0.02, 0.01}) {
    auto tr = rectangular(ts, 7200.0, 600.0, 1800.0, 0.01);
    std::vector<double> a = tr.values;
    for (double& x : a) x *= ts;
    std::vector<oracle::State> ref_state;
    auto ref = oracle::rk4_block(a, cfg, ts, 100, s0, &ref_state);
    BlockState st = initial_state(cfg, ts);
    std::vector<double> got, gx, gr, go, rx, rr, ro;
    for (std::size_t k = 0; k < a.size(); ++k) {
      got.push_back(block_step(st, a[k], cfg, ts));
      gx.push_back(st.C_Iin);
      gr.push_back(st.C_R);
      go.push_back(st.C_Oin);
      rx.push_back(ref_state[k].x);
      rr.push_back(ref_state[k].r);
      ro.push_back(ref_state[k].o);
    }
    err_state.push_back(std::max({oracle::rel_sup(gx, rx), oracle::rel_sup(gr, rr), oracle::rel_sup(go, ro)}));
    err_out.push_back(oracle::rel_sup(got, ref));
  }
  double order = std::log2(err_state[0] / err_state[1]);
  double order_out = std::log2(err_out[0] / err_out[1]);
  double s = since(t0);
  bool ok = err_state[0] < kRk4RelSup && err_state[1] < kRk4RelSup && err_out[0] < kRk4RelSup &&
            err_out[1] < kRk4RelSup && order >= kMinOrder && s < kThresholdSeconds;
  report(2, "thresholding vs RK4", ok,
         fmt("state rel sup err %.3e (ts 0.02 s), %.3e (ts 0.01 s), observed order %.3f; released output "
             "%.3e, %.3e, order %.3f",
             err_state[0], err_state[1], order, err_out[0], err_out[1], order_out),
         s);
}

// 3 ---------------------------------------------------------------------------------------------
void eigenvalues() {
  auto t0 = Clock::now();
  const double G1 = 9.0 / 89.0, pi = std::numbers::pi;
  long double worst = 0;
  for (double L : {1.0, 3.0, 4.0, 35.0, 39.0, 42.0, 43.0, 46.0, 47.0, 50.0, 55.0})
    for (const auto& r : solve_eigenvalues(L, G1, 500)) worst = std::max(worst, eigen_residual(r, G1));
  double lim = 0.0;
  for (double L : {1.0, 10.0}) {
    auto weak = solve_eigenvalues(L, 1e-12, 20);
    auto strong = solve_eigenvalues(L, 1e9, 20);
    for (int l = 1; l <= 20; ++l) {
      auto u = static_cast<std::size_t>(l - 1);
      lim = std::max(lim, std::abs(weak[u].value() - (l - 1) * pi / L));
      lim = std::max(lim, std::abs(strong[u].value() - (l - 0.5) * pi / L));
    }
  }
  double s = since(t0);
  report(3, "eigenvalues", worst < kEigenResidual && lim < kEigenLimit && s < kEigenSeconds,
         fmt("max residual %.2Le over 500 roots x 11 distances, limit-case offset %.2e", worst, lim), s);
}

// 4 ---------------------------------------------------------------------------------------------
void probe() {
  auto t0 = Clock::now();
  Scenario sc = preset("fig9");
  AnalyticRun a = run_analytic(sc);
  StochasticRun st = run_stochastic(sc);
  ValidationReport rep = validate_scenario(sc, a, st);
  census_checks += rep.census_checks;
  census_failures += rep.census_failures;
  auto peak = [&](const char* n) {
    const auto& v = a.result.node_input[a.layout.index_of(n)].values;
    auto it = std::max_element(v.begin(), v.end());
    return std::pair<double, double>{static_cast<double>(it - v.begin()) * sc.ts, *it};
  };
  auto [t1, p1] = peak("Sa1");
  auto [t2, p2] = peak("Sa2");
  bool ok = t2 > t1 && p2 < p1;
  std::string d;
  for (const auto& c : rep.series) {
    ok = ok && c.fraction() >= kProbeBinShare;
    d += fmt("%s %zu/%zu bins, ", c.series.c_str(), c.passed, c.bins.size());
  }
  d += fmt("%.0f particles; peaks Sa1 %.2f s / Sa2 %.2f s, Sa2/Sa1 height %.3f",
           static_cast<double>(st.summary.census.emitted), t1, t2, p2 / p1);
  report(4, "propagation cross-validation", ok, d, since(t0));
}

// 5 ---------------------------------------------------------------------------------------------
void binary_link() {
  auto t0 = Clock::now();
  Scenario sc = preset("fig10");
  AnalyticRun a = run_analytic(sc);
  StochasticRun st = run_stochastic(sc);
  ValidationReport rep = validate_scenario(sc, a, st);
  census_checks += rep.census_checks;
  census_failures += rep.census_failures;
  bool ok = sc.realizations >= 200;
  std::string d = fmt("%zu realizations; ", sc.realizations);
  for (const auto& c : rep.series) {
    ok = ok && c.passed == c.bins.size();
    d += fmt("%s %zu/%zu, ", c.series.c_str(), c.passed, c.bins.size());
  }

  Scenario zero = sc;
  zero.inputs.clear();
  AnalyticRun az = run_analytic(zero);
  const auto& tx = az.result.node_output[az.layout.index_of("Tx0")].values;
  bool silent = std::all_of(tx.begin(), tx.end(), [](double x) { return x == 0.0; });
  zero.realizations = 5;
  StochasticRun sz = run_stochastic(zero);
  const auto& e = sz.summary.emitted_mean[sz.layout.index_of("Tx0")];
  silent = silent && std::all_of(e.begin(), e.end(), [](double x) { return x == 0.0; });
  census_checks += sz.summary.census_checks;
  census_failures += sz.summary.census_failures;
  d += silent ? "bit-0 Tx output identically zero" : "bit-0 Tx output NOT zero";
  report(5, "binary link end to end", ok && silent, d, since(t0));
}

// 6 ---------------------------------------------------------------------------------------------
void modulation() {
  auto t0 = Clock::now();
  Scenario sc = preset("fig11");
  sc.horizon = 4 * 3600.0;  // transmitter peaks lie within the first hours
  std::vector<double> level;
  for (unsigned sym = 0; sym < 4; ++sym) {
    sc.inputs = symbol_pulses(sym, 2, 3600.0, 1800.0, 50.0);
    AnalyticRun r = run_analytic(sc);
    std::vector<double> dox(r.result.node_output[0].size(), 0.0);
    for (const char* n : {"Tx0", "Tx1"}) {
      std::size_t v = r.layout.index_of(n);
      double area = r.layout.geometry.H * r.layout.populations[v].lane.width();
      const auto& x = r.result.node_output[v].values;
      for (std::size_t k = 0; k < x.size(); ++k) dox[k] += sc.density.molecules(x[k], area) / sc.ts;
    }
    level.push_back(*std::max_element(dox.begin(), dox.end()));
  }
  double ratio = level[2] / level[1];
  double s = since(t0);
  bool ok = level[0] == 0.0 && level[0] < level[1] && level[1] < level[2] && level[2] < level[3] &&
            ratio >= kLevelRatioLo && ratio <= kLevelRatioHi && s < kModulationSeconds;
  report(6, "QCSK modulation", ok,
         fmt("peak DOX emission 00 %.4g, 01 %.4g, 10 %.4g, 11 %.4g molecules/s; 10/01 = %.3f", level[0], level[1],
             level[2], level[3], ratio),
         s);
}

// 7 ---------------------------------------------------------------------------------------------
void demodulation() {
  auto t0 = Clock::now();
  Scenario sc = preset("fig12");
  bool ok = true;
  std::vector<double> ones;
  std::string d;
  for (unsigned sym = 0; sym < 4; ++sym) {
    sc.inputs = symbol_pulses(sym, 2, 3600.0, 1800.0, 50.0);
    AnalyticRun r = run_analytic(sc);
    auto dec = decide_symbol(sc, r, 3600.0 + sc.detection.sample_offset, sc.detection.N_d);
    for (int i = 0; i < 2; ++i) {
      bool sent = (sym >> i) & 1u;
      ok = ok && dec[static_cast<std::size_t>(i)].bit == sent;
      if (sent) ones.push_back(dec[static_cast<std::size_t>(i)].count);
    }
    d += fmt("%u%u -> Y1 %.2f, Y0 %.2f; ", (sym >> 1) & 1u, sym & 1u, dec[1].count, dec[0].count);
  }
  double spread = *std::max_element(ones.begin(), ones.end()) / *std::min_element(ones.begin(), ones.end());
  ok = ok && spread <= kResponseSpread;
  d += fmt("bit-1 max/min %.3f", spread);
  report(7, "QCSK demodulation", ok, d, since(t0));
}

// 8 ---------------------------------------------------------------------------------------------
void ber() {
  auto t0 = Clock::now();
  Scenario sc = preset("fig13");
  BerRun r = run_ber(sc);
  const double nbits = static_cast<double>(r.bits.size());
  const double zeros = (nbits - r.ones) / nbits, ones = r.ones / nbits;
  const double T5 = 5 * 3600.0, T10 = 10 * 3600.0;
  double top = 0.0;
  for (const auto& [Tb, c] : r.counts)
    for (const auto& sym : c)
      for (double x : sym) top = std::max(top, x);
  double above = std::ceil(top) + 1.0;
  bool ok = true;
  std::string d;
  for (double Tb : {T5, T10}) ok = ok && r.ber(Tb, 0.0) == zeros;
  // A threshold above every response decides all zeros.
  int err_above = 0;
  for (const auto& [Tb, c] : r.counts)
    for (std::size_t k = 0; k < c.size(); ++k)
      for (std::size_t i = 0; i < c[k].size(); ++i)
        err_above += ((c[k][i] > above) != (r.bits[k * c[k].size() + i] != 0)) ? 1 : 0;
  ok = ok && err_above == static_cast<int>(r.ones) * static_cast<int>(r.counts.size());
  int err10 = 0;
  for (double Nd = 1; Nd <= 5; Nd += 1) err10 += static_cast<int>(std::lround(r.ber(T10, Nd) * nbits));
  ok = ok && err10 == 0;
  double max_one_10 = 0.0;
  const auto& c10 = r.counts.at(T10);
  for (std::size_t k = 0; k < c10.size(); ++k)
    for (std::size_t i = 0; i < c10[k].size(); ++i)
      if (r.bits[k * c10[k].size() + i]) max_one_10 = std::max(max_one_10, c10[k][i]);
  int violations = 0;
  for (double Nd : sc.ber.N_d)
    if (Nd < max_one_10 && r.ber(T10, Nd) > r.ber(T5, Nd)) ++violations;
  ok = ok && violations == 0;
  double s = since(t0);
  ok = ok && s < kBerSeconds;
  d = fmt("%zu bits (%d ones); BER(N_d=0) %.2f/%.2f vs 0-share %.2f; N_d=%.0f above all responses gives "
          "1-share %.2f; 10 h errors for N_d 1..5: %d; 10 h > 5 h at %d thresholds",
          r.bits.size(), r.ones, r.ber(T5, 0.0), r.ber(T10, 0.0), zeros, above, ones, err10, violations);
  report(8, "bit error rate", ok, d, s);
  std::printf("     N_d  ");
  for (double Nd : sc.ber.N_d) std::printf("%5.0f", Nd);
  for (double Tb : {T5, T10}) {
    std::printf("\n     %4.0f h ", Tb / 3600);
    for (double Nd : sc.ber.N_d) std::printf("%5.2f", r.ber(Tb, Nd));
  }
  std::printf("\n");
}

// 9 ---------------------------------------------------------------------------------------------
void census() {
  report(9, "particle census", census_checks > 0 && census_failures == 0,
         fmt("%llu failures over %llu per-step checks in runs 4 and 5",
             static_cast<unsigned long long>(census_failures), static_cast<unsigned long long>(census_checks)),
         0.0);
}

}  // namespace

int main() {
  logic();
  threshold_vs_rk4();
  eigenvalues();
  probe();
  binary_link();
  modulation();
  demodulation();
  ber();
  census();
  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
