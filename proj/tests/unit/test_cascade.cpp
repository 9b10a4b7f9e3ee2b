#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include <cskmc/harness.hpp>

using namespace cskmc;
using Catch::Approx;

namespace {

Scenario binary(double ts = 1.0) {
  Scenario s = preset("fig10");
  s.ts = ts;
  return s;
}

Scenario quaternary() {
  Scenario s = preset("fig12");
  s.ts = 1.0;
  s.horizon = 6.5 * 3600.0;
  return s;
}

double total(const SignalTrace& t) { return std::accumulate(t.values.begin(), t.values.end(), 0.0); }

std::size_t edge_between(const CircuitLayout& lay, const std::string& a, const std::string& b) {
  for (std::size_t e = 0; e < lay.edges.size(); ++e)
    if (lay.edges[e].from == lay.index_of(a) && lay.edges[e].to == lay.index_of(b)) return e;
  throw std::logic_error("no edge " + a + " -> " + b);
}

}  // namespace

TEST_CASE("silent inputs: ID paths stay silent, thresholding units only leak a constant trickle") {
  Scenario s = binary();
  s.inputs.clear();
  AnalyticRun r = run_analytic(s);
  const auto& lay = r.layout;
  for (const char* n : {"S0", "Tx0"}) CHECK(total(r.result.node_output[lay.index_of(n)]) == 0.0);
  const auto& leak = r.result.node_output[lay.index_of("B0@0-5")].values;
  for (double x : leak) REQUIRE(x == Approx(leak.front()).epsilon(1e-9));
  const auto& y = r.result.sinks.at("Y0").values;
  double worst = *std::max_element(y.begin(), y.end()) * (s.detection.window / s.ts) * s.molecules_per_nM();
  CHECK(worst < 0.05 * s.detection.N_d);
}

TEST_CASE("NOT populations emit a baseline without input") {
  Scenario s = quaternary();
  s.inputs.clear();
  s.horizon = 6 * 3600.0;
  AnalyticRun r = run_analytic(s);
  int nots = 0;
  for (std::size_t v = 0; v < r.layout.populations.size(); ++v) {
    const auto& p = r.layout.populations[v];
    if (p.kind != NodeKind::Block) continue;
    if (p.block == BlockKind::NOT) {
      ++nots;
      CHECK(r.result.node_output[v].values.back() > 0.0);
    } else if (p.block == BlockKind::Threshold) {
      const auto& x = r.result.node_output[v].values;
      CHECK(x.back() == Approx(x.front()).epsilon(1e-9));
    }
  }
  CHECK(nots == 6);
}

TEST_CASE("cascade matches manual propagate and block application") {
  Scenario s = binary();
  s.horizon = 3 * 3600.0;
  auto in = s.input_traces();
  AnalyticCascade ac(s.build_layout(), s.cascade_params());
  CascadeResult r = ac.evaluate(in);
  const auto& lay = ac.layout();
  const auto& K = ac.kernels();

  SignalTrace src = s.ts * in.at(0);
  SignalTrace tx_in = propagate(src, *K[edge_between(lay, "S0", "Tx0")]);
  SignalTrace tx_out = apply_block(tx_in, *ac.block_config(lay.index_of("Tx0")));
  SignalTrace b_in = propagate(tx_out, *K[edge_between(lay, "Tx0", "B0@0-5")]);
  SignalTrace b_out = apply_block(b_in, *ac.block_config(lay.index_of("B0@0-5")));
  SignalTrace y = propagate(b_out, *K[edge_between(lay, "B0@0-5", "Y0")]);

  CHECK(r.node_output[lay.index_of("S0")].values == src.values);
  CHECK(r.node_input[lay.index_of("Tx0")].values == tx_in.values);
  CHECK(r.node_output[lay.index_of("Tx0")].values == tx_out.values);
  CHECK(r.node_output[lay.index_of("B0@0-5")].values == b_out.values);
  CHECK(r.sinks.at("Y0").values == y.values);
  CHECK(total(y) > 0.0);
}

TEST_CASE("delaying the input delays every trace") {
  Scenario a = binary();
  a.horizon = 4 * 3600.0;
  Scenario b = a;
  const std::size_t shift = 600;
  b.inputs[0].t_on += shift * a.ts;
  auto ra = run_analytic(a), rb = run_analytic(b);
  for (std::size_t v = 0; v < ra.layout.populations.size(); ++v) {
    const auto& x = ra.result.node_output[v].values;
    const auto& y = rb.result.node_output[v].values;
    double scale = *std::max_element(x.begin(), x.end());
    for (std::size_t k = 0; k + shift < x.size(); ++k)
      REQUIRE(std::abs(y[k + shift] - x[k]) <= 1e-12 * scale + 1e-300);
  }
}

TEST_CASE("binary symbol response") {
  Scenario s = binary();
  s.horizon = 8 * 3600.0;
  AnalyticRun one = run_analytic(s);
  const auto& y = one.result.sinks.at("Y0").values;
  auto peak = std::max_element(y.begin(), y.end());
  double t_peak = static_cast<double>(peak - y.begin()) * s.ts;
  CHECK(t_peak > s.inputs[0].t_on);
  CHECK(*peak > 0.0);
  const auto& tx = one.result.node_output[one.layout.index_of("Tx0")].values;
  for (std::size_t k = 0; k < static_cast<std::size_t>(s.inputs[0].t_on / s.ts); ++k) REQUIRE(tx[k] == 0.0);

  auto d1 = decide_symbol(s, one, s.inputs[0].t_on + s.detection.sample_offset, s.detection.N_d);
  CHECK(d1[0].bit);
  s.inputs.clear();
  AnalyticRun zero = run_analytic(s);
  auto d0 = decide_symbol(s, zero, 3600.0 + s.detection.sample_offset, s.detection.N_d);
  CHECK_FALSE(d0[0].bit);
  CHECK(d0[0].count < 0.05);
}

TEST_CASE("quaternary transmitter levels and decisions") {
  Scenario s = quaternary();
  std::vector<double> level;
  for (unsigned sym = 0; sym < 4; ++sym) {
    s.inputs = symbol_pulses(sym, 2, 3600.0, 1800.0, 50.0);
    AnalyticRun r = run_analytic(s);
    double dox = 0.0;
    for (const char* tx : {"Tx0", "Tx1"}) {
      std::size_t v = r.layout.index_of(tx);
      dox += r.layout.geometry.H * r.layout.populations[v].lane.width() * total(r.result.node_output[v]);
    }
    level.push_back(dox);
    auto d = decide_symbol(s, r, 3600.0 + s.detection.sample_offset, s.detection.N_d);
    CHECK(d[0].bit == bool(sym & 1u));
    CHECK(d[1].bit == bool(sym & 2u));
  }
  CHECK(level[0] == 0.0);
  CHECK(level[1] < level[2]);
  CHECK(level[2] < level[3]);
  CHECK(level[2] / level[1] == Approx(2.0).epsilon(0.1));
  CHECK(level[3] == Approx(level[1] + level[2]).epsilon(1e-9));
}

TEST_CASE("sample_and_decide window and threshold") {
  SignalTrace t = SignalTrace::zeros(0.0, 1.0, 200);
  for (std::size_t k = 100; k < 160; ++k) t.values[k] = 0.01;
  auto d = sample_and_decide(t, {160.0, 100.0, 130.0}, 0.0, 15.0, 60.0);
  CHECK(d[0].count == Approx(9.0));
  CHECK(d[0].bit);
  CHECK(d[1].count == 0.0);
  CHECK_FALSE(d[1].bit);
  CHECK(d[2].count == Approx(4.5));
  auto hi = sample_and_decide(t, {160.0}, 100.0, 15.0, 60.0);
  CHECK_FALSE(hi[0].bit);
  CHECK_THROWS(sample_and_decide(t, {500.0}, 1.0, 15.0));
  CHECK_THROWS(sample_and_decide(t, {100.0}, -1.0, 15.0));
}

TEST_CASE("sixteen random bits are recovered at a long bit interval") {
  Scenario s = preset("fig13");
  s.ber.bits = 16;
  s.ber.T_b = {10 * 3600.0};
  s.ber.N_d = {4.0};
  BerRun r = run_ber(s);
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].bits == 16);
  CHECK(r.points[0].errors == 0);
  CHECK(r.ones > 0);
  CHECK(r.ones < 16);
}

TEST_CASE("missing threshold concentration is a config error") {
  Scenario s = binary();
  s.thresholds.clear();
  CHECK_THROWS_AS(run_analytic(s), ConfigError);
}
