#include <catch_amalgamated.hpp>

#include <cskmc/kinetics.hpp>

#include "../oracles.hpp"

using namespace cskmc;
using Catch::Approx;

namespace {

CellBlockConfig config(BlockKind k, const SpeciesId& in, const SpeciesId& out, double c_th = 0.0,
                       double beta_scale = 1.0) {
  BlockOptions o;
  o.c_th = c_th;
  o.beta_scale = beta_scale;
  return make_block_config(k, in, out, default_species(), o);
}

std::vector<double> rate_input(double ts, double horizon, double t_on, double dur, double rate) {
  auto tr = rectangular(ts, horizon, t_on, dur, rate);
  for (double& x : tr.values) x *= ts;
  return tr.values;
}

std::vector<double> run(const std::vector<double>& a, const CellBlockConfig& c, double ts) {
  BlockState st = initial_state(c, ts);
  std::vector<double> out;
  for (double x : a) out.push_back(block_step(st, x, c, ts));
  return out;
}

}  // namespace

TEST_CASE("exchange impulse response") {
  CHECK(exchange_impulse(1.0, 0.3, 0.0) == 1.0);
  CHECK(exchange_impulse(2.0, 0.0, 1e6) == 2.0);
  CHECK(exchange_impulse(1.0, 0.05 / 60, 600.0) == Approx(0.60653065971).epsilon(1e-9));
  CHECK_THROWS_AS(exchange_impulse(1.0, 0.1, -1.0), DomainError);

  // fine-step RK4 of dC/dt = -k_d C from an impulse
  double x = 1.0, k = 0.05 / 60, h = 0.5;
  for (int i = 0; i < 1200; ++i) {
    double k1 = -k * x, k2 = -k * (x + 0.5 * h * k1), k3 = -k * (x + 0.5 * h * k2), k4 = -k * (x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  CHECK(exchange_impulse(1.0, k, 600.0) == Approx(x).epsilon(1e-10));
}

TEST_CASE("bimolecular reaction step") {
  CHECK(bimolecular_update(1.0, 1.0, 1.0, 0.01) == Approx(0.9900990099).epsilon(1e-10));
  CHECK(bimolecular_update(2.0, 1.0, 1.0, 1.0) == Approx(1.2253996736).epsilon(1e-6));
  CHECK(bimolecular_update(1.0, 2.0, 1.0, 1.0) == Approx(1.2253996736 - 1.0).epsilon(1e-6));
  CHECK(bimolecular_update(0.0, 5.0, 1.0, 1.0) == 0.0);
  CHECK(bimolecular_update(3.0, 0.0, 1.0, 1.0) == 3.0);
  // RK4 oracle over a grid including near-equal and strongly unequal pairs
  for (double x : {0.1, 1.0, 1.0 + 1e-12, 2.0, 50.0})
    for (double y : {0.1, 1.0, 3.0, 80.0})
      for (double t : {0.01, 1.0, 10.0})
        CHECK(bimolecular_update(x, y, 1.0, t) == Approx(oracle::rk4_bimolecular(x, y, 1.0, t, 20000)).margin(1e-12).epsilon(1e-7));
  // no overflow when the exponent is huge
  double big = bimolecular_update(1.0, 1e4, 1.0, 10.0);
  CHECK(std::isfinite(big));
  CHECK(big >= 0.0);
}

TEST_CASE("thresholding repressor and input steps") {
  CellBlockConfig c;
  c.kind = BlockKind::Threshold;
  c.k_f = 1.0;
  CHECK(threshold_repressor_step(0.0, 3.0, 0.0, 0.0, c, 1.0) == 0.0);
  CHECK(threshold_input_step(3.0, 0.0, 0.0, 0.0, c, 1.0) == 0.0);
  CHECK(threshold_repressor_step(1.0, 1.0, 0.0, 0.0, c, 0.01) == Approx(0.9900990099));
  CHECK(threshold_repressor_step(2.0, 1.0, 0.0, 0.0, c, 1.0) == Approx(1.2253996736).epsilon(1e-6));
  CHECK(threshold_input_step(1.0, 2.0, 0.0, 0.0, c, 1.0) == Approx(1.2253996736).epsilon(1e-6));
  CHECK(threshold_repressor_step(0.7, 0.7, 0.0, 0.0, c, 0.3) == threshold_input_step(0.7, 0.7, 0.0, 0.0, c, 0.3));
  CHECK_THROWS_AS(threshold_repressor_step(-1.0, 0.0, 0.0, 0.0, c, 1.0), DomainError);
}

TEST_CASE("ID block") {
  auto c = config(BlockKind::ID, "aCa", "DOX");
  SECTION("zero input gives zero output") {
    auto out = run(std::vector<double>(1000, 0.0), c, 0.1);
    for (double x : out) CHECK(x == 0.0);
  }
  SECTION("saturated steady state") {
    BlockState st;
    st.C_Iin = 1e15;
    double ts = 1.0;
    for (int i = 0; i < 200; ++i) id_block_step(st, 0.0, c, ts);
    double sat = c.beta_out / std::pow(c.theta_in, c.n_in) / (c.k_out + c.xi);
    CHECK(st.C_Oin == Approx(sat).epsilon(1e-6));
  }
  SECTION("rectangular input matches RK4 at ts/100") {
    const double ts = 0.1;
    auto a = rate_input(ts, 3600.0, 60.0, 10.0, 50.0);
    auto ref = oracle::rk4_block(a, c, ts, 100);
    CHECK(oracle::rel_sup(run(a, c, ts), ref) < 0.01);
  }
}

TEST_CASE("NOT block") {
  auto c = config(BlockKind::NOT, "aSc", "aCa");
  SECTION("zero input approaches the unrepressed release rate") {
    const double ts = 1.0;
    auto out = run(std::vector<double>(20000, 0.0), c, ts);
    double rate = c.xi * c.beta_out / (c.k_out + c.xi);
    CHECK(out.back() / ts == Approx(rate).epsilon(1e-3));
  }
  SECTION("saturating input drives the repressor to its ceiling") {
    BlockState st;
    st.C_Iin = 1e15;
    CellBlockConfig slow = c;
    slow.k_in = 0.0;
    for (int i = 0; i < 20000; ++i) not_block_step(st, 0.0, slow, 1.0);
    double ceiling = slow.beta_rep / std::pow(slow.theta_in, slow.n_in) / slow.k_rep;
    CHECK(st.C_R == Approx(ceiling).epsilon(1e-4));
    double P = slow.beta_out * repression(st.C_R, slow.theta_rep, slow.n_rep);
    CHECK(st.C_Oin == Approx(P / (slow.k_out + slow.xi)).epsilon(1e-4));
  }
  SECTION("step input matches RK4 at ts/100") {
    const double ts = 0.1;
    auto a = rate_input(ts, 7200.0, 600.0, 1800.0, 0.5);
    auto ref = oracle::rk4_block(a, c, ts, 100);
    CHECK(oracle::rel_sup(run(a, c, ts), ref) < 0.01);
  }
}

TEST_CASE("thresholding block") {
  SECTION("no threshold molecule behaves as an unrepressed NOT") {
    auto t = config(BlockKind::Threshold, "DOX", "aSc", 0.0);
    t.primed = false;
    auto n = config(BlockKind::NOT, "DOX", "aSc");
    auto a = std::vector<double>(3000, 0.0);
    auto ot = run(a, t, 0.1), on = run(a, n, 0.1);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(ot[k] == Approx(on[k]).epsilon(1e-12));
  }
  SECTION("input far below the threshold stays suppressed") {
    auto t = config(BlockKind::Threshold, "DOX", "aSc", 0.7, 40.0);
    auto a = rate_input(1.0, 7200.0, 600.0, 1800.0, 0.001);
    auto out = run(a, t, 1.0);
    double on = t.xi * t.beta_out / (t.k_out + t.xi);
    for (double x : out) CHECK(x < 0.05 * on);
  }
  SECTION("receiver trajectory matches RK4 at ts/100") {
    auto t = config(BlockKind::Threshold, "DOX", "aSc", 0.01);
    const double ts = 0.1;
    auto a = rate_input(ts, 7200.0, 600.0, 1800.0, 0.01);
    oracle::State s0;
    s0.r = t.f_R(0) / t.k_rep;
    s0.o = t.beta_out * repression(s0.r, t.theta_rep, t.n_rep) / (t.k_out + t.xi);
    auto ref = oracle::rk4_block(a, t, ts, 100, s0);
    CHECK(oracle::rel_sup(run(a, t, ts), ref) < 0.02);
  }
}

TEST_CASE("internal reaction steps for fast annihilation") {
  const double ts = 0.1;
  auto t = config(BlockKind::Threshold, "DOX", "aSc", 0.45, 40.0);
  auto a = rate_input(ts, 7200.0, 600.0, 1800.0, 0.9);
  oracle::State s0;
  s0.r = t.f_R(0) / t.k_rep;
  s0.o = t.beta_out * repression(s0.r, t.theta_rep, t.n_rep) / (t.k_out + t.xi);
  auto ref = oracle::rk4_block(a, t, ts, 100, s0);
  std::vector<double> err;
  for (double eps : {0.0, 0.04, 0.02, 0.01}) {
    t.reaction_step_limit = eps;
    err.push_back(oracle::rel_sup(run(a, t, ts), ref));
  }
  CHECK(err[0] > 0.5);  // one step per interval undersamples the repressor
  CHECK(err[3] < 0.02);
  CHECK(std::log2(err[1] / err[2]) > 0.8);
  CHECK(std::log2(err[2] / err[3]) > 0.8);

  BlockState st = initial_state(t, ts);
  double r0 = st.C_R;
  block_step(st, 0.0, t, ts);
  CHECK(st.C_R == Approx(r0).epsilon(1e-12));
}

TEST_CASE("convolution form agrees with the stepwise operators") {
  const double ts = 1.0;
  auto a = rate_input(ts, 4 * 3600.0, 600.0, 1800.0, 0.05);
  SignalTrace in(0.0, ts, a);
  auto id = config(BlockKind::ID, "aCa", "DOX");
  auto no = config(BlockKind::NOT, "aSc", "aCa");
  CHECK(oracle::rel_sup(id_convolution_form(in, id).values, apply_block(in, id).values) < 0.01);
  CHECK(oracle::rel_sup(not_convolution_form(in, no).values, apply_block(in, no).values) < 0.01);
}

TEST_CASE("primed thresholding unit starts at its thresholding value") {
  auto t = config(BlockKind::Threshold, "DOX", "aSc", 0.45, 40.0);
  CHECK(initial_state(t).C_R == Approx(t.f_R(0) / t.k_rep));
  CHECK(initial_state(t, 1e-3).C_R == Approx(t.f_R(0) / t.k_rep).epsilon(1e-5));
  BlockState st = initial_state(t, 1.0);
  double r0 = st.C_R;
  double x0 = block_step(st, 0.0, t, 1.0);
  for (int i = 0; i < 1000; ++i) block_step(st, 0.0, t, 1.0);
  CHECK(st.C_R == Approx(r0).epsilon(1e-12));
  CHECK(block_step(st, 0.0, t, 1.0) == Approx(x0).epsilon(1e-9));
}

TEST_CASE("negative absorbed input is rejected") {
  auto c = config(BlockKind::ID, "aCa", "DOX");
  BlockState st;
  CHECK_THROWS_AS(block_step(st, -1.0, c, 0.1), DomainError);
}
