#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include <cskmc/kernel.hpp>

using namespace cskmc;
using Catch::Approx;

namespace {

KernelSpec spec(double L, Surface emit, Surface absorb, double ts = 0.01, double horizon = 60.0) {
  auto sp = default_species().at("DOX");
  return make_kernel_spec(L, emit, absorb, sp, default_geometry(), ts, horizon);
}

double rel_sup(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0, e = 0;
  for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k) {
    double x = k < a.size() ? a[k] : 0.0, y = k < b.size() ? b[k] : 0.0;
    m = std::max(m, std::abs(y));
    e = std::max(e, std::abs(x - y));
  }
  return e / m;
}

}  // namespace

TEST_CASE("zero-width absorber gives a zero kernel") {
  auto K = build_kernel(spec(10.0, {0, 5}, {3, 3}));
  for (double x : K.q) CHECK(x == 0.0);
}

TEST_CASE("first sample is zero: strict one-interval causality") {
  auto K = build_kernel(spec(1.0, {0, 15}, {0, 15}));
  CHECK(K.q[0] == 0.0);
  CHECK(K.q[1] > 0.0);
  CHECK(K.cap_bound);
}

TEST_CASE("full-width emitter and absorber need no lateral modes") {
  auto s = spec(10.0, {0, 15}, {0, 15});
  auto K = build_kernel(s);
  s.max_gamma = 1;
  auto K1 = build_kernel(s);
  CHECK(rel_sup(K.q, K1.q) < 1e-9);
}

TEST_CASE("far absorber peaks later and lower") {
  auto k1 = build_kernel(spec(10.0, {0, 5}, {0, 1.25}, 0.01, 10.0));
  auto k2 = build_kernel(spec(10.0, {0, 5}, {13.75, 15}, 0.01, 10.0));
  std::size_t p1 = 0, p2 = 0;
  for (std::size_t k = 0; k < k1.q.size(); ++k)
    if (k1.q[k] > k1.q[p1]) p1 = k;
  for (std::size_t k = 0; k < k2.q.size(); ++k)
    if (k2.q[k] > k2.q[p2]) p2 = k;
  CHECK(p2 > p1);
  CHECK(k2.q[p2] < k1.q[p1]);
}

TEST_CASE("doubling the term caps changes the kernel by less than 0.1%") {
  auto s = spec(1.0, {0, 5}, {0, 5});
  auto K = build_kernel(s);
  s.max_lambda = 4000;
  s.max_gamma = 4000;
  auto K2 = build_kernel(s);
  CHECK(rel_sup(K.q, K2.q) < 1e-3);
}

TEST_CASE("mass bounds") {
  SECTION("no flow: absorbed fraction at most the emitted amount") {
    auto s = spec(35.0, {0, 15}, {0, 15}, 0.1, 4000.0);
    s.u = 0.0;
    s.k_d = 0.0;
    double total = build_kernel(s).total();
    CHECK(total <= 1.0 + 1e-6);
    CHECK(total == Approx(1.0).epsilon(1e-3));
    s.k_d = 0.01;
    CHECK(build_kernel(s).total() < total);
  }
  SECTION("with flow: bounded by the advective factor") {
    auto s = spec(35.0, {0, 15}, {0, 15}, 0.1, 4000.0);
    double bound = std::exp(s.u * s.L / (2 * s.D));
    CHECK(build_kernel(s).total() <= bound + 1e-6);
  }
}

TEST_CASE("absorbed total decreases with degradation") {
  double prev = 2.0;
  for (double kd : {0.0, 0.001, 0.01, 0.1, 1.0}) {
    auto s = spec(10.0, {0, 5}, {0, 15}, 0.05, 600.0);
    s.k_d = kd;
    double t = build_kernel(s).total();
    CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("propagation is linear, causal and shift-equivariant") {
  auto K = build_kernel(spec(4.0, {0, 5}, {0, 5}, 0.01, 30.0));
  std::size_t n = 2000;
  SignalTrace x = SignalTrace::zeros(0, 0.01, n), y = x;
  for (std::size_t k = 100; k < 300; ++k) x.values[k] = std::sin(0.01 * static_cast<double>(k)) + 1.0;
  for (std::size_t k = 50; k < 80; ++k) y.values[k] = 2.0;
  auto px = propagate(x, K), py = propagate(y, K);
  auto pxy = propagate(3.0 * x + 0.5 * y, K);
  for (std::size_t k = 0; k < n; ++k) CHECK(pxy[k] == Approx(3 * px[k] + 0.5 * py[k]).margin(1e-12));
  for (std::size_t k = 0; k <= 50; ++k) CHECK(py[k] == 0.0);

  SignalTrace imp = SignalTrace::zeros(0, 0.01, n);
  imp.values[7] = 2.5;
  auto pi = propagate(imp, K);
  for (std::size_t d = 0; d + 7 < n && d < K.q.size(); ++d) CHECK(pi[7 + d] == Approx(2.5 * K.q[d]));

  SignalTrace shifted = SignalTrace::zeros(0, 0.01, n);
  for (std::size_t k = 0; k + 40 < n; ++k) shifted.values[k + 40] = x.values[k];
  auto ps = propagate(shifted, K);
  for (std::size_t k = 0; k + 40 < n; ++k) CHECK(ps[k + 40] == px[k]);

  CHECK_THROWS(propagate(SignalTrace::zeros(0, 0.02, 10), K));
}

TEST_CASE("kernel cache round trip") {
  auto dir = std::filesystem::temp_directory_path() / "cskmc_kernel_cache_test";
  std::filesystem::remove_all(dir);
  KernelCache cache(dir);
  auto s = spec(4.0, {0, 5}, {0, 5}, 0.1, 100.0);
  CHECK_FALSE(cache.load(s).has_value());
  auto K = cache.get(s);
  auto L = cache.load(s);
  REQUIRE(L.has_value());
  CHECK(L->q == K.q);
  CHECK(L->cap_bound == K.cap_bound);
  auto other = s;
  other.k_d = 0.5;
  CHECK_FALSE(cache.load(other).has_value());
  std::filesystem::remove_all(dir);
}
