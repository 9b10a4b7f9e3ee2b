#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eigen.hpp"
#include "model.hpp"
#include "signal.hpp"

namespace cskmc {

struct KernelSpec {
  double L = 1.0;
  Surface emit;
  Surface absorb;
  double D = 89.0;
  double k_a = 9.0;
  double k_d = 0.0;
  double W = 15.0;
  double H = 3.0;
  double u = 0.1;
  double ts = 0.01;
  double horizon = 3600.0;  ///< longest trace the kernel will be convolved with, s

  int max_lambda = 2000;
  int max_gamma = 2000;
  double rel_tol = 1e-12;

  double G1() const { return k_a / D; }

  std::string key() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "L=%.17g emit=[%.17g,%.17g] absorb=[%.17g,%.17g] D=%.17g ka=%.17g kd=%.17g W=%.17g H=%.17g "
                  "u=%.17g ts=%.17g horizon=%.17g caps=%d,%d tol=%.17g",
                  L, emit.y_lo, emit.y_hi, absorb.y_lo, absorb.y_hi, D, k_a, k_d, W, H, u, ts, horizon,
                  max_lambda, max_gamma, rel_tol);
    return buf;
  }
};

inline KernelSpec make_kernel_spec(double L, Surface emit, Surface absorb, const SpeciesParams& sp,
                                   const ChannelGeometry& g, double ts, double horizon) {
  g.check_surface(emit);
  g.check_surface(absorb);
  KernelSpec k;
  k.L = L;
  k.emit = emit;
  k.absorb = absorb;
  k.D = sp.D;
  k.k_a = sp.k_a;
  k.k_d = sp.k_d;
  k.W = g.width();
  k.H = g.H;
  k.u = g.u;
  k.ts = ts;
  k.horizon = horizon;
  return k;
}

/// Interval-integrated absorption kernel: q[d] is the absorbed areal concentration during
/// [d ts, (d+1) ts) per unit areal concentration released during the interval ending at time 0.
struct PropagationKernel {
  KernelSpec spec;
  std::vector<EigenRoot> eigenvalues;
  std::vector<double> gamma;  ///< lateral modes iπ/W, i = 1..
  std::vector<double> q;
  int K_lambda = 0;
  int K_gamma = 0;
  bool cap_bound = false;

  std::size_t size() const { return q.size(); }
  double total() const {
    double s = 0;
    for (double x : q) s += x;
    return s;
  }
};

namespace detail {

inline double phi1(double z) { return z < 1e-8 ? 1.0 - 0.5 * z : -std::expm1(-z) / z; }

struct KernelTerms {
  std::vector<double> a;     ///< λ-mode amplitudes A_l cos(λ_l L)
  std::vector<double> r;     ///< λ-mode rates λ²D + k_d + u²/4D
  std::vector<double> c;     ///< lateral amplitudes: c[0] = Δy_e Δy_a, c[i] = 2 S_i
  std::vector<double> rho;   ///< lateral rates γ_i² D
};

}  // namespace detail

/// Tabulates the kernel on the ts grid by exact integration of the double series over each interval.
inline PropagationKernel build_kernel(const KernelSpec& s, Diagnostics* diag = nullptr) {
  if (!(s.L > 0) || !(s.ts > 0) || !(s.D > 0)) throw std::invalid_argument("build_kernel: L, ts, D must be positive");
  PropagationKernel K;
  K.spec = s;
  const double pi = std::numbers::pi;
  const double dya = s.absorb.width();
  const double dye = s.emit.width();
  const auto nmax = static_cast<std::size_t>(std::ceil(s.horizon / s.ts)) + 1;
  if (dya <= 0.0 || dye <= 0.0) {
    K.q.assign(2, 0.0);
    return K;
  }
  const double G1 = s.G1();
  K.eigenvalues = solve_eigenvalues(s.L, G1, s.max_lambda);

  detail::KernelTerms T;
  const double drift = s.u * s.u / (4 * s.D) + s.k_d;
  for (const auto& e : K.eigenvalues) {
    double lam = e.value();
    double l2g = lam * lam + G1 * G1;
    double A = l2g / (s.L * l2g + G1);
    double cosL = ((e.branch - 1) % 2 == 0 ? 1.0 : -1.0) * std::cos(e.phase);
    T.a.push_back(A * cosL);
    T.r.push_back(lam * lam * s.D + drift);
  }
  T.c.push_back(dye * dya);
  T.rho.push_back(0.0);
  for (int i = 1; i <= s.max_gamma; ++i) {
    double g = i * pi / s.W;
    K.gamma.push_back(g);
    double Se = std::sin(g * s.emit.y_hi) - std::sin(g * s.emit.y_lo);
    double Sa = std::sin(g * s.absorb.y_hi) - std::sin(g * s.absorb.y_lo);
    T.c.push_back(2.0 * Se * Sa / (g * g));
    T.rho.push_back(g * g * s.D);
  }

  const double pref = s.k_a / (s.H * dya) * (2.0 * s.H / s.W);
  const double adv = s.u * s.L / (2 * s.D);
  const double tol = s.rel_tol;
  const int nl = static_cast<int>(T.a.size());
  const int ng = static_cast<int>(T.c.size());

  // Truncation: a term is dropped once its envelope is below tol times the accumulated envelope.
  auto count_terms = [&](const std::vector<double>& amp, const std::vector<double>& rate, double t0,
                         bool integrated) {
    double acc = 0.0;
    int n = static_cast<int>(amp.size());
    for (int j = 0; j < n; ++j) {
      double env = integrated ? std::abs(amp[j]) * s.ts * detail::phi1(rate[j] * s.ts)
                              : std::abs(amp[j]) * std::exp(-(rate[j] - rate[0]) * t0);
      if (j > 0 && env < tol * acc) return j;
      acc += env;
    }
    return n;
  };

  K.q.assign(1, 0.0);
  double qmax = 0.0;
  for (std::size_t d = 1; d < nmax; ++d) {
    double t0 = static_cast<double>(d - 1) * s.ts;
    bool first = (d == 1);
    int kl = count_terms(T.a, T.r, t0, first);
    int kg = count_terms(T.c, T.rho, t0, first);
    if (first && (kl >= nl || kg >= ng)) K.cap_bound = true;
    K.K_lambda = std::max(K.K_lambda, kl);
    K.K_gamma = std::max(K.K_gamma, kg);
    double sum = 0.0;
    for (int l = 0; l < kl; ++l) {
      double inner = 0.0;
      for (int i = 0; i < kg; ++i) {
        double R = T.r[l] + T.rho[i];
        inner += T.c[i] * std::exp(adv - R * t0) * s.ts * detail::phi1(R * s.ts);
      }
      sum += T.a[l] * inner;
    }
    double v = pref * sum;
    if (v < 0) v = 0.0;
    K.q.push_back(v);
    qmax = std::max(qmax, v);
    // tail: once past the peak, stop when the slowest mode can no longer contribute
    double slow = std::abs(pref * T.a[0] * T.c[0]) * std::exp(adv - T.r[0] * t0) * s.ts;
    if (qmax > 0 && v < qmax && slow < 1e-15 * qmax) break;
  }
  if (K.cap_bound && diag)
    diag->warn("kernel L=" + std::to_string(s.L) + ": first-interval series reached the term cap (" +
               std::to_string(nl) + "/" + std::to_string(ng) + ")");
  return K;
}

/// Scatter convolution: out[j] = Σ_k in[k] q[j-k]; emission released in interval k is absorbed
/// from interval k+1 on.
inline void convolve_into(const std::vector<double>& in, const std::vector<double>& q, std::vector<double>& out) {
  const std::size_t n = out.size();
  for (std::size_t k = 0; k < in.size() && k < n; ++k) {
    double x = in[k];
    if (x == 0.0) continue;
    std::size_t m = std::min(q.size(), n - k);
    double* o = out.data() + k;
    const double* qq = q.data();
    for (std::size_t d = 1; d < m; ++d) o[d] += x * qq[d];
  }
}

inline SignalTrace propagate(const SignalTrace& input, const PropagationKernel& K, Diagnostics* diag = nullptr) {
  if (std::abs(input.ts - K.spec.ts) > 1e-12 * K.spec.ts)
    throw std::invalid_argument("propagate: trace and kernel grids differ");
  SignalTrace out = SignalTrace::zeros(input.t0, input.ts, input.size());
  convolve_into(input.values, K.q, out.values);
  clamp_nonnegative(out.values, diag);
  return out;
}

/// On-disk kernel store: text header (format version, key, metadata) followed by float64 samples.
class KernelCache {
 public:
  static constexpr const char* magic = "CSKMC-KERNEL";
  static constexpr int version = 1;

  explicit KernelCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path path_for(const KernelSpec& s) const {
    char name[64];
    std::snprintf(name, sizeof name, "k_%016zx.bin", std::hash<std::string>{}(s.key()));
    return dir_ / name;
  }

  std::optional<PropagationKernel> load(const KernelSpec& s) const {
    std::ifstream in(path_for(s), std::ios::binary);
    if (!in) return std::nullopt;
    std::string line;
    std::getline(in, line);
    if (line != std::string(magic) + " " + std::to_string(version)) return std::nullopt;
    std::string key;
    std::getline(in, key);
    if (key != s.key()) return std::nullopt;
    std::getline(in, line);
    std::istringstream meta(line);
    std::uint64_t n = 0;
    int kl = 0, kg = 0, cap = 0;
    if (!(meta >> n >> kl >> kg >> cap)) return std::nullopt;
    PropagationKernel K;
    K.spec = s;
    K.K_lambda = kl;
    K.K_gamma = kg;
    K.cap_bound = cap != 0;
    K.q.resize(n);
    in.read(reinterpret_cast<char*>(K.q.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) return std::nullopt;
    return K;
  }

  void store(const PropagationKernel& K) const {
    std::filesystem::create_directories(dir_);
    std::ofstream out(path_for(K.spec), std::ios::binary);
    out << magic << " " << version << "\n" << K.spec.key() << "\n"
        << K.q.size() << " " << K.K_lambda << " " << K.K_gamma << " " << (K.cap_bound ? 1 : 0) << "\n";
    out.write(reinterpret_cast<const char*>(K.q.data()), static_cast<std::streamsize>(K.q.size() * sizeof(double)));
  }

  PropagationKernel get(const KernelSpec& s, Diagnostics* diag = nullptr) const {
    if (auto k = load(s)) return *k;
    PropagationKernel K = build_kernel(s, diag);
    store(K);
    return K;
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace cskmc
