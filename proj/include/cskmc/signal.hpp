#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cskmc {

/// Collects non-fatal warnings (clamped negatives, truncation caps, p_a clamping).
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

/// Clamps negative residue to zero. Values below -warn_below produce one warning.
inline void clamp_nonnegative(std::vector<double>& v, Diagnostics* diag = nullptr,
                              double warn_below = 1e-9) {
  double worst = 0.0;
  for (double& x : v) {
    if (x < 0.0) {
      worst = std::min(worst, x);
      x = 0.0;
    }
  }
  if (diag && worst < -warn_below)
    diag->warn("clamped negative concentration " + std::to_string(worst) + " nM to 0");
}

/// Uniformly sampled series; sample k covers [t0 + k*ts, t0 + (k+1)*ts).
struct SignalTrace {
  double t0 = 0.0;
  double ts = 0.01;
  std::vector<double> values;

  SignalTrace() = default;
  SignalTrace(double t0_, double ts_, std::vector<double> v) : t0(t0_), ts(ts_), values(std::move(v)) {
    if (!(ts > 0.0)) throw std::invalid_argument("SignalTrace: ts must be positive");
  }
  static SignalTrace zeros(double t0, double ts, std::size_t n) {
    return SignalTrace(t0, ts, std::vector<double>(n, 0.0));
  }

  std::size_t size() const { return values.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * ts; }
  double operator[](std::size_t k) const { return values[k]; }
  double& operator[](std::size_t k) { return values[k]; }

  bool same_grid(const SignalTrace& o) const {
    return t0 == o.t0 && ts == o.ts && values.size() == o.values.size();
  }
  double sum() const {
    double s = 0.0;
    for (double x : values) s += x;
    return s;
  }
  double max() const {
    double m = 0.0;
    for (double x : values) m = std::max(m, x);
    return m;
  }
  std::size_t argmax() const {
    std::size_t i = 0;
    for (std::size_t k = 1; k < values.size(); ++k)
      if (values[k] > values[i]) i = k;
    return i;
  }

  SignalTrace& operator+=(const SignalTrace& o) {
    if (!same_grid(o)) throw std::invalid_argument("SignalTrace: grid mismatch");
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
    return *this;
  }
  SignalTrace& operator*=(double a) {
    for (double& x : values) x *= a;
    return *this;
  }
};

inline SignalTrace operator+(SignalTrace a, const SignalTrace& b) { return a += b; }
inline SignalTrace operator*(double a, SignalTrace b) { return b *= a; }

/// Rectangular pulse of `amplitude` from t_on for `duration`, on the grid [0, horizon).
inline SignalTrace rectangular(double ts, double horizon, double t_on, double duration,
                               double amplitude) {
  auto n = static_cast<std::size_t>(std::llround(horizon / ts));
  SignalTrace tr = SignalTrace::zeros(0.0, ts, n);
  auto k0 = static_cast<long long>(std::llround(t_on / ts));
  auto k1 = static_cast<long long>(std::llround((t_on + duration) / ts));
  for (long long k = std::max(0LL, k0); k < std::min<long long>(k1, static_cast<long long>(n)); ++k)
    tr.values[static_cast<std::size_t>(k)] = amplitude;
  return tr;
}

namespace detail {
inline long long step_ratio(double a, double b) {
  double r = a / b;
  long long q = std::llround(r);
  if (q < 1 || std::abs(r - static_cast<double>(q)) > 1e-9 * r)
    throw std::invalid_argument("resample: steps are not integer multiples");
  return q;
}
}  // namespace detail

/// Linear interpolation when refining, left-point decimation when coarsening.
inline SignalTrace resample(const SignalTrace& tr, double new_ts) {
  if (!(new_ts > 0.0)) throw std::invalid_argument("resample: new_ts must be positive");
  if (new_ts == tr.ts) return tr;
  std::vector<double> out;
  if (new_ts < tr.ts) {
    long long f = detail::step_ratio(tr.ts, new_ts);
    std::size_t n = tr.size();
    out.reserve(n * static_cast<std::size_t>(f));
    for (std::size_t k = 0; k < n; ++k) {
      double a = tr.values[k];
      double b = (k + 1 < n) ? tr.values[k + 1] : a;
      out.push_back(a);
      for (long long j = 1; j < f; ++j) {
        double w = static_cast<double>(j) / static_cast<double>(f);
        out.push_back(a + (b - a) * w);
      }
    }
  } else {
    long long f = detail::step_ratio(new_ts, tr.ts);
    for (std::size_t k = 0; k < tr.size(); k += static_cast<std::size_t>(f)) out.push_back(tr.values[k]);
  }
  return SignalTrace(tr.t0, new_ts, std::move(out));
}

}  // namespace cskmc
