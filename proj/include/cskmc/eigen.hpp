#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cskmc {

/// Root of λ tan(λL) = G1 in branch l, stored as λL = (l-1)π + φ with φ ∈ [0, π/2).
/// Keeping the phase separately preserves precision for high branches.
struct EigenRoot {
  int branch = 1;
  double phase = 0.0;
  double L = 1.0;

  double value() const { return ((branch - 1) * std::numbers::pi + phase) / L; }
};

/// |λ tan(λL) - G1| evaluated in extended precision from the (branch, phase) form.
inline long double eigen_residual(const EigenRoot& r, double G1) {
  long double pi = 3.141592653589793238462643383279502884L;
  long double lam = ((r.branch - 1) * pi + static_cast<long double>(r.phase)) / static_cast<long double>(r.L);
  return std::fabs(lam * std::tan(static_cast<long double>(r.phase)) - static_cast<long double>(G1));
}

class EigenSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves branch l: f(φ) = ((l-1)π + φ) sin φ - G1 L cos φ = 0 on [0, π/2].
/// f is strictly increasing there, so bisection keeps a valid bracket while Newton converges.
inline EigenRoot solve_branch(int l, double L, double G1) {
  const double pi = std::numbers::pi;
  const double base = (l - 1) * pi;
  const double gl = G1 * L;
  auto f = [&](double p) { return (base + p) * std::sin(p) - gl * std::cos(p); };
  auto df = [&](double p) { return std::sin(p) + (base + p) * std::cos(p) + gl * std::sin(p); };

  double lo = 0.0, hi = pi / 2;
  if (gl == 0.0) return {l, 0.0, L};
  if (f(lo) >= 0.0) return {l, 0.0, L};
  // initial guess from the small-phase or Dirichlet-side expansions
  double p = (base > 0) ? std::atan(gl / base) : std::min(std::sqrt(gl), 1.0);
  if (!(p > lo && p < hi)) p = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double fp = f(p);
    if (fp == 0.0) return {l, p, L};
    if (fp < 0) lo = p; else hi = p;
    double step = fp / df(p);
    double np = p - step;
    if (!(np > lo && np < hi)) np = 0.5 * (lo + hi);
    if (std::abs(np - p) <= 4e-17 * std::max(std::abs(p), 1e-300) || hi - lo <= 4e-17 * hi) {
      p = np;
      break;
    }
    p = np;
  }
  if (!(p >= 0 && p < pi / 2))
    throw EigenSolveError("eigenvalue branch " + std::to_string(l) + " failed to bracket");
  return {l, p, L};
}

/// First `count` roots of λ tan(λL) = G1, one per branch ((l-1)π/L, (l-1/2)π/L).
inline std::vector<EigenRoot> solve_eigenvalues(double L, double G1, int count) {
  if (!(L > 0) || G1 < 0 || count < 1) throw std::invalid_argument("solve_eigenvalues: L > 0, G1 >= 0, count >= 1");
  std::vector<EigenRoot> roots;
  roots.reserve(static_cast<std::size_t>(count));
  for (int l = 1; l <= count; ++l) roots.push_back(solve_branch(l, L, G1));
  return roots;
}

}  // namespace cskmc
