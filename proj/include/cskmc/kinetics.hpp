#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"
#include "signal.hpp"

namespace cskmc {

enum class BlockKind { ID, NOT, Threshold };

inline const char* block_kind_name(BlockKind k) {
  switch (k) {
    case BlockKind::ID: return "ID";
    case BlockKind::NOT: return "NOT";
    case BlockKind::Threshold: return "Threshold";
  }
  return "?";
}

/// Fully resolved numeric parameters of one cell block (canonical units).
struct CellBlockConfig {
  BlockKind kind = BlockKind::ID;
  SpeciesId input_species;
  SpeciesId output_species;

  double eta = 1.0;
  double xi = 20.0;
  double k_f = 1.0;

  double k_in = 0.0;       ///< intracellular input decay (input species k_d)
  double theta_in = 1.0;   ///< activation Hill θ
  double n_in = 1.0;       ///< activation Hill n
  double beta_out = 0.0;   ///< output production
  double k_out = 0.0;      ///< intracellular output decay (output species k_d)

  double beta_rep = 0.0;   ///< repressor production (NOT, Threshold)
  double k_rep = 0.0;      ///< repressor decay
  double theta_rep = 1.0;  ///< repression binding θ
  double n_rep = 1.0;      ///< repression binding n

  double theta_th = 1.0;   ///< threshold-molecule Hill θ (Threshold)
  double n_th = 1.0;
  double c_th = 0.0;               ///< constant threshold-molecule level, nM
  std::vector<double> c_th_trace;  ///< optional per-interval threshold-molecule level

  double output_multiplier = 1.0;  ///< population-size weighting on released output
  bool primed = true;  ///< threshold repressor starts at its no-input equilibrium
  /// Bound on the change of θ_R·C_R within one internal step of the thresholding unit, relative to
  /// 1 + θ_R·C_R. Intervals where production or annihilation would move the repressor further are
  /// split into equal internal steps; 0 keeps one step per interval.
  double reaction_step_limit = 0.0;
  int max_internal_steps = 65536;

  void validate() const {
    if (!(eta > 0) || !(xi > 0)) throw std::invalid_argument("block: eta and xi must be positive");
    if (kind == BlockKind::Threshold && !(k_f > 0))
      throw std::invalid_argument("threshold block: k_f must be positive");
    if (c_th < 0) throw std::invalid_argument("threshold block: C_Th must be non-negative");
  }

  double threshold_level(std::size_t m) const {
    if (!c_th_trace.empty()) return c_th_trace[std::min(m, c_th_trace.size() - 1)];
    return c_th;
  }
  /// Repressor production rate f_R driven by the threshold molecule.
  double f_R(std::size_t m) const { return beta_rep * hill(threshold_level(m), theta_th, n_th); }
};

/// How the NOT gate binds its repressor to the output promoter.
enum class NotRepression { OutputSpecies, RepressorRow };

struct BlockOptions {
  CellConstants cell;
  NotRepression not_repression = NotRepression::OutputSpecies;
  SpeciesId repressor = "R";
  double beta_scale = 1.0;  ///< multiplier on every production rate
  double c_th = 0.0;
  double output_multiplier = 1.0;
  bool prime_threshold = true;
  double reaction_step_limit = 0.05;  ///< see CellBlockConfig; 0 gives one reaction step per interval
};

/// Maps (kind, input, output) onto species parameter rows.
inline CellBlockConfig make_block_config(BlockKind kind, const SpeciesId& in, const SpeciesId& out,
                                         const std::map<SpeciesId, SpeciesParams>& species,
                                         const BlockOptions& opt) {
  auto get = [&](const SpeciesId& s) -> const SpeciesParams& {
    auto it = species.find(s);
    if (it == species.end()) throw std::invalid_argument("undefined species '" + s + "'");
    return it->second;
  };
  const SpeciesParams& I = get(in);
  const SpeciesParams& O = get(out);
  CellBlockConfig c;
  c.kind = kind;
  c.input_species = in;
  c.output_species = out;
  c.eta = opt.cell.eta;
  c.xi = opt.cell.xi;
  c.k_f = opt.cell.k_f;
  c.k_in = I.k_d;
  c.theta_in = I.theta;
  c.n_in = I.n;
  c.beta_out = O.beta * opt.beta_scale;
  c.k_out = O.k_d;
  c.output_multiplier = opt.output_multiplier;
  c.primed = opt.prime_threshold;
  c.reaction_step_limit = opt.reaction_step_limit;
  if (kind != BlockKind::ID) {
    const SpeciesParams& R = get(opt.repressor);
    c.beta_rep = R.beta * opt.beta_scale;
    c.k_rep = R.k_d;
    if (kind == BlockKind::Threshold || opt.not_repression == NotRepression::RepressorRow) {
      c.theta_rep = R.theta;
      c.n_rep = R.n;
    } else {
      c.theta_rep = O.theta;
      c.n_rep = O.n;
    }
    c.theta_th = I.theta;
    c.n_th = I.n;
    c.c_th = opt.c_th;
  }
  c.validate();
  return c;
}

struct BlockState {
  double C_Iin = 0.0;
  double C_R = 0.0;
  double C_Oin = 0.0;
  double C_O_accum = 0.0;
  std::size_t m = 0;  ///< intervals advanced so far
};

/// Starting state of a block: empty, except a primed thresholding unit whose repressor sits at the
/// thresholding value and whose leaky output is at equilibrium. With `ts` > 0 the repressor level is
/// the fixed point of the discrete step, ts·f_R/(e^{k_R ts} − 1), which tends to f_R/k_R as ts → 0.
inline BlockState initial_state(const CellBlockConfig& cfg, double ts = 0.0) {
  BlockState st;
  if (cfg.kind == BlockKind::Threshold && cfg.primed && cfg.k_rep > 0) {
    st.C_R = ts > 0 ? ts * cfg.f_R(0) / std::expm1(cfg.k_rep * ts) : cfg.f_R(0) / cfg.k_rep;
    st.C_Oin = cfg.beta_out * repression(st.C_R, cfg.theta_rep, cfg.n_rep) / (cfg.k_out + cfg.xi);
  }
  return st;
}

/// h1(t) = η e^{-k_d t}.
inline double exchange_impulse(double eta, double k_d, double t) {
  if (t < 0) throw DomainError("exchange_impulse: t must be non-negative");
  return eta * std::exp(-k_d * t);
}

struct ForcedStep {
  double c1;        ///< state at the end of the step
  double integral;  ///< ∫ c dt over the step
};

namespace detail {
/// φ1(z) = (1-e^{-z})/z, φ2 = (1-φ1)/z, φ3 = (1/2-φ2)/z, with series near z = 0.
inline void phi123(double z, double& p1, double& p2, double& p3) {
  if (z < 1e-2) {
    double z2 = z * z, z3 = z2 * z, z4 = z3 * z;
    p1 = 1.0 - z / 2 + z2 / 6 - z3 / 24 + z4 / 120;
    p2 = 0.5 - z / 6 + z2 / 24 - z3 / 120 + z4 / 720;
    p3 = 1.0 / 6 - z / 24 + z2 / 120 - z3 / 720 + z4 / 5040;
    return;
  }
  p1 = -std::expm1(-z) / z;
  p2 = (1.0 - p1) / z;
  p3 = (0.5 - p2) / z;
}
}  // namespace detail

/// Exact solution of dc/dt = P(t) - k c over [0, ts] with P linear from P0 to P1.
inline ForcedStep linear_forced_step(double c0, double P0, double P1, double k, double ts) {
  double z = k * ts, p1, p2, p3;
  detail::phi123(z, p1, p2, p3);
  double s = (P1 - P0) / ts;
  double c1 = c0 * std::exp(-z) + P0 * ts * p1 + s * ts * ts * p2;
  double integ = c0 * ts * p1 + P0 * ts * ts * p2 + s * ts * ts * ts * p3;
  return {std::max(c1, 0.0), std::max(integ, 0.0)};
}

/// Mass-action consumption dx/dt = dy/dt = -k_f x y over ts; returns x(ts).
inline double bimolecular_update(double x, double y, double k_f, double ts) {
  if (x <= 0.0 || y <= 0.0) return std::max(x, 0.0);
  double scale = std::max(x, y);
  if (std::abs(x - y) <= 1e-9 * scale) return x / (1.0 + k_f * ts * x);
  double d = x - y;
  if (d > 0) {
    double e = std::exp(-k_f * ts * d);
    return x * d / (x - y * e);
  }
  // y > x: multiply through by exp(-k_f ts (y - x)) to keep the exponent negative
  double e = std::exp(k_f * ts * d);
  return x * (-d) * e / (y - x * e);
}

/// Repressor update of the thresholding unit (production, degradation, then reaction).
inline double threshold_repressor_step(double C_R_prev, double C_Iin_prev, double f_R_prev,
                                       double a_prev, const CellBlockConfig& cfg, double ts) {
  if (C_R_prev < 0 || C_Iin_prev < 0 || f_R_prev < 0 || a_prev < 0)
    throw DomainError("threshold_repressor_step: negative input");
  double cr0 = (ts * f_R_prev + C_R_prev) * std::exp(-cfg.k_rep * ts);
  double ci0 = (cfg.eta * a_prev + C_Iin_prev) * std::exp(-cfg.k_in * ts);
  return bimolecular_update(cr0, ci0, cfg.k_f, ts);
}

/// Intracellular input update of the thresholding unit; mirror of the repressor step.
inline double threshold_input_step(double C_R_prev, double C_Iin_prev, double f_R_prev,
                                   double a_prev, const CellBlockConfig& cfg, double ts) {
  if (C_R_prev < 0 || C_Iin_prev < 0 || f_R_prev < 0 || a_prev < 0)
    throw DomainError("threshold_input_step: negative input");
  double cr0 = (ts * f_R_prev + C_R_prev) * std::exp(-cfg.k_rep * ts);
  double ci0 = (cfg.eta * a_prev + C_Iin_prev) * std::exp(-cfg.k_in * ts);
  return bimolecular_update(ci0, cr0, cfg.k_f, ts);
}

namespace detail {
inline double release_output(BlockState& st, const CellBlockConfig& cfg, double P0, double P1,
                             double ts) {
  ForcedStep o = linear_forced_step(st.C_Oin, P0, P1, cfg.k_out + cfg.xi, ts);
  st.C_Oin = o.c1;
  double released = cfg.xi * o.integral;
  st.C_O_accum += released;
  return released * cfg.output_multiplier;
}
}  // namespace detail

/// ID block: returns net released output over [t, t+ts] for absorbed input `a` (nM).
inline double id_block_step(BlockState& st, double a, const CellBlockConfig& cfg, double ts) {
  if (a < 0) throw DomainError("id_block_step: negative input");
  double x0 = st.C_Iin + cfg.eta * a;
  double x1 = x0 * std::exp(-cfg.k_in * ts);
  double P0 = cfg.beta_out * hill(x0, cfg.theta_in, cfg.n_in);
  double P1 = cfg.beta_out * hill(x1, cfg.theta_in, cfg.n_in);
  st.C_Iin = x1;
  ++st.m;
  return detail::release_output(st, cfg, P0, P1, ts);
}

/// NOT block: input induces repressor, repressor suppresses output production.
inline double not_block_step(BlockState& st, double a, const CellBlockConfig& cfg, double ts) {
  if (a < 0) throw DomainError("not_block_step: negative input");
  double x0 = st.C_Iin + cfg.eta * a;
  double x1 = x0 * std::exp(-cfg.k_in * ts);
  double Pr0 = cfg.beta_rep * hill(x0, cfg.theta_in, cfg.n_in);
  double Pr1 = cfg.beta_rep * hill(x1, cfg.theta_in, cfg.n_in);
  double r0 = st.C_R;
  double r1 = linear_forced_step(r0, Pr0, Pr1, cfg.k_rep, ts).c1;
  double P0 = cfg.beta_out * repression(r0, cfg.theta_rep, cfg.n_rep);
  double P1 = cfg.beta_out * repression(r1, cfg.theta_rep, cfg.n_rep);
  st.C_Iin = x1;
  st.C_R = r1;
  ++st.m;
  return detail::release_output(st, cfg, P0, P1, ts);
}

namespace detail {

/// Threshold unit advanced over one interval in n equal internal steps. Same splitting as the
/// single step (production, degradation, annihilation, then output release), with the per-step
/// factors hoisted out of the loop.
inline double threshold_internal_steps(BlockState& st, double a, double fR, const CellBlockConfig& cfg, double ts,
                                       int n) {
  const double h = ts / n;
  const double er = std::exp(-cfg.k_rep * h), ei = std::exp(-cfg.k_in * h);
  const double z = (cfg.k_out + cfg.xi) * h, ez = std::exp(-z);
  double p1, p2, p3;
  phi123(z, p1, p2, p3);
  double released = 0.0;
  double P0 = cfg.beta_out * repression(st.C_R, cfg.theta_rep, cfg.n_rep);
  for (int i = 0; i < n; ++i) {
    double r = (h * fR + st.C_R) * er;
    double c = ((i == 0 ? cfg.eta * a : 0.0) + st.C_Iin) * ei;
    if (r > 0.0 && c > 0.0) {
      double big = std::max(r, c), small = std::min(r, c), gap = big - small;
      if (gap <= 1e-9 * big) {
        r = c = r / (1.0 + cfg.k_f * h * r);
      } else {
        double e = std::exp(-cfg.k_f * h * gap);
        double s1 = small * gap * e / (big - small * e);
        if (r < c) {
          r = s1;
          c = s1 + gap;
        } else {
          c = s1;
          r = s1 + gap;
        }
      }
    }
    double P1 = cfg.beta_out * repression(r, cfg.theta_rep, cfg.n_rep);
    double slope = P1 - P0;
    double o1 = st.C_Oin * ez + P0 * h * p1 + slope * h * p2;
    double integ = st.C_Oin * h * p1 + P0 * h * h * p2 + slope * h * h * p3;
    st.C_Oin = std::max(o1, 0.0);
    double rel = cfg.xi * std::max(integ, 0.0);
    st.C_O_accum += rel;
    released += rel;
    st.C_R = r;
    st.C_Iin = c;
    P0 = P1;
  }
  return released * cfg.output_multiplier;
}

}  // namespace detail

/// Thresholding block: input and threshold-induced repressor annihilate; output is repressed by
/// the surviving repressor.
inline double threshold_block_step(BlockState& st, double a, const CellBlockConfig& cfg, double ts) {
  if (a < 0) throw DomainError("threshold_block_step: negative input");
  const double fR = cfg.f_R(st.m);
  int n = 1;
  if (cfg.reaction_step_limit > 0) {
    const double ci = st.C_Iin + cfg.eta * a;
    const double consumed = std::min(ci, st.C_R * cfg.k_f * ci * ts);
    const double swing = cfg.theta_rep * (ts * fR + consumed) / (1.0 + cfg.theta_rep * st.C_R);
    n = static_cast<int>(
        std::min<double>(cfg.max_internal_steps, std::max(1.0, std::ceil(swing / cfg.reaction_step_limit))));
  }
  if (n > 1) {
    double out = detail::threshold_internal_steps(st, a, fR, cfg, ts, n);
    ++st.m;
    return out;
  }
  double r0 = st.C_R;
  double r1 = threshold_repressor_step(st.C_R, st.C_Iin, fR, a, cfg, ts);
  double i1 = threshold_input_step(st.C_R, st.C_Iin, fR, a, cfg, ts);
  double P0 = cfg.beta_out * repression(r0, cfg.theta_rep, cfg.n_rep);
  double P1 = cfg.beta_out * repression(r1, cfg.theta_rep, cfg.n_rep);
  st.C_R = r1;
  st.C_Iin = i1;
  ++st.m;
  return detail::release_output(st, cfg, P0, P1, ts);
}

inline double block_step(BlockState& st, double a, const CellBlockConfig& cfg, double ts) {
  switch (cfg.kind) {
    case BlockKind::ID: return id_block_step(st, a, cfg, ts);
    case BlockKind::NOT: return not_block_step(st, a, cfg, ts);
    case BlockKind::Threshold: return threshold_block_step(st, a, cfg, ts);
  }
  return 0.0;
}

/// Runs a block over a whole absorbed-input trace from its initial state.
inline SignalTrace apply_block(const SignalTrace& input, const CellBlockConfig& cfg) {
  BlockState st = initial_state(cfg, input.ts);
  SignalTrace out = SignalTrace::zeros(input.t0, input.ts, input.size());
  for (std::size_t k = 0; k < input.size(); ++k) out.values[k] = block_step(st, input.values[k], cfg, input.ts);
  return out;
}

// Convolution forms: the same operators written as discrete convolutions of the absorbed input with
// the exchange impulse response, followed by the release kernel of the output stage.

namespace detail {

/// Net release per interval from unit production held constant over one interval.
inline std::vector<double> release_kernel(const CellBlockConfig& cfg, double ts, std::size_t n) {
  double kap = cfg.k_out + cfg.xi;
  double em1 = -std::expm1(-kap * ts);
  double c_end = em1 / kap;
  std::vector<double> g(n, 0.0);
  if (n == 0) return g;
  g[0] = cfg.xi * (ts / kap - em1 / (kap * kap));
  double tail = cfg.xi * c_end * em1 / kap;
  double e = std::exp(-kap * ts);
  double w = tail;
  for (std::size_t d = 1; d < n; ++d) {
    g[d] = w;
    w *= e;
    if (w < 1e-300) break;
  }
  return g;
}

/// x[k] = Σ_{i≤k} η a[i] e^{-k_in (k-i) ts}: intracellular input at the start of interval k.
inline std::vector<double> exchange_convolution(const SignalTrace& a, const CellBlockConfig& cfg) {
  std::size_t n = a.size();
  std::vector<double> x(n, 0.0);
  std::vector<double> h(n);
  for (std::size_t d = 0; d < n; ++d) h[d] = exchange_impulse(cfg.eta, cfg.k_in, static_cast<double>(d) * a.ts);
  for (std::size_t i = 0; i < n; ++i) {
    double ai = a.values[i];
    if (ai == 0.0) continue;
    for (std::size_t k = i; k < n; ++k) {
      double w = ai * h[k - i];
      if (w < 1e-300) break;
      x[k] += w;
    }
  }
  return x;
}

inline SignalTrace convolve_release(const std::vector<double>& P, const CellBlockConfig& cfg, double t0,
                                    double ts) {
  std::size_t n = P.size();
  std::vector<double> g = release_kernel(cfg, ts, n);
  SignalTrace out = SignalTrace::zeros(t0, ts, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (P[k] == 0.0) continue;
    for (std::size_t j = k; j < n; ++j) {
      double w = g[j - k];
      if (w == 0.0) break;
      out.values[j] += P[k] * w;
    }
  }
  out *= cfg.output_multiplier;
  return out;
}

}  // namespace detail

/// ID operator as g ∗ β·Hill(h1 ∗ C_I), left-endpoint sampling of the inner signal.
inline SignalTrace id_convolution_form(const SignalTrace& a, const CellBlockConfig& cfg) {
  std::vector<double> x = detail::exchange_convolution(a, cfg);
  std::vector<double> P(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) P[k] = cfg.beta_out * hill(x[k], cfg.theta_in, cfg.n_in);
  return detail::convolve_release(P, cfg, a.t0, a.ts);
}

/// NOT operator: repressor = e^{-k_R t} ∗ β_R·Hill(h1 ∗ C_I); output = g ∗ β/(1+(θ C_R)^n).
inline SignalTrace not_convolution_form(const SignalTrace& a, const CellBlockConfig& cfg) {
  std::vector<double> x = detail::exchange_convolution(a, cfg);
  std::size_t n = x.size();
  double ts = a.ts;
  double em1 = -std::expm1(-cfg.k_rep * ts);
  double w1 = cfg.k_rep > 0 ? em1 / cfg.k_rep : ts;
  double e = std::exp(-cfg.k_rep * ts);
  std::vector<double> r(n, 0.0);  // repressor at the start of interval j
  for (std::size_t k = 0; k < n; ++k) {
    double pk = cfg.beta_rep * hill(x[k], cfg.theta_in, cfg.n_in);
    if (pk == 0.0) continue;
    double w = pk * w1;
    for (std::size_t j = k + 1; j < n; ++j) {
      r[j] += w;
      w *= e;
      if (w < 1e-300) break;
    }
  }
  std::vector<double> P(n);
  for (std::size_t j = 0; j < n; ++j) P[j] = cfg.beta_out * repression(r[j], cfg.theta_rep, cfg.n_rep);
  return detail::convolve_release(P, cfg, a.t0, ts);
}

}  // namespace cskmc
