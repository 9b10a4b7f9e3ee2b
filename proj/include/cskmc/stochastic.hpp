#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "cascade.hpp"

namespace cskmc {

using Rng = std::mt19937_64;

inline Rng realization_rng(std::uint64_t seed, std::uint64_t realization) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(realization), static_cast<std::uint32_t>(realization >> 32), 0x5eedu};
  return Rng(seq);
}

/// Reflects a coordinate into [0, W] (specular reflection at both walls, any number of times).
inline double fold(double y, double W) {
  double p = std::fmod(y, 2 * W);
  if (p < 0) p += 2 * W;
  return p <= W ? p : 2 * W - p;
}

/// One diffusing molecule. Lateral coordinates are valid at time t_lat and advanced lazily.
struct ParticleState {
  double x = 0.0, y = 0.0, z = 0.0;
  double t_lat = 0.0;
  double death = 0.0;  ///< degradation time
  bool alive = true;
};

struct Census {
  std::uint64_t emitted = 0, degraded = 0, absorbed = 0, alive = 0;
  bool consistent() const { return alive + degraded + absorbed == emitted; }
};

/// Transport parameters of one particle population.
struct TransportParams {
  double D = 89.0, u = 0.1, k_d = 0.0, k_a = 9.0;
  double W = 15.0, H = 3.0;
  double L = 1.0;          ///< absorbing wall position
  bool wall = true;        ///< partially absorbing wall at x = L
  bool reflect_x0 = true;  ///< reflective wall at x = 0
  int substeps = 1;
};

/// Absorption probability per wall contact, p_a = k_a sqrt(π Δt / D), clamped to [0, 1].
inline double absorption_probability(double k_a, double dt, double D, Diagnostics* diag = nullptr) {
  double p = k_a * std::sqrt(std::numbers::pi * dt / D);
  if (p > 1.0) {
    if (diag) diag->warn("absorption probability " + std::to_string(p) + " clamped to 1; reduce the sub-step");
    p = 1.0;
  }
  return p;
}

/// Substeps per t_s so that the per-axis displacement scale stays below `fraction` of L.
inline int substeps_for(double L, double D, double ts, double fraction = 0.05) {
  double dt_max = (fraction * L) * (fraction * L) / (2 * D);
  return std::max(1, static_cast<int>(std::ceil(ts / dt_max - 1e-9)));
}

struct AbsorptionEvent {
  std::size_t index;  ///< particle slot
  double y;
};

/// Moves particles over [t, t+ts]: drift-diffusion in x with reflective x = 0 and a partially
/// absorbing wall at x = L; degradation at the particle's lifetime. Returns absorptions; census is
/// updated with degraded and absorbed counts.
template <class Fn>
inline void step_particles(std::vector<ParticleState>& ps, const TransportParams& tp, double t, double ts, Rng& rng,
                           Census& census, Fn&& on_absorb, Diagnostics* diag = nullptr) {
  const int ns = std::max(1, tp.substeps);
  const double dt = ts / ns;
  const double sig = std::sqrt(2 * tp.D * dt);
  const double pa = tp.wall ? absorption_probability(tp.k_a, dt, tp.D, diag) : 0.0;
  const double drift = tp.u * dt;
  boost::random::normal_distribution<double> normal;
  boost::random::uniform_01<double> unif;
  for (auto& p : ps) {
    if (!p.alive) continue;
    double x = p.x;
    bool done = false;
    for (int s = 0; s < ns; ++s) {
      double t1 = t + (s + 1) * dt;
      if (p.death <= t1) {
        p.alive = false;
        ++census.degraded;
        --census.alive;
        done = true;
        break;
      }
      x += drift + sig * normal(rng);
      if (tp.reflect_x0 && x < 0) x = -x;
      if (tp.wall && x >= tp.L) {
        if (unif(rng) < pa) {
          double sl = std::sqrt(2 * tp.D * (t1 - p.t_lat));
          p.y = fold(p.y + sl * normal(rng), tp.W);
          p.z = fold(p.z + sl * normal(rng), tp.H);
          p.t_lat = t1;
          p.x = tp.L;
          p.alive = false;
          ++census.absorbed;
          --census.alive;
          on_absorb(p);
          done = true;
          break;
        }
        x = 2 * tp.L - x;
        if (tp.reflect_x0 && x < 0) x = -x;
      }
    }
    if (!done) p.x = x;
  }
}

/// Advances the lazily tracked lateral coordinates of all live particles to time t.
inline void sync_lateral(std::vector<ParticleState>& ps, const TransportParams& tp, double t, Rng& rng) {
  boost::random::normal_distribution<double> normal;
  for (auto& p : ps) {
    if (!p.alive || t <= p.t_lat) continue;
    double sl = std::sqrt(2 * tp.D * (t - p.t_lat));
    p.y = fold(p.y + sl * normal(rng), tp.W);
    p.z = fold(p.z + sl * normal(rng), tp.H);
    p.t_lat = t;
  }
}

/// Inserts `count` particles at x = 0, uniform over the strip [y_lo, y_hi] × [0, H], at time t.
inline void emit_particles(std::vector<ParticleState>& ps, std::uint64_t count, Surface strip,
                           const TransportParams& tp, double t, Rng& rng, Census& census) {
  boost::random::uniform_01<double> unif;
  std::exponential_distribution<double> life(tp.k_d > 0 ? tp.k_d : 1.0);
  for (std::uint64_t i = 0; i < count; ++i) {
    ParticleState p;
    p.x = 0.0;
    p.y = strip.y_lo + unif(rng) * strip.width();
    p.z = unif(rng) * tp.H;
    p.t_lat = t;
    p.death = tp.k_d > 0 ? t + life(rng) : std::numeric_limits<double>::infinity();
    ps.push_back(p);
  }
  census.emitted += count;
  census.alive += count;
}

/// Drops dead slots (keeps relative order so the run is reproducible).
inline void compact(std::vector<ParticleState>& ps) {
  std::size_t w = 0;
  for (std::size_t r = 0; r < ps.size(); ++r)
    if (ps[r].alive) ps[w++] = ps[r];
  ps.resize(w);
}

/// One engineered cell (a y-strip of a population) running its own kinetics.
struct CellAgent {
  std::size_t population = 0;
  Surface strip;
  double x_station = 0.0;
  BlockState state;
  std::uint64_t absorbed = 0;
  double residual = 0.0;  ///< fractional molecule carried to the next emission, in [0, 1)
};

/// Converts the agent's absorbed count to nM, advances its block by ts, and returns whole molecules
/// to emit this interval.
inline std::uint64_t step_agent(CellAgent& ag, const CellBlockConfig& cfg, const DensityModel& dm, double H,
                                double ts) {
  double area = H * ag.strip.width();
  double a = dm.concentration(static_cast<double>(ag.absorbed), area);
  ag.absorbed = 0;
  double out = block_step(ag.state, a, cfg, ts);
  double expected = dm.molecules(out, area) + ag.residual;
  double whole = std::floor(expected);
  ag.residual = expected - whole;
  if (ag.residual >= 1.0 || ag.residual < 0.0) ag.residual = 0.0;
  return static_cast<std::uint64_t>(whole);
}

struct StochasticOptions {
  double sigma_fraction = 0.05;  ///< sub-step rule: √(2DΔt) ≤ fraction · L
  double report_step = 60.0;     ///< aggregation bin for recorded traces, s
  bool random_initial_residual = true;
};

/// Per-bin molecule counts of one realization.
struct RealizationTraces {
  std::vector<std::vector<double>> node_emitted;   ///< per population, molecules per report bin
  std::vector<std::vector<double>> node_absorbed;  ///< per population, molecules per report bin
  Census census;
  std::uint64_t census_checks = 0;
  std::uint64_t census_failures = 0;
};

/// Agent-based engine for a layout: particle domains per emitting population, agents tiling every
/// block population in strips of width 2R.
class StochasticEngine {
 public:
  StochasticEngine(CircuitLayout layout, CascadeParams params, StochasticOptions opt = {})
      : lay_(std::move(layout)), p_(std::move(params)), opt_(opt) {
    lay_.validate();
    blocks_ = resolve_blocks(lay_, p_);
    const double ts = p_.ts;
    bin_ = std::max<long long>(1, std::llround(opt_.report_step / ts));
    for (std::size_t v = 0; v < lay_.populations.size(); ++v) {
      auto outs = lay_.outgoing(v);
      if (outs.empty()) continue;
      std::map<double, std::vector<std::size_t>> by_L;
      for (std::size_t e : outs) by_L[lay_.edges[e].L].push_back(e);
      for (auto& [L, es] : by_L) {
        Domain d;
        d.emitter = v;
        d.edges = es;
        const SpeciesParams& sp = p_.species.at(lay_.edges[es[0]].species);
        d.tp = {sp.D, lay_.geometry.u, sp.k_d, sp.k_a, lay_.geometry.width(), lay_.geometry.H, L, true, true,
                substeps_for(L, sp.D, ts, opt_.sigma_fraction)};
        domains_.push_back(d);
      }
    }
    double strip = 2 * lay_.geometry.R;
    for (std::size_t v = 0; v < lay_.populations.size(); ++v) {
      const Population& pop = lay_.populations[v];
      if (pop.kind != NodeKind::Block) continue;
      int n = strip > 0 ? std::max(1, static_cast<int>(std::lround(pop.lane.width() / strip))) : 1;
      first_agent_.resize(lay_.populations.size(), 0);
      agent_count_.resize(lay_.populations.size(), 0);
      first_agent_[v] = agents_.size();
      agent_count_[v] = static_cast<std::size_t>(n);
      for (int i = 0; i < n; ++i) {
        CellAgent a;
        a.population = v;
        double w = pop.lane.width() / n;
        a.strip = {pop.lane.y_lo + i * w, i == n - 1 ? pop.lane.y_hi : pop.lane.y_lo + (i + 1) * w};
        a.x_station = pop.x_absorb;
        a.state = initial_state(*blocks_[v], p_.ts);
        agents_.push_back(a);
      }
    }
    first_agent_.resize(lay_.populations.size(), 0);
    agent_count_.resize(lay_.populations.size(), 0);
  }

  const CircuitLayout& layout() const { return lay_; }
  const CascadeParams& params() const { return p_; }
  long long bin_samples() const { return bin_; }
  std::size_t samples() const { return static_cast<std::size_t>(std::llround(p_.horizon / p_.ts)); }
  std::size_t bins() const { return (samples() + static_cast<std::size_t>(bin_) - 1) / static_cast<std::size_t>(bin_); }
  std::size_t agents_of(std::size_t v) const { return agent_count_[v]; }
  const std::vector<int> substeps() const {
    std::vector<int> s;
    for (const auto& d : domains_) s.push_back(d.tp.substeps);
    return s;
  }
  Diagnostics& diagnostics() { return diag_; }

  /// One independent realization. `inputs[i]` are emission-rate traces (nM/s) per source bit.
  RealizationTraces run_one(const std::map<int, SignalTrace>& inputs, std::uint64_t seed, std::uint64_t r) {
    Rng rng = realization_rng(seed, r);
    boost::random::uniform_01<double> unif;
    const std::size_t N = samples();
    const double ts = p_.ts;
    const double H = lay_.geometry.H;
    const std::size_t V = lay_.populations.size();
    RealizationTraces out;
    out.node_emitted.assign(V, std::vector<double>(bins(), 0.0));
    out.node_absorbed.assign(V, std::vector<double>(bins(), 0.0));

    std::vector<CellAgent> agents = agents_;
    for (auto& a : agents) a.residual = opt_.random_initial_residual ? unif(rng) : 0.0;
    std::vector<double> src_residual(V, 0.0);
    for (auto& x : src_residual) x = opt_.random_initial_residual ? unif(rng) : 0.0;
    std::vector<std::vector<ParticleState>> parts(domains_.size());
    std::vector<Census> census(domains_.size());
    std::vector<std::uint64_t> sink_count(V, 0);

    std::vector<const SignalTrace*> src(V, nullptr);
    for (std::size_t v = 0; v < V; ++v) {
      const Population& pop = lay_.populations[v];
      if (pop.kind != NodeKind::Source) continue;
      auto it = inputs.find(pop.source_bit);
      if (it != inputs.end()) src[v] = &it->second;
    }
    std::vector<std::vector<std::size_t>> doms_of(V);
    for (std::size_t d = 0; d < domains_.size(); ++d) doms_of[domains_[d].emitter].push_back(d);

    for (std::size_t k = 0; k < N; ++k) {
      const double t = static_cast<double>(k) * ts;
      const std::size_t b = k / static_cast<std::size_t>(bin_);
      // transport during [t, t+ts]
      for (std::size_t d = 0; d < domains_.size(); ++d) {
        const Domain& dom = domains_[d];
        auto credit = [&](const ParticleState& p) {
          for (std::size_t e : dom.edges) {
            const LayoutEdge& edge = lay_.edges[e];
            if (!edge.absorb.contains(p.y) && !(p.y == edge.absorb.y_hi && edge.absorb.y_hi == lay_.geometry.width()))
              continue;
            std::size_t to = edge.to;
            out.node_absorbed[to][b] += 1.0;
            if (lay_.populations[to].kind == NodeKind::Sink) {
              ++sink_count[to];
            } else {
              std::size_t a0 = first_agent_[to], na = agent_count_[to];
              std::size_t hit = a0 + na - 1;
              for (std::size_t i = a0; i < a0 + na; ++i)
                if (p.y < agents[i].strip.y_hi) {
                  hit = i;
                  break;
                }
              ++agents[hit].absorbed;
            }
            return;
          }
        };
        step_particles(parts[d], dom.tp, t, ts, rng, census[d], credit, &diag_);
        compact(parts[d]);
        ++out.census_checks;
        if (!census[d].consistent() || census[d].alive != parts[d].size()) ++out.census_failures;
      }
      // kinetics and emission at t+ts
      for (std::size_t v = 0; v < V; ++v) {
        const Population& pop = lay_.populations[v];
        if (pop.kind == NodeKind::Source) {
          if (!src[v] || doms_of[v].empty()) continue;
          double expected = p_.density.molecules(src[v]->values[k] * ts, H * pop.lane.width()) + src_residual[v];
          double whole = std::floor(expected);
          src_residual[v] = expected - whole;
          auto n = static_cast<std::uint64_t>(whole);
          out.node_emitted[v][b] += static_cast<double>(n);
          for (std::size_t d : doms_of[v]) emit_particles(parts[d], n, pop.lane, domains_[d].tp, t + ts, rng, census[d]);
        } else if (pop.kind == NodeKind::Block) {
          for (std::size_t i = first_agent_[v]; i < first_agent_[v] + agent_count_[v]; ++i) {
            std::uint64_t n = step_agent(agents[i], *blocks_[v], p_.density, H, ts);
            if (n == 0) continue;
            out.node_emitted[v][b] += static_cast<double>(n);
            for (std::size_t d : doms_of[v])
              emit_particles(parts[d], n, agents[i].strip, domains_[d].tp, t + ts, rng, census[d]);
          }
        }
      }
    }
    for (const auto& c : census) {
      out.census.emitted += c.emitted;
      out.census.degraded += c.degraded;
      out.census.absorbed += c.absorbed;
      out.census.alive += c.alive;
    }
    return out;
  }

 private:
  struct Domain {
    std::size_t emitter = 0;
    std::vector<std::size_t> edges;
    TransportParams tp;
  };
  CircuitLayout lay_;
  CascadeParams p_;
  StochasticOptions opt_;
  std::vector<std::optional<CellBlockConfig>> blocks_;
  std::vector<Domain> domains_;
  std::vector<CellAgent> agents_;
  std::vector<std::size_t> first_agent_, agent_count_;
  long long bin_ = 1;
  Diagnostics diag_;
};

/// Mean and standard error across realizations, per population and report bin (molecules).
struct RealizationSummary {
  std::size_t n = 0;
  double report_step = 0.0;
  std::vector<std::vector<double>> emitted_mean, emitted_se;
  std::vector<std::vector<double>> absorbed_mean, absorbed_se;
  Census census;
  std::uint64_t census_checks = 0;
  std::uint64_t census_failures = 0;
};

inline RealizationSummary run_realizations(StochasticEngine& eng, const std::map<int, SignalTrace>& inputs,
                                           std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("run_realizations: n >= 1");
  const std::size_t V = eng.layout().populations.size();
  const std::size_t B = eng.bins();
  std::vector<std::vector<double>> se1(V, std::vector<double>(B, 0.0)), se2 = se1, sa1 = se1, sa2 = se1;
  RealizationSummary s;
  s.n = n;
  s.report_step = static_cast<double>(eng.bin_samples()) * eng.params().ts;
  for (std::size_t r = 0; r < n; ++r) {
    RealizationTraces tr = eng.run_one(inputs, seed, r);
    for (std::size_t v = 0; v < V; ++v)
      for (std::size_t b = 0; b < B; ++b) {
        double e = tr.node_emitted[v][b], a = tr.node_absorbed[v][b];
        se1[v][b] += e;
        se2[v][b] += e * e;
        sa1[v][b] += a;
        sa2[v][b] += a * a;
      }
    s.census.emitted += tr.census.emitted;
    s.census.degraded += tr.census.degraded;
    s.census.absorbed += tr.census.absorbed;
    s.census.alive += tr.census.alive;
    s.census_checks += tr.census_checks;
    s.census_failures += tr.census_failures;
  }
  auto finish = [&](const std::vector<std::vector<double>>& m1, const std::vector<std::vector<double>>& m2,
                    std::vector<std::vector<double>>& mean, std::vector<std::vector<double>>& se) {
    mean.assign(V, std::vector<double>(B, 0.0));
    se.assign(V, std::vector<double>(B, 0.0));
    double dn = static_cast<double>(n);
    for (std::size_t v = 0; v < V; ++v)
      for (std::size_t b = 0; b < B; ++b) {
        double mu = m1[v][b] / dn;
        mean[v][b] = mu;
        if (n > 1) {
          double var = std::max(0.0, (m2[v][b] - dn * mu * mu) / (dn - 1));
          se[v][b] = std::sqrt(var / dn);
        }
      }
  };
  finish(se1, se2, s.emitted_mean, s.emitted_se);
  finish(sa1, sa2, s.absorbed_mean, s.absorbed_se);
  return s;
}

}  // namespace cskmc
