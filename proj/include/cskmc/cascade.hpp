#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernel.hpp"
#include "kinetics.hpp"
#include "layout.hpp"

namespace cskmc {

/// Numeric parameters needed to turn a layout into running blocks and kernels.
struct CascadeParams {
  std::map<SpeciesId, SpeciesParams> species = default_species();
  BlockOptions block;             ///< cell constants, NOT binding, β scale
  std::map<int, double> thresholds;  ///< C_Th per thermometer index j, nM
  DensityModel density;
  double ts = 0.01;
  double horizon = 3600.0;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Resolves the block configuration of every Block population.
inline std::vector<std::optional<CellBlockConfig>> resolve_blocks(const CircuitLayout& lay, const CascadeParams& p) {
  std::vector<std::optional<CellBlockConfig>> out(lay.populations.size());
  for (std::size_t v = 0; v < lay.populations.size(); ++v) {
    const Population& pop = lay.populations[v];
    if (pop.kind != NodeKind::Block) continue;
    BlockOptions o = p.block;
    o.output_multiplier = lay.output_multiplier(pop);
    if (pop.block == BlockKind::Threshold) {
      auto it = p.thresholds.find(pop.threshold);
      if (it == p.thresholds.end())
        throw ConfigError("no threshold concentration given for B" + std::to_string(pop.threshold));
      o.c_th = it->second;
    }
    out[v] = make_block_config(pop.block, pop.input, pop.output, p.species, o);
  }
  return out;
}

inline KernelSpec edge_kernel_spec(const CircuitLayout& lay, const LayoutEdge& e, const CascadeParams& p) {
  auto it = p.species.find(e.species);
  if (it == p.species.end()) throw ConfigError("undefined species '" + e.species + "'");
  return make_kernel_spec(e.L, e.emit, e.absorb, it->second, lay.geometry, p.ts, p.horizon);
}

/// Builds (or loads) one kernel per distinct edge geometry.
inline std::vector<std::shared_ptr<const PropagationKernel>> build_edge_kernels(const CircuitLayout& lay,
                                                                                const CascadeParams& p,
                                                                                const KernelCache* cache = nullptr,
                                                                                Diagnostics* diag = nullptr) {
  std::map<std::string, std::shared_ptr<const PropagationKernel>> by_key;
  std::vector<std::shared_ptr<const PropagationKernel>> out;
  for (const auto& e : lay.edges) {
    KernelSpec s = edge_kernel_spec(lay, e, p);
    auto& slot = by_key[s.key()];
    if (!slot)
      slot = std::make_shared<const PropagationKernel>(cache ? cache->get(s, diag) : build_kernel(s, diag));
    out.push_back(slot);
  }
  return out;
}

struct CascadeResult {
  double ts = 0.0;
  std::vector<SignalTrace> node_output;  ///< per population: net emitted areal concentration per interval
  std::vector<SignalTrace> node_input;   ///< per population: absorbed areal concentration per interval
  std::map<std::string, SignalTrace> sinks;  ///< detected concentration per interval, by sink name
};

/// Analytic evaluation of a layout: blocks advance interval by interval, each emission is scattered
/// through its edge kernels into the downstream accumulators.
class AnalyticCascade {
 public:
  AnalyticCascade(CircuitLayout layout, CascadeParams params, const KernelCache* cache = nullptr)
      : lay_(std::move(layout)), p_(std::move(params)) {
    lay_.validate();
    blocks_ = resolve_blocks(lay_, p_);
    kernels_ = build_edge_kernels(lay_, p_, cache, &diag_);
    order_ = lay_.topological_order();
  }

  const CircuitLayout& layout() const { return lay_; }
  const CascadeParams& params() const { return p_; }
  const std::vector<std::shared_ptr<const PropagationKernel>>& kernels() const { return kernels_; }
  const std::optional<CellBlockConfig>& block_config(std::size_t v) const { return blocks_[v]; }
  Diagnostics& diagnostics() { return diag_; }

  std::size_t samples() const { return static_cast<std::size_t>(std::llround(p_.horizon / p_.ts)); }

  /// `inputs[i]` is the emission-rate trace (nM/s) driving source bit S_i; absent bits emit nothing.
  CascadeResult evaluate(const std::map<int, SignalTrace>& inputs) {
    const std::size_t N = samples();
    const double ts = p_.ts;
    for (const auto& [bit, tr] : inputs)
      if (tr.size() != N || std::abs(tr.ts - ts) > 1e-12 * ts)
        throw std::invalid_argument("input trace for S" + std::to_string(bit) + " is not on the scenario grid");

    const std::size_t V = lay_.populations.size();
    std::vector<std::vector<double>> acc(lay_.edges.size(), std::vector<double>(N, 0.0));
    std::vector<std::vector<std::size_t>> in_edges(V), out_edges(V);
    for (std::size_t v = 0; v < V; ++v) {
      in_edges[v] = lay_.incoming(v);
      out_edges[v] = lay_.outgoing(v);
    }
    std::vector<BlockState> state(V);
    for (std::size_t v = 0; v < V; ++v)
      if (blocks_[v]) state[v] = initial_state(*blocks_[v], ts);
    CascadeResult res;
    res.ts = ts;
    res.node_output.assign(V, SignalTrace::zeros(0.0, ts, N));
    res.node_input.assign(V, SignalTrace::zeros(0.0, ts, N));
    std::vector<const SignalTrace*> src(V, nullptr);
    for (std::size_t v = 0; v < V; ++v) {
      const Population& pop = lay_.populations[v];
      if (pop.kind == NodeKind::Source) {
        auto it = inputs.find(pop.source_bit);
        if (it != inputs.end()) src[v] = &it->second;
      }
    }

    for (std::size_t k = 0; k < N; ++k) {
      for (std::size_t v : order_) {
        const Population& pop = lay_.populations[v];
        double a = 0.0;
        for (std::size_t e : in_edges[v]) a += acc[e][k];
        res.node_input[v].values[k] = a;
        double x = 0.0;
        if (pop.kind == NodeKind::Source) {
          x = src[v] ? src[v]->values[k] * ts : 0.0;
        } else if (pop.kind == NodeKind::Block) {
          x = block_step(state[v], a, *blocks_[v], ts);
        } else {
          continue;
        }
        res.node_output[v].values[k] = x;
        if (x == 0.0) continue;
        for (std::size_t e : out_edges[v]) {
          const std::vector<double>& q = kernels_[e]->q;
          std::size_t m = std::min(q.size(), N - k);
          double* o = acc[e].data() + k;
          for (std::size_t d = 1; d < m; ++d) o[d] += x * q[d];
        }
      }
    }
    for (std::size_t v : lay_.sinks()) res.sinks[lay_.populations[v].name] = res.node_input[v];
    return res;
  }

  /// Molecules on a population's absorbing surface corresponding to `nM` of areal concentration.
  double molecules(std::size_t v, double nM) const {
    const Population& pop = lay_.populations[v];
    return p_.density.molecules(nM, lay_.geometry.H * pop.lane.width());
  }

 private:
  CircuitLayout lay_;
  CascadeParams p_;
  std::vector<std::optional<CellBlockConfig>> blocks_;
  std::vector<std::shared_ptr<const PropagationKernel>> kernels_;
  std::vector<std::size_t> order_;
  Diagnostics diag_;
};

struct Decision {
  double time = 0.0;
  double count = 0.0;
  bool bit = false;
};

/// Counts molecules detected during `window` seconds ending at each sample time and decides
/// bit-1 iff the count exceeds N_d. `molecules_per_nM` converts the sink trace to molecules.
inline std::vector<Decision> sample_and_decide(const SignalTrace& sink, const std::vector<double>& sample_times,
                                               double N_d, double molecules_per_nM, double window = 60.0) {
  if (N_d < 0) throw std::invalid_argument("sample_and_decide: N_d must be non-negative");
  std::vector<Decision> out;
  const double horizon = sink.t0 + static_cast<double>(sink.size()) * sink.ts;
  auto nw = std::max<long long>(1, std::llround(window / sink.ts));
  for (double t : sample_times) {
    if (t > horizon + 1e-9 || t < sink.t0) throw std::out_of_range("sample time beyond trace horizon");
    auto end = static_cast<long long>(std::llround((t - sink.t0) / sink.ts));
    double c = 0.0;
    for (long long k = std::max(0LL, end - nw); k < end; ++k) c += sink.values[static_cast<std::size_t>(k)];
    double count = c * molecules_per_nM;
    out.push_back({t, count, count > N_d});
  }
  return out;
}

}  // namespace cskmc
