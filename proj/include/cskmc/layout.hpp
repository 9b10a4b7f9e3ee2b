#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinetics.hpp"
#include "logic.hpp"
#include "model.hpp"

namespace cskmc {

enum class NodeKind { Source, Block, Sink };

inline const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Source: return "source";
    case NodeKind::Block: return "block";
    case NodeKind::Sink: return "sink";
  }
  return "?";
}

/// One consortium (cell population), an input injection point, or a detection wall.
struct Population {
  std::string name;
  NodeKind kind = NodeKind::Block;
  BlockKind block = BlockKind::ID;
  Surface lane;
  double x_absorb = 0.0;  ///< upstream face (unused for sources)
  double x_emit = 0.0;    ///< downstream face (unused for sinks)
  SpeciesId input;
  SpeciesId output;
  double weight = 1.0;    ///< relative cell count ε
  int source_bit = -1;    ///< Source: index of the driving input bit S_i
  int threshold = -1;     ///< Threshold: index j of the thermometer output B_j
  int output_bit = -1;    ///< Sink: index of the demodulated bit Y_i
};

struct LayoutEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double L = 0.0;
  Surface emit;
  Surface absorb;
  SpeciesId species;
};

class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CircuitLayout {
  int m = 1;
  ChannelGeometry geometry;
  std::vector<Population> populations;
  std::vector<LayoutEdge> edges;
  double unit_emit_area = 15.0;  ///< µm² of emitting cells for weight 1

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < populations.size(); ++i)
      if (populations[i].name == name) return i;
    throw LayoutError("no population named '" + name + "'");
  }

  std::size_t add(Population p) {
    populations.push_back(std::move(p));
    return populations.size() - 1;
  }

  void connect(std::size_t from, std::size_t to, Surface absorb) {
    const Population& a = populations.at(from);
    const Population& b = populations.at(to);
    edges.push_back({from, to, b.x_absorb - a.x_emit, a.lane, absorb, a.output});
  }
  void connect(std::size_t from, std::size_t to) { connect(from, to, populations.at(to).lane); }

  std::vector<std::size_t> incoming(std::size_t v) const {
    std::vector<std::size_t> e;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i].to == v) e.push_back(i);
    return e;
  }
  std::vector<std::size_t> outgoing(std::size_t v) const {
    std::vector<std::size_t> e;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i].from == v) e.push_back(i);
    return e;
  }
  std::vector<std::size_t> sinks() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < populations.size(); ++i)
      if (populations[i].kind == NodeKind::Sink) s.push_back(i);
    return s;
  }
  std::vector<std::size_t> sources() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < populations.size(); ++i)
      if (populations[i].kind == NodeKind::Source) s.push_back(i);
    return s;
  }

  /// Kahn order; throws on cycles.
  std::vector<std::size_t> topological_order() const {
    std::vector<int> indeg(populations.size(), 0);
    for (const auto& e : edges) ++indeg[e.to];
    std::vector<std::size_t> order, ready;
    for (std::size_t i = 0; i < populations.size(); ++i)
      if (indeg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
      std::size_t v = ready.front();
      ready.erase(ready.begin());
      order.push_back(v);
      for (const auto& e : edges)
        if (e.from == v && --indeg[e.to] == 0) ready.push_back(e.to);
    }
    if (order.size() != populations.size()) throw LayoutError("layout contains a cycle");
    return order;
  }

  /// Output-concentration multiplier realizing the cell-count weighting on the population's lane.
  double output_multiplier(const Population& p) const {
    if (!weighted_tx(p)) return 1.0;
    return p.weight * unit_emit_area / (geometry.H * p.lane.width());
  }
  bool weighted_tx(const Population& p) const {
    return p.kind == NodeKind::Block && p.block == BlockKind::ID && p.input == tx_input_species;
  }

  SpeciesId tx_input_species = "aCa";

  /// Structural checks: DAG, wiring species, positive distances, lane containment, orthogonality.
  void validate() const {
    geometry.validate();
    topological_order();
    for (const auto& e : edges) {
      const Population& a = populations.at(e.from);
      const Population& b = populations.at(e.to);
      if (a.kind == NodeKind::Sink) throw LayoutError("edge leaves sink " + a.name);
      if (b.kind == NodeKind::Source) throw LayoutError("edge enters source " + b.name);
      if (!(e.L > 0)) throw LayoutError("edge " + a.name + "->" + b.name + " has non-positive distance");
      if (e.species != a.output) throw LayoutError("edge " + a.name + "->" + b.name + " carries wrong species");
      if (b.input != e.species)
        throw LayoutError("wiring error: " + b.name + " expects " + b.input + " but receives " + e.species);
      geometry.check_surface(e.emit);
      geometry.check_surface(e.absorb);
    }
    for (std::size_t i = 0; i < populations.size(); ++i)
      for (std::size_t j = i + 1; j < populations.size(); ++j) {
        const auto& a = populations[i];
        const auto& b = populations[j];
        if (a.kind == NodeKind::Sink || b.kind == NodeKind::Sink) continue;
        if (a.output == b.output && a.x_emit == b.x_emit && a.lane.overlaps(b.lane))
          throw LayoutError("species " + a.output + " emitted by " + a.name + " and " + b.name +
                            " into overlapping lanes");
      }
  }
};

struct SynthesisOptions {
  ChannelGeometry geometry = default_geometry();
  std::vector<SpeciesId> species_pool = {"aCa", "DOX", "aSc"};
  double lane_width = 2.5;       ///< equal lane width for m >= 3, µm
  double unit_emit_area = 15.0;  ///< µm² of emitting cells for weight 1
};

namespace detail {

struct BackendBuilder {
  CircuitLayout& lay;
  const std::vector<double>& L;
  SpeciesId in_sp, ch_sp, be_sp;
  std::vector<std::size_t> tx;

  std::size_t threshold(int j, Surface lane) {
    Population p;
    p.name = "B" + std::to_string(j) + "@" + fmt_lane(lane);
    p.kind = NodeKind::Block;
    p.block = BlockKind::Threshold;
    p.lane = lane;
    p.x_absorb = L[3];
    p.x_emit = L[4];
    p.input = ch_sp;
    p.output = be_sp;
    p.threshold = j;
    std::size_t v = lay.add(p);
    for (std::size_t t : tx) lay.connect(t, v);
    return v;
  }
  std::size_t stage(const std::string& name, BlockKind k, Surface lane, int s, const SpeciesId& in,
                    const SpeciesId& out) {
    Population p;
    p.name = name;
    p.kind = NodeKind::Block;
    p.block = k;
    p.lane = lane;
    p.x_absorb = L[static_cast<std::size_t>(2 * s + 3)];
    p.x_emit = L[static_cast<std::size_t>(2 * s + 4)];
    p.input = in;
    p.output = out;
    return lay.add(p);
  }
  static std::string fmt_lane(Surface s) {
    std::ostringstream o;
    o << s.y_lo << "-" << s.y_hi;
    return o.str();
  }
};

}  // namespace detail

/// Builds the consortium layout for CSK order m. m = 1 and m = 2 use the reference geometries;
/// m >= 3 allocates equal-width lanes.
inline CircuitLayout synthesize_layout(int m, const SynthesisOptions& opt = {}) {
  if (m < 1 || m > 8) throw LayoutError("synthesize_layout: m must be in [1, 8]");
  std::vector<SpeciesId> pool;
  for (const auto& s : opt.species_pool)
    if (std::find(pool.begin(), pool.end(), s) == pool.end()) pool.push_back(s);
  if (pool.size() < 3)
    throw LayoutError("synthesis needs 3 orthogonal wiring species (modulator input, channel, back-end); pool has " +
                      std::to_string(pool.size()) + ", deficit " + std::to_string(3 - pool.size()));
  const SpeciesId in_sp = pool[0], ch_sp = pool[1], be_sp = pool[2];
  const std::vector<double>& L = opt.geometry.L;
  if (L.size() < (m == 1 ? 6u : 10u)) throw LayoutError("geometry needs stations L0..L" + std::to_string(m == 1 ? 5 : 9));

  CircuitLayout lay;
  lay.m = m;
  lay.unit_emit_area = opt.unit_emit_area;
  lay.tx_input_species = in_sp;
  lay.geometry = opt.geometry;

  auto ilf = ilf_backend(m);

  // lane plan for the demodulator: per Y_i, (NOT-leaf, ID-leaf) pairs then the B_q leaf
  struct Leaf {
    int j;
    int role;  // 0 = double-NOT leaf, 1 = ID leaf of a pair, 2 = NOT leaf of a pair
  };
  std::vector<std::vector<Leaf>> plan(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const BooleanExpr& y = ilf[static_cast<std::size_t>(i)];
    std::vector<Leaf>& lv = plan[static_cast<std::size_t>(i)];
    if (y.op == BooleanExpr::Op::Var) {
      lv.push_back({y.var, 0});
      continue;
    }
    for (std::size_t t = 1; t < y.args.size(); ++t) {
      const BooleanExpr& inner = y.args[t].args[0];  // B_a + !B_b
      lv.push_back({inner.args[1].args[0].var, 2});
      lv.push_back({inner.args[0].var, 1});
    }
    lv.push_back({y.args[0].var, 0});
  }
  std::size_t n_lanes = 0;
  for (const auto& lv : plan) n_lanes += lv.size();

  std::vector<Surface> lanes;
  std::vector<Surface> tx_lanes(static_cast<std::size_t>(m));
  if (m == 1) {
    lay.geometry.W = {opt.geometry.W.at(0), opt.geometry.W.at(2)};
    lanes = {lay.geometry.lane(0, 1)};
    tx_lanes[0] = lanes[0];
  } else if (m == 2) {
    const auto& g = lay.geometry;
    lanes = {g.lane(0, 1), g.lane(1, 2), g.lane(2, 3), g.lane(3, 4)};
    tx_lanes[0] = g.lane(0, 3);
    tx_lanes[1] = g.lane(3, 4);
  } else {
    lay.geometry.W.clear();
    for (std::size_t k = 0; k <= n_lanes; ++k) lay.geometry.W.push_back(static_cast<double>(k) * opt.lane_width);
    for (std::size_t k = 0; k < n_lanes; ++k) lanes.push_back(lay.geometry.lane(k, k + 1));
    double W = lay.geometry.width();
    for (int i = 0; i < m; ++i) tx_lanes[static_cast<std::size_t>(i)] = {W * i / m, W * (i + 1) / m};
  }

  // modulator
  detail::BackendBuilder bb{lay, L, in_sp, ch_sp, be_sp, {}};
  for (int i = m - 1; i >= 0; --i) {
    Population s;
    s.name = "S" + std::to_string(i);
    s.kind = NodeKind::Source;
    s.lane = tx_lanes[static_cast<std::size_t>(i)];
    s.x_emit = L[0];
    s.output = in_sp;
    s.source_bit = i;
    std::size_t sv = lay.add(s);
    Population t;
    t.name = "Tx" + std::to_string(i);
    t.kind = NodeKind::Block;
    t.block = BlockKind::ID;
    t.lane = s.lane;
    t.x_absorb = L[1];
    t.x_emit = L[2];
    t.input = in_sp;
    t.output = ch_sp;
    t.weight = static_cast<double>(1 << i);
    std::size_t tv = lay.add(t);
    lay.connect(sv, tv);
    bb.tx.push_back(tv);
  }

  if (m == 1) {
    std::size_t th = bb.threshold(0, lanes[0]);
    Population y;
    y.name = "Y0";
    y.kind = NodeKind::Sink;
    y.lane = lanes[0];
    y.x_absorb = L[5];
    y.input = be_sp;
    y.output_bit = 0;
    std::size_t yv = lay.add(y);
    lay.connect(th, yv);
    lay.validate();
    return lay;
  }

  // demodulator front-end and ILF back-end, allocated lane by lane from y = 0
  std::size_t lane_idx = 0;
  for (int i = 0; i < m; ++i) {
    const auto& lv = plan[static_cast<std::size_t>(i)];
    std::vector<std::size_t> finals;
    Surface block{lanes[lane_idx].y_lo, lanes[lane_idx + lv.size() - 1].y_hi};
    std::string tag = "Y" + std::to_string(i);
    for (std::size_t k = 0; k < lv.size(); ++k) {
      const Leaf& leaf = lv[k];
      Surface lane = lanes[lane_idx + k];
      std::size_t th = bb.threshold(leaf.j, lane);
      std::string base = tag + "." + std::to_string(k);
      if (leaf.role == 0) {
        std::size_t n1 = bb.stage(base + ".NOT1", BlockKind::NOT, lane, 1, be_sp, in_sp);
        lay.connect(th, n1);
        std::size_t n2 = bb.stage(base + ".NOT2", BlockKind::NOT, lane, 2, in_sp, be_sp);
        lay.connect(n1, n2);
        finals.push_back(n2);
      } else if (leaf.role == 2) {
        // pair: NOT leaf (this lane) and ID leaf (next lane) merge into one NOT across both lanes
        const Leaf& idleaf = lv[k + 1];
        Surface lane_a = lanes[lane_idx + k + 1];
        std::size_t th_a = bb.threshold(idleaf.j, lane_a);
        std::size_t nb = bb.stage(base + ".NOT1", BlockKind::NOT, lane, 1, be_sp, in_sp);
        lay.connect(th, nb);
        std::size_t ia = bb.stage(tag + "." + std::to_string(k + 1) + ".ID1", BlockKind::ID, lane_a, 1, be_sp, in_sp);
        lay.connect(th_a, ia);
        Surface merged{lane.y_lo, lane_a.y_hi};
        std::size_t n2 = bb.stage(base + ".NOT2", BlockKind::NOT, merged, 2, in_sp, be_sp);
        lay.connect(ia, n2);
        lay.connect(nb, n2);
        finals.push_back(n2);
        ++k;
      }
    }
    Population y;
    y.name = tag;
    y.kind = NodeKind::Sink;
    y.lane = block;
    y.x_absorb = L[9];
    y.input = be_sp;
    y.output_bit = i;
    std::size_t yv = lay.add(y);
    for (std::size_t f : finals) lay.connect(f, yv);
    lane_idx += lv.size();
  }
  lay.validate();
  return lay;
}

/// Evaluates the synthesized back-end as pure logic: a population is on iff its inputs say so.
inline std::vector<bool> evaluate_layout_logic(const CircuitLayout& lay, const std::vector<bool>& B) {
  std::vector<int> on(lay.populations.size(), 0);
  for (std::size_t v : lay.topological_order()) {
    const Population& p = lay.populations[v];
    if (p.kind == NodeKind::Source) continue;
    bool any = false;
    for (std::size_t e : lay.incoming(v)) any = any || on[lay.edges[e].from];
    if (p.kind == NodeKind::Sink) {
      on[v] = any;
    } else if (p.block == BlockKind::Threshold) {
      on[v] = B.at(static_cast<std::size_t>(p.threshold));
    } else if (p.block == BlockKind::ID) {
      on[v] = any;
    } else {
      on[v] = !any;
    }
  }
  std::vector<bool> Y(static_cast<std::size_t>(lay.m), false);
  for (std::size_t v : lay.sinks()) Y[static_cast<std::size_t>(lay.populations[v].output_bit)] = on[v] != 0;
  return Y;
}

inline nlohmann::json layout_to_json(const CircuitLayout& lay) {
  using nlohmann::json;
  json j;
  j["m"] = lay.m;
  j["geometry"] = {{"L_um", lay.geometry.L}, {"W_um", lay.geometry.W}, {"H_um", lay.geometry.H},
                   {"R_um", lay.geometry.R}, {"u_um_per_s", lay.geometry.u}};
  j["unit_emit_area_um2"] = lay.unit_emit_area;
  json pops = json::array();
  for (const auto& p : lay.populations) {
    json q = {{"name", p.name}, {"kind", node_kind_name(p.kind)}, {"lane_um", {p.lane.y_lo, p.lane.y_hi}}};
    if (p.kind == NodeKind::Block) {
      q["block"] = block_kind_name(p.block);
      q["weight"] = p.weight;
      q["output_multiplier"] = lay.output_multiplier(p);
    }
    if (p.kind != NodeKind::Source) q["x_absorb_um"] = p.x_absorb;
    if (p.kind != NodeKind::Sink) q["x_emit_um"] = p.x_emit;
    if (!p.input.empty()) q["input"] = p.input;
    if (!p.output.empty()) q["output"] = p.output;
    if (p.source_bit >= 0) q["source_bit"] = p.source_bit;
    if (p.threshold >= 0) q["threshold_index"] = p.threshold;
    if (p.output_bit >= 0) q["output_bit"] = p.output_bit;
    pops.push_back(q);
  }
  j["populations"] = pops;
  json edges = json::array();
  for (const auto& e : lay.edges)
    edges.push_back({{"from", lay.populations[e.from].name},
                     {"to", lay.populations[e.to].name},
                     {"distance_um", e.L},
                     {"emit_um", {e.emit.y_lo, e.emit.y_hi}},
                     {"absorb_um", {e.absorb.y_lo, e.absorb.y_hi}},
                     {"species", e.species}});
  j["edges"] = edges;
  return j;
}

inline std::string layout_to_dot(const CircuitLayout& lay) {
  std::ostringstream o;
  o << "digraph csk_m" << lay.m << " {\n  rankdir=LR;\n";
  for (const auto& p : lay.populations) {
    std::string shape = p.kind == NodeKind::Source ? "invhouse" : p.kind == NodeKind::Sink ? "house" : "box";
    std::string label = p.name;
    if (p.kind == NodeKind::Block) label += std::string("\\n") + block_kind_name(p.block) + " " + p.input + "->" + p.output;
    o << "  \"" << p.name << "\" [shape=" << shape << ", label=\"" << label << "\"];\n";
  }
  for (const auto& e : lay.edges)
    o << "  \"" << lay.populations[e.from].name << "\" -> \"" << lay.populations[e.to].name << "\" [label=\""
      << e.species << " " << e.L << "um\"];\n";
  o << "}\n";
  return o.str();
}

}  // namespace cskmc
