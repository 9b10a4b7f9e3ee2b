#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cskmc {

/// Boolean expression over thermometer signals B_j.
struct BooleanExpr {
  enum class Op { Var, Not, Or, And };
  Op op = Op::Var;
  int var = 0;
  std::vector<BooleanExpr> args;

  static BooleanExpr B(int j) { return {Op::Var, j, {}}; }
  static BooleanExpr Not(BooleanExpr e) { return {Op::Not, 0, {std::move(e)}}; }
  static BooleanExpr Or(std::vector<BooleanExpr> a) { return {Op::Or, 0, std::move(a)}; }
  static BooleanExpr And(std::vector<BooleanExpr> a) { return {Op::And, 0, std::move(a)}; }

  bool eval(const std::vector<bool>& b) const {
    switch (op) {
      case Op::Var: return b.at(static_cast<std::size_t>(var));
      case Op::Not: return !args[0].eval(b);
      case Op::Or:
        for (const auto& a : args)
          if (a.eval(b)) return true;
        return false;
      case Op::And:
        for (const auto& a : args)
          if (!a.eval(b)) return false;
        return true;
    }
    return false;
  }

  bool contains_and() const {
    if (op == Op::And) return true;
    for (const auto& a : args)
      if (a.contains_and()) return true;
    return false;
  }

  /// Longest chain of NOT nodes directly nested below any OR (or the root).
  int max_not_depth() const {
    int here = 0;
    const BooleanExpr* e = this;
    while (e->op == Op::Not) {
      ++here;
      e = &e->args[0];
    }
    int below = 0;
    for (const auto& a : e->args) below = std::max(below, a.max_not_depth());
    return std::max(here, below);
  }

  std::string str() const {
    switch (op) {
      case Op::Var: return "B" + std::to_string(var);
      case Op::Not: return "!" + (args[0].op == Op::Var ? args[0].str() : "(" + args[0].str() + ")");
      case Op::Or:
      case Op::And: {
        std::string s;
        const char* sep = op == Op::Or ? " + " : "*";
        for (std::size_t i = 0; i < args.size(); ++i) {
          if (i) s += sep;
          bool paren = args[i].op == Op::Or;
          s += paren ? "(" + args[i].str() + ")" : args[i].str();
        }
        return s;
      }
    }
    return "";
  }
};

struct ThermometerRow {
  int symbol = 0;
  std::vector<bool> B;  ///< B[j] for j = 0..2^m-2
  std::vector<bool> Y;  ///< Y[i] for i = 0..m-1
};

/// Valid thermometer codes for order m: B_j = 1 iff j < s, Y = binary(s).
inline std::vector<ThermometerRow> thermometer_decode_table(int m) {
  if (m < 1 || m > 8) throw std::invalid_argument("thermometer_decode_table: m must be in [1, 8]");
  int levels = 1 << m;
  std::vector<ThermometerRow> rows;
  for (int s = 0; s < levels; ++s) {
    ThermometerRow r;
    r.symbol = s;
    for (int j = 0; j < levels - 1; ++j) r.B.push_back(j < s);
    for (int i = 0; i < m; ++i) r.Y.push_back(((s >> i) & 1) != 0);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// AND-free back-end: Y_{m-1} = B_{2^{m-1}-1}; otherwise Y_i = B_q + Σ_l NOT(B_{q-(2l-1)2^i} + NOT B_{q-2l·2^i}).
inline std::vector<BooleanExpr> ilf_backend(int m) {
  if (m < 1) throw std::invalid_argument("ilf_backend: m >= 1");
  std::vector<BooleanExpr> Y;
  for (int i = 0; i < m; ++i) {
    if (i == m - 1) {
      Y.push_back(BooleanExpr::B((1 << (m - 1)) - 1));
      continue;
    }
    int q = (1 << (m - 1)) - 1;
    for (int j = 0; j <= m - i - 2; ++j) q += 1 << (m - (j + 2));
    std::vector<BooleanExpr> terms{BooleanExpr::B(q)};
    int nsum = (1 << (m - i - 1)) - 1;
    for (int l = 1; l <= nsum; ++l) {
      int a = q - (2 * l - 1) * (1 << i);
      int b = q - 2 * l * (1 << i);
      terms.push_back(BooleanExpr::Not(BooleanExpr::Or({BooleanExpr::B(a), BooleanExpr::Not(BooleanExpr::B(b))})));
    }
    Y.push_back(BooleanExpr::Or(std::move(terms)));
  }
  return Y;
}

/// Sum-of-products over valid thermometer codes only.
inline std::vector<BooleanExpr> sop_backend(int m) {
  auto table = thermometer_decode_table(m);
  std::vector<BooleanExpr> Y;
  for (int i = 0; i < m; ++i) {
    std::vector<BooleanExpr> minterms;
    for (const auto& row : table) {
      if (!row.Y[static_cast<std::size_t>(i)]) continue;
      std::vector<BooleanExpr> lits;
      for (int j = static_cast<int>(row.B.size()) - 1; j >= 0; --j)
        lits.push_back(row.B[static_cast<std::size_t>(j)] ? BooleanExpr::B(j) : BooleanExpr::Not(BooleanExpr::B(j)));
      minterms.push_back(BooleanExpr::And(std::move(lits)));
    }
    Y.push_back(BooleanExpr::Or(std::move(minterms)));
  }
  return Y;
}

}  // namespace cskmc
