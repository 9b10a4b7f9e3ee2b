#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cskmc {

/// Canonical units: seconds, micrometres, nanomolar.
namespace units {

inline constexpr double second = 1.0;
inline constexpr double minute = 60.0;
inline constexpr double hour = 3600.0;
inline constexpr double avogadro = 6.02214076e23;

inline constexpr double per_minute(double v) { return v / minute; }
inline constexpr double to_per_minute(double v) { return v * minute; }

}  // namespace units

class UnitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// nM held by `count` molecules in `volume_um3` µm³.
inline double count_to_concentration(double count, double volume_um3) {
  if (!(volume_um3 > 0.0)) throw DomainError("volume must be positive");
  if (count < 0.0) throw DomainError("molecule count must be non-negative");
  // 1 nM = 1e-9 mol/L, 1 µm³ = 1e-15 L
  return count / (units::avogadro * volume_um3 * 1e-24);
}

inline double concentration_to_count(double nM, double volume_um3) {
  if (!(volume_um3 > 0.0)) throw DomainError("volume must be positive");
  return nM * units::avogadro * volume_um3 * 1e-24;
}

enum class Dim {
  dimensionless,
  time,
  rate,           // 1/s
  length,
  diffusivity,    // µm²/s
  velocity,       // µm/s
  concentration,  // nM
  conc_rate,      // nM/s
  inv_conc,       // 1/nM
  bimolecular,    // 1/(nM s)
  area,           // µm²
  areal_density,  // molecules/(nM µm²)
  volume,         // µm³
};

inline const char* dim_name(Dim d) {
  switch (d) {
    case Dim::dimensionless: return "dimensionless";
    case Dim::time: return "time";
    case Dim::rate: return "rate (1/time)";
    case Dim::length: return "length";
    case Dim::diffusivity: return "diffusivity (length^2/time)";
    case Dim::velocity: return "velocity (length/time)";
    case Dim::concentration: return "concentration";
    case Dim::conc_rate: return "concentration rate";
    case Dim::inv_conc: return "inverse concentration";
    case Dim::bimolecular: return "bimolecular rate (1/(concentration*time))";
    case Dim::area: return "area";
    case Dim::areal_density: return "molecules per (concentration*area)";
    case Dim::volume: return "volume";
  }
  return "?";
}

namespace detail {

struct UnitEntry {
  std::string_view symbol;
  Dim dim;
  double factor;
};

// Symbols after normalization: 'µ'/'μ' -> 'u', whitespace removed, '1/x' -> '/x'.
inline constexpr UnitEntry unit_table[] = {
    {"s", Dim::time, 1.0},
    {"ms", Dim::time, 1e-3},
    {"min", Dim::time, 60.0},
    {"h", Dim::time, 3600.0},
    {"/s", Dim::rate, 1.0},
    {"/min", Dim::rate, 1.0 / 60.0},
    {"/h", Dim::rate, 1.0 / 3600.0},
    {"um", Dim::length, 1.0},
    {"nm", Dim::length, 1e-3},
    {"mm", Dim::length, 1e3},
    {"um^2/s", Dim::diffusivity, 1.0},
    {"um2/s", Dim::diffusivity, 1.0},
    {"um/s", Dim::velocity, 1.0},
    {"um/min", Dim::velocity, 1.0 / 60.0},
    {"nM", Dim::concentration, 1.0},
    {"pM", Dim::concentration, 1e-3},
    {"uM", Dim::concentration, 1e3},
    {"nM/s", Dim::conc_rate, 1.0},
    {"nM/min", Dim::conc_rate, 1.0 / 60.0},
    {"nM/h", Dim::conc_rate, 1.0 / 3600.0},
    {"/nM", Dim::inv_conc, 1.0},
    {"/uM", Dim::inv_conc, 1e-3},
    {"/nM/s", Dim::bimolecular, 1.0},
    {"/(nM*s)", Dim::bimolecular, 1.0},
    {"/nM/min", Dim::bimolecular, 1.0 / 60.0},
    {"um^2", Dim::area, 1.0},
    {"um2", Dim::area, 1.0},
    {"/nM/um^2", Dim::areal_density, 1.0},
    {"/(nM*um^2)", Dim::areal_density, 1.0},
    {"um^3", Dim::volume, 1.0},
    {"um3", Dim::volume, 1.0},
    {"fL", Dim::volume, 1.0},
};

inline std::string normalize_unit(std::string_view raw) {
  std::string out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(raw[i]);
    if (std::isspace(c)) continue;
    // UTF-8 micro sign (C2 B5) and greek mu (CE BC)
    if (c == 0xC2 && i + 1 < raw.size() && static_cast<unsigned char>(raw[i + 1]) == 0xB5) {
      out.push_back('u');
      ++i;
      continue;
    }
    if (c == 0xCE && i + 1 < raw.size() && static_cast<unsigned char>(raw[i + 1]) == 0xBC) {
      out.push_back('u');
      ++i;
      continue;
    }
    out.push_back(static_cast<char>(c));
  }
  if (out.size() >= 2 && out[0] == '1' && out[1] == '/') out.erase(0, 1);
  return out;
}

}  // namespace detail

/// Parses "<number><unit>" (e.g. "0.05/min", "89 um^2/s") into canonical units.
/// Dimensionless quantities accept a bare number; anything else demands a unit.
inline double parse_quantity(std::string_view text, Dim expected) {
  std::string s(text);
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw UnitError("'" + s + "' does not start with a number");
  }
  std::string unit = detail::normalize_unit(std::string_view(s).substr(pos));
  if (expected == Dim::dimensionless) {
    if (unit.empty() || unit == "1") return value;
    throw UnitError("'" + s + "' should be dimensionless");
  }
  if (unit.empty())
    throw UnitError("'" + s + "' has no unit; expected " + dim_name(expected));
  for (const auto& e : detail::unit_table) {
    if (e.symbol == unit) {
      if (e.dim != expected)
        throw UnitError("'" + s + "' has dimension " + dim_name(e.dim) + ", expected " +
                        dim_name(expected));
      return value * e.factor;
    }
  }
  throw UnitError("unknown unit '" + unit + "' in '" + s + "'");
}

/// Canonical unit symbol used when writing quantities back out.
inline const char* canonical_unit(Dim d) {
  switch (d) {
    case Dim::dimensionless: return "";
    case Dim::time: return "s";
    case Dim::rate: return "/s";
    case Dim::length: return "um";
    case Dim::diffusivity: return "um^2/s";
    case Dim::velocity: return "um/s";
    case Dim::concentration: return "nM";
    case Dim::conc_rate: return "nM/s";
    case Dim::inv_conc: return "/nM";
    case Dim::bimolecular: return "/nM/s";
    case Dim::area: return "um^2";
    case Dim::areal_density: return "/nM/um^2";
    case Dim::volume: return "um^3";
  }
  return "";
}

/// Lossless text form: 17 significant digits plus the canonical unit.
inline std::string format_quantity(double value, Dim d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf) + canonical_unit(d);
}

}  // namespace cskmc
