#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "units.hpp"

namespace cskmc {

using SpeciesId = std::string;

/// Kinetic and transport constants of one molecule type, canonical units.
struct SpeciesParams {
  double beta = 0.0;   ///< production rate, nM/s
  double theta = 1.0;  ///< Hill fitting parameter, 1/nM
  double n = 1.0;      ///< Hill coefficient
  double k_d = 0.0;    ///< degradation, 1/s
  double D = 0.0;      ///< diffusion, µm²/s
  double k_a = 0.0;    ///< wall absorption, µm/s

  void validate(const std::string& name) const {
    if (beta < 0 || theta < 0 || k_d < 0 || D < 0 || k_a < 0 || !(n > 0))
      throw std::invalid_argument("species " + name + ": parameters must be non-negative, n > 0");
    if (beta > 0 && !(theta > 0))
      throw std::invalid_argument("species " + name + ": theta must be positive when beta > 0");
  }
};

/// Hill activation x^n / (1 + (θx)^n); saturates at 1/θ^n.
inline double hill(double x, double theta, double n) {
  if (x <= 0.0) return 0.0;
  double tx = std::pow(theta * x, n);
  double th = std::pow(theta, n);
  if (tx > 1e300) return 1.0 / th;
  // (1 - 1/(1+tx)) / θ^n
  return (tx / (1.0 + tx)) / th;
}

/// Repression factor 1/(1 + (θx)^n).
inline double repression(double x, double theta, double n) {
  if (x <= 0.0) return 1.0;
  double t = theta * x;
  return 1.0 / (1.0 + (n == 2.0 ? t * t : std::pow(t, n)));
}

struct Surface {
  double y_lo = 0.0;
  double y_hi = 0.0;
  double width() const { return y_hi - y_lo; }
  bool contains(double y) const { return y >= y_lo && y < y_hi; }
  bool overlaps(const Surface& o) const { return y_lo < o.y_hi && o.y_lo < y_hi; }
  bool operator==(const Surface& o) const { return y_lo == o.y_lo && y_hi == o.y_hi; }
};

struct ChannelGeometry {
  std::vector<double> L;  ///< station x-coordinates, µm
  std::vector<double> W;  ///< lane y-boundaries, µm
  double H = 3.0;
  double R = 1.5;
  double u = 0.1;

  double width() const { return W.empty() ? 0.0 : W.back(); }
  Surface lane(std::size_t i, std::size_t j) const { return {W.at(i), W.at(j)}; }

  void validate() const {
    for (std::size_t i = 1; i < L.size(); ++i)
      if (!(L[i] > L[i - 1])) throw std::invalid_argument("geometry: stations must increase");
    if (W.empty() || W[0] != 0.0) throw std::invalid_argument("geometry: W must start at 0");
    for (std::size_t i = 1; i < W.size(); ++i)
      if (!(W[i] > W[i - 1])) throw std::invalid_argument("geometry: lane bounds must increase");
    if (!(H > 0) || R < 0) throw std::invalid_argument("geometry: H > 0 and R >= 0 required");
  }
  void check_surface(const Surface& s) const {
    if (!(s.y_lo >= 0 && s.y_lo <= s.y_hi && s.y_hi <= width() + 1e-12))
      throw std::invalid_argument("surface outside channel");
  }
};

/// Global cell/channel constants shared by all blocks.
struct CellConstants {
  double eta = 1.0;   ///< exchange multiplier
  double xi = 20.0;   ///< release rate, 1/s
  double k_f = 1.0;   ///< bimolecular rate, 1/(nM s)
};

/// Molecules per (nM · µm²) of wall surface, and the volume convention for count_to_concentration.
struct DensityModel {
  double areal_density = 1.0;          ///< molecules / (nM µm²)
  double volume_per_area = 1.6605390671738466;  ///< µm³ per µm² so that 750 molecules on 15 µm² read 50 nM

  double molecules(double nM, double area_um2) const { return nM * areal_density * area_um2; }
  double concentration(double molecules, double area_um2) const {
    return molecules / (areal_density * area_um2);
  }
  double volume(double area_um2) const { return volume_per_area * area_um2; }
};

/// Default species parameters, per-minute rates converted to seconds.
inline std::map<SpeciesId, SpeciesParams> default_species() {
  using units::per_minute;
  const double D = 89.0, ka = 9.0;
  std::map<SpeciesId, SpeciesParams> m;
  m["aCa"] = {per_minute(0.0369), 0.26, 0.9, per_minute(0.05), D, ka};
  m["aSc"] = {per_minute(0.162), 0.167, 1.2, per_minute(0.023), D, ka};
  m["DOX"] = {per_minute(0.162), 0.167, 1.2, per_minute(0.023), D, ka};
  m["R"] = {per_minute(0.615), 1550.0, 2.0, per_minute(0.15), 0.0, 0.0};
  return m;
}

/// Default channel dimensions (µm).
inline ChannelGeometry default_geometry() {
  ChannelGeometry g;
  g.L = {0, 1, 4, 39, 42, 43, 46, 47, 50, 55};
  g.W = {0, 2.5, 5, 10, 15};
  g.H = 3.0;
  g.R = 1.5;
  g.u = 0.1;
  return g;
}

}  // namespace cskmc
