#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rcmlab/lattice.hpp"
#include "rcmlab/law.hpp"

namespace rcm {

/// Working box B_n plus padding; all sites and edges of B_{n+pad} are
/// materialized.
struct BoxSpec {
  int d = 2;
  int n = 1;
  int pad = 5;  // default 2k+3 with k = 1; raise when a module needs room

  int radius() const { return n + pad; }
  void validate() const;
};

/// An immutable i.i.d. conductance field on the padded box. The weight of
/// edge e is inverse_cdf(law, U_e) with U_e derived by counter-based hashing
/// of (seed, edge id), so the array is reproducible bit for bit regardless of
/// enumeration order or thread count.
class Environment {
 public:
  static Environment sample(const BoxSpec& spec, const ConductanceLaw& law, std::uint64_t seed);

  const BoxSpec& spec() const { return spec_; }
  const ConductanceLaw& law() const { return law_; }
  std::uint64_t seed() const { return seed_; }
  const Box& box() const { return edges_.box(); }
  const EdgeIndex& edges() const { return edges_; }
  std::int64_t edge_count() const { return edges_.edge_count(); }
  std::span<const double> weights() const { return weights_; }

  /// Weight of edge { site, site + e_axis }.
  double weight(const Coords& site, int axis) const;
  double weight(std::int64_t site_index, int axis) const;
  double weight_by_id(std::int64_t edge) const { return weights_[static_cast<std::size_t>(edge)]; }

  /// Copy with one edge overridden (fixture construction).
  Environment with_weight(const Coords& site, int axis, double w) const;

  /// Binary export: header (magic, version, d, n, pad, law, seed) followed by
  /// the little-endian weight array in edge-id order. Exact round-trip.
  void save(std::ostream& os) const;
  static Environment load(std::istream& is);

 private:
  Environment() = default;
  BoxSpec spec_;
  ConductanceLaw law_;
  std::uint64_t seed_ = 0;
  EdgeIndex edges_;
  std::vector<double> weights_;
};

/// Local speed field pi_x = sum of the 2d incident conductances, defined on
/// B_{n+pad-1}; argmin taken over B_n with lexicographic tie-break.
struct SpeedField {
  Box box;  // B_{n+pad-1}
  int n = 0;
  std::vector<double> values;
  Coords argmin_site{};
  double min_value = 0.0;

  double at(const Coords& site) const;
};

SpeedField pi_field(const Environment& env);

}  // namespace rcm
