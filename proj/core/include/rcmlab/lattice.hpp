#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rcmlab/errors.hpp"

namespace rcm {

/// Maximum supported lattice dimension. Desk-scale boxes in d > 4 do not fit
/// in memory anyway.
inline constexpr int kMaxDim = 4;

/// Lattice site coordinates. Components beyond the active dimension are zero.
using Coords = std::array<int, kMaxDim>;

inline Coords make_coords(std::initializer_list<int> xs) {
  Coords c{};
  int j = 0;
  for (int x : xs) c[j++] = x;
  return c;
}

/// l-infinity norm of a site.
int linf(const Coords& c, int d);
/// l1 norm of a site.
int l1(const Coords& c, int d);
int l1_dist(const Coords& a, const Coords& b, int d);

/// Lexicographic comparison on the first d components.
bool lex_less(const Coords& a, const Coords& b, int d);

/// The cube B_R = { x : |x|_inf <= R } with lexicographic site indexing
/// (coordinate 0 most significant, so index order == lexicographic order).
class Box {
 public:
  Box() = default;
  Box(int d, int radius);

  int dim() const { return d_; }
  int radius() const { return radius_; }
  int side() const { return 2 * radius_ + 1; }
  std::int64_t site_count() const { return count_; }

  bool contains(const Coords& c) const;
  std::int64_t index_of(const Coords& c) const;  // DomainError if outside
  Coords coords_of(std::int64_t i) const;

 private:
  int d_ = 0;
  int radius_ = 0;
  std::int64_t count_ = 0;
  std::array<std::int64_t, kMaxDim> stride_{};
};

/// Undirected nearest-neighbor edges of B_R, one index per edge.
///
/// Edge id = lexicographic rank of (min endpoint, axis): sites are swept in
/// index order and for each site the valid positive-direction axes are
/// assigned consecutive ids. The id of a given edge is therefore independent
/// of traversal order, which is what makes counter-based sampling
/// reproducible.
class EdgeIndex {
 public:
  EdgeIndex() = default;
  explicit EdgeIndex(const Box& box);

  const Box& box() const { return box_; }
  std::int64_t edge_count() const { return edge_count_; }

  /// Id of the edge { site, site + e_axis }. DomainError if either endpoint
  /// is outside the box.
  std::int64_t edge_id(const Coords& site, int axis) const;
  std::int64_t edge_id(std::int64_t site_index, int axis) const;

  /// Inverse lookup: (min endpoint index, axis) of an edge id.
  std::pair<std::int64_t, int> endpoint_axis(std::int64_t edge) const;

 private:
  Box box_;
  std::int64_t edge_count_ = 0;
  std::vector<std::int64_t> offset_;  // per site, prefix count of edges
};

}  // namespace rcm
