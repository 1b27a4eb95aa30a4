#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rcmlab/environment.hpp"
#include "rcmlab/thresholds.hpp"

namespace rcm {

/// Edge open iff w_e > xi (strict).
std::vector<std::uint8_t> threshold_open(const Environment& env, double xi);

/// Connected components of the thresholded environment over the padded box.
/// Labels are canonical (smallest member site index), hence independent of
/// edge processing order. giant is the largest cluster by B_n site count,
/// ties broken by label.
struct ClusterLabeling {
  Box box;  // padded box
  int d = 0;
  int n = 0;  // working radius
  EdgeIndex edges;                       // padded-box edge enumeration
  std::vector<std::uint8_t> open;        // per-edge, aligned with env edge ids
  std::vector<std::int64_t> label;       // per padded-box site
  std::vector<std::int64_t> cluster_ids;       // sorted
  std::vector<std::int64_t> cluster_sizes;     // padded-box site counts
  std::vector<std::int64_t> cluster_inbox;     // B_n site counts
  std::int64_t giant_label = -1;

  std::int64_t label_at(const Coords& c) const { return label[static_cast<std::size_t>(box.index_of(c))]; }
  std::int64_t size_of(std::int64_t cluster) const;
  bool in_giant(const Coords& c) const { return label_at(c) == giant_label; }
};

ClusterLabeling clusters(const Environment& env, std::vector<std::uint8_t> open, int n);

/// |B_n ∩ giant| / |B_n|.
double cluster_density(const ClusterLabeling& labeling, int n);

/// Injective map from the holes in B_n into the giant cluster, built per
/// partition cell of side 2m+1 with m = floor((log n)^{d+1}).
struct HoleMap {
  int cell_m = 0;
  std::vector<Coords> holes;    // domain, in lexicographic order
  std::vector<Coords> images;   // phi(holes[i]), distinct
  std::int64_t max_l1_distance = 0;
};

HoleMap build_hole_map(const ClusterLabeling& labeling, int n);

/// |∂_E(A | giant)| / |A| where the boundary counts open edges from A to
/// giant \ A. DomainError if A is not a subset of giant ∩ B_n.
double edge_boundary_ratio(const ClusterLabeling& labeling, std::span<const Coords> A, int n);

/// D_n = largest cluster of the environment thresholded at g(n^{1-eps})
/// (finite-volume proxy for the infinite cluster); I_n = B_n \ D_n.
/// PreconditionError if the proxy's in-box density is below 1/2.
struct DnResult {
  ClusterLabeling labeling;
  std::vector<Coords> holes;  // I_n
  double threshold = 0.0;
};

DnResult build_Dn(const Environment& env, const ThresholdFamily& g, double epsilon, int n);

/// true iff every box B_b(z) contains at most one site of I; on failure the
/// witness pair is returned.
struct SparseCheck {
  bool ok = true;
  Coords a{}, b{};
};

SparseCheck is_b_sparse(std::span<const Coords> sites, int b, int d);

void write_labeling_csv(std::ostream& os, const ClusterLabeling& labeling);
void write_holemap_csv(std::ostream& os, const HoleMap& map, int d);

}  // namespace rcm
