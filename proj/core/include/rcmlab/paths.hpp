#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rcmlab/percolation.hpp"
#include "rcmlab/spectral.hpp"

namespace rcm {

/// Injective site map plus one self-avoiding directed path per source, with
/// validity certificates: every path edge has weight > nu and every path has
/// at most L edges.
struct PathMap {
  std::vector<Coords> sources;
  std::vector<Coords> images;
  std::vector<std::vector<Coords>> paths;  // site sequences source..image
  double nu = 0.0;                         // certified strict lower edge bound
  std::int64_t L = 0;                      // certified max length
  double min_edge_weight = 0.0;            // measured over all path edges
};

/// Re-checks every certificate; throws on violation.
void validate_path_map(const Environment& env, const PathMap& map);

/// Dirichlet energy restricted to the edges with mask 1; f is indexed over
/// the padded box.
double subgraph_energy(const Environment& env, std::span<const std::uint8_t> edge_mask,
                       std::span<const double> f);

/// Detour paths: follow the axis-ordered l1 staircase from each source to its
/// base-map image; on hitting an edge with weight <= bad_threshold take the
/// shortest good-edge detour inside B_{3d}(y) (BFS, lexicographic tie-break),
/// then delete loops. Certifies nu = bad_threshold and L <= (log n)^{2d}.
PathMap build_detour_paths(const Environment& env, int n, std::span<const Coords> sources,
                           const HoleMap& base_map, double bad_threshold);

/// Single-edge paths from each site of I_n to its best neighbor (max incident
/// weight, lexicographic tie-break). Requires I_n 3d-sparse and every source
/// to own an incident weight > alpha.
PathMap neighbor_map(const Environment& env, std::span<const Coords> I_n, double alpha);

/// ((2L)^{d+1}/nu + 3/mu)^{-1}; the certified lower bound for the Dirichlet
/// form against the cluster constant mu.
double pathvsrw_bound(double nu, double L, double mu, int d);

/// Operator of the cluster's subgraph restricted to B_n with zero condition
/// outside: diagonal sums cluster edges only. Used to measure mu.
DirichletOperator assemble_cluster_operator(const Environment& env,
                                            const ClusterLabeling& labeling,
                                            std::int64_t cluster_label, int n);

/// JSON lines {source, image, path:[sites], min_w, len}.
void write_pathmap_jsonl(std::ostream& os, const Environment& env, const PathMap& map);

}  // namespace rcm
