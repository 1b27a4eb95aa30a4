#include "rcmlab/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace rcm {

std::vector<std::uint8_t> threshold_open(const Environment& env, double xi) {
  if (!(xi > 0.0)) throw DomainError("threshold_open: xi must be positive");
  const auto w = env.weights();
  std::vector<std::uint8_t> open(w.size());
  for (std::size_t e = 0; e < w.size(); ++e) open[e] = w[e] > xi ? 1 : 0;
  return open;
}

namespace {

std::int64_t uf_find(std::vector<std::int64_t>& parent, std::int64_t x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

}  // namespace

ClusterLabeling clusters(const Environment& env, std::vector<std::uint8_t> open, int n) {
  if (open.size() != static_cast<std::size_t>(env.edge_count()))
    throw DomainError("clusters: open field does not match the environment");
  const Box& box = env.box();
  const int d = env.spec().d;
  const std::int64_t m = box.site_count();

  std::vector<std::int64_t> parent(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) parent[static_cast<std::size_t>(i)] = i;

  const int R = box.radius();
  for (std::int64_t i = 0; i < m; ++i) {
    const Coords c = box.coords_of(i);
    for (int j = 0; j < d; ++j) {
      if (c[j] >= R) continue;
      if (!open[static_cast<std::size_t>(env.edges().edge_id(i, j))]) continue;
      Coords nb = c;
      nb[j] += 1;
      const std::int64_t k = box.index_of(nb);
      const std::int64_t ri = uf_find(parent, i);
      const std::int64_t rk = uf_find(parent, k);
      if (ri != rk) parent[static_cast<std::size_t>(std::max(ri, rk))] = std::min(ri, rk);
    }
  }

  ClusterLabeling out;
  out.box = box;
  out.d = d;
  out.n = n;
  out.edges = env.edges();
  out.open = std::move(open);
  out.label.resize(static_cast<std::size_t>(m));
  // roots were always merged toward the smaller index, so the root is the
  // canonical (minimal) member
  for (std::int64_t i = 0; i < m; ++i)
    out.label[static_cast<std::size_t>(i)] = uf_find(parent, i);

  std::vector<std::int64_t> ids;
  for (std::int64_t i = 0; i < m; ++i) {
    if (out.label[static_cast<std::size_t>(i)] == i) ids.push_back(i);
  }
  std::sort(ids.begin(), ids.end());
  out.cluster_ids = ids;
  out.cluster_sizes.assign(ids.size(), 0);
  out.cluster_inbox.assign(ids.size(), 0);

  std::vector<std::int64_t> pos(static_cast<std::size_t>(m), -1);
  for (std::size_t k = 0; k < ids.size(); ++k) pos[static_cast<std::size_t>(ids[k])] = static_cast<std::int64_t>(k);
  const Box bn(d, n);
  for (std::int64_t i = 0; i < m; ++i) {
    const std::int64_t k = pos[static_cast<std::size_t>(out.label[static_cast<std::size_t>(i)])];
    ++out.cluster_sizes[static_cast<std::size_t>(k)];
    if (bn.contains(box.coords_of(i))) ++out.cluster_inbox[static_cast<std::size_t>(k)];
  }

  std::int64_t best = -1, best_count = -1;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (out.cluster_inbox[k] > best_count) {
      best_count = out.cluster_inbox[k];
      best = ids[k];
    }
  }
  out.giant_label = best;
  return out;
}

std::int64_t ClusterLabeling::size_of(std::int64_t cluster) const {
  auto it = std::lower_bound(cluster_ids.begin(), cluster_ids.end(), cluster);
  if (it == cluster_ids.end() || *it != cluster) throw DomainError("size_of: unknown cluster id");
  return cluster_sizes[static_cast<std::size_t>(it - cluster_ids.begin())];
}

double cluster_density(const ClusterLabeling& labeling, int n) {
  if (labeling.giant_label < 0) throw DomainError("cluster_density: no giant cluster");
  const Box bn(labeling.d, n);
  std::int64_t hit = 0;
  for (std::int64_t i = 0; i < bn.site_count(); ++i) {
    if (labeling.in_giant(bn.coords_of(i))) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(bn.site_count());
}

namespace {

int cell_of(int x, int side) {
  // index z with x in [(side)z - m, (side)z + m]
  return static_cast<int>(std::floor((static_cast<double>(x) + (side - 1) / 2.0) / side));
}

}  // namespace

HoleMap build_hole_map(const ClusterLabeling& labeling, int n) {
  const int d = labeling.d;
  const Box& box = labeling.box;
  const Box bn(d, n);
  const int m = static_cast<int>(std::floor(std::pow(std::log(static_cast<double>(n)), d + 1)));
  const int side = 2 * m + 1;

  HoleMap out;
  out.cell_m = m;

  // group every labeled site by partition cell
  struct Cell {
    std::vector<std::int64_t> giants;  // site indices, ascending = lex order
    std::vector<std::int64_t> holes;   // all hole sites in the clipped cell
  };
  std::unordered_map<std::int64_t, Cell> cells;
  auto cell_key = [&](const Coords& c) {
    std::int64_t key = 0;
    for (int j = 0; j < d; ++j) key = key * 1000003 + (cell_of(c[j], side) + 500);
    return key;
  };
  for (std::int64_t i = 0; i < box.site_count(); ++i) {
    const Coords c = box.coords_of(i);
    Cell& cell = cells[cell_key(c)];
    if (labeling.label[static_cast<std::size_t>(i)] == labeling.giant_label) {
      cell.giants.push_back(i);
    } else {
      cell.holes.push_back(i);
    }
  }

  // sources: holes inside B_n, processed in lexicographic order
  std::vector<std::int64_t> sources;
  for (std::int64_t i = 0; i < bn.site_count(); ++i) {
    const Coords c = bn.coords_of(i);
    if (!labeling.in_giant(c)) sources.push_back(box.index_of(c));
  }
  std::sort(sources.begin(), sources.end());

  // density precondition per touched cell
  std::unordered_set<std::int64_t> checked;
  for (std::int64_t s : sources) {
    const Coords c = box.coords_of(s);
    const std::int64_t key = cell_key(c);
    if (!checked.insert(key).second) continue;
    const Cell& cell = cells[key];
    if (cell.giants.size() <= cell.holes.size()) {
      std::ostringstream os;
      os << "build_hole_map: density precondition failed in cell of (";
      for (int j = 0; j < d; ++j) os << (j ? "," : "") << cell_of(c[j], side);
      os << "): " << cell.giants.size() << " giant vs " << cell.holes.size() << " hole sites";
      throw PreconditionError(os.str());
    }
  }

  std::unordered_set<std::int64_t> used;
  for (std::int64_t s : sources) {
    const Coords c = box.coords_of(s);
    const Cell& cell = cells[cell_key(c)];
    std::int64_t best = -1;
    int best_dist = std::numeric_limits<int>::max();
    for (std::int64_t t : cell.giants) {
      if (used.count(t)) continue;
      const int dist = l1_dist(c, box.coords_of(t), d);
      if (dist < best_dist) {  // lex tie-break is free: giants ascend in lex order
        best_dist = dist;
        best = t;
      }
    }
    if (best < 0) throw PreconditionError("build_hole_map: cell ran out of targets");
    used.insert(best);
    out.holes.push_back(c);
    out.images.push_back(box.coords_of(best));
    out.max_l1_distance = std::max<std::int64_t>(out.max_l1_distance, best_dist);
  }

  if (used.size() != out.images.size())
    throw NumericalError("build_hole_map: phi is not injective");
  if (out.max_l1_distance > static_cast<std::int64_t>(
          std::ceil(2.0 * d * std::pow(std::log(static_cast<double>(n)), d + 1))))
    throw NumericalError("build_hole_map: distance bound violated");
  return out;
}

double edge_boundary_ratio(const ClusterLabeling& labeling, std::span<const Coords> A, int n) {
  if (A.empty()) throw DomainError("edge_boundary_ratio: empty set");
  const int d = labeling.d;
  const Box& box = labeling.box;
  const Box bn(d, n);
  std::unordered_set<std::int64_t> in_A;
  for (const Coords& c : A) {
    if (!bn.contains(c) || !labeling.in_giant(c))
      throw DomainError("edge_boundary_ratio: A must lie in giant ∩ B_n");
    in_A.insert(box.index_of(c));
  }
  // open edges {x, y} with x in A and y in giant \ A
  std::int64_t boundary = 0;
  for (const Coords& c : A) {
    for (int j = 0; j < d; ++j) {
      for (int dir : {-1, +1}) {
        Coords nb = c;
        nb[j] += dir;
        if (!box.contains(nb)) continue;
        const Coords& low = dir > 0 ? c : nb;
        if (!labeling.open[static_cast<std::size_t>(labeling.edges.edge_id(low, j))]) continue;
        const std::int64_t nb_index = box.index_of(nb);
        if (in_A.count(nb_index)) continue;
        if (labeling.label[static_cast<std::size_t>(nb_index)] != labeling.giant_label) continue;
        ++boundary;
      }
    }
  }
  return static_cast<double>(boundary) / static_cast<double>(A.size());
}

DnResult build_Dn(const Environment& env, const ThresholdFamily& g, double epsilon, int n) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("build_Dn: epsilon in [0,1) required");
  const double u = std::pow(static_cast<double>(n), 1.0 - epsilon);
  const double threshold = g.eval(u);
  DnResult out;
  out.threshold = threshold;
  out.labeling = clusters(env, threshold_open(env, threshold), n);
  if (cluster_density(out.labeling, n) < 0.5)
    throw PreconditionError("build_Dn: no giant proxy (in-box density below 1/2)");
  const Box bn(env.spec().d, n);
  for (std::int64_t i = 0; i < bn.site_count(); ++i) {
    const Coords c = bn.coords_of(i);
    if (!out.labeling.in_giant(c)) out.holes.push_back(c);
  }
  return out;
}

SparseCheck is_b_sparse(std::span<const Coords> sites, int b, int d) {
  SparseCheck out;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      int dist = 0;
      for (int a = 0; a < d; ++a) dist = std::max(dist, std::abs(sites[i][a] - sites[j][a]));
      if (dist <= 2 * b) {
        out.ok = false;
        out.a = sites[i];
        out.b = sites[j];
        return out;
      }
    }
  }
  return out;
}

void write_labeling_csv(std::ostream& os, const ClusterLabeling& labeling) {
  for (int j = 0; j < labeling.d; ++j) os << "x" << (j + 1) << ",";
  os << "label\n";
  for (std::int64_t i = 0; i < labeling.box.site_count(); ++i) {
    const Coords c = labeling.box.coords_of(i);
    for (int j = 0; j < labeling.d; ++j) os << c[j] << ",";
    os << labeling.label[static_cast<std::size_t>(i)] << "\n";
  }
}

void write_holemap_csv(std::ostream& os, const HoleMap& map, int d) {
  for (int j = 0; j < d; ++j) os << "x" << (j + 1) << ",";
  for (int j = 0; j < d; ++j) os << "y" << (j + 1) << ",";
  os << "l1\n";
  for (std::size_t i = 0; i < map.holes.size(); ++i) {
    for (int j = 0; j < d; ++j) os << map.holes[i][j] << ",";
    for (int j = 0; j < d; ++j) os << map.images[i][j] << ",";
    os << l1_dist(map.holes[i], map.images[i], d) << "\n";
  }
}

}  // namespace rcm
