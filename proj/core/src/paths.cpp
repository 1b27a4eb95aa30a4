#include "rcmlab/paths.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace rcm {

namespace {

double edge_weight_between(const Environment& env, const Coords& a, const Coords& b) {
  const int d = env.spec().d;
  for (int j = 0; j < d; ++j) {
    if (b[j] == a[j] + 1) return env.weight(a, j);
    if (b[j] == a[j] - 1) return env.weight(b, j);
  }
  throw DomainError("edge_weight_between: sites are not neighbors");
}

}  // namespace

void validate_path_map(const Environment& env, const PathMap& map) {
  const int d = env.spec().d;
  if (map.sources.size() != map.images.size() || map.sources.size() != map.paths.size())
    throw NumericalError("path map: ragged arrays");
  std::unordered_set<std::int64_t> image_set;
  const Box& box = env.box();
  for (std::size_t i = 0; i < map.sources.size(); ++i) {
    const auto& path = map.paths[i];
    if (path.empty() || !(path.front() == map.sources[i]) || !(path.back() == map.images[i]))
      throw NumericalError("path map: endpoints mismatch");
    if (static_cast<std::int64_t>(path.size()) - 1 > map.L)
      throw NumericalError("path map: length certificate violated");
    std::unordered_set<std::int64_t> seen;
    for (const Coords& c : path) {
      if (!seen.insert(box.index_of(c)).second)
        throw NumericalError("path map: path is not self-avoiding");
    }
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
      if (l1_dist(path[s], path[s + 1], d) != 1)
        throw NumericalError("path map: non-adjacent consecutive sites");
      if (!(edge_weight_between(env, path[s], path[s + 1]) > map.nu))
        throw NumericalError("path map: weight certificate violated");
    }
    image_set.insert(box.index_of(map.images[i]));
  }
  if (image_set.size() != map.images.size())
    throw NumericalError("path map: phi is not injective");
}

double subgraph_energy(const Environment& env, std::span<const std::uint8_t> edge_mask,
                       std::span<const double> f) {
  if (edge_mask.size() != static_cast<std::size_t>(env.edge_count()))
    throw DomainError("subgraph_energy: mask does not match the environment");
  const Box& box = env.box();
  if (f.size() != static_cast<std::size_t>(box.site_count()))
    throw DomainError("subgraph_energy: f must be indexed over the padded box");
  const int d = env.spec().d;
  const int R = box.radius();
  double energy = 0.0;
  for (std::int64_t i = 0; i < box.site_count(); ++i) {
    const Coords c = box.coords_of(i);
    for (int j = 0; j < d; ++j) {
      if (c[j] >= R) continue;
      const std::int64_t e = env.edges().edge_id(i, j);
      if (!edge_mask[static_cast<std::size_t>(e)]) continue;
      Coords nb = c;
      nb[j] += 1;
      const double df = f[static_cast<std::size_t>(i)] - f[static_cast<std::size_t>(box.index_of(nb))];
      energy += env.weight_by_id(e) * df * df;
    }
  }
  return energy;
}

namespace {

/// Shortest good-edge path from `from` to `to`, both inclusive, restricted to
/// B_{3d}(center) and the materialized box. BFS expands neighbors in a fixed
/// order so the returned path is deterministic. Empty result = unreachable.
std::vector<Coords> bfs_detour(const Environment& env, const Coords& center, const Coords& from,
                               const Coords& to, double bad_threshold) {
  const int d = env.spec().d;
  const Box& box = env.box();
  const int radius = 3 * d;
  std::unordered_map<std::int64_t, std::int64_t> parent;
  std::deque<std::int64_t> queue;
  const std::int64_t start = box.index_of(from);
  const std::int64_t goal = box.index_of(to);
  parent[start] = start;
  queue.push_back(start);
  while (!queue.empty()) {
    const std::int64_t cur = queue.front();
    queue.pop_front();
    if (cur == goal) break;
    const Coords c = box.coords_of(cur);
    for (int j = 0; j < d; ++j) {
      for (int dir : {-1, +1}) {
        Coords nb = c;
        nb[j] += dir;
        if (!box.contains(nb)) continue;
        bool inside = true;
        for (int a = 0; a < d; ++a) {
          if (std::abs(nb[a] - center[a]) > radius) {
            inside = false;
            break;
          }
        }
        if (!inside) continue;
        const Coords& low = dir > 0 ? c : nb;
        if (!(env.weight(low, j) > bad_threshold)) continue;
        const std::int64_t k = box.index_of(nb);
        if (parent.count(k)) continue;
        parent[k] = cur;
        queue.push_back(k);
      }
    }
  }
  if (!parent.count(goal)) return {};
  std::vector<Coords> path;
  for (std::int64_t cur = goal; cur != start; cur = parent[cur]) path.push_back(box.coords_of(cur));
  path.push_back(from);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<Coords> staircase(const Coords& a, const Coords& b, int d) {
  std::vector<Coords> path;
  Coords cur = a;
  path.push_back(cur);
  for (int j = 0; j < d; ++j) {
    while (cur[j] != b[j]) {
      cur[j] += b[j] > cur[j] ? 1 : -1;
      path.push_back(cur);
    }
  }
  return path;
}

void delete_loops(std::vector<Coords>& path, const Box& box) {
  std::unordered_map<std::int64_t, std::size_t> seen;
  std::vector<Coords> out;
  for (const Coords& c : path) {
    const std::int64_t i = box.index_of(c);
    auto it = seen.find(i);
    if (it != seen.end()) {
      // revisit: cut the loop
      for (std::size_t k = it->second + 1; k < out.size(); ++k) seen.erase(box.index_of(out[k]));
      out.resize(it->second + 1);
      continue;
    }
    seen[i] = out.size();
    out.push_back(c);
  }
  path = std::move(out);
}

}  // namespace

PathMap build_detour_paths(const Environment& env, int n, std::span<const Coords> sources,
                           const HoleMap& base_map, double bad_threshold) {
  const int d = env.spec().d;
  const Box& box = env.box();
  if (!(bad_threshold > 0.0)) throw DomainError("build_detour_paths: threshold must be positive");

  std::unordered_map<std::int64_t, Coords> image_of;
  for (std::size_t i = 0; i < base_map.holes.size(); ++i)
    image_of[box.index_of(base_map.holes[i])] = base_map.images[i];

  PathMap out;
  out.nu = bad_threshold;
  out.min_edge_weight = std::numeric_limits<double>::infinity();
  const double length_cap = std::pow(std::log(static_cast<double>(n)), 2 * d);

  for (const Coords& src : sources) {
    auto it = image_of.find(box.index_of(src));
    if (it == image_of.end())
      throw PreconditionError("build_detour_paths: source is missing from the base map");
    const Coords dst = it->second;
    const std::vector<Coords> straight = staircase(src, dst, d);

    std::vector<Coords> path;
    path.push_back(src);
    std::size_t pos = 0;  // index into straight of the last appended site
    while (pos + 1 < straight.size()) {
      const Coords& y = path.back();
      const double w = edge_weight_between(env, straight[pos], straight[pos + 1]);
      if (w > bad_threshold && straight[pos] == y) {
        path.push_back(straight[pos + 1]);
        ++pos;
        continue;
      }
      // find the first good edge after y on the straight path
      std::size_t q = pos;
      while (q + 1 < straight.size() &&
             !(edge_weight_between(env, straight[q], straight[q + 1]) > bad_threshold)) {
        ++q;
      }
      const Coords target = q + 1 < straight.size() ? straight[q] : straight.back();
      const std::vector<Coords> detour = bfs_detour(env, y, y, target, bad_threshold);
      if (detour.empty()) {
        std::ostringstream os;
        os << "build_detour_paths: no good detour inside B_" << 3 * d << "((";
        for (int j = 0; j < d; ++j) os << (j ? "," : "") << y[j];
        os << "))";
        throw PreconditionError(os.str());
      }
      for (std::size_t s = 1; s < detour.size(); ++s) path.push_back(detour[s]);
      pos = q;
      if (q + 1 >= straight.size()) break;  // detoured straight to the endpoint
    }
    delete_loops(path, box);
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
      out.min_edge_weight = std::min(out.min_edge_weight, edge_weight_between(env, path[s], path[s + 1]));
    }
    out.L = std::max<std::int64_t>(out.L, static_cast<std::int64_t>(path.size()) - 1);
    out.sources.push_back(src);
    out.images.push_back(dst);
    out.paths.push_back(std::move(path));
  }

  if (static_cast<double>(out.L) > length_cap)
    throw PreconditionError("build_detour_paths: path length exceeds (log n)^{2d}");
  validate_path_map(env, out);
  return out;
}

PathMap neighbor_map(const Environment& env, std::span<const Coords> I_n, double alpha) {
  const int d = env.spec().d;
  const SparseCheck sparse = is_b_sparse(I_n, 3 * d, d);
  if (!sparse.ok) throw PreconditionError("neighbor_map: I_n is not 3d-sparse");

  PathMap out;
  out.nu = alpha;
  out.L = I_n.empty() ? 0 : 1;
  out.min_edge_weight = std::numeric_limits<double>::infinity();
  for (const Coords& x : I_n) {
    double best_w = -1.0;
    Coords best{};
    for (int j = 0; j < d; ++j) {
      for (int dir : {-1, +1}) {
        Coords nb = x;
        nb[j] += dir;
        const Coords& low = dir > 0 ? x : nb;
        const double w = env.weight(low, j);
        if (w > best_w || (w == best_w && lex_less(nb, best, d))) {
          best_w = w;
          best = nb;
        }
      }
    }
    if (!(best_w > alpha)) {
      std::ostringstream os;
      os << "neighbor_map: source (";
      for (int j = 0; j < d; ++j) os << (j ? "," : "") << x[j];
      os << ") has no incident weight above alpha";
      throw PreconditionError(os.str());
    }
    out.min_edge_weight = std::min(out.min_edge_weight, best_w);
    out.sources.push_back(x);
    out.images.push_back(best);
    out.paths.push_back({x, best});
  }
  validate_path_map(env, out);
  return out;
}

double pathvsrw_bound(double nu, double L, double mu, int d) {
  if (!(nu > 0.0 && L > 0.0 && mu > 0.0)) throw DomainError("pathvsrw_bound: arguments must be positive");
  return 1.0 / (std::pow(2.0 * L, d + 1) / nu + 3.0 / mu);
}

DirichletOperator assemble_cluster_operator(const Environment& env,
                                            const ClusterLabeling& labeling,
                                            std::int64_t cluster_label, int n) {
  const int d = env.spec().d;
  const Box bn(d, n);
  const Box& box = env.box();

  // dense index over cluster ∩ B_n
  std::vector<std::int64_t> site_of;
  std::unordered_map<std::int64_t, std::int32_t> pos;
  for (std::int64_t i = 0; i < bn.site_count(); ++i) {
    const Coords c = bn.coords_of(i);
    if (labeling.label_at(c) == cluster_label) {
      pos[box.index_of(c)] = static_cast<std::int32_t>(site_of.size());
      site_of.push_back(box.index_of(c));
    }
  }
  if (site_of.empty()) throw DomainError("assemble_cluster_operator: empty cluster in B_n");

  DirichletOperator op;
  op.d = d;
  op.n = n;
  op.box = Box(d, 0);  // indexing is cluster-local, not a cube; box unused here
  const std::int64_t m = static_cast<std::int64_t>(site_of.size());
  op.diag.assign(static_cast<std::size_t>(m), 0.0);
  op.row_ptr.assign(static_cast<std::size_t>(m) + 1, 0);
  std::vector<std::int32_t> cols;
  std::vector<double> vals;

  for (std::int64_t i = 0; i < m; ++i) {
    const Coords c = box.coords_of(site_of[static_cast<std::size_t>(i)]);
    double deg = 0.0;
    for (int j = 0; j < d; ++j) {
      for (int dir : {-1, +1}) {
        Coords nb = c;
        nb[j] += dir;
        if (!box.contains(nb)) continue;
        const Coords& low = dir > 0 ? c : nb;
        const std::int64_t e = env.edges().edge_id(low, j);
        if (!labeling.open[static_cast<std::size_t>(e)]) continue;
        // open edge incident to a cluster site stays in the cluster
        deg += env.weight_by_id(e);
        auto it = bn.contains(nb) ? pos.find(box.index_of(nb)) : pos.end();
        if (it != pos.end()) {
          cols.push_back(it->second);
          vals.push_back(-env.weight_by_id(e));
        }
      }
    }
    op.diag[static_cast<std::size_t>(i)] = deg;
    op.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(cols.size());
  }
  op.col = std::move(cols);
  op.off = std::move(vals);
  return op;
}

void write_pathmap_jsonl(std::ostream& os, const Environment& env, const PathMap& map) {
  const int d = env.spec().d;
  auto put_site = [&](const Coords& c) {
    os << "[";
    for (int j = 0; j < d; ++j) os << (j ? "," : "") << c[j];
    os << "]";
  };
  for (std::size_t i = 0; i < map.sources.size(); ++i) {
    double min_w = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s + 1 < map.paths[i].size(); ++s)
      min_w = std::min(min_w, edge_weight_between(env, map.paths[i][s], map.paths[i][s + 1]));
    os << "{\"source\":";
    put_site(map.sources[i]);
    os << ",\"image\":";
    put_site(map.images[i]);
    os << ",\"path\":[";
    for (std::size_t s = 0; s < map.paths[i].size(); ++s) {
      if (s) os << ",";
      put_site(map.paths[i][s]);
    }
    os << "],\"min_w\":" << min_w << ",\"len\":" << map.paths[i].size() - 1 << "}\n";
  }
}

}  // namespace rcm
