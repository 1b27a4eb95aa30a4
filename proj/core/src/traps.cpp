#include "rcmlab/traps.hpp"

#include <algorithm>
#include <sstream>

namespace rcm {

TrapReport find_traps(const Environment& env, int n, double alpha, int k, int b) {
  if (!(alpha > 0.0)) throw DomainError("find_traps: alpha must be positive");
  if (k < 1) throw DomainError("find_traps: k must be >= 1");
  const BoxSpec& spec = env.spec();
  if (n + 1 > spec.radius()) throw DomainError("find_traps: B_{n+1} not materialized");
  const int d = spec.d;
  const Box bn(d, n);

  TrapReport report;
  report.threshold = alpha;
  report.residue_modulus = k;
  report.per_residue_counts.assign(static_cast<std::size_t>(k), 0);
  report.census_b = b;

  for (std::int64_t i = 0; i < bn.site_count(); ++i) {
    const Coords c = bn.coords_of(i);
    double wmax = 0.0;
    for (int j = 0; j < d; ++j) {
      wmax = std::max(wmax, env.weight(c, j));
      Coords m = c;
      m[j] -= 1;
      wmax = std::max(wmax, env.weight(m, j));
    }
    if (wmax <= alpha) {
      report.trap_sites.push_back(c);
      int s = 0;
      for (int j = 0; j < d; ++j) s += c[j];
      const int r = ((s % k) + k) % k;
      ++report.per_residue_counts[static_cast<std::size_t>(r)];
    }
  }
  report.bad_edge_max = bad_edge_census(env, n, b, alpha);
  return report;
}

std::int64_t bad_edge_census(const Environment& env, int n, int b, double alpha) {
  if (b < 1) throw DomainError("bad_edge_census: b must be >= 1");
  const BoxSpec& spec = env.spec();
  if (spec.radius() < n + b + 1)
    throw DomainError("bad_edge_census: env radius must be >= n + b + 1");
  const int d = spec.d;
  const int R = spec.radius();

  // cnt(x) = number of bad positive-direction edges out of x, for x in the
  // materialized interior; a d-dimensional sliding box sum then gives the
  // census per center in O(1) amortized via prefix sums.
  const Box grid(d, R - 1);
  std::vector<std::int64_t> cnt(static_cast<std::size_t>(grid.site_count()), 0);
  for (std::int64_t i = 0; i < grid.site_count(); ++i) {
    const Coords c = grid.coords_of(i);
    std::int64_t k = 0;
    for (int j = 0; j < d; ++j) {
      if (env.weight(c, j) <= alpha) ++k;
    }
    cnt[static_cast<std::size_t>(i)] = k;
  }

  // prefix sums along each axis in place
  const int side = grid.side();
  std::array<std::int64_t, kMaxDim> stride{};
  {
    std::int64_t s = 1;
    for (int j = d - 1; j >= 0; --j) {
      stride[static_cast<std::size_t>(j)] = s;
      s *= side;
    }
  }
  for (int j = 0; j < d; ++j) {
    const std::int64_t st = stride[static_cast<std::size_t>(j)];
    for (std::int64_t i = 0; i < grid.site_count(); ++i) {
      const Coords c = grid.coords_of(i);
      if (c[j] > -(R - 1)) cnt[static_cast<std::size_t>(i)] += cnt[static_cast<std::size_t>(i - st)];
    }
  }

  auto rect_sum = [&](const Coords& lo, const Coords& hi) {
    // inclusion-exclusion over the corners of [lo, hi]
    std::int64_t total = 0;
    for (int mask = 0; mask < (1 << d); ++mask) {
      Coords corner{};
      bool ok = true;
      int sign = 1;
      for (int j = 0; j < d; ++j) {
        if (mask & (1 << j)) {
          corner[j] = lo[j] - 1;
          sign = -sign;
          if (corner[j] < -(R - 1)) {
            ok = false;
            break;
          }
        } else {
          corner[j] = hi[j];
        }
      }
      if (!ok) continue;
      total += sign * cnt[static_cast<std::size_t>(grid.index_of(corner))];
    }
    return total;
  };

  const Box centers(d, n + b);
  std::int64_t best = 0;
  for (std::int64_t i = 0; i < centers.site_count(); ++i) {
    const Coords z = centers.coords_of(i);
    Coords lo{}, hi{};
    for (int j = 0; j < d; ++j) {
      lo[j] = std::max(z[j] - b, -(R - 1));
      hi[j] = std::min(z[j] + b, R - 1);
    }
    best = std::max(best, rect_sum(lo, hi));
  }
  return best;
}

std::string TrapReport::to_json(int d) const {
  std::ostringstream os;
  os << "{\"threshold\":" << threshold << ",\"traps\":[";
  for (std::size_t i = 0; i < trap_sites.size(); ++i) {
    if (i) os << ",";
    os << "[";
    for (int j = 0; j < d; ++j) {
      if (j) os << ",";
      os << trap_sites[i][j];
    }
    os << "]";
  }
  os << "],\"per_residue\":[";
  for (std::size_t i = 0; i < per_residue_counts.size(); ++i) {
    if (i) os << ",";
    os << per_residue_counts[i];
  }
  os << "],\"bad_edge_max\":" << bad_edge_max << "}";
  return os.str();
}

}  // namespace rcm
