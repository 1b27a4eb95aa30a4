#include "rcmlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace rcm {

int linf(const Coords& c, int d) {
  int m = 0;
  for (int j = 0; j < d; ++j) m = std::max(m, std::abs(c[j]));
  return m;
}

int l1(const Coords& c, int d) {
  int s = 0;
  for (int j = 0; j < d; ++j) s += std::abs(c[j]);
  return s;
}

int l1_dist(const Coords& a, const Coords& b, int d) {
  int s = 0;
  for (int j = 0; j < d; ++j) s += std::abs(a[j] - b[j]);
  return s;
}

bool lex_less(const Coords& a, const Coords& b, int d) {
  for (int j = 0; j < d; ++j) {
    if (a[j] != b[j]) return a[j] < b[j];
  }
  return false;
}

Box::Box(int d, int radius) : d_(d), radius_(radius) {
  if (d < 1 || d > kMaxDim) throw ConfigError("Box: dimension out of range");
  if (radius < 0) throw ConfigError("Box: negative radius");
  const std::int64_t side = 2 * static_cast<std::int64_t>(radius) + 1;
  count_ = 1;
  for (int j = d - 1; j >= 0; --j) {
    stride_[j] = count_;
    count_ *= side;
  }
}

bool Box::contains(const Coords& c) const {
  for (int j = 0; j < d_; ++j) {
    if (c[j] < -radius_ || c[j] > radius_) return false;
  }
  return true;
}

std::int64_t Box::index_of(const Coords& c) const {
  if (!contains(c)) throw DomainError("Box: site outside box");
  std::int64_t i = 0;
  for (int j = 0; j < d_; ++j) i += (c[j] + radius_) * stride_[j];
  return i;
}

Coords Box::coords_of(std::int64_t i) const {
  if (i < 0 || i >= count_) throw DomainError("Box: site index out of range");
  Coords c{};
  for (int j = 0; j < d_; ++j) {
    c[j] = static_cast<int>(i / stride_[j]) - radius_;
    i %= stride_[j];
  }
  return c;
}

EdgeIndex::EdgeIndex(const Box& box) : box_(box) {
  const std::int64_t n_sites = box.site_count();
  offset_.assign(n_sites + 1, 0);
  const int d = box.dim();
  const int R = box.radius();
  for (std::int64_t i = 0; i < n_sites; ++i) {
    const Coords c = box.coords_of(i);
    int valid = 0;
    for (int j = 0; j < d; ++j) {
      if (c[j] < R) ++valid;
    }
    offset_[i + 1] = offset_[i] + valid;
  }
  edge_count_ = offset_[n_sites];
}

std::int64_t EdgeIndex::edge_id(const Coords& site, int axis) const {
  return edge_id(box_.index_of(site), axis);
}

std::int64_t EdgeIndex::edge_id(std::int64_t site_index, int axis) const {
  const int d = box_.dim();
  const int R = box_.radius();
  if (axis < 0 || axis >= d) throw DomainError("EdgeIndex: bad axis");
  const Coords c = box_.coords_of(site_index);
  if (c[axis] >= R) throw DomainError("EdgeIndex: edge leaves the box");
  int rank = 0;
  for (int j = 0; j < axis; ++j) {
    if (c[j] < R) ++rank;
  }
  return offset_[site_index] + rank;
}

std::pair<std::int64_t, int> EdgeIndex::endpoint_axis(std::int64_t edge) const {
  if (edge < 0 || edge >= edge_count_) throw DomainError("EdgeIndex: edge id out of range");
  auto it = std::upper_bound(offset_.begin(), offset_.end(), edge);
  const std::int64_t site = static_cast<std::int64_t>(it - offset_.begin()) - 1;
  int rank = static_cast<int>(edge - offset_[site]);
  const Coords c = box_.coords_of(site);
  const int d = box_.dim();
  const int R = box_.radius();
  for (int j = 0; j < d; ++j) {
    if (c[j] < R) {
      if (rank == 0) return {site, j};
      --rank;
    }
  }
  throw NumericalError("EdgeIndex: inconsistent offsets");
}

}  // namespace rcm
