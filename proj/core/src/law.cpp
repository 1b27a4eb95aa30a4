#include "rcmlab/law.hpp"

#include <algorithm>
#include <cmath>

namespace rcm {

ConductanceLaw ConductanceLaw::constant(double c) {
  if (!(c > 0.0)) throw ConfigError("constant law requires c > 0");
  ConductanceLaw law;
  law.kind_ = Kind::Constant;
  law.c_ = c;
  law.a_star_ = c;
  return law;
}

ConductanceLaw ConductanceLaw::polynomial(double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("polynomial law requires gamma > 0");
  ConductanceLaw law;
  law.kind_ = Kind::Polynomial;
  law.gamma_ = gamma;
  law.a_star_ = 1.0;
  return law;
}

ConductanceLaw ConductanceLaw::table_from(const ConductanceLaw& source, std::size_t grid_points) {
  if (grid_points < 2) throw ConfigError("table law needs at least 2 grid points");
  std::vector<double> grid(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    grid[i] = source.inverse_cdf(u);
  }
  return table_raw(std::move(grid), source.a_star());
}

ConductanceLaw ConductanceLaw::table_raw(std::vector<double> inverse_cdf_grid, double a_star) {
  if (inverse_cdf_grid.size() < 2) throw ConfigError("table law needs at least 2 grid points");
  if (!std::is_sorted(inverse_cdf_grid.begin(), inverse_cdf_grid.end()))
    throw ConfigError("table law inverse CDF must be nondecreasing");
  ConductanceLaw law;
  law.kind_ = Kind::Table;
  law.table_ = std::move(inverse_cdf_grid);
  law.a_star_ = a_star;
  return law;
}

double ConductanceLaw::inverse_cdf(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("inverse_cdf: u outside [0,1]");
  switch (kind_) {
    case Kind::Constant:
      return c_;
    case Kind::Polynomial:
      return std::pow(u, 1.0 / gamma_);
    case Kind::Table: {
      const std::size_t n = table_.size();
      const double pos = u * static_cast<double>(n - 1);
      const std::size_t i = std::min(static_cast<std::size_t>(pos), n - 2);
      const double t = pos - static_cast<double>(i);
      return table_[i] + t * (table_[i + 1] - table_[i]);
    }
  }
  throw NumericalError("inverse_cdf: bad kind");
}

double ConductanceLaw::cdf(double a) const {
  switch (kind_) {
    case Kind::Constant:
      return a < c_ ? 0.0 : 1.0;
    case Kind::Polynomial:
      if (a <= 0.0) return 0.0;
      if (a >= 1.0) return 1.0;
      return std::pow(a, gamma_);
    case Kind::Table: {
      if (a < table_.front()) return 0.0;
      if (a >= table_.back()) return 1.0;
      // invert the piecewise-linear inverse CDF
      auto it = std::upper_bound(table_.begin(), table_.end(), a);
      std::size_t i = static_cast<std::size_t>(it - table_.begin());
      if (i == 0) return 0.0;
      --i;
      const double q0 = table_[i];
      // flat runs: report the highest u whose quantile is still <= a
      std::size_t hi = i;
      while (hi + 1 < table_.size() && table_[hi + 1] <= a) ++hi;
      const double du = 1.0 / static_cast<double>(table_.size() - 1);
      if (hi > i || table_[i + 1] == q0) return static_cast<double>(hi) * du;
      const double t = (a - q0) / (table_[i + 1] - q0);
      return (static_cast<double>(i) + t) * du;
    }
  }
  throw NumericalError("cdf: bad kind");
}

double ConductanceLaw::max_value() const {
  switch (kind_) {
    case Kind::Constant:
      return c_;
    case Kind::Polynomial:
      return 1.0;
    case Kind::Table:
      return table_.back();
  }
  throw NumericalError("max_value: bad kind");
}

}  // namespace rcm
