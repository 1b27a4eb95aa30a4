#pragma once

#include <cstdint>
#include <vector>

#include "rcmlab/errors.hpp"

namespace rcm {

/// Marginal law of a single conductance. Three kinds:
///   constant(c)     point mass at c > 0
///   polynomial(g)   F(a) = a^g on [0,1], the canonical heavy-tail testbed
///   table           inverse CDF sampled on a uniform u-grid, linear
///                   interpolation between grid points
class ConductanceLaw {
 public:
  enum class Kind : std::uint32_t { Constant = 0, Polynomial = 1, Table = 2 };

  static ConductanceLaw constant(double c);
  static ConductanceLaw polynomial(double gamma);  // ConfigError if gamma <= 0
  /// Tabulate `source` on a uniform grid of `grid_points` quantiles.
  static ConductanceLaw table_from(const ConductanceLaw& source,
                                   std::size_t grid_points = kDefaultTableSize);
  static ConductanceLaw table_raw(std::vector<double> inverse_cdf_grid,
                                  double a_star = 1.0);

  static constexpr std::size_t kDefaultTableSize = 1u << 14;

  Kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double constant_value() const { return c_; }
  /// Regularity constant a* of the F(ab) >= b F(a) hypothesis.
  double a_star() const { return a_star_; }
  const std::vector<double>& table() const { return table_; }

  /// Generalized inverse sup{ s : F(s) <= u }. DomainError if u outside [0,1].
  double inverse_cdf(double u) const;

  /// F(a) = Pr[w <= a].
  double cdf(double a) const;

  /// Largest value the law can produce (1 for polynomial, c for constant,
  /// last grid point for tables).
  double max_value() const;

  bool operator==(const ConductanceLaw&) const = default;

 private:
  Kind kind_ = Kind::Constant;
  double c_ = 1.0;
  double gamma_ = 0.0;
  double a_star_ = 1.0;
  std::vector<double> table_;
};

}  // namespace rcm
