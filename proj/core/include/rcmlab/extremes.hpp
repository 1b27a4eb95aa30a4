#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "rcmlab/environment.hpp"
#include "rcmlab/spectral.hpp"

namespace rcm {

/// The period-(2k+3) lattice decomposition: translates of the cube
/// N = {1,...,2(k+1)}^d over (2k+3)Z^d are pairwise disjoint, so the
/// per-translate minima are independent.
struct Decomposition {
  int k = 1;
  int period() const { return 2 * k + 3; }
  int cube_side() const { return 2 * (k + 1); }
};

/// The `count` smallest speed values in B_n with their sites, ascending,
/// ties broken lexicographically.
std::vector<std::pair<double, Coords>> order_statistics(const SpeedField& field, int n,
                                                        std::int64_t count);

/// 1 - pi_{k,B_n} / pi_{k+1,B_n}, the relative gap of the k-th and (k+1)-th
/// smallest speeds.
double quotient_statistic(const SpeedField& field, int n, int k);

/// A shift x in B_{k+1} with A ⊂ V∘tau_x: per coordinate the smallest
/// admissible residue class mod (2k+3) avoiding the classes of A.
Coords find_shift(std::span<const Coords> A, int k, int d);

/// chi_y = min over N∘tau_y of pi, for every translate y in (2k+3)Z^d+shift
/// whose cube fits inside B_{n+2k+1}.
std::vector<std::pair<Coords, double>> chi_field(const SpeedField& field, int k,
                                                 const Coords& shift, int n);

/// Distribution of pi (sum of 2d independent conductances). Polynomial laws
/// use the exact closed form C a^{2 d gamma} with
/// C = Gamma(1+gamma)^{2d} / Gamma(1+2 d gamma) for a <= 1; otherwise a
/// 2d-fold numerical convolution table is built on demand (uniform grid,
/// trapezoid-weighted Stieltjes sums).
class TailModel {
 public:
  TailModel(const ConductanceLaw& law, int d);

  /// Synthetic model from a tabulated CDF of pi itself (testing hook).
  static TailModel from_cdf_table(std::vector<double> grid_x, std::vector<double> grid_F, int d);

  const ConductanceLaw& law() const { return law_; }
  int d() const { return d_; }
  bool closed_form() const;
  double C_gamma() const;

  double F_pi(double a) const;

  /// Bonferroni sandwich for the cube minimum chi:
  /// (2k+2)^d F_pi - C((2k+2)^d,2) F^{4d-1} <= F_chi <= (2k+2)^d F_pi.
  std::pair<double, double> F_chi_bounds(int k, double a) const;

  /// h(N): the s solving F_pi(1/s) = 1/N; closed form (C_gamma N)^{1/(2 d
  /// gamma)} for polynomial laws, bisection otherwise. a_n = 1/h(|B_n|).
  double scale_h(double N) const;

  /// Force the convolution-table route (oracle cross-checks).
  double F_pi_table(double a, double span = 0.0, std::size_t grid = 1u << 14) const;

  void write_table_csv(std::ostream& os, std::size_t points = 256) const;

 private:
  TailModel() = default;
  void build_table(double span, std::size_t grid) const;

  ConductanceLaw law_ = ConductanceLaw::constant(1.0);
  int d_ = 2;
  bool synthetic_ = false;
  mutable std::vector<double> tab_x_, tab_F_;
};

/// 1 - exp(-zeta^{2 d gamma}).
double limit_cdf(double zeta, int d, double gamma);

/// sup-distance between the empirical CDF of the samples and `cdf`.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Normalized spacing i (sigma_(i) - sigma_(i+1)) of one replicate's values,
/// descending order statistics, 1-indexed.
double normalized_spacing(std::span<const double> sigma, int i);

/// Pointwise localization bound audit: for z = argmin pi and every y in B_n
/// with pi_y > pi_z and y not adjacent to z, checks
/// psi(y) <= m_y / (1 - pi_z/pi_y) + tol with m_y = 2 max over neighbors.
struct PointwiseBoundAudit {
  std::int64_t checked = 0;
  std::int64_t violations = 0;
  double max_excess = 0.0;  // worst psi(y) - bound, > 0 only on violation
};

PointwiseBoundAudit pointwise_bound_audit(const EigenPair& pair, const SpeedField& field, int n,
                               double tol = 1e-8);

void write_samples_csv(std::ostream& os, std::span<const double> samples);

}  // namespace rcm
