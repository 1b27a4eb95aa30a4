#pragma once

#include <utility>
#include <vector>

#include "rcmlab/law.hpp"

namespace rcm {

/// Families of decreasing threshold functions g(u), u >= 2:
///   critical    g(u) = F^{-1}(u^{-1/2}); Lambda_g is identically 1 for
///               polynomial laws
///   upper(eps)  u^{-1/(2 gamma)} ((2+eps) loglog u)^{1/(2 d gamma)}, the
///               loglog factor clamped at 1 below u = e^e to keep the family
///               positive and nonincreasing
///   lower(del)  u^{-1/(2 gamma) - del}
///   power(alp)  u^{-alp}
///   custom      tabulated (u_i, g_i), log-log interpolated
class ThresholdFamily {
 public:
  enum class Kind { Critical, Upper, Lower, Power, Custom };

  static ThresholdFamily critical(const ConductanceLaw& law, int d);
  static ThresholdFamily upper(const ConductanceLaw& law, int d, double eps);
  static ThresholdFamily lower(const ConductanceLaw& law, int d, double delta);
  static ThresholdFamily power(const ConductanceLaw& law, int d, double alpha);
  static ThresholdFamily custom(const ConductanceLaw& law, int d,
                                std::vector<std::pair<double, double>> table);

  Kind kind() const { return kind_; }
  const ConductanceLaw& law() const { return law_; }
  int d() const { return d_; }
  double param() const { return param_; }

  /// g(u); arguments below 2 are clamped to 2.
  double eval(double u) const;

  /// log Pr[w <= g(u)]. The critical family returns -log(u)/2 exactly by
  /// definition; polynomial laws use gamma * log g to avoid pow round-trips.
  double log_tail(double u) const;

 private:
  Kind kind_ = Kind::Power;
  ConductanceLaw law_ = ConductanceLaw::constant(1.0);
  int d_ = 2;
  double param_ = 0.0;
  std::vector<std::pair<double, double>> table_;
};

/// Lambda_g(n) = n^d Pr[w <= g(n)]^{2d}, evaluated in log space so the
/// critical-family identity Lambda == 1 is exact in floating point.
double lambda_g(const ThresholdFamily& g, double n);

enum class TailClass { Convergent, Divergent, Marginal };

struct BcIntegral {
  double value = 0.0;        // integral over [0, u_max]
  TailClass flag = TailClass::Convergent;
  double exponent = 0.0;     // measured local power of the integrand at u_max
};

/// Truncated integral of u^{d-1} Pr[w <= g(u)]^m on [0, u_max] by adaptive
/// quadrature, plus a divergence classification from the local power-law
/// exponent at u_max. Exponents within 0.05 of -1 are flagged marginal,
/// except an exactly measured -1 (a pure 1/u tail, the Lambda == const
/// case) which diverges.
BcIntegral bc_integral(const ConductanceLaw& law, const ThresholdFamily& g, int m, int d,
                       double u_max);

}  // namespace rcm
