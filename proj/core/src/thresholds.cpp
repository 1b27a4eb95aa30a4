#include "rcmlab/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rcm {

namespace {

double loglog_clamped(double u) {
  // log log u clamped at 1 (hits the clamp for u <= e^e)
  const double ll = std::log(std::log(std::max(u, 3.0)));
  return std::max(ll, 1.0);
}

double require_gamma(const ConductanceLaw& law, const char* who) {
  if (law.kind() != ConductanceLaw::Kind::Polynomial)
    throw ConfigError(std::string(who) + " family needs a polynomial law");
  return law.gamma();
}

}  // namespace

ThresholdFamily ThresholdFamily::critical(const ConductanceLaw& law, int d) {
  if (law.kind() == ConductanceLaw::Kind::Constant)
    throw ConfigError("critical family needs a continuous law");
  ThresholdFamily f;
  f.kind_ = Kind::Critical;
  f.law_ = law;
  f.d_ = d;
  return f;
}

ThresholdFamily ThresholdFamily::upper(const ConductanceLaw& law, int d, double eps) {
  require_gamma(law, "upper");
  if (!(eps > 0.0)) throw ConfigError("upper family requires eps > 0");
  ThresholdFamily f;
  f.kind_ = Kind::Upper;
  f.law_ = law;
  f.d_ = d;
  f.param_ = eps;
  return f;
}

ThresholdFamily ThresholdFamily::lower(const ConductanceLaw& law, int d, double delta) {
  require_gamma(law, "lower");
  if (!(delta > 0.0)) throw ConfigError("lower family requires delta > 0");
  ThresholdFamily f;
  f.kind_ = Kind::Lower;
  f.law_ = law;
  f.d_ = d;
  f.param_ = delta;
  return f;
}

ThresholdFamily ThresholdFamily::power(const ConductanceLaw& law, int d, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("power family requires alpha > 0");
  ThresholdFamily f;
  f.kind_ = Kind::Power;
  f.law_ = law;
  f.d_ = d;
  f.param_ = alpha;
  return f;
}

ThresholdFamily ThresholdFamily::custom(const ConductanceLaw& law, int d,
                                        std::vector<std::pair<double, double>> table) {
  if (table.size() < 2) throw ConfigError("custom family needs at least 2 points");
  for (std::size_t i = 0; i + 1 < table.size(); ++i) {
    if (!(table[i].first < table[i + 1].first))
      throw ConfigError("custom family abscissae must increase");
    if (table[i + 1].second > table[i].second)
      throw ConfigError("custom family must be nonincreasing");
  }
  for (auto& [u, g] : table) {
    if (!(u > 0.0 && g > 0.0)) throw ConfigError("custom family must be positive");
  }
  ThresholdFamily f;
  f.kind_ = Kind::Custom;
  f.law_ = law;
  f.d_ = d;
  f.table_ = std::move(table);
  return f;
}

double ThresholdFamily::eval(double u) const {
  u = std::max(u, 2.0);
  switch (kind_) {
    case Kind::Critical:
      return law_.inverse_cdf(std::pow(u, -0.5));
    case Kind::Upper: {
      const double g = law_.gamma();
      return std::pow(u, -1.0 / (2.0 * g)) *
             std::pow((2.0 + param_) * loglog_clamped(u), 1.0 / (2.0 * d_ * g));
    }
    case Kind::Lower: {
      const double g = law_.gamma();
      return std::pow(u, -(1.0 / (2.0 * g) + param_));
    }
    case Kind::Power:
      return std::pow(u, -param_);
    case Kind::Custom: {
      const double lu = std::log(u);
      if (u <= table_.front().first) return table_.front().second;
      if (u >= table_.back().first) return table_.back().second;
      auto it = std::upper_bound(table_.begin(), table_.end(), u,
                                 [](double v, const auto& p) { return v < p.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double t = (lu - std::log(lo.first)) / (std::log(hi.first) - std::log(lo.first));
      return std::exp(std::log(lo.second) + t * (std::log(hi.second) - std::log(lo.second)));
    }
  }
  throw NumericalError("ThresholdFamily: bad kind");
}

double ThresholdFamily::log_tail(double u) const {
  u = std::max(u, 2.0);
  if (kind_ == Kind::Critical) return -0.5 * std::log(u);
  if (law_.kind() == ConductanceLaw::Kind::Polynomial) {
    const double g = eval(u);
    if (g >= 1.0) return 0.0;
    switch (kind_) {
      case Kind::Lower:
        return law_.gamma() * (-(1.0 / (2.0 * law_.gamma()) + param_)) * std::log(u);
      case Kind::Power:
        return law_.gamma() * (-param_) * std::log(u);
      default:
        return law_.gamma() * std::log(g);
    }
  }
  const double F = law_.cdf(eval(u));
  return std::log(F);  // -inf when F == 0
}

double lambda_g(const ThresholdFamily& g, double n) {
  const double t = std::log(n);
  const double exponent = g.d() * t + 2.0 * g.d() * g.log_tail(n);
  return std::exp(exponent);
}

namespace {

double integrand(const ConductanceLaw& law, const ThresholdFamily& g, int m, int d, double u) {
  const double F = law.cdf(g.eval(u));
  if (F <= 0.0) return 0.0;
  return std::exp((d - 1) * std::log(u) + m * std::log(F));
}

double simpson(const ConductanceLaw& law, const ThresholdFamily& g, int m, int d, double a,
               double b, double fa, double fm, double fb, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double lm = 0.5 * (a + mid);
  const double rm = 0.5 * (mid + b);
  const double flm = integrand(law, g, m, d, lm);
  const double frm = integrand(law, g, m, d, rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
  const double sum = left + right;
  if (depth <= 0 || std::abs(sum - whole) <= 15.0 * tol) return sum + (sum - whole) / 15.0;
  return simpson(law, g, m, d, a, mid, fa, flm, fm, tol / 2.0, depth - 1) +
         simpson(law, g, m, d, mid, b, fm, frm, fb, tol / 2.0, depth - 1);
}

}  // namespace

BcIntegral bc_integral(const ConductanceLaw& law, const ThresholdFamily& g, int m, int d,
                       double u_max) {
  if (m < 1) throw DomainError("bc_integral: m must be >= 1");
  if (!(u_max >= 10.0)) throw DomainError("bc_integral: u_max must be >= 10");

  // verify monotonicity of g on a geometric grid
  double prev = g.eval(2.0);
  for (double u = 2.0; u <= u_max; u *= 1.25) {
    const double cur = g.eval(u);
    if (cur > prev * (1.0 + 1e-12)) throw ConfigError("bc_integral: g is not nonincreasing");
    prev = cur;
  }

  BcIntegral out;
  // [0, 2]: g is clamped there, so the integrand is F(g(2))^m u^{d-1}
  const double F2 = law.cdf(g.eval(2.0));
  out.value = (F2 > 0.0) ? std::exp(m * std::log(F2)) * std::pow(2.0, d) / d : 0.0;

  double lo = 2.0;
  while (lo < u_max) {
    const double hi = std::min(lo * 2.0, u_max);
    const double fa = integrand(law, g, m, d, lo);
    const double fb = integrand(law, g, m, d, hi);
    const double fm = integrand(law, g, m, d, 0.5 * (lo + hi));
    out.value += simpson(law, g, m, d, lo, hi, fa, fm, fb, 1e-10 * std::max(1.0, out.value), 40);
    lo = hi;
  }

  const double i1 = integrand(law, g, m, d, u_max);
  const double i0 = integrand(law, g, m, d, 0.9 * u_max);
  if (i1 <= 0.0 || i0 <= 0.0) {
    out.flag = TailClass::Convergent;
    out.exponent = -std::numeric_limits<double>::infinity();
    return out;
  }
  const double rho = (std::log(i1) - std::log(i0)) / (std::log(u_max) - std::log(0.9 * u_max));
  out.exponent = rho;
  if (std::abs(rho + 1.0) <= 1e-6) {
    out.flag = TailClass::Divergent;  // pure 1/u tail
  } else if (std::abs(rho + 1.0) <= 0.05) {
    out.flag = TailClass::Marginal;
  } else {
    out.flag = rho > -1.0 ? TailClass::Divergent : TailClass::Convergent;
  }
  return out;
}

}  // namespace rcm
