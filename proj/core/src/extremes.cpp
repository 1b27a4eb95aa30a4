#include "rcmlab/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace rcm {

std::vector<std::pair<double, Coords>> order_statistics(const SpeedField& field, int n,
                                                        std::int64_t count) {
  const int d = field.box.dim();
  const Box bn(d, n);
  if (count > bn.site_count()) throw DomainError("order_statistics: count exceeds |B_n|");
  std::vector<std::pair<double, std::int64_t>> all;
  all.reserve(static_cast<std::size_t>(bn.site_count()));
  for (std::int64_t i = 0; i < bn.site_count(); ++i) {
    all.emplace_back(field.at(bn.coords_of(i)), i);
  }
  // secondary key = B_n index = lexicographic order
  std::partial_sort(all.begin(), all.begin() + count, all.end());
  std::vector<std::pair<double, Coords>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i)
    out.emplace_back(all[static_cast<std::size_t>(i)].first,
                     bn.coords_of(all[static_cast<std::size_t>(i)].second));
  return out;
}

double quotient_statistic(const SpeedField& field, int n, int k) {
  const auto low = order_statistics(field, n, k + 1);
  const double a = low[static_cast<std::size_t>(k - 1)].first;
  const double b = low[static_cast<std::size_t>(k)].first;
  if (b == 0.0) throw NumericalError("quotient_statistic: zero speed value");
  return 1.0 - a / b;
}

Coords find_shift(std::span<const Coords> A, int k, int d) {
  const int period = 2 * k + 3;
  if (static_cast<int>(A.size()) > 2 * (k + 1))
    throw DomainError("find_shift: |A| exceeds 2(k+1)");
  Coords shift{};
  for (int j = 0; j < d; ++j) {
    bool found = false;
    for (int x = -(k + 1); x <= k + 1 && !found; ++x) {
      bool admissible = true;
      for (const Coords& v : A) {
        if (((v[j] - x) % period + period) % period == 0) {
          admissible = false;
          break;
        }
      }
      if (admissible) {
        shift[j] = x;
        found = true;
      }
    }
    if (!found) throw NumericalError("find_shift: no admissible residue");
  }
  // re-check A ⊂ V∘tau_shift
  for (const Coords& v : A) {
    for (int j = 0; j < d; ++j) {
      if (((v[j] - shift[j]) % period + period) % period == 0)
        throw NumericalError("find_shift: verification failed");
    }
  }
  return shift;
}

std::vector<std::pair<Coords, double>> chi_field(const SpeedField& field, int k,
                                                 const Coords& shift, int n) {
  const int d = field.box.dim();
  const int period = 2 * k + 3;
  const int cube = 2 * (k + 1);
  const int cover = n + 2 * k + 1;
  if (field.box.radius() < cover)
    throw DomainError("chi_field: speed field does not cover B_{n+2k+1}");

  // translates y with N∘tau_y = {y+1, ..., y+2(k+1)}^d inside B_cover,
  // one arithmetic progression per axis
  std::vector<std::pair<Coords, double>> out;
  std::vector<std::vector<int>> axis_vals(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const int lo = -cover - 1;
    const int hi = cover - cube;
    int y = shift[j];
    while (y - period >= lo) y -= period;
    while (y < lo) y += period;
    for (; y <= hi; y += period) axis_vals[static_cast<std::size_t>(j)].push_back(y);
  }
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    Coords y{};
    for (int j = 0; j < d; ++j) y[j] = axis_vals[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
    double chi = std::numeric_limits<double>::infinity();
    Coords z{};
    std::function<void(int)> rec = [&](int axis) {
      if (axis == d) {
        chi = std::min(chi, field.at(z));
        return;
      }
      for (int t = 1; t <= cube; ++t) {
        z[axis] = y[axis] + t;
        rec(axis + 1);
      }
    };
    rec(0);
    out.emplace_back(y, chi);

    int j = d - 1;
    while (j >= 0) {
      if (++idx[static_cast<std::size_t>(j)] < axis_vals[static_cast<std::size_t>(j)].size()) break;
      idx[static_cast<std::size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
  }
  return out;
}

TailModel::TailModel(const ConductanceLaw& law, int d) : law_(law), d_(d) {
  if (d < 1) throw ConfigError("TailModel: d must be >= 1");
}

TailModel TailModel::from_cdf_table(std::vector<double> grid_x, std::vector<double> grid_F, int d) {
  if (grid_x.size() != grid_F.size() || grid_x.size() < 2)
    throw ConfigError("TailModel: bad synthetic table");
  TailModel m;
  m.d_ = d;
  m.synthetic_ = true;
  m.tab_x_ = std::move(grid_x);
  m.tab_F_ = std::move(grid_F);
  return m;
}

bool TailModel::closed_form() const {
  return !synthetic_ && law_.kind() == ConductanceLaw::Kind::Polynomial;
}

double TailModel::C_gamma() const {
  if (!closed_form()) throw DomainError("C_gamma: polynomial laws only");
  const double g = law_.gamma();
  return std::pow(std::tgamma(1.0 + g), 2 * d_) / std::tgamma(1.0 + 2 * d_ * g);
}

namespace {

double interp_cdf(const std::vector<double>& xs, const std::vector<double>& Fs, double a) {
  if (a <= xs.front()) return a < xs.front() ? 0.0 : Fs.front();
  if (a >= xs.back()) return Fs.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), a);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double t = (a - xs[i]) / (xs[i + 1] - xs[i]);
  return Fs[i] + t * (Fs[i + 1] - Fs[i]);
}

}  // namespace

void TailModel::build_table(double span, std::size_t grid) const {
  const double hi = span > 0.0 ? span : 2.0 * d_ * law_.max_value();
  std::vector<double> xs(grid), F1(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    xs[i] = hi * static_cast<double>(i) / static_cast<double>(grid - 1);
    F1[i] = law_.cdf(xs[i]);
  }
  // iterated Stieltjes convolution F_{S+w}(x_k) = ∫ F_S(x_k - t) dF_w(t):
  // uniform grid, so the shifted arguments are grid points and the trapezoid
  // weights apply to exact CDF increments
  std::vector<double> FS = F1;
  std::vector<double> dF(grid - 1);
  for (std::size_t i = 0; i + 1 < grid; ++i) dF[i] = F1[i + 1] - F1[i];
  for (int copy = 1; copy < 2 * d_; ++copy) {
    std::vector<double> next(grid, 0.0);
    for (std::size_t kx = 1; kx < grid; ++kx) {
      double acc = 0.0;
      for (std::size_t i = 0; i < kx; ++i) {
        acc += 0.5 * (FS[kx - i] + FS[kx - i - 1]) * dF[i];
      }
      next[kx] = acc;
    }
    FS = std::move(next);
  }
  tab_x_ = std::move(xs);
  tab_F_ = std::move(FS);
}

double TailModel::F_pi(double a) const {
  if (a < 0.0) throw DomainError("F_pi: a must be >= 0");
  if (a == 0.0) return 0.0;
  if (synthetic_) return interp_cdf(tab_x_, tab_F_, a);
  if (closed_form() && a <= 1.0) {
    return C_gamma() * std::pow(a, 2.0 * d_ * law_.gamma());
  }
  if (a >= 2.0 * d_ * law_.max_value()) return 1.0;
  if (tab_x_.empty()) build_table(0.0, ConductanceLaw::kDefaultTableSize);
  return interp_cdf(tab_x_, tab_F_, a);
}

double TailModel::F_pi_table(double a, double span, std::size_t grid) const {
  TailModel scratch(*this);
  scratch.synthetic_ = false;
  scratch.tab_x_.clear();
  scratch.tab_F_.clear();
  scratch.build_table(span, grid);
  return interp_cdf(scratch.tab_x_, scratch.tab_F_, a);
}

std::pair<double, double> TailModel::F_chi_bounds(int k, double a) const {
  if (a < 0.0) throw DomainError("F_chi_bounds: a must be >= 0");
  const double cube = std::pow(2.0 * (k + 1), d_);
  const double fpi = F_pi(a);
  const double upper = cube * fpi;
  const double F = synthetic_ ? fpi : law_.cdf(a);
  const double pairs = 0.5 * cube * (cube - 1.0);
  const double lower = upper - pairs * std::pow(F, 4.0 * d_ - 1.0);
  return {lower, upper};
}

double TailModel::scale_h(double N) const {
  if (!(N >= 2.0)) throw DomainError("scale_h: N must be >= 2");
  if (closed_form()) {
    const double g = law_.gamma();
    return std::pow(C_gamma() * N, 1.0 / (2.0 * d_ * g));
  }
  // bisection for F_pi(1/s) = 1/N on s
  const double target = 1.0 / N;
  double lo = 1.0, hi = 2.0;
  while (F_pi(1.0 / lo) < target) lo /= 2.0;
  if (!(lo >= std::numeric_limits<double>::min() * 4))
    throw DomainError("scale_h: N outside the representable CDF range");
  while (F_pi(1.0 / hi) > target) {
    hi *= 2.0;
    if (hi > 1e300) throw DomainError("scale_h: N outside the representable CDF range");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (F_pi(1.0 / mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if ((hi - lo) <= 1e-9 * hi) break;
  }
  return 0.5 * (lo + hi);
}

void TailModel::write_table_csv(std::ostream& os, std::size_t points) const {
  os << "a,F_pi\n";
  const double hi = synthetic_ ? tab_x_.back() : 2.0 * d_ * law_.max_value();
  os.precision(17);
  for (std::size_t i = 0; i < points; ++i) {
    const double a = hi * static_cast<double>(i) / static_cast<double>(points - 1);
    os << a << "," << F_pi(a) << "\n";
  }
}

double limit_cdf(double zeta, int d, double gamma) {
  if (zeta < 0.0) throw DomainError("limit_cdf: zeta must be >= 0");
  return 1.0 - std::exp(-std::pow(zeta, 2.0 * d * gamma));
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double N = static_cast<double>(samples.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = cdf(samples[i]);
    dist = std::max(dist, std::abs(static_cast<double>(i + 1) / N - c));
    dist = std::max(dist, std::abs(c - static_cast<double>(i) / N));
  }
  return dist;
}

double normalized_spacing(std::span<const double> sigma, int i) {
  if (i < 1 || static_cast<std::size_t>(i + 1) > sigma.size())
    throw DomainError("normalized_spacing: need at least i+1 values");
  std::vector<double> v(sigma.begin(), sigma.end());
  std::sort(v.begin(), v.end(), std::greater<>());
  return static_cast<double>(i) * (v[static_cast<std::size_t>(i - 1)] - v[static_cast<std::size_t>(i)]);
}

PointwiseBoundAudit pointwise_bound_audit(const EigenPair& pair, const SpeedField& field, int n, double tol) {
  const int d = field.box.dim();
  const Box bn(d, n);
  if (pair.psi1.size() != static_cast<std::size_t>(bn.site_count()))
    throw DomainError("pointwise_bound_audit: eigenvector does not match B_n");
  const Coords z = field.argmin_site;
  const double pi_z = field.min_value;

  PointwiseBoundAudit audit;
  for (std::int64_t i = 0; i < bn.site_count(); ++i) {
    const Coords y = bn.coords_of(i);
    if (y == z) continue;
    if (l1_dist(y, z, d) == 1) continue;
    const double pi_y = field.at(y);
    if (!(pi_y > pi_z)) continue;
    double m_y = 0.0;
    for (int j = 0; j < d; ++j) {
      for (int dir : {-1, +1}) {
        Coords nb = y;
        nb[j] += dir;
        const double v = bn.contains(nb) ? pair.psi1[static_cast<std::size_t>(bn.index_of(nb))] : 0.0;
        m_y = std::max(m_y, v);
      }
    }
    m_y *= 2.0;
    const double bound = m_y / (1.0 - pi_z / pi_y);
    const double psi_y = pair.psi1[static_cast<std::size_t>(i)];
    ++audit.checked;
    if (psi_y > bound + tol) {
      ++audit.violations;
      audit.max_excess = std::max(audit.max_excess, psi_y - bound);
    }
  }
  return audit;
}

void write_samples_csv(std::ostream& os, std::span<const double> samples) {
  os.precision(17);
  for (double s : samples) os << s << "\n";
}

}  // namespace rcm
