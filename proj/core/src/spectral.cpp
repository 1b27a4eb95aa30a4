#include "rcmlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

namespace rcm {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Eigen::SparseMatrix<double> to_sparse(const DirichletOperator& op) {
  const std::int64_t m = op.dim();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(op.off.size() + static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    trips.emplace_back(static_cast<int>(i), static_cast<int>(i), op.diag[static_cast<std::size_t>(i)]);
    for (std::int64_t k = op.row_ptr[static_cast<std::size_t>(i)];
         k < op.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
      trips.emplace_back(static_cast<int>(i), op.col[static_cast<std::size_t>(k)],
                         op.off[static_cast<std::size_t>(k)]);
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

}  // namespace

void DirichletOperator::apply(std::span<const double> x, std::span<double> y) const {
  const std::int64_t m = dim();
  for (std::int64_t i = 0; i < m; ++i) {
    double acc = diag[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    for (std::int64_t k = row_ptr[static_cast<std::size_t>(i)];
         k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
      acc += off[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col[static_cast<std::size_t>(k)])];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
}

double DirichletOperator::quad_form(std::span<const double> f) const {
  std::vector<double> Af(f.size());
  apply(f, Af);
  return dot(f, Af);
}

DirichletOperator assemble_dirichlet_operator(const Environment& env, int n) {
  const BoxSpec& spec = env.spec();
  if (n < 0) throw DomainError("assemble: n must be >= 0");
  if (n + 1 > spec.radius())
    throw DomainError("assemble: edges crossing the boundary of B_n are not materialized");
  DirichletOperator op;
  op.d = spec.d;
  op.n = n;
  op.box = Box(spec.d, n);
  const std::int64_t m = op.box.site_count();
  op.diag.resize(static_cast<std::size_t>(m));
  op.row_ptr.assign(static_cast<std::size_t>(m) + 1, 0);

  const int d = spec.d;
  std::vector<std::int32_t> cols;
  std::vector<double> vals;
  cols.reserve(static_cast<std::size_t>(2 * d * m));
  vals.reserve(static_cast<std::size_t>(2 * d * m));

  for (std::int64_t i = 0; i < m; ++i) {
    const Coords c = op.box.coords_of(i);
    double pi = 0.0;
    for (int j = 0; j < d; ++j) {
      pi += env.weight(c, j);
      Coords mm = c;
      mm[j] -= 1;
      pi += env.weight(mm, j);
    }
    op.diag[static_cast<std::size_t>(i)] = pi;
    for (int j = 0; j < d; ++j) {
      for (int dir : {-1, +1}) {
        Coords nb = c;
        nb[j] += dir;
        if (!op.box.contains(nb)) continue;
        const double w = dir > 0 ? env.weight(c, j) : env.weight(nb, j);
        cols.push_back(static_cast<std::int32_t>(op.box.index_of(nb)));
        vals.push_back(-w);
      }
    }
    op.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(cols.size());
  }
  op.col = std::move(cols);
  op.off = std::move(vals);
  return op;
}

double dirichlet_energy(const Environment& env, int n, std::span<const double> f) {
  const BoxSpec& spec = env.spec();
  if (n + 1 > spec.radius()) throw DomainError("dirichlet_energy: B_{n+1} not materialized");
  const Box bn(spec.d, n);
  if (f.size() != static_cast<std::size_t>(bn.site_count()))
    throw DomainError("dirichlet_energy: f must be indexed over B_n");
  const int d = spec.d;
  double energy = 0.0;
  for (std::int64_t i = 0; i < bn.site_count(); ++i) {
    const Coords c = bn.coords_of(i);
    const double fx = f[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) {
      // positive-direction edge, counted once
      Coords p = c;
      p[j] += 1;
      const double wp = env.weight(c, j);
      if (bn.contains(p)) {
        const double fy = f[static_cast<std::size_t>(bn.index_of(p))];
        energy += wp * (fx - fy) * (fx - fy);
      } else {
        energy += wp * fx * fx;
      }
      // negative neighbor outside B_n contributes w * f(x)^2
      Coords q = c;
      q[j] -= 1;
      if (!bn.contains(q)) {
        energy += env.weight(q, j) * fx * fx;
      }
    }
  }
  return energy;
}

double dirichlet_energy_full(const Environment& env, int n, std::span<const double> f) {
  const Box& full = env.box();
  if (f.size() != static_cast<std::size_t>(full.site_count()))
    throw DomainError("dirichlet_energy_full: f must be indexed over the padded box");
  const Box bn(env.spec().d, n);
  std::vector<double> g(static_cast<std::size_t>(bn.site_count()));
  for (std::int64_t i = 0; i < full.site_count(); ++i) {
    const Coords c = full.coords_of(i);
    const double v = f[static_cast<std::size_t>(i)];
    if (bn.contains(c)) {
      g[static_cast<std::size_t>(bn.index_of(c))] = v;
    } else if (v != 0.0) {
      throw DomainError("dirichlet_energy_full: f not supported in B_n");
    }
  }
  return dirichlet_energy(env, n, g);
}

EigenPair principal_eigenpair(const DirichletOperator& op, double tol, int max_iter) {
  const std::int64_t m = op.dim();
  const std::size_t n = static_cast<std::size_t>(m);

  // inner solver: one sparse Cholesky factorization of the SPD operator,
  // reused for every inverse-iteration step
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  llt.compute(to_sparse(op));
  if (llt.info() != Eigen::Success)
    throw NumericalError("principal_eigenpair: Cholesky breakdown, operator not SPD");

  // start from the indicator of the pi-argmin site plus a small uniform part
  std::size_t zmin = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (op.diag[i] < op.diag[zmin]) zmin = i;
  }
  Eigen::VectorXd v = Eigen::VectorXd::Constant(m, 1e-3 / std::sqrt(static_cast<double>(n)));
  v[static_cast<Eigen::Index>(zmin)] += 1.0;
  v /= v.norm();

  std::vector<double> buf(n), Aw(n);
  auto rayleigh = [&](const Eigen::VectorXd& x, double& resid, double& floor) {
    std::copy(x.data(), x.data() + m, buf.begin());
    op.apply(buf, Aw);
    double lam = 0.0;
    for (std::size_t i = 0; i < n; ++i) lam += buf[i] * Aw[i];
    double r2 = 0.0, s2 = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
      const double ri = Aw[static_cast<std::size_t>(i)] - lam * buf[static_cast<std::size_t>(i)];
      r2 += ri * ri;
      // componentwise scale |A||x| of row i
      double srow = op.diag[static_cast<std::size_t>(i)] * std::abs(buf[static_cast<std::size_t>(i)]);
      for (std::int64_t k = op.row_ptr[static_cast<std::size_t>(i)];
           k < op.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
        srow += std::abs(op.off[static_cast<std::size_t>(k)]) *
                std::abs(buf[static_cast<std::size_t>(op.col[static_cast<std::size_t>(k)])]);
      }
      s2 += srow * srow;
    }
    resid = std::sqrt(r2);
    floor = std::numeric_limits<double>::epsilon() * std::sqrt(s2);
    return lam;
  };

  double residual = 0.0, res_floor = 0.0;
  double lambda = rayleigh(v, residual, res_floor);
  EigenPair best;
  best.lambda1 = lambda;
  best.psi1.assign(v.data(), v.data() + m);
  best.residual = residual;
  best.residual_floor = res_floor;

  for (int outer = 1; outer <= max_iter; ++outer) {
    Eigen::VectorXd w = llt.solve(v);
    const double s = w.norm();
    if (!(s > 0.0) || !std::isfinite(s))
      throw NumericalError("principal_eigenpair: solve produced invalid iterate");
    w /= s;

    double resid = 0.0, floor = 0.0;
    const double lam = rayleigh(w, resid, floor);
    const double rel_change = std::abs(lam - lambda) / std::max(lam, 1e-300);
    v = std::move(w);
    lambda = lam;
    if (resid < best.residual) {
      best.lambda1 = lam;
      best.psi1.assign(v.data(), v.data() + m);
      best.residual = resid;
      best.residual_floor = floor;
      best.iterations = outer;
    }
    if (rel_change <= tol && resid <= std::max(tol * lam, 8.0 * floor)) {
      EigenPair out;
      out.lambda1 = lam;
      out.psi1.assign(v.data(), v.data() + m);
      out.residual = resid;
      out.residual_floor = floor;
      out.iterations = outer;

      // Perron-Frobenius normalization
      std::size_t imax = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(out.psi1[i]) > std::abs(out.psi1[imax])) imax = i;
      }
      if (out.psi1[imax] < 0.0) {
        for (auto& x : out.psi1) x = -x;
      }
      double mn = 0.0;
      for (double x : out.psi1) mn = std::min(mn, x);
      if (mn < -1e-10)
        throw NumericalError("principal_eigenpair: eigenvector not nonnegative");
      for (auto& x : out.psi1) {
        if (x < 0.0) x = 0.0;
      }
      double s2 = 0.0;
      for (double x : out.psi1) s2 += x * x;
      s2 = std::sqrt(s2);
      for (auto& x : out.psi1) x /= s2;
      return out;
    }
  }
  throw ConvergenceError("principal_eigenpair: max_iter exceeded", std::move(best));
}

DenseSpectrum dense_oracle(const DirichletOperator& op) {
  const std::int64_t m = op.dim();
  if (m > 4096) throw DomainError("dense_oracle: dimension exceeds 4096");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (std::int64_t i = 0; i < m; ++i) {
    A(i, i) = op.diag[static_cast<std::size_t>(i)];
    for (std::int64_t k = op.row_ptr[static_cast<std::size_t>(i)];
         k < op.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
      A(i, op.col[static_cast<std::size_t>(k)]) = op.off[static_cast<std::size_t>(k)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
  if (solver.info() != Eigen::Success) throw NumericalError("dense_oracle: eigensolver failed");
  DenseSpectrum out;
  out.dim = m;
  out.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + m);
  out.eigenvectors.assign(solver.eigenvectors().data(), solver.eigenvectors().data() + m * m);
  return out;
}

}  // namespace rcm
