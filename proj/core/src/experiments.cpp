#include "rcmlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rcmlab/extremes.hpp"
#include "rcmlab/paths.hpp"
#include "rcmlab/percolation.hpp"
#include "rcmlab/rng.hpp"
#include "rcmlab/spectral.hpp"
#include "rcmlab/thresholds.hpp"
#include "rcmlab/traps.hpp"

namespace rcm {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr double kNa = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "spectrum", "localization", "scaling", "limit-law", "traps", "percolation", "paths"};
  return names;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (std::find(experiment_names().begin(), experiment_names().end(), experiment) ==
      experiment_names().end())
    throw ConfigError("unknown experiment: " + experiment);
  if (dim < 2) throw ConfigError("dim must be >= 2");
  if (dim > kMaxDim) throw ConfigError("dim too large for desk scale");
  if (n_grid.empty()) throw ConfigError("need at least one n");
  for (int n : n_grid) {
    if (n < 2) throw ConfigError("all n must be >= 2");
  }
  if (seeds < 1) throw ConfigError("seed count must be >= 1");
  if (law_kind != "polynomial" && law_kind != "constant")
    throw ConfigError("law must be polynomial or constant");
  if (law_kind == "polynomial" && !(gamma > 0.0))
    throw ConfigError("polynomial law requires gamma > 0");
  if (law_kind == "constant" && !(const_c > 0.0)) throw ConfigError("constant law requires c > 0");
  if (experiment == "limit-law" && (law_kind != "polynomial" || !(gamma > 0.0)))
    throw ConfigError("limit-law requires a polynomial law with gamma > 0");
  if (experiment == "localization" || experiment == "limit-law" || experiment == "traps") {
    if (law_kind == "constant") throw ConfigError(experiment + " needs a continuous law");
  }
  if (experiment == "localization" && epsilon1 == 0.0 && !(gamma < 0.25))
    throw ConfigError("localization default epsilon1 recipe needs gamma < 1/4");
  if ((experiment == "percolation" || experiment == "paths") && xi == 0.0 && !(p > 0.0 && p < 1.0))
    throw ConfigError(experiment + " needs --xi or --p in (0,1)");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0,1)");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

ConductanceLaw ExperimentConfig::make_law() const {
  if (law_kind == "constant") return ConductanceLaw::constant(const_c);
  return ConductanceLaw::polynomial(gamma);
}

double ExperimentConfig::effective_epsilon1() const {
  if (epsilon1 > 0.0) return epsilon1;
  return std::min(0.5, 1.0 / (2.0 * gamma) - 2.0 - 0.01);
}

double ExperimentConfig::effective_epsilon() const {
  if (epsilon > 0.0) return epsilon;
  const double e1 = effective_epsilon1();
  return 7.0 * e1 / (8.0 * (2.0 + e1));
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << experiment << "|d=" << dim << "|law=" << law_kind << "|gamma=" << fmt(gamma)
     << "|c=" << fmt(const_c) << "|n=";
  for (std::size_t i = 0; i < n_grid.size(); ++i) os << (i ? "," : "") << n_grid[i];
  os << "|seeds=" << seeds << "|base=" << seed_base << "|xi=" << fmt(xi) << "|p=" << fmt(p)
     << "|eps=" << fmt(epsilon) << "|eps1=" << fmt(epsilon1) << "|delta=" << fmt(delta)
     << "|tol=" << fmt(tol);
  return os.str();
}

std::string ExperimentConfig::hash_hex() const {
  const std::string s = canonical();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["dim"] = dim;
  j["law"] = law_kind;
  j["gamma"] = gamma;
  j["c"] = const_c;
  j["n"] = n_grid;
  j["seeds"] = seeds;
  j["seed_base"] = seed_base;
  j["xi"] = xi;
  j["p"] = p;
  j["epsilon"] = epsilon;
  j["epsilon1"] = epsilon1;
  j["delta"] = delta;
  j["tol"] = tol;
  j["threads"] = threads;
  j["out"] = out;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("experiment")) c.experiment = j["experiment"].get<std::string>();
    if (j.contains("dim")) c.dim = j["dim"].get<int>();
    if (j.contains("law")) c.law_kind = j["law"].get<std::string>();
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("c")) c.const_c = j["c"].get<double>();
    if (j.contains("n")) c.n_grid = j["n"].get<std::vector<int>>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<int>();
    if (j.contains("seed_base")) c.seed_base = j["seed_base"].get<std::uint64_t>();
    if (j.contains("xi")) c.xi = j["xi"].get<double>();
    if (j.contains("p")) c.p = j["p"].get<double>();
    if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
    if (j.contains("epsilon1")) c.epsilon1 = j["epsilon1"].get<double>();
    if (j.contains("delta")) c.delta = j["delta"].get<double>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  return c;
}

std::string RunRecord::csv_row() const {
  std::ostringstream os;
  os << config_hash << "," << seed << "," << n << "," << status << "," << fmt(lambda1) << ","
     << fmt(min_pi) << "," << fmt(psi1_zn_sq) << "," << fmt(mass_Dn) << "," << fmt(trap_count)
     << "," << fmt(quotient_stat) << "," << iters << "," << wall_ms;
  return os.str();
}

std::string RunRecord::csv_row_no_wall() const {
  std::ostringstream os;
  os << config_hash << "," << seed << "," << n << "," << status << "," << fmt(lambda1) << ","
     << fmt(min_pi) << "," << fmt(psi1_zn_sq) << "," << fmt(mass_Dn) << "," << fmt(trap_count)
     << "," << fmt(quotient_stat) << "," << iters;
  return os.str();
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median: empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  if (values.size() % 2 == 1) return values[m];
  return 0.5 * (values[m - 1] + values[m]);
}

namespace {

double quartile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(i);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + t * (v[i + 1] - v[i]);
}

struct JobOutput {
  RunRecord rec;
  std::string audit_row;  // experiment-specific plotdata line
  std::vector<std::pair<std::string, std::string>> extra_files;  // first-job dumps
};

struct EigenStage {
  SpeedField speed;
  std::optional<EigenPair> eig;
  std::string status = "ok";
};

EigenStage eigen_stage(const Environment& env, int n, double tol) {
  EigenStage stage;
  stage.speed = pi_field(env);
  try {
    const DirichletOperator op = assemble_dirichlet_operator(env, n);
    stage.eig = principal_eigenpair(op, tol);
  } catch (const ConvergenceError& e) {
    stage.status = "convergence_error";
    stage.eig = e.best;
  } catch (const NumericalError&) {
    stage.status = "numerical_error";
  }
  return stage;
}

void fill_eigen_fields(RunRecord& rec, const EigenStage& stage, int d, int n) {
  rec.min_pi = stage.speed.min_value;
  if (!stage.eig) return;
  const Box bn(d, n);
  rec.lambda1 = stage.eig->lambda1;
  rec.iters = stage.eig->iterations;
  const std::int64_t z = bn.index_of(stage.speed.argmin_site);
  const double psi_z = stage.eig->psi1[static_cast<std::size_t>(z)];
  rec.psi1_zn_sq = psi_z * psi_z;
}

bool argmax_at(const EigenPair& eig, std::int64_t index) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < eig.psi1.size(); ++i) {
    if (eig.psi1[i] > eig.psi1[imax]) imax = i;
  }
  return static_cast<std::int64_t>(imax) == index;
}

double xi_from(const ExperimentConfig& cfg, const ConductanceLaw& law) {
  if (cfg.xi > 0.0) return cfg.xi;
  return law.inverse_cdf(1.0 - cfg.p);
}

JobOutput run_job(const ExperimentConfig& cfg, int n, std::uint64_t seed, bool first_job) {
  const auto t0 = std::chrono::steady_clock::now();
  const ConductanceLaw law = cfg.make_law();
  const int d = cfg.dim;

  JobOutput out;
  out.rec.config_hash = cfg.hash_hex();
  out.rec.seed = seed;
  out.rec.n = n;
  out.rec.lambda1 = kNa;
  out.rec.min_pi = kNa;
  out.rec.psi1_zn_sq = kNa;
  out.rec.mass_Dn = kNa;
  out.rec.trap_count = kNa;
  out.rec.quotient_stat = kNa;

  try {
    if (cfg.experiment == "spectrum" || cfg.experiment == "scaling" ||
        cfg.experiment == "limit-law") {
      const Environment env = Environment::sample({d, n, 5}, law, seed);
      const EigenStage stage = eigen_stage(env, n, cfg.tol);
      out.rec.status = stage.status;
      fill_eigen_fields(out.rec, stage, d, n);
      if (first_job && stage.eig && cfg.experiment == "spectrum") {
        std::ostringstream body;
        const Box bn(d, n);
        for (int j = 0; j < d; ++j) body << "x" << (j + 1) << ",";
        body << "psi\n";
        body.precision(17);
        for (std::int64_t i = 0; i < bn.site_count(); ++i) {
          const Coords c = bn.coords_of(i);
          for (int j = 0; j < d; ++j) body << c[j] << ",";
          body << stage.eig->psi1[static_cast<std::size_t>(i)] << "\n";
        }
        out.extra_files.emplace_back(
            "psi_seed" + std::to_string(seed) + "_n" + std::to_string(n) + ".csv", body.str());
      }
    } else if (cfg.experiment == "localization") {
      const Environment env = Environment::sample({d, n, 5}, law, seed);
      const EigenStage stage = eigen_stage(env, n, cfg.tol);
      out.rec.status = stage.status;
      fill_eigen_fields(out.rec, stage, d, n);

      const ThresholdFamily crit = ThresholdFamily::critical(law, d);
      out.rec.trap_count =
          static_cast<double>(find_traps(env, n, crit.eval(n), 2, 1).trap_sites.size());
      out.rec.quotient_stat = quotient_statistic(stage.speed, n, 1);

      bool argmax_flag = false;
      PointwiseBoundAudit pw;
      if (stage.eig) {
        const Box bn(d, n);
        argmax_flag = argmax_at(*stage.eig, bn.index_of(stage.speed.argmin_site));
        pw = pointwise_bound_audit(*stage.eig, stage.speed, n);
        try {
          const DnResult dn = build_Dn(env, crit, cfg.effective_epsilon(), n);
          double mass = 0.0;
          for (std::int64_t i = 0; i < bn.site_count(); ++i) {
            if (dn.labeling.in_giant(bn.coords_of(i))) {
              const double v = stage.eig->psi1[static_cast<std::size_t>(i)];
              mass += v * v;
            }
          }
          out.rec.mass_Dn = mass;
        } catch (const PreconditionError&) {
          if (out.rec.status == "ok") out.rec.status = "no_giant_proxy";
        }
      }
      std::ostringstream audit;
      audit << seed << "," << n << "," << (argmax_flag ? 1 : 0) << "," << pw.checked << ","
            << pw.violations << "," << fmt(pw.max_excess);
      out.audit_row = audit.str();
    } else if (cfg.experiment == "traps") {
      const int b = 3 * d;
      const Environment env = Environment::sample({d, n, b + 1}, law, seed);
      const SpeedField speed = pi_field(env);
      out.rec.min_pi = speed.min_value;
      out.rec.quotient_stat = quotient_statistic(speed, n, 1);
      const ThresholdFamily crit = ThresholdFamily::critical(law, d);
      const TrapReport report = find_traps(env, n, crit.eval(n), 2, b);
      out.rec.trap_count = static_cast<double>(report.trap_sites.size());
      std::ostringstream audit;
      audit << seed << "," << n << "," << report.trap_sites.size() << ","
            << report.per_residue_counts[0] << "," << report.per_residue_counts[1] << ","
            << report.bad_edge_max;
      out.audit_row = audit.str();
      if (first_job) {
        out.extra_files.emplace_back(
            "trap_report_seed" + std::to_string(seed) + "_n" + std::to_string(n) + ".json",
            report.to_json(d) + "\n");
      }
    } else if (cfg.experiment == "percolation") {
      const Environment env = Environment::sample({d, n, 5}, law, seed);
      const double xi = xi_from(cfg, law);
      const ClusterLabeling lab = clusters(env, threshold_open(env, xi), n);
      const double density = cluster_density(lab, n);
      std::int64_t holes = 0;
      const Box bn(d, n);
      for (std::int64_t i = 0; i < bn.site_count(); ++i) {
        if (!lab.in_giant(bn.coords_of(i))) ++holes;
      }
      int map_built = 0;
      std::int64_t max_l1 = 0;
      const double dist_bound = 2.0 * d * std::pow(std::log(static_cast<double>(n)), d + 1);
      std::string status = "ok";
      try {
        const HoleMap map = build_hole_map(lab, n);
        map_built = 1;
        max_l1 = map.max_l1_distance;
        if (first_job) {
          std::ostringstream body;
          write_holemap_csv(body, map, d);
          out.extra_files.emplace_back(
              "holemap_seed" + std::to_string(seed) + "_n" + std::to_string(n) + ".csv",
              body.str());
          std::ostringstream lab_csv;
          write_labeling_csv(lab_csv, lab);
          out.extra_files.emplace_back(
              "labeling_seed" + std::to_string(seed) + "_n" + std::to_string(n) + ".csv",
              lab_csv.str());
        }
      } catch (const PreconditionError&) {
        status = "density_precondition_failed";
      }
      out.rec.status = status;
      std::ostringstream audit;
      audit << seed << "," << n << "," << status << "," << fmt(density) << "," << holes << ","
            << map_built << "," << max_l1 << "," << fmt(dist_bound);
      out.audit_row = audit.str();
    } else if (cfg.experiment == "paths") {
      const int b = 3 * d;
      const Environment env = Environment::sample({d, n, b + 2}, law, seed);
      const double xi = xi_from(cfg, law);
      const double bad = law.inverse_cdf(cfg.delta);
      const EigenStage stage = eigen_stage(env, n, cfg.tol);
      out.rec.status = stage.status;
      fill_eigen_fields(out.rec, stage, d, n);

      std::string status = out.rec.status;
      double mu = kNa, bound = kNa, min_slack = kNa;
      std::int64_t n_sources = -1;
      std::int64_t Lmax = 0;
      if (status == "ok") {
        try {
          if (bad_edge_census(env, n, b, bad) > 3 * d - 1)
            throw PreconditionError("census above 3d-1");
          const ClusterLabeling lab_xi = clusters(env, threshold_open(env, xi), n);
          if (cluster_density(lab_xi, n) < 0.5)
            throw PreconditionError("xi-cluster density below 1/2");
          const HoleMap base = build_hole_map(lab_xi, n);
          const ClusterLabeling lab_bad = clusters(env, threshold_open(env, bad), n);
          if (cluster_density(lab_bad, n) < 0.5)
            throw PreconditionError("no giant proxy at the bad threshold");
          const Box bn(d, n);
          for (const Coords& h : base.holes) {
            if (!lab_bad.in_giant(h)) throw PreconditionError("a hole escapes D_n");
          }
          for (const Coords& im : base.images) {
            if (!lab_bad.in_giant(im)) throw PreconditionError("an image escapes D_n");
          }
          const PathMap pm = build_detour_paths(env, n, base.holes, base, bad);
          n_sources = static_cast<std::int64_t>(pm.sources.size());
          Lmax = pm.L;
          if (first_job) {
            std::ostringstream body;
            write_pathmap_jsonl(body, env, pm);
            out.extra_files.emplace_back(
                "paths_seed" + std::to_string(seed) + "_n" + std::to_string(n) + ".jsonl",
                body.str());
          }

          const DirichletOperator cl_op =
              assemble_cluster_operator(env, lab_xi, lab_xi.giant_label, n);
          mu = principal_eigenpair(cl_op, 1e-8).lambda1;
          bound = pathvsrw_bound(pm.nu, static_cast<double>(std::max<std::int64_t>(pm.L, 1)), mu, d);

          // audit the certified inequality on psi1 and 200 random test vectors
          min_slack = std::numeric_limits<double>::infinity();
          if (stage.eig) {
            min_slack = std::min(min_slack, stage.eig->lambda1 / bound - 1.0);
          }
          const std::int64_t dim_bn = bn.site_count();
          std::vector<double> f(static_cast<std::size_t>(dim_bn));
          for (int r = 0; r < 200; ++r) {
            double norm2 = 0.0;
            for (std::int64_t i = 0; i < dim_bn; ++i) {
              const double v =
                  2.0 * uniform01(seed ^ 0xf00d5eedULL,
                                  static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(dim_bn) +
                                      static_cast<std::uint64_t>(i)) -
                  1.0;
              f[static_cast<std::size_t>(i)] = v;
              norm2 += v * v;
            }
            const double energy = dirichlet_energy(env, n, f);
            min_slack = std::min(min_slack, energy / (bound * norm2) - 1.0);
          }
        } catch (const PreconditionError&) {
          status = "precondition_failed";
        }
        out.rec.status = status;
      }
      std::ostringstream audit;
      audit << seed << "," << n << "," << status << "," << n_sources << "," << fmt(bad) << ","
            << Lmax << "," << fmt(mu) << "," << fmt(bound) << "," << fmt(out.rec.lambda1) << ","
            << fmt(min_slack);
      out.audit_row = audit.str();
    } else {
      throw ConfigError("unknown experiment: " + cfg.experiment);
    }
  } catch (const PreconditionError&) {
    out.rec.status = "precondition_failed";
  } catch (const DomainError&) {
    out.rec.status = "domain_error";
  } catch (const NumericalError&) {
    out.rec.status = "numerical_error";
  }

  const auto t1 = std::chrono::steady_clock::now();
  out.rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  return out;
}

const char* audit_header(const std::string& experiment) {
  if (experiment == "localization")
    return "seed,n,argmax_at_zn,pw_checked,pw_violations,pw_max_excess";
  if (experiment == "traps") return "seed,n,trap_count,even_count,odd_count,bad_edge_max";
  if (experiment == "percolation")
    return "seed,n,status,density,holes,map_built,map_max_l1,dist_bound";
  if (experiment == "paths") return "seed,n,status,sources,nu,L,mu,bound,lambda1,min_rel_slack";
  return nullptr;
}

nlohmann::json summarize(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                         const std::vector<std::string>& audit_rows,
                         std::filesystem::path plot_dir) {
  nlohmann::json summary;
  summary["experiment"] = cfg.experiment;
  summary["config_hash"] = cfg.hash_hex();
  {
    nlohmann::json c = nlohmann::json::parse(cfg.to_json());
    c.erase("threads");  // execution details, not physics: keep summaries
    c.erase("out");      // identical across reruns
    summary["config"] = c;
  }
  if (cfg.experiment == "localization") {
    summary["epsilon1"] = cfg.effective_epsilon1();
    summary["epsilon2"] = cfg.effective_epsilon();
  }

  nlohmann::json per_n = nlohmann::json::array();
  for (int n : cfg.n_grid) {
    std::vector<double> lam, minpi, psi, mass, quot, traps, ratio;
    int ok = 0, total = 0;
    for (const RunRecord& r : records) {
      if (r.n != n) continue;
      ++total;
      if (r.status != "ok") continue;
      ++ok;
      if (std::isfinite(r.lambda1)) lam.push_back(r.lambda1);
      if (std::isfinite(r.min_pi)) minpi.push_back(r.min_pi);
      if (std::isfinite(r.psi1_zn_sq)) psi.push_back(r.psi1_zn_sq);
      if (std::isfinite(r.mass_Dn)) mass.push_back(r.mass_Dn);
      if (std::isfinite(r.quotient_stat)) quot.push_back(r.quotient_stat);
      if (std::isfinite(r.trap_count)) traps.push_back(r.trap_count);
      if (std::isfinite(r.lambda1) && std::isfinite(r.min_pi) && r.min_pi > 0.0)
        ratio.push_back(r.lambda1 / r.min_pi);
    }
    nlohmann::json row;
    row["n"] = n;
    row["runs"] = total;
    row["ok"] = ok;
    if (!lam.empty()) {
      row["median_lambda1"] = median(lam);
      row["q1_lambda1"] = quartile(lam, 0.25);
      row["q3_lambda1"] = quartile(lam, 0.75);
    }
    if (!minpi.empty()) row["median_min_pi"] = median(minpi);
    if (!psi.empty()) row["median_psi1_zn_sq"] = median(psi);
    if (!mass.empty()) row["median_mass_Dn"] = median(mass);
    if (!quot.empty()) row["median_quotient"] = median(quot);
    if (!traps.empty()) {
      double s = 0.0;
      for (double t : traps) s += t;
      row["mean_trap_count"] = s / static_cast<double>(traps.size());
    }
    if (!ratio.empty()) row["median_lambda1_over_min_pi"] = median(ratio);
    per_n.push_back(row);
  }
  summary["per_n"] = per_n;

  if (cfg.experiment == "scaling") {
    try {
      const SlopeFit fit = scaling_slope(records);
      summary["slope"] = {{"value", fit.slope}, {"ci_lo", fit.ci_lo}, {"ci_hi", fit.ci_hi}};
      std::ofstream os(plot_dir / "slope_fit.csv");
      os << "n,log_n,median_lambda1,log_median\n";
      os.precision(17);
      for (int n : cfg.n_grid) {
        std::vector<double> lam;
        for (const RunRecord& r : records) {
          if (r.n == n && r.status == "ok" && std::isfinite(r.lambda1)) lam.push_back(r.lambda1);
        }
        if (lam.empty()) continue;
        const double med = median(lam);
        os << n << "," << std::log(static_cast<double>(n)) << "," << med << "," << std::log(med)
           << "\n";
      }
    } catch (const DomainError& e) {
      summary["slope_error"] = e.what();
    }
  }

  if (cfg.experiment == "limit-law") {
    const TailModel model(cfg.make_law(), cfg.dim);
    nlohmann::json ks_per_n = nlohmann::json::array();
    for (int n : cfg.n_grid) {
      const double cells = std::pow(2.0 * n + 1.0, cfg.dim);
      const double h = model.scale_h(cells);
      std::vector<double> rescaled;
      for (const RunRecord& r : records) {
        if (r.n == n && r.status == "ok" && std::isfinite(r.lambda1))
          rescaled.push_back(h * r.lambda1);
      }
      if (rescaled.empty()) continue;
      const int d = cfg.dim;
      const double g = cfg.gamma;
      const double ks =
          ks_distance(rescaled, [d, g](double z) { return z < 0.0 ? 0.0 : limit_cdf(z, d, g); });
      ks_per_n.push_back({{"n", n}, {"h", h}, {"samples", rescaled.size()}, {"ks", ks}});

      std::sort(rescaled.begin(), rescaled.end());
      std::ofstream os(plot_dir / ("ecdf_n" + std::to_string(n) + ".csv"));
      os << "value,ecdf,limit_cdf\n";
      os.precision(17);
      for (std::size_t i = 0; i < rescaled.size(); ++i) {
        os << rescaled[i] << "," << static_cast<double>(i + 1) / static_cast<double>(rescaled.size())
           << "," << limit_cdf(rescaled[i], cfg.dim, cfg.gamma) << "\n";
      }
    }
    summary["ks"] = ks_per_n;
  }

  if (cfg.experiment == "localization") {
    nlohmann::json audit_per_n = nlohmann::json::array();
    for (int n : cfg.n_grid) {
      std::int64_t runs = 0, argmax_hits = 0, pw_checked = 0, pw_viol = 0;
      for (const std::string& row : audit_rows) {
        std::istringstream is(row);
        std::string tok;
        std::vector<std::string> parts;
        while (std::getline(is, tok, ',')) parts.push_back(tok);
        if (parts.size() < 6 || std::stoi(parts[1]) != n) continue;
        ++runs;
        argmax_hits += std::stoll(parts[2]);
        pw_checked += std::stoll(parts[3]);
        pw_viol += std::stoll(parts[4]);
      }
      if (runs == 0) continue;
      audit_per_n.push_back({{"n", n},
                             {"argmax_at_zn_fraction",
                              static_cast<double>(argmax_hits) / static_cast<double>(runs)},
                             {"pointwise_bound_checked", pw_checked},
                             {"pointwise_bound_violations", pw_viol}});
    }
    summary["localization_audit"] = audit_per_n;
  }

  if (cfg.experiment == "percolation" || cfg.experiment == "paths") {
    std::int64_t passing = 0, total = 0;
    for (const RunRecord& r : records) {
      ++total;
      if (r.status == "ok") ++passing;
    }
    summary["precondition_passing"] = passing;
    summary["total_runs"] = total;
  }
  return summary;
}

}  // namespace

SweepResult run(const ExperimentConfig& config) {
  config.validate();
  if (config.out.empty()) throw ConfigError("output directory required");

  SweepResult result;
  result.out_dir = config.out;
  std::error_code ec;
  std::filesystem::create_directories(result.out_dir / "plotdata", ec);
  if (ec) throw IoError("cannot create output directory: " + result.out_dir.string());

  struct Job {
    int n;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int n : config.n_grid) {
    for (int s = 0; s < config.seeds; ++s) {
      jobs.push_back({n, config.seed_base + static_cast<std::uint64_t>(s)});
    }
  }

  std::vector<std::optional<JobOutput>> outputs(jobs.size());
  std::vector<char> done(jobs.size(), 0);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      JobOutput out = run_job(config, jobs[j].n, jobs[j].seed, j == 0);
      {
        std::lock_guard<std::mutex> lock(mu);
        outputs[j] = std::move(out);
        done[j] = 1;
      }
      cv.notify_all();
    }
  };

  const int nthreads = std::max(1, config.threads);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);

  std::ofstream runs_csv(result.out_dir / "runs.csv");
  if (!runs_csv) throw IoError("cannot open runs.csv for writing");
  runs_csv << kRunsCsvHeader << "\n";

  const char* ahdr = audit_header(config.experiment);
  std::ofstream audit_csv;
  if (ahdr) {
    audit_csv.open(result.out_dir / "plotdata" / (config.experiment + "_audit.csv"));
    audit_csv << ahdr << "\n";
  }

  std::vector<std::string> audit_rows;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return done[j] == 1; });
    JobOutput out = std::move(*outputs[j]);
    outputs[j].reset();
    lock.unlock();

    runs_csv << out.rec.csv_row() << "\n";
    runs_csv.flush();
    if (ahdr && !out.audit_row.empty()) {
      audit_csv << out.audit_row << "\n";
      audit_rows.push_back(out.audit_row);
    }
    for (const auto& [name, body] : out.extra_files) {
      std::ofstream extra(result.out_dir / "plotdata" / name);
      extra << body;
    }
    result.records.push_back(std::move(out.rec));
  }
  for (auto& t : pool) t.join();
  if (!runs_csv) throw IoError("runs.csv write failed");

  const nlohmann::json summary =
      summarize(config, result.records, audit_rows, result.out_dir / "plotdata");
  result.summary_json = summary.dump(2);
  std::ofstream summary_os(result.out_dir / "summary.json");
  if (!summary_os) throw IoError("cannot open summary.json for writing");
  summary_os << result.summary_json << "\n";
  return result;
}

SlopeFit scaling_slope(std::span<const RunRecord> records) {
  // group OK lambdas by n
  std::vector<int> ns;
  std::vector<std::vector<double>> groups;
  for (const RunRecord& r : records) {
    if (r.status != "ok" || !std::isfinite(r.lambda1) || !(r.lambda1 > 0.0)) continue;
    auto it = std::find(ns.begin(), ns.end(), r.n);
    if (it == ns.end()) {
      ns.push_back(r.n);
      groups.emplace_back();
      it = ns.end() - 1;
    }
    groups[static_cast<std::size_t>(it - ns.begin())].push_back(r.lambda1);
  }
  if (ns.size() < 3) throw DomainError("scaling_slope: need at least 3 distinct n");
  for (const auto& g : groups) {
    if (g.size() < 10) throw DomainError("scaling_slope: need at least 10 seeds per n");
  }

  auto fit = [&](const std::vector<std::vector<double>>& samples) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double x = std::log(static_cast<double>(ns[i]));
      const double y = std::log(median(samples[i]));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };

  SlopeFit out;
  out.slope = fit(groups);

  const int B = 1000;
  std::vector<double> slopes;
  slopes.reserve(B);
  std::uint64_t counter = 0;
  std::vector<std::vector<double>> resampled(groups.size());
  for (int b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const std::size_t sz = groups[i].size();
      resampled[i].resize(sz);
      for (std::size_t k = 0; k < sz; ++k) {
        const std::uint64_t r = counter_hash(0xb005ULL, counter++);
        resampled[i][k] = groups[i][r % sz];
      }
    }
    slopes.push_back(fit(resampled));
  }
  std::sort(slopes.begin(), slopes.end());
  out.ci_lo = slopes[static_cast<std::size_t>(0.025 * B)];
  out.ci_hi = slopes[static_cast<std::size_t>(0.975 * B) - 1];
  return out;
}

}  // namespace rcm
