#include "projlab/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <set>

#include "projlab/csv.hpp"
#include "projlab/deviation.hpp"
#include "projlab/gauss_ratio.hpp"
#include "projlab/monomial.hpp"
#include "projlab/monte_carlo.hpp"
#include "projlab/poly_approx.hpp"

namespace projlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

const std::map<std::string, std::uint64_t>& functional_ids() {
  static const std::map<std::string, std::uint64_t> ids{
      {"e1", 0}, {"c", 1}, {"a", 2}, {"B", 3}, {"B1", 4},
      {"C", 5}, {"C1", 6}, {"prop4", 7}, {"ratio", 8}};
  return ids;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = lo + (hi - lo) * i / (n - 1);
  return xs;
}

void fill_grid(BetaRecord& rec, const DeviationReport& rep) {
  rec.present = std::isfinite(rep.sup_d1);
  rec.sup_d1 = rec.present ? rep.sup_d1 : kNaN;
  rec.sup_d2 = rec.present ? rep.sup_d2 : kNaN;
  rec.n_eff_min = rec.present ? rep.n_eff_min : kNaN;
}

void fill_point(BetaRecord& rec, const DeviationRecord& r) {
  rec.present = r.present;
  rec.sup_d1 = r.present ? r.d1 : kNaN;
  rec.sup_d2 = r.present ? r.d2 : kNaN;
  rec.n_eff_min = r.present ? r.n_eff : kNaN;
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string join_indices(const std::vector<int>& j) {
  std::string out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(j[i]);
  }
  return out;
}

std::string optional_int(int v) { return v < 0 ? std::string() : std::to_string(v); }

}  // namespace

DistributionSpec ExperimentConfig::spec(int d) const {
  return DistributionSpec::make(parse_family(family), d, df, shell_low);
}

std::int64_t ExperimentConfig::samples_for(int d) const {
  if (n_samples > 0) return n_samples;
  return std::max<std::int64_t>(100000, 200 * static_cast<std::int64_t>(d));
}

int ExperimentConfig::resolved_workers() const {
  return workers > 0 ? workers : default_workers();
}

void ExperimentConfig::validate() const {
  const Family f = parse_family(family);
  if (f == Family::kProductScaledT && df <= 10) throw ConfigError("df: must be >= 11");
  if (f == Family::kSphericalShellMixture && !(shell_low > 0.0 && shell_low < 1.0)) {
    throw ConfigError("shell_low: must lie in (0, 1)");
  }
  if (d_list.empty()) throw ConfigError("d_list: must be nonempty");
  for (std::size_t i = 0; i < d_list.size(); ++i) {
    if (d_list[i] < 2) throw ConfigError("d_list: dimensions must be >= 2");
    if (i > 0 && d_list[i] <= d_list[i - 1]) throw ConfigError("d_list: must be strictly increasing");
  }
  if (n_betas < 1) throw ConfigError("n_betas: must be positive");
  if (n_samples < 0) throw ConfigError("n_samples: must be positive (0 selects the default)");
  if (mc_reps < 1) throw ConfigError("mc_reps: must be positive");
  if (eps_list.empty()) throw ConfigError("eps_list: must be nonempty");
  for (double e : eps_list) {
    if (!(e >= 0.0)) throw ConfigError("eps_list: thresholds must be >= 0");
  }
  if (!(x_range > 0.0)) throw ConfigError("x_range: must be positive");
  if (!(max_degenerate_fraction >= 0.0 && max_degenerate_fraction <= 1.0)) {
    throw ConfigError("max_degenerate_fraction: must lie in [0, 1]");
  }
  if (estimator.n_slices == 1 || estimator.n_slices < 0) {
    throw ConfigError("estimator.n_slices: must be >= 2 (0 selects the default)");
  }
  if (!(estimator.bandwidth >= 0.0)) throw ConfigError("estimator.bandwidth: must be >= 0");
  if (estimator.n_grid < 1) throw ConfigError("estimator.n_grid: must be positive");
  if (estimator.is_reps < 2) throw ConfigError("estimator.is_reps: must be >= 2");
}

void ExperimentConfig::validate_proof() const {
  validate();
  if (functionals.empty()) throw ConfigError("functionals: must be nonempty");
  for (const auto& f : functionals) {
    if (!functional_ids().count(f)) throw ConfigError("functionals: unknown functional '" + f + "'");
  }
  if (k < 1) throw ConfigError("k: must be >= 1");
  const bool wants_c = std::count(functionals.begin(), functionals.end(), "C") ||
                       std::count(functionals.begin(), functionals.end(), "C1");
  if (wants_c && k % 2 != 0) throw ConfigError("k: functional C requires even k");
  const bool wants_b = std::count(functionals.begin(), functionals.end(), "B") ||
                       std::count(functionals.begin(), functionals.end(), "B1");
  if (wants_b) {
    if (l < 1) throw ConfigError("l: must be >= 1");
    try {
      validate_chain_indices(l, j_indices);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("j_indices: ") + e.what());
    }
  }
  if (std::count(functionals.begin(), functionals.end(), "prop4")) {
    try {
      MonomialSpec::parse(k, h);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("h: ") + e.what());
    }
  }
  if (x_list.empty()) throw ConfigError("x_list: must be nonempty");
  int kk = 1;
  for (const auto& f : functionals) {
    if (f == "e1" || f == "c" || f == "a") kk = std::max(kk, 2);
    else if (f == "B" || f == "B1") kk = std::max(kk, l);
    else kk = std::max(kk, k);
  }
  for (int d : d_list) {
    for (double x : x_list) {
      if (!(kk * x * x < d)) {
        throw ConfigError("x_list: requires k x^2 < d (x = " + format_double(x) +
                          ", d = " + std::to_string(d) + ")");
      }
    }
  }
}

const VerdictRow& TheoremVerdict::row(int d, const std::string& x_mode, double eps) const {
  for (const auto& r : rows) {
    if (r.d == d && r.x_mode == x_mode && r.eps == eps) return r;
  }
  throw InvalidArgument("verdict: no row for d = " + std::to_string(d) + ", mode " + x_mode);
}

bool exceeds(double sup, double floor, double eps) { return sup > floor + eps; }

std::pair<BetaRecord, BetaRecord> evaluate_direction(const DistributionSpec& spec,
                                                     const ExperimentConfig& cfg,
                                                     const Stream& stream) {
  const int d = spec.dim();
  Stream s_dir = stream.substream(0);
  const Direction beta = sample_direction(d, s_dir);
  BetaRecord grid{d, 0, "grid"};
  BetaRecord random{d, 0, "random"};
  const double m = cfg.x_range;
  const auto& ec = cfg.estimator;

  if (ec.method == Method::kGaussIs) {
    ConditionalMomentEstimate est;
    est.method = Method::kGaussIs;
    est.beta = beta.beta();
    const auto xs = linspace(-m, m, ec.n_grid);
    bool degenerate = false;
    for (std::size_t i = 0; i < xs.size() && !degenerate; ++i) {
      auto e = estimate_gauss_is(spec, beta, xs[i], ec.is_reps, stream.substream(3).substream(i));
      degenerate = e.degenerate;
      if (!degenerate) est.points.push_back(std::move(e.points.front()));
    }
    if (!degenerate) fill_grid(grid, deviation_report(est, beta, m));
    Stream s_pick = stream.substream(2);
    Vector z(d);
    sample_one(spec, s_pick, z);
    const auto er = estimate_gauss_is(spec, beta, beta.beta().dot(z), ec.is_reps,
                                      stream.substream(4));
    if (!er.degenerate) fill_point(random, deviation_report(er, beta, kInf).records.front());
    return {grid, random};
  }

  const Index n = cfg.samples_for(d);
  const RowMatrix samples = sample(spec, n, stream.substream(1));
  Stream s_pick = stream.substream(2);
  const Index pick = std::min<Index>(n - 1, static_cast<Index>(s_pick.uniform() * n));
  const Vector t = samples * beta.beta();

  if (ec.method == Method::kSlicing) {
    const int n_slices = ec.n_slices > 0 ? ec.n_slices : default_slice_count(n);
    const auto est = estimate_slicing(samples, beta, n_slices);
    const auto rep = deviation_report(est, beta, m);
    fill_grid(grid, rep);
    fill_point(random, rep.records[slice_of_rank(stable_rank(t, pick), n, n_slices)]);
  } else {
    const double bw = ec.bandwidth > 0.0 ? ec.bandwidth : default_bandwidth(1.0, n);
    const auto est = estimate_kernel(samples, beta, bw, linspace(-m, m, ec.n_grid));
    fill_grid(grid, deviation_report(est, beta, m));
    const auto er = estimate_kernel(samples, beta, bw, {t[pick]});
    fill_point(random, deviation_report(er, beta, kInf).records.front());
  }
  return {grid, random};
}

namespace {

std::vector<BetaRecord> sweep_records(const DistributionSpec& base, const ExperimentConfig& cfg,
                                      const Stream& root, int d) {
  const DistributionSpec spec = base.with_dim(d);
  const Stream sd = root.substream(static_cast<std::uint64_t>(d));
  std::vector<std::pair<BetaRecord, BetaRecord>> out(cfg.n_betas);
  parallel_for(cfg.n_betas, cfg.resolved_workers(), [&](std::int64_t b) {
    auto p = evaluate_direction(spec, cfg, sd.substream(static_cast<std::uint64_t>(b)));
    p.first.beta_index = p.second.beta_index = static_cast<int>(b);
    out[b] = std::move(p);
  });
  std::vector<BetaRecord> recs;
  recs.reserve(2 * out.size());
  for (auto& p : out) recs.push_back(std::move(p.first));
  for (auto& p : out) recs.push_back(std::move(p.second));
  return recs;
}

}  // namespace

std::vector<NullFloor> compute_null_floor(const ExperimentConfig& cfg) {
  cfg.validate();
  const Stream root = Stream(cfg.seed).substream(kTheoremTag).substream(1);
  const auto gauss = DistributionSpec::gaussian(2);
  std::vector<NullFloor> floors;
  for (int d : cfg.d_list) {
    const auto recs = sweep_records(gauss, cfg, root, d);
    for (const char* mode : {"grid", "random"}) {
      NullFloor f{d, mode, -kInf, -kInf, 0};
      for (const auto& r : recs) {
        if (r.x_mode != mode || !r.present) continue;
        f.floor_d1 = std::max(f.floor_d1, r.sup_d1);
        f.floor_d2 = std::max(f.floor_d2, r.sup_d2);
        ++f.n_betas;
      }
      if (f.n_betas == 0) {
        throw NumericalError("null floor: every Gaussian direction degenerate at d = " +
                             std::to_string(d));
      }
      floors.push_back(f);
    }
  }
  return floors;
}

std::vector<VerdictRow> summarize(const std::string& family, const std::vector<BetaRecord>& records,
                                  const std::vector<NullFloor>& floors,
                                  const std::vector<double>& eps_list) {
  std::vector<VerdictRow> rows;
  for (const auto& f : floors) {
    for (double eps : eps_list) {
      VerdictRow row{family, f.d, f.x_mode, eps};
      int n = 0, c1 = 0, c2 = 0;
      for (const auto& r : records) {
        if (r.d != f.d || r.x_mode != f.x_mode || !r.present) continue;
        ++n;
        c1 += exceeds(r.sup_d1, f.floor_d1, eps);
        c2 += exceeds(r.sup_d2, f.floor_d2, eps);
      }
      row.n_betas = n;
      if (n == 0) {
        row.frac_exceed_d1 = row.frac_exceed_d2 = row.se_frac_d1 = row.se_frac_d2 = kNaN;
      } else {
        row.frac_exceed_d1 = static_cast<double>(c1) / n;
        row.frac_exceed_d2 = static_cast<double>(c2) / n;
        row.se_frac_d1 = std::sqrt(row.frac_exceed_d1 * (1.0 - row.frac_exceed_d1) / n);
        row.se_frac_d2 = std::sqrt(row.frac_exceed_d2 * (1.0 - row.frac_exceed_d2) / n);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

TheoremVerdict run_theorem_sweep(const ExperimentConfig& cfg, const std::vector<NullFloor>* floors) {
  cfg.validate();
  TheoremVerdict v;
  const DistributionSpec base = cfg.spec(cfg.d_list.front());
  v.family = base.name();
  if (!base.attestations().all_hold()) {
    v.notes.push_back("moment conditions not attested analytically for " + base.name());
  }
  v.floors = floors ? *floors : compute_null_floor(cfg);
  const Stream root = Stream(cfg.seed).substream(kTheoremTag).substream(0);
  for (int d : cfg.d_list) {
    auto recs = sweep_records(base, cfg, root, d);
    std::vector<double> s1, s2;
    int missing = 0;
    for (const auto& r : recs) {
      if (r.x_mode != "grid") continue;
      if (!r.present) {
        ++missing;
        continue;
      }
      s1.push_back(r.sup_d1);
      s2.push_back(r.sup_d2);
    }
    v.median_sup_d1.push_back(median(s1));
    v.median_sup_d2.push_back(median(s2));
    v.missing.push_back(missing);
    if (missing > 0) {
      v.notes.push_back(std::to_string(missing) + " of " + std::to_string(cfg.n_betas) +
                        " directions degenerate at d = " + std::to_string(d));
    }
    v.records.insert(v.records.end(), recs.begin(), recs.end());
  }
  std::vector<NullFloor> used;
  for (const auto& f : v.floors) {
    if (std::count(cfg.d_list.begin(), cfg.d_list.end(), f.d)) used.push_back(f);
  }
  v.rows = summarize(v.family, v.records, used, cfg.eps_list);
  return v;
}

std::vector<std::string> write_theorem_outputs(const TheoremVerdict& v, const ExperimentConfig& cfg,
                                               const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string seed = std::to_string(cfg.seed);
  std::vector<std::string> paths;
  {
    std::map<std::pair<int, std::string>, const NullFloor*> fl;
    for (const auto& f : v.floors) fl[{f.d, f.x_mode}] = &f;
    CsvWriter out((fs::path(out_dir) / "theorem_sweep.csv").string(),
                  {"family", "d", "beta_index", "x_mode", "eps", "sup_d1", "sup_d2", "exceed_d1",
                   "exceed_d2", "n_eff_min", "seed"});
    for (const auto& r : v.records) {
      const NullFloor& f = *fl.at({r.d, r.x_mode});
      for (double eps : cfg.eps_list) {
        const std::string e1 = r.present ? (exceeds(r.sup_d1, f.floor_d1, eps) ? "1" : "0") : "";
        const std::string e2 = r.present ? (exceeds(r.sup_d2, f.floor_d2, eps) ? "1" : "0") : "";
        out.row(v.family, r.d, r.beta_index, r.x_mode, eps, r.sup_d1, r.sup_d2, e1, e2,
                r.n_eff_min, seed);
      }
    }
    paths.push_back(out.path());
  }
  for (const char* mode : {"grid", "random"}) {
    const std::string name = std::string(mode) == "grid" ? "verdict.csv" : "verdict_random.csv";
    CsvWriter out((fs::path(out_dir) / name).string(),
                  {"family", "d", "eps", "frac_exceed_d1", "frac_exceed_d2", "se_frac_d1",
                   "se_frac_d2", "n_betas"});
    for (const auto& r : v.rows) {
      if (r.x_mode != mode) continue;
      out.row(r.family, r.d, r.eps, r.frac_exceed_d1, r.frac_exceed_d2, r.se_frac_d1,
              r.se_frac_d2, r.n_betas);
    }
    paths.push_back(out.path());
  }
  {
    CsvWriter out((fs::path(out_dir) / "null_floor.csv").string(),
                  {"family", "d", "x_mode", "floor_d1", "floor_d2", "n_betas"});
    for (const auto& f : v.floors) {
      out.row(std::string("gaussian"), f.d, f.x_mode, f.floor_d1, f.floor_d2, f.n_betas);
    }
    paths.push_back(out.path());
  }
  return paths;
}

double degenerate_fraction(const TheoremVerdict& v) {
  if (v.records.empty()) return 0.0;
  int lost = 0;
  for (const auto& r : v.records) lost += !r.present;
  return static_cast<double>(lost) / static_cast<double>(v.records.size());
}

double degenerate_fraction(const std::vector<ProofRow>& rows) {
  if (rows.empty()) return 0.0;
  int lost = 0;
  for (const auto& r : rows) lost += r.degenerate;
  return static_cast<double>(lost) / static_cast<double>(rows.size());
}

std::vector<ProofRow> run_proof_sweep(const ExperimentConfig& cfg) {
  cfg.validate_proof();
  double x_bound = 0.0;
  for (double x : cfg.x_list) x_bound = std::max(x_bound, std::abs(x));
  const PsiOptions psi_opts{x_bound, cfg.enforce_precondition};
  const FunctionalOptions fo{cfg.mc_reps, cfg.resolved_workers()};
  const Stream root = Stream(cfg.seed).substream(kProofTag);
  std::vector<ProofRow> rows;
  for (const auto& name : cfg.functionals) {
    const Stream sf = root.substream(functional_ids().at(name));
    for (int d : cfg.d_list) {
      const DistributionSpec spec = cfg.spec(d);
      for (double x : cfg.x_list) {
        const Stream s = sf.substream(static_cast<std::uint64_t>(d))
                             .substream(std::bit_cast<std::uint64_t>(x));
        ProofRow row{spec.name(), name, 2};
        row.d = d;
        row.x = x;
        McEstimate e;
        if (name == "e1") {
          double ess = 0.0;
          e = functional_e1(spec, x, s, fo, &ess);
          if (ess < kMinWeightEss) {
            row.degenerate = true;
            e.mean = e.se = kNaN;
          }
        } else if (name == "c") {
          e = functional_c(spec, x, s, fo);
        } else if (name == "a") {
          e = functional_a(spec, x, s, fo);
        } else if (name == "B" || name == "B1") {
          row.k = row.l = cfg.l;
          row.m = static_cast<int>(cfg.j_indices.size());
          row.j_indices = cfg.j_indices;
          e = name == "B" ? functional_B(spec, cfg.l, cfg.j_indices, x, s, fo)
                          : functional_B1(spec, cfg.l, cfg.j_indices, x, s, fo, psi_opts);
        } else if (name == "C" || name == "C1") {
          row.k = cfg.k;
          e = name == "C" ? functional_C(spec, cfg.k, x, s, fo)
                          : functional_C1(spec, cfg.k, x, s, fo, psi_opts);
        } else if (name == "prop4") {
          row.k = cfg.k;
          e = prop4_error(spec, cfg.k, MonomialSpec::parse(cfg.k, cfg.h), x, s, fo, psi_opts);
        } else {
          row.k = cfg.k;
          e = ratio_mean(spec, cfg.k, x, s, fo);
        }
        row.estimate = e.mean;
        row.se = e.se;
        row.reps = e.reps;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string write_proof_outputs(const std::vector<ProofRow>& rows, const ExperimentConfig& cfg,
                                const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  CsvWriter out((fs::path(out_dir) / "proof_sweep.csv").string(),
                {"family", "functional", "k", "l", "m", "j_indices", "d", "x", "estimate", "se",
                 "reps", "seed"});
  for (const auto& r : rows) {
    out.row(r.family, r.functional, r.k, optional_int(r.l), optional_int(r.m),
            join_indices(r.j_indices), r.d, r.x, r.estimate, r.se, r.reps, std::to_string(cfg.seed));
  }
  return out.path();
}

}  // namespace projlab
