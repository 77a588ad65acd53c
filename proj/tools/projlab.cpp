#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "projlab/applications.hpp"
#include "projlab/config.hpp"
#include "projlab/csv.hpp"
#include "projlab/experiments.hpp"
#include "projlab/gauss_ratio.hpp"
#include "projlab/manifest.hpp"
#include "projlab/moment_lab.hpp"
#include "projlab/poly_approx.hpp"

namespace fs = std::filesystem;
using namespace projlab;

namespace {

enum ExitCode { kOk = 0, kRuntime = 1, kConfig = 2, kDegenerate = 3 };

enum class Kind { kInt, kDouble, kString, kBool, kIntList, kDoubleList, kStringList };

struct Override {
  std::string flag;
  std::string key;
  Kind kind;
  std::string help;
  std::optional<std::string> value;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out_dir = "out";
  bool quiet = false;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

nlohmann::json convert(const Override& o) {
  const std::string& v = *o.value;
  const auto to_int = [&](const std::string& s) -> nlohmann::json {
    std::size_t used = 0;
    long long x = 0;
    try {
      x = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw ConfigError(o.key + ": expected an integer, got '" + s + "'");
    return x;
  };
  const auto to_double = [&](const std::string& s) -> nlohmann::json {
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw ConfigError(o.key + ": expected a number, got '" + s + "'");
    return x;
  };
  switch (o.kind) {
    case Kind::kInt: return to_int(v);
    case Kind::kDouble: return to_double(v);
    case Kind::kString: return v;
    case Kind::kBool:
      if (v == "true" || v == "1") return true;
      if (v == "false" || v == "0") return false;
      throw ConfigError(o.key + ": expected true or false, got '" + v + "'");
    case Kind::kIntList:
    case Kind::kDoubleList:
    case Kind::kStringList: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& s : split(v)) {
        if (o.kind == Kind::kIntList) arr.push_back(to_int(s));
        else if (o.kind == Kind::kDoubleList) arr.push_back(to_double(s));
        else arr.push_back(s);
      }
      return arr;
    }
  }
  return nullptr;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "TOML config, or a manifest.json to replay");
  sub->add_option("--seed", c.seed, "Root 64-bit seed");
  sub->add_option("--workers", c.workers, "Worker threads (default: available parallelism)");
  sub->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
  sub->add_flag("--quiet", c.quiet, "Suppress progress messages");
}

void add_overrides(CLI::App* sub, std::vector<Override>& overrides) {
  for (auto& o : overrides) sub->add_option(o.flag, o.value, o.help);
}

ConfigDoc build_doc(const Common& c, const std::string& section, const std::vector<Override>& overrides) {
  ConfigDoc doc = c.config.empty() ? ConfigDoc() : ConfigDoc::load(c.config);
  for (const auto& o : overrides) {
    if (o.value) doc.set(section, o.key, convert(o));
  }
  if (c.seed) doc.set(section, "seed", *c.seed);
  if (c.workers) doc.set(section, "workers", *c.workers);
  return doc;
}

std::vector<Override> sweep_overrides() {
  return {{"--family", "family", Kind::kString, "Distribution family", {}},
          {"--df", "df", Kind::kInt, "Degrees of freedom (product-scaled-t)", {}},
          {"--shell-low", "shell_low", Kind::kDouble, "Inner shell variance (spherical-shell-mixture)", {}},
          {"--d", "d_list", Kind::kIntList, "Dimensions, comma separated", {}},
          {"--mc-reps", "mc_reps", Kind::kInt, "Monte Carlo replicates", {}},
          {"--max-degenerate-fraction", "max_degenerate_fraction", Kind::kDouble,
           "Degenerate fraction above which the run exits with 3", {}}};
}

int resolved(int workers) { return workers > 0 ? workers : default_workers(); }

std::string rel(const std::string& path, const std::string& dir) {
  return fs::relative(fs::path(path), fs::path(dir)).generic_string();
}

void log(const Common& c, const std::string& msg) {
  if (!c.quiet) std::cerr << msg << '\n';
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

int cmd_theorem(const Common& c, const std::vector<Override>& ov, const std::string& command) {
  RunManifest m;
  m.started_at = utc_timestamp();
  const ExperimentConfig cfg = experiment_config(build_doc(c, "theorem", ov), "theorem");
  log(c, "theorem: " + cfg.family + " d=" + join_ints(cfg.d_list) + " n_betas=" +
             std::to_string(cfg.n_betas));
  const TheoremVerdict v = run_theorem_sweep(cfg);
  fs::create_directories(c.out_dir);
  m.command = command;
  m.config = config_echo(cfg, "theorem");
  m.seed = cfg.seed;
  m.workers = cfg.resolved_workers();
  for (const auto& p : write_theorem_outputs(v, cfg, c.out_dir)) m.add_output(c.out_dir, rel(p, c.out_dir));
  m.notes = v.notes;
  const double frac = degenerate_fraction(v);
  if (frac > cfg.max_degenerate_fraction) {
    m.notes.push_back("degenerate fraction " + format_double(frac) + " exceeds " +
                      format_double(cfg.max_degenerate_fraction));
  }
  m.write(c.out_dir);
  if (!c.quiet) {
    for (const auto& r : v.rows) {
      if (r.x_mode != "grid") continue;
      std::cout << r.family << " d=" << r.d << " eps=" << format_double(r.eps)
                << " frac_exceed_d1=" << format_double(r.frac_exceed_d1)
                << " frac_exceed_d2=" << format_double(r.frac_exceed_d2) << '\n';
    }
  }
  if (frac > cfg.max_degenerate_fraction) {
    std::cerr << "error: degenerate fraction " << frac << " exceeds max_degenerate_fraction "
              << cfg.max_degenerate_fraction << '\n';
    return kDegenerate;
  }
  return kOk;
}

int cmd_proof(const Common& c, const std::vector<Override>& ov, const std::string& command) {
  RunManifest m;
  m.started_at = utc_timestamp();
  const ExperimentConfig cfg = experiment_config(build_doc(c, "proof", ov), "proof");
  log(c, "proof: " + cfg.family + " d=" + join_ints(cfg.d_list));
  const auto rows = run_proof_sweep(cfg);
  fs::create_directories(c.out_dir);
  m.command = command;
  m.config = config_echo(cfg, "proof");
  m.seed = cfg.seed;
  m.workers = cfg.resolved_workers();
  m.add_output(c.out_dir, rel(write_proof_outputs(rows, cfg, c.out_dir), c.out_dir));
  const double frac = degenerate_fraction(rows);
  if (frac > cfg.max_degenerate_fraction) {
    m.notes.push_back("degenerate fraction " + format_double(frac) + " exceeds " +
                      format_double(cfg.max_degenerate_fraction));
  }
  m.write(c.out_dir);
  if (!c.quiet) {
    for (const auto& r : rows) {
      std::cout << r.functional << " d=" << r.d << " x=" << format_double(r.x)
                << " estimate=" << format_double(r.estimate) << " se=" << format_double(r.se)
                << (r.degenerate ? " degenerate" : "") << '\n';
    }
  }
  if (frac > cfg.max_degenerate_fraction) {
    std::cerr << "error: degenerate fraction " << frac << " exceeds max_degenerate_fraction "
              << cfg.max_degenerate_fraction << '\n';
    return kDegenerate;
  }
  return kOk;
}

int cmd_moments(const Common& c, const std::vector<Override>& ov, const std::string& command) {
  RunManifest m;
  m.started_at = utc_timestamp();
  const MomentsConfig cfg = moments_config(build_doc(c, "moments", ov));
  log(c, "moments: " + cfg.family + " d=" + join_ints(cfg.d_list));
  const auto rows = run_moment_battery(cfg);
  fs::create_directories(c.out_dir);
  write_diagnostics_csv(rows, (fs::path(c.out_dir) / "diagnostics.csv").string());
  m.command = command;
  m.config = config_echo(cfg);
  m.seed = cfg.seed;
  m.workers = resolved(cfg.workers);
  m.add_output(c.out_dir, "diagnostics.csv");
  m.write(c.out_dir);
  if (!c.quiet) {
    for (const auto& r : rows) {
      std::cout << r.condition << " " << r.monomial << " d=" << r.d
                << " estimate=" << format_double(r.estimate) << " se=" << format_double(r.se) << '\n';
    }
  }
  return kOk;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n == 0 ? 0.0 : 0.5 * (v[(n - 1) / 2] + v[n / 2]);
}

int cmd_apps(const Common& c, std::vector<Override> ov, const std::string& which,
             const std::optional<std::string>& d_flag, const std::string& command) {
  if (d_flag) {
    if (which != "sparse") ov.push_back({"--d", "d", Kind::kInt, "", d_flag});
    if (which == "sparse" || which == "all") ov.push_back({"--d", "sparse_d", Kind::kInt, "", d_flag});
  }
  ConfigDoc doc = build_doc(c, "apps", ov);
  if (which == "sir" || which == "save") doc.set("apps", "methods", nlohmann::json::array({which}));
  RunManifest m;
  m.started_at = utc_timestamp();
  const AppsConfig cfg = apps_config(doc);
  fs::create_directories(c.out_dir);
  if (which != "sparse") {
    log(c, "apps: sliced regression " + cfg.family + " d=" + std::to_string(cfg.d));
    const auto rows = run_sir_save(cfg);
    write_sir_save_csv(rows, cfg.seed, (fs::path(c.out_dir) / "sir_save.csv").string());
    m.add_output(c.out_dir, "sir_save.csv");
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const auto& r : rows) groups[{r.method, r.link}].push_back(r.alignment);
    for (const auto& [key, a] : groups) {
      std::cout << key.first << " link=" << key.second << " d=" << cfg.d
                << " median_alignment=" << format_double(median(a)) << " repeats=" << a.size() << '\n';
    }
  }
  if (which == "sparse" || which == "all") {
    log(c, "apps: sparse submodel " + cfg.family + " d=" + std::to_string(cfg.sparse_d));
    const auto rows = run_sparse(cfg);
    write_sparse_csv(rows, cfg.seed, (fs::path(c.out_dir) / "sparse.csv").string());
    m.add_output(c.out_dir, "sparse.csv");
    for (const auto& r : rows) {
      std::cout << "sparse d=" << r.d << " c_hat=" << format_double(r.c_hat)
                << " c_theory=" << format_double(r.c_theory)
                << " max_mean_dev=" << format_double(r.max_mean_dev)
                << " max_var_dev=" << format_double(r.max_var_dev)
                << " null_floor=" << format_double(r.null_floor) << '\n';
    }
  }
  m.command = command;
  m.config = config_echo(cfg);
  m.seed = cfg.seed;
  m.workers = resolved(cfg.workers);
  m.write(c.out_dir);
  return kOk;
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for low-dimensional projections of high-dimensional data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kArtifactVersion));

  Common common;

  auto* theorem = app.add_subcommand("theorem", "Projection-conditional moment sweep");
  add_common(theorem, common);
  auto theorem_ov = sweep_overrides();
  theorem_ov.insert(theorem_ov.end(),
                    {{"--n-betas", "n_betas", Kind::kInt, "Directions per dimension", {}},
                     {"--n-samples", "n_samples", Kind::kInt, "Samples per direction (0: max(1e5, 200 d))", {}},
                     {"--eps", "eps_list", Kind::kDoubleList, "Exceedance margins, comma separated", {}},
                     {"--x-range", "x_range", Kind::kDouble, "Half-width M of the conditioning range", {}},
                     {"--estimator", "estimator.method", Kind::kString, "slicing, kernel or gauss-is", {}},
                     {"--n-slices", "estimator.n_slices", Kind::kInt, "Slices (0: automatic)", {}},
                     {"--bandwidth", "estimator.bandwidth", Kind::kDouble, "Kernel bandwidth (0: automatic)", {}},
                     {"--n-grid", "estimator.n_grid", Kind::kInt, "Grid points on [-M, M]", {}},
                     {"--is-reps", "estimator.is_reps", Kind::kInt, "Importance-sampling draws", {}}});
  add_overrides(theorem, theorem_ov);

  auto* proof = app.add_subcommand("proof", "Gaussian-replacement functional sweep");
  add_common(proof, common);
  auto proof_ov = sweep_overrides();
  proof_ov.insert(proof_ov.end(),
                  {{"--functional", "functionals", Kind::kStringList,
                    "Functionals: e1, c, a, B, B1, C, C1, prop4, ratio", {}},
                   {"--k", "k", Kind::kInt, "Projection dimension", {}},
                   {"--l", "l", Kind::kInt, "Open-chain length", {}},
                   {"--j", "j_indices", Kind::kIntList, "Open-chain indices, comma separated", {}},
                   {"--x", "x_list", Kind::kDoubleList, "Conditioning values, comma separated", {}},
                   {"--monomial", "h", Kind::kString, "Monomial for the polynomial-approximation error", {}},
                   {"--enforce-precondition", "enforce_precondition", Kind::kBool,
                    "Reject x outside the validity region", {}}});
  add_overrides(proof, proof_ov);

  auto* moments = app.add_subcommand("moments", "Moment-condition diagnostics");
  add_common(moments, common);
  std::vector<Override> moments_ov{
      {"--family", "family", Kind::kString, "Distribution family", {}},
      {"--df", "df", Kind::kInt, "Degrees of freedom (product-scaled-t)", {}},
      {"--shell-low", "shell_low", Kind::kDouble, "Inner shell variance", {}},
      {"--d", "d_list", Kind::kIntList, "Dimensions, comma separated", {}},
      {"--k", "k", Kind::kInt, "Projection dimension", {}},
      {"--reps", "reps", Kind::kInt, "Monte Carlo replicates", {}},
      {"--t1a", "t1a", Kind::kStringList, "Monomials for the first condition", {}},
      {"--t1b-g", "t1b_g", Kind::kInt, "Closed-chain length g", {}},
      {"--t1b", "t1b", Kind::kStringList, "Monomials for the chain condition", {}},
      {"--prop5-g", "prop5_g", Kind::kStringList, "Chain monomials G", {}},
      {"--prop5-h", "prop5_h", Kind::kStringList, "Paired monomials H", {}}};
  add_overrides(moments, moments_ov);

  auto* ratio = app.add_subcommand("ratio", "Evaluate the density ratio at one point");
  int r_k = 0, r_d = 0;
  double r_x = 0.0;
  std::string r_gram = "identity";
  std::string r_family = "gaussian";
  int r_df = 20;
  double r_shell = 0.5;
  std::int64_t r_reps = 100000;
  std::uint64_t r_seed = 42;
  int r_workers = 0;
  ratio->add_option("--k", r_k, "Projection dimension")->required();
  ratio->add_option("--d", r_d, "Ambient dimension")->required();
  ratio->add_option("--x", r_x, "Conditioning value")->required();
  ratio->add_option("--gram", r_gram, "identity: constant term; mean: Monte Carlo mean over --family")
      ->check(CLI::IsMember({"identity", "mean"}))
      ->capture_default_str();
  ratio->add_option("--family", r_family, "Distribution family for --gram mean");
  ratio->add_option("--df", r_df, "Degrees of freedom (product-scaled-t)");
  ratio->add_option("--shell-low", r_shell, "Inner shell variance");
  ratio->add_option("--reps", r_reps, "Monte Carlo replicates for --gram mean");
  ratio->add_option("--seed", r_seed, "Root seed");
  ratio->add_option("--workers", r_workers, "Worker threads");

  auto* psi = app.add_subcommand("psi", "Export polynomial-approximation coefficients");
  int p_k = 0, p_d = 0;
  double p_x = 0.0;
  std::optional<double> p_bound;
  std::string p_out = "coeffs.csv";
  bool p_no_enforce = false;
  psi->add_option("--k", p_k, "Projection dimension")->required();
  psi->add_option("--d", p_d, "Ambient dimension")->required();
  psi->add_option("--x", p_x, "Expansion point")->required();
  psi->add_option("--x-bound", p_bound, "Validity bound on |x|");
  psi->add_option("--out", p_out, "Coefficient CSV path")->capture_default_str();
  psi->add_flag("--no-enforce", p_no_enforce, "Allow x outside the validity region");

  auto* apps = app.add_subcommand("apps", "Sliced regression and sparse-model demos");
  std::string apps_which;
  apps->add_option("kind", apps_which, "sir, save, sparse or all")
      ->required()
      ->check(CLI::IsMember({"sir", "save", "sparse", "all"}));
  add_common(apps, common);
  std::optional<std::string> apps_d;
  apps->add_option("--d", apps_d, "Dimension (sparse_d for the sparse demo)");
  std::vector<Override> apps_ov{
      {"--family", "family", Kind::kString, "Distribution family", {}},
      {"--df", "df", Kind::kInt, "Degrees of freedom (product-scaled-t)", {}},
      {"--shell-low", "shell_low", Kind::kDouble, "Inner shell variance", {}},
      {"--n", "n", Kind::kInt, "Sample size", {}},
      {"--n-square", "n_square", Kind::kInt, "Sample size for the square link", {}},
      {"--link", "links", Kind::kStringList, "Links: linear, cubic, square, independent", {}},
      {"--n-slices", "n_slices", Kind::kInt, "Slices", {}},
      {"--noise", "noise_sd", Kind::kDouble, "Response noise standard deviation", {}},
      {"--repeats", "repeats", Kind::kInt, "Repeats per link and method", {}},
      {"--sparse-n", "sparse_n", Kind::kInt, "Sample size for the sparse demo", {}},
      {"--sparse-cases", "sparse_cases", Kind::kInt, "Random sparse cases", {}},
      {"--sparse-noise", "sparse_noise", Kind::kDouble, "Sparse-model noise", {}},
      {"--sparse-slices", "sparse_slices", Kind::kInt, "Slices for the sparse check", {}},
      {"--x-range", "x_range", Kind::kDouble, "Half-width of the slicing range", {}}};
  add_overrides(apps, apps_ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  const std::string command = command_line(argc, argv);
  try {
    if (theorem->parsed()) return cmd_theorem(common, theorem_ov, command);
    if (proof->parsed()) return cmd_proof(common, proof_ov, command);
    if (moments->parsed()) return cmd_moments(common, moments_ov, command);
    if (apps->parsed()) return cmd_apps(common, apps_ov, apps_which, apps_d, command);
    if (ratio->parsed()) {
      if (r_gram == "identity") {
        const double v = density_ratio(GramDeviation::identity(r_k, r_d), r_x);
        std::cout << format_double(v) << ' ' << format_double(0.0) << '\n';
      } else {
        const auto spec = DistributionSpec::make(parse_family(r_family), r_d, r_df, r_shell);
        const auto est = ratio_mean(spec, r_k, r_x, Stream(r_seed), {r_reps, resolved(r_workers)});
        std::cout << format_double(est.mean) << ' ' << format_double(est.se) << '\n';
      }
      return kOk;
    }
    if (psi->parsed()) {
      PsiOptions opts;
      if (p_bound) opts.x_bound = *p_bound;
      opts.enforce_precondition = !p_no_enforce;
      const auto poly = build_psi(p_k, p_d, p_x, opts);
      const fs::path out(p_out);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      write_psi_csv(poly, p_out);
      std::cout << "terms=" << poly.terms().size() << " constant=" << format_double(poly.constant())
                << " precondition_met=" << (poly.precondition_met() ? "true" : "false") << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
