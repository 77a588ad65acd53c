#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "projlab/cond_estimators.hpp"
#include "projlab/distributions.hpp"
#include "projlab/rng.hpp"
#include "projlab/stream_tags.hpp"

namespace projlab {

struct EstimatorConfig {
  Method method = Method::kSlicing;
  /// 0 selects default_slice_count(n).
  int n_slices = 0;
  /// 0 selects default_bandwidth(1, n).
  double bandwidth = 0.0;
  /// Grid points on [-M, M] for kernel and gauss-is.
  int n_grid = 21;
  /// Importance-sampling draws per conditioning value.
  std::int64_t is_reps = 200000;
};

struct ExperimentConfig {
  std::string family = "product-uniform";
  int df = 20;
  double shell_low = 0.5;
  std::vector<int> d_list;
  int n_betas = 200;
  /// Samples per direction; 0 selects max(1e5, 200 d).
  std::int64_t n_samples = 0;
  std::int64_t mc_reps = 100000;
  std::vector<double> eps_list{0.05};
  /// Grid half-width M.
  double x_range = 2.5;
  EstimatorConfig estimator;
  std::uint64_t seed = 42;
  /// <= 0 selects default_workers().
  int workers = 0;

  // Proof sweep.
  std::vector<std::string> functionals{"e1", "a", "B", "C", "prop4"};
  int k = 4;
  int l = 4;
  std::vector<int> j_indices{2, 4};
  std::string h = "e12*e12";
  std::vector<double> x_list{0.0, 1.0, 2.0};
  bool enforce_precondition = false;

  /// Runs whose fraction of degenerate records exceeds this fail with exit 3.
  double max_degenerate_fraction = 0.25;

  DistributionSpec spec(int d) const;
  std::int64_t samples_for(int d) const;
  int resolved_workers() const;
  /// Throws ConfigError whose message starts with the offending key.
  void validate() const;
  void validate_proof() const;
};

/// One direction, one x mode.
struct BetaRecord {
  int d = 0;
  int beta_index = 0;
  /// "grid" or "random".
  std::string x_mode;
  bool present = false;
  double sup_d1 = 0.0;
  double sup_d2 = 0.0;
  double n_eff_min = 0.0;
};

struct NullFloor {
  int d = 0;
  std::string x_mode;
  double floor_d1 = 0.0;
  double floor_d2 = 0.0;
  int n_betas = 0;
};

struct VerdictRow {
  std::string family;
  int d = 0;
  std::string x_mode;
  double eps = 0.0;
  double frac_exceed_d1 = 0.0;
  double frac_exceed_d2 = 0.0;
  double se_frac_d1 = 0.0;
  double se_frac_d2 = 0.0;
  int n_betas = 0;
};

struct TheoremVerdict {
  std::string family;
  std::vector<BetaRecord> records;
  std::vector<NullFloor> floors;
  std::vector<VerdictRow> rows;
  /// Per d, grid mode, across present directions.
  std::vector<double> median_sup_d1;
  std::vector<double> median_sup_d2;
  /// Directions lost to estimator degeneracy, per d.
  std::vector<int> missing;
  std::vector<std::string> notes;

  const VerdictRow& row(int d, const std::string& x_mode, double eps) const;
};

/// sup > floor + eps.
bool exceeds(double sup, double floor, double eps);

/// Deviation sups of one direction in both x modes. `stream` is the
/// direction's own substream.
std::pair<BetaRecord, BetaRecord> evaluate_direction(const DistributionSpec& spec,
                                                     const ExperimentConfig& cfg,
                                                     const Stream& stream);

/// Gaussian null run at the same budgets: floor = max over directions.
std::vector<NullFloor> compute_null_floor(const ExperimentConfig& cfg);

/// Full sweep. Floors are computed when not supplied.
TheoremVerdict run_theorem_sweep(const ExperimentConfig& cfg,
                                 const std::vector<NullFloor>* floors = nullptr);

/// Exceedance summary from raw records and floors.
std::vector<VerdictRow> summarize(const std::string& family, const std::vector<BetaRecord>& records,
                                  const std::vector<NullFloor>& floors,
                                  const std::vector<double>& eps_list);

/// theorem_sweep.csv, verdict.csv (grid), verdict_random.csv, null_floor.csv.
std::vector<std::string> write_theorem_outputs(const TheoremVerdict& v, const ExperimentConfig& cfg,
                                               const std::string& out_dir);

struct ProofRow {
  std::string family;
  std::string functional;
  int k = 0;
  /// Chain length and index count; -1 when not applicable.
  int l = -1;
  int m = -1;
  std::vector<int> j_indices;
  int d = 0;
  double x = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  std::int64_t reps = 0;
  /// Importance weights degenerate; estimate and se are NaN.
  bool degenerate = false;
};

/// Fractions of directions (theorem) or rows (proof) lost to degeneracy.
double degenerate_fraction(const TheoremVerdict& v);
double degenerate_fraction(const std::vector<ProofRow>& rows);

std::vector<ProofRow> run_proof_sweep(const ExperimentConfig& cfg);

/// proof_sweep.csv
std::string write_proof_outputs(const std::vector<ProofRow>& rows, const ExperimentConfig& cfg,
                                const std::string& out_dir);

}  // namespace projlab
