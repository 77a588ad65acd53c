#pragma once

#include <vector>

#include "projlab/cond_estimators.hpp"
#include "projlab/geometry.hpp"
#include "projlab/types.hpp"

namespace projlab {

/// D1 and D2 at one conditioning value. Absent points carry NaN values.
struct DeviationRecord {
  double x = 0.0;
  bool present = false;
  double n_eff = 0.0;
  double d1 = 0.0;
  double se_d1 = 0.0;
  double d2 = 0.0;
  double se_d2 = 0.0;
  /// d1 < -4 se_d1 although the population value is nonnegative.
  bool d1_below_noise = false;
};

struct DeviationReport {
  Vector beta;
  std::vector<DeviationRecord> records;
  /// Max over present records with |x| <= x_range.
  double sup_d1 = 0.0;
  double sup_d2 = 0.0;
  double n_eff_min = 0.0;
  double x_range = 0.0;
};

/// d1 = ||P mu||^2 - tr(P C P), P = I - beta beta', C the estimated covariance
/// of mu. Since beta'mu equals the conditioning value, this is ||mu||^2 - x^2
/// with the O(d / n_eff) upward bias of the plug-in removed.
/// SE^2 = 4 mu_p' C mu_p + 2 ||P C P||_F^2.
std::vector<DeviationRecord> deviation_d1(const ConditionalMomentEstimate& est);

/// d2 = ||m2 - I - (b - 1) beta beta'|| with b = beta' m2 beta. SE from the
/// leave-one-group-out m2 estimates when present, NaN otherwise.
std::vector<DeviationRecord> deviation_d2(const ConditionalMomentEstimate& est,
                                          const Direction& beta);

/// Value of d2 for a single second-moment matrix.
double d2_value(const Matrix& m2, const Vector& beta);

/// d1 and d2 per point and sups over |x| <= x_range.
DeviationReport deviation_report(const ConditionalMomentEstimate& est, const Direction& beta,
                                 double x_range, bool with_d2 = true);

}  // namespace projlab
