#include "projlab/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "projlab/spectral.hpp"

namespace projlab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::vector<DeviationRecord> deviation_d1(const ConditionalMomentEstimate& est) {
  std::vector<DeviationRecord> out;
  out.reserve(est.points.size());
  for (const auto& p : est.points) {
    DeviationRecord r;
    r.x = p.x;
    r.n_eff = p.n_eff;
    r.present = p.present;
    if (!p.present) {
      r.d1 = r.se_d1 = r.d2 = r.se_d2 = kNaN;
      out.push_back(r);
      continue;
    }
    const Vector mu_perp = p.mu - est.beta * est.beta.dot(p.mu);
    r.d1 = mu_perp.squaredNorm() - p.cov_trace_perp;
    r.se_d1 = std::isnan(p.d1_se_jackknife)
                  ? std::sqrt(4.0 * std::max(0.0, p.cov_quad_perp - p.cov_frob2_perp) +
                              2.0 * p.cov_frob2_perp)
                  : p.d1_se_jackknife;
    r.d1_below_noise = r.d1 < -4.0 * r.se_d1;
    r.d2 = r.se_d2 = kNaN;
    out.push_back(r);
  }
  return out;
}

double d2_value(const Matrix& m2, const Vector& beta) {
  const Index d = m2.rows();
  Matrix delta = 0.5 * (m2 + m2.transpose());
  const double b = beta.dot(delta * beta);
  delta -= Matrix::Identity(d, d);
  delta.noalias() -= (b - 1.0) * beta * beta.transpose();
  return spectral_norm(delta);
}

std::vector<DeviationRecord> deviation_d2(const ConditionalMomentEstimate& est,
                                          const Direction& beta) {
  std::vector<DeviationRecord> out;
  out.reserve(est.points.size());
  for (const auto& p : est.points) {
    DeviationRecord r;
    r.x = p.x;
    r.n_eff = p.n_eff;
    r.present = p.present;
    r.d1 = r.se_d1 = kNaN;
    if (!p.present) {
      r.d2 = r.se_d2 = kNaN;
      out.push_back(r);
      continue;
    }
    r.d2 = d2_value(p.m2, beta.beta());
    const auto g = static_cast<double>(p.m2_jackknife.size());
    if (g > 1) {
      std::vector<double> vals;
      for (const auto& mj : p.m2_jackknife) vals.push_back(d2_value(mj, beta.beta()));
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= g;
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      r.se_d2 = std::sqrt((g - 1.0) / g * ss);
    } else {
      r.se_d2 = kNaN;
    }
    out.push_back(r);
  }
  return out;
}

DeviationReport deviation_report(const ConditionalMomentEstimate& est, const Direction& beta,
                                 double x_range, bool with_d2) {
  DeviationReport rep;
  rep.beta = beta.beta();
  rep.x_range = x_range;
  rep.records = deviation_d1(est);
  if (with_d2) {
    const auto d2 = deviation_d2(est, beta);
    for (std::size_t i = 0; i < d2.size(); ++i) {
      rep.records[i].d2 = d2[i].d2;
      rep.records[i].se_d2 = d2[i].se_d2;
    }
  }
  rep.sup_d1 = -std::numeric_limits<double>::infinity();
  rep.sup_d2 = with_d2 ? 0.0 : kNaN;
  rep.n_eff_min = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& r : rep.records) {
    if (!r.present || std::abs(r.x) > x_range) continue;
    any = true;
    rep.sup_d1 = std::max(rep.sup_d1, r.d1);
    if (with_d2) rep.sup_d2 = std::max(rep.sup_d2, r.d2);
    rep.n_eff_min = std::min(rep.n_eff_min, r.n_eff);
  }
  if (!any) {
    rep.sup_d1 = rep.sup_d2 = kNaN;
    rep.n_eff_min = 0.0;
  }
  return rep;
}

}  // namespace projlab
