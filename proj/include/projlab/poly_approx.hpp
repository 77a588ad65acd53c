#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "projlab/distributions.hpp"
#include "projlab/gauss_ratio.hpp"
#include "projlab/monomial.hpp"
#include "projlab/monte_carlo.hpp"

namespace projlab {

struct PsiOptions {
  /// Bound M on |x|; NaN means M = |x|.
  double x_bound = std::numeric_limits<double>::quiet_NaN();
  /// Reject (k, d, M) outside d > max{3k, 2(k+1)M^2}. When false the
  /// polynomial is still built and `precondition_met` records the outcome.
  bool enforce_precondition = true;
};

/// Degree-k Taylor polynomial of the density ratio at S_k = I_k in the
/// k(k+1)/2 entries (S_k - I_k)_{ij}, i <= j.
class PolynomialPsi {
 public:
  using Term = std::pair<MonomialSpec, double>;

  int k() const { return k_; }
  int d() const { return d_; }
  double x() const { return x_; }
  double x_bound() const { return x_bound_; }
  bool precondition_met() const { return precondition_met_; }
  /// All monomials of degree <= k, sorted.
  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return terms_.front().second; }
  /// Coefficient of h; throws InvalidArgument if deg h > k or orders differ.
  double coefficient(const MonomialSpec& h) const;

 private:
  friend PolynomialPsi build_psi(int k, int d, double x, const PsiOptions& opts);
  int k_ = 0;
  int d_ = 0;
  double x_ = 0.0;
  double x_bound_ = 0.0;
  bool precondition_met_ = false;
  std::vector<Term> terms_;
};

/// Empty if d > max{3k, 2(k+1)M^2} and |x| <= M; otherwise names the
/// violated inequality.
std::string psi_precondition_violation(int k, int d, double x, double x_bound);

PolynomialPsi build_psi(int k, int d, double x, const PsiOptions& opts = {});

struct PsiValue {
  double value = 0.0;
  double deviation_norm = 0.0;
  /// ||S_k - I_k|| >= 1/(2k).
  bool outside_validity_region = false;
};

/// Evaluates psi at S_k - I_k, summing terms in sorted order.
PsiValue psi_eval(const PolynomialPsi& psi, const GramDeviation& gram);

/// Value only; skips the norm computation.
double psi_value(const PolynomialPsi& psi, const Matrix& e);

/// E[d^{(k + deg H)/2} |H| |ratio - psi|] over i.i.d. Z_1..Z_k from spec.
McEstimate prop4_error(const DistributionSpec& spec, int k, const MonomialSpec& h, double x,
                       const Stream& stream, const FunctionalOptions& opts = {},
                       const PsiOptions& psi_opts = {});

/// The open-chain functional with psi_x(S_l - I_l) in place of the ratio.
McEstimate functional_B1(const DistributionSpec& spec, int l, const std::vector<int>& j_indices,
                         double x, const Stream& stream, const FunctionalOptions& opts = {},
                         const PsiOptions& psi_opts = {});

/// The closed-chain functional with psi_x(S_k - I_k) in place of the ratio.
McEstimate functional_C1(const DistributionSpec& spec, int k, double x, const Stream& stream,
                         const FunctionalOptions& opts = {}, const PsiOptions& psi_opts = {});

/// Writes "monomial,coefficient" rows.
void write_psi_csv(const PolynomialPsi& psi, const std::string& path);

}  // namespace projlab
