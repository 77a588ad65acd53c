#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "projlab/distributions.hpp"
#include "projlab/gauss_ratio.hpp"
#include "projlab/monomial.hpp"
#include "projlab/monte_carlo.hpp"

namespace projlab {

struct T1aResult {
  /// d^{h/2} E[H].
  McEstimate scaled_moment;
  /// E[(sqrt(d) ||S_k - I_k||)^{2k+1}].
  McEstimate norm_moment;
  std::optional<double> analytic;
};

/// Exact value of d^{h/2} E[H] where it follows from sign symmetry,
/// independence of disjoint index groups and the component moments.
std::optional<double> t1a_analytic(const DistributionSpec& spec, const MonomialSpec& h);

/// Monte Carlo estimates for the Gram-moment condition with k = h.k().
T1aResult t1a_diagnostic(const DistributionSpec& spec, const MonomialSpec& h, const Stream& stream,
                         const FunctionalOptions& opts = {});

/// Throws InvalidArgument naming the violated constraint unless
/// 2 <= deg H < g <= k and H involves every index 1..g.
void validate_t1b(int g, const MonomialSpec& h);

/// d^g E[G H] with G the closed chain of length g.
McEstimate t1b_diagnostic(const DistributionSpec& spec, int g, const MonomialSpec& h,
                          const Stream& stream, const FunctionalOptions& opts = {});

enum class ExceptionalCase { kNone, kA, kB, kC };

struct Prop5Result {
  /// E[d^g (G - E G) H] - (same with Gaussian vectors), estimated per
  /// replicate from independent draws.
  McEstimate difference;
  double expected_g = 0.0;
  ExceptionalCase exceptional = ExceptionalCase::kNone;
  /// Present for exceptional cases of product laws.
  std::optional<double> analytic;
  /// Closed-chain length of G, or 0 for an open chain.
  int closed_length = 0;
};

/// E[G] for an open or closed chain; throws if G is neither.
double chain_expectation(const MonomialSpec& g, int d, int* closed_length = nullptr);

/// Exceptional case of (G, H) for a closed chain of length j (kNone otherwise).
ExceptionalCase classify_exceptional(int closed_length, const MonomialSpec& h);

/// Analytic exceptional-case value from the component moments of a product law.
std::optional<double> exceptional_value(const DistributionSpec& spec, ExceptionalCase c);

Prop5Result prop5_difference(const DistributionSpec& spec, const MonomialSpec& g,
                             const MonomialSpec& h, const Stream& stream,
                             const FunctionalOptions& opts = {});

/// sum_{j=1}^k C(k,j)(-1)^j j and its closed form -k sum_{j=0}^{k-1} C(k-1,j)(-1)^j.
std::int64_t alternating_sum_j(int k);
std::int64_t alternating_sum_j_closed(int k);
/// sum_{j=1}^k C(k,j)(-1)^j C(j,2) and C(k,2) sum_{j=0}^{k-2} C(k-2,j)(-1)^j.
std::int64_t alternating_sum_pairs(int k);
std::int64_t alternating_sum_pairs_closed(int k);

struct DiagnosticRow {
  std::string family;
  std::string condition;
  std::string monomial;
  int d = 0;
  double estimate = 0.0;
  double se = 0.0;
  std::optional<double> analytic;
};

/// family,condition,monomial,d,estimate,se,analytic_value_if_any
void write_diagnostics_csv(const std::vector<DiagnosticRow>& rows, const std::string& path);

std::string exceptional_case_name(ExceptionalCase c);

/// "closedc<j>", "openc:<j_1;...;j_m>" or a plain monomial such as "e12*e23".
MonomialSpec parse_chain(int k, const std::string& text);

struct MomentsConfig {
  std::string family = "gaussian";
  int df = 20;
  double shell_low = 0.5;
  std::vector<int> d_list{16, 64, 256};
  int k = 4;
  std::int64_t reps = 100000;
  /// H monomials for the Gram-moment condition; "norm" adds the norm-moment row.
  std::vector<std::string> t1a{"e12*e12", "e12*e12*e34*e34", "e12", "e11", "norm"};
  int t1b_g = 3;
  std::vector<std::string> t1b{"e12*e13"};
  /// Paired G and H lists for the Gaussian-replacement differences.
  std::vector<std::string> prop5_g{"closedc2", "closedc2", "closedc2", "closedc1"};
  std::vector<std::string> prop5_h{"e11", "e12", "e12*e12", "e11"};
  std::uint64_t seed = 42;
  int workers = 0;

  void validate() const;
};

/// Runs every configured diagnostic over d_list. Rows carry condition
/// "t1a", "t1a-norm", "t1b" or "prop5"; prop5 monomials read "G|H".
std::vector<DiagnosticRow> run_moment_battery(const MomentsConfig& cfg);

}  // namespace projlab
