#include "projlab/poly_approx.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "projlab/csv.hpp"
#include "projlab/jet.hpp"

namespace projlab {

namespace {

// Variable index of entry (i, j), i <= j, in row-major upper-triangle order.
int var_index(int k, int i, int j) { return i * k - i * (i - 1) / 2 + (j - i); }

double resolve_bound(double x, const PsiOptions& opts) {
  return std::isnan(opts.x_bound) ? std::abs(x) : opts.x_bound;
}

}  // namespace

std::string psi_precondition_violation(int k, int d, double x, double x_bound) {
  std::ostringstream msg;
  if (std::abs(x) > x_bound) {
    msg << "requires |x| <= M (|x| = " << std::abs(x) << ", M = " << x_bound << ")";
  } else if (!(d > 3 * k)) {
    msg << "requires d > 3k (d = " << d << ", 3k = " << 3 * k << ")";
  } else if (!(d > 2.0 * (k + 1) * x_bound * x_bound)) {
    msg << "requires d > 2(k+1)M^2 (d = " << d << ", 2(k+1)M^2 = "
        << 2.0 * (k + 1) * x_bound * x_bound << ")";
  }
  return msg.str();
}

double PolynomialPsi::coefficient(const MonomialSpec& h) const {
  if (h.k() != k_) throw InvalidArgument("psi coefficient: monomial order differs from k");
  if (h.degree() > k_) throw InvalidArgument("psi coefficient: degree exceeds k");
  for (const auto& [m, c] : terms_) {
    if (m == h) return c;
  }
  throw InvalidArgument("psi coefficient: monomial not found");
}

PolynomialPsi build_psi(int k, int d, double x, const PsiOptions& opts) {
  if (k < 1) throw InvalidArgument("build_psi: requires k >= 1");
  if (k >= d) throw InvalidArgument("build_psi: requires k < d");
  const double bound = resolve_bound(x, opts);
  const std::string violation = psi_precondition_violation(k, d, x, bound);
  if (opts.enforce_precondition && !violation.empty()) {
    throw InvalidArgument("build_psi: " + violation);
  }
  const double a0 = 1.0 - k * x * x / d;
  if (!(a0 > 0.0)) throw InvalidArgument("build_psi: requires k x^2 < d");

  const int n_vars = k * (k + 1) / 2;
  auto space = std::make_shared<const JetSpace>(n_vars, k);
  std::vector<std::vector<Jet>> e(k, std::vector<Jet>(k, Jet(space)));
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      e[i][j] = Jet::variable(space, var_index(k, i, j));
      e[j][i] = e[i][j];
    }
  }
  auto matmul = [&](const std::vector<std::vector<Jet>>& a, const std::vector<std::vector<Jet>>& b) {
    std::vector<std::vector<Jet>> c(k, std::vector<Jet>(k, Jet(space)));
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        for (int t = 0; t < k; ++t) c[i][j] += a[i][t] * b[t][j];
      }
    }
    return c;
  };

  // log det(I + E) = sum_p (-1)^{p+1} tr(E^p)/p; iota'(I + E)^{-1} iota =
  // sum_p (-1)^p iota'E^p iota. Entries of E^p have degree >= p.
  Jet logdet(space);
  Jet q(space, static_cast<double>(k));
  auto power = e;
  for (int p = 1; p <= k; ++p) {
    if (p > 1) power = matmul(power, e);
    Jet tr(space), sum(space);
    for (int i = 0; i < k; ++i) {
      tr += power[i][i];
      for (int j = 0; j < k; ++j) sum += power[i][j];
    }
    logdet += tr * ((p % 2 == 1 ? 1.0 : -1.0) / p);
    q += sum * (p % 2 == 0 ? 1.0 : -1.0);
  }
  Jet inner = Jet(space, 1.0) - q * (x * x / d);
  Jet log_ratio = Jet(space, log_ratio_constant(k, d) + 0.5 * k * x * x) - logdet * 0.5 +
                  log(inner) * (0.5 * (d - k - 2));
  const Jet ratio = exp(log_ratio);

  PolynomialPsi psi;
  psi.k_ = k;
  psi.d_ = d;
  psi.x_ = x;
  psi.x_bound_ = bound;
  psi.precondition_met_ = violation.empty();
  for (int idx = 0; idx < space->size(); ++idx) {
    std::vector<MonomialSpec::Pair> pairs;
    const auto& exps = space->exponents(idx);
    for (int i = 0; i < k; ++i) {
      for (int j = i; j < k; ++j) {
        for (int r = 0; r < exps[var_index(k, i, j)]; ++r) pairs.emplace_back(i + 1, j + 1);
      }
    }
    psi.terms_.emplace_back(MonomialSpec(k, pairs), ratio.coefficient(idx));
  }
  std::sort(psi.terms_.begin(), psi.terms_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return psi;
}

double psi_value(const PolynomialPsi& psi, const Matrix& e) {
  double acc = 0.0;
  for (const auto& [m, c] : psi.terms()) acc += c * m.evaluate(e);
  return acc;
}

PsiValue psi_eval(const PolynomialPsi& psi, const GramDeviation& gram) {
  if (gram.k() != psi.k()) throw InvalidArgument("psi_eval: gram order differs from psi");
  PsiValue out;
  out.value = psi_value(psi, gram.matrix());
  out.deviation_norm = gram.norm();
  out.outside_validity_region = out.deviation_norm >= 1.0 / (2.0 * psi.k());
  return out;
}

McEstimate prop4_error(const DistributionSpec& spec, int k, const MonomialSpec& h, double x,
                       const Stream& stream, const FunctionalOptions& opts,
                       const PsiOptions& psi_opts) {
  if (h.k() != k) throw InvalidArgument("prop4_error: monomial order differs from k");
  if (h.degree() > k) throw InvalidArgument("prop4_error: requires deg H <= k");
  const int d = spec.dim();
  const PolynomialPsi psi = build_psi(k, d, x, psi_opts);
  const double scale = std::pow(static_cast<double>(d), 0.5 * (k + h.degree()));
  return mc_mean(opts.reps, stream, opts.workers, [&](Stream& s) {
    Matrix z(d, k);
    Vector v(d);
    for (int c = 0; c < k; ++c) {
      sample_one(spec, s, v);
      z.col(c) = v;
    }
    const GramDeviation gram = GramDeviation::from_columns(z);
    const double ratio = std::exp(log_density_ratio(gram, x));
    const double approx = psi_value(psi, gram.matrix());
    return scale * std::abs(h.evaluate(gram.matrix())) * std::abs(ratio - approx);
  });
}

McEstimate functional_B1(const DistributionSpec& spec, int l, const std::vector<int>& j_indices,
                         double x, const Stream& stream, const FunctionalOptions& opts,
                         const PsiOptions& psi_opts) {
  const PolynomialPsi psi = build_psi(l, spec.dim(), x, psi_opts);
  return functional_B(spec, l, j_indices, x, stream, opts,
                      [&](const GramDeviation& g) { return psi_value(psi, g.matrix()); });
}

McEstimate functional_C1(const DistributionSpec& spec, int k, double x, const Stream& stream,
                         const FunctionalOptions& opts, const PsiOptions& psi_opts) {
  const PolynomialPsi psi = build_psi(k, spec.dim(), x, psi_opts);
  return functional_C(spec, k, x, stream, opts,
                      [&](const GramDeviation& g) { return psi_value(psi, g.matrix()); });
}

void write_psi_csv(const PolynomialPsi& psi, const std::string& path) {
  CsvWriter out(path, {"monomial", "coefficient"});
  for (const auto& [m, c] : psi.terms()) out.row(m.to_string(), c);
}

}  // namespace projlab
