#include "projlab/jet.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "projlab/types.hpp"

namespace projlab {

namespace {

void enumerate(int var, int remaining, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
  if (var == static_cast<int>(cur.size())) {
    if (remaining == 0) out.push_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[var] = e;
    enumerate(var + 1, remaining - e, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

JetSpace::JetSpace(int n_vars, int max_degree) : n_vars_(n_vars), max_degree_(max_degree) {
  if (n_vars < 1 || max_degree < 0) throw InvalidArgument("jet space: bad dimensions");
  std::vector<int> cur(n_vars, 0);
  for (int deg = 0; deg <= max_degree; ++deg) {
    enumerate(0, deg, cur, exponents_);
    degrees_.resize(exponents_.size(), deg);
  }
  std::map<std::vector<int>, int> lookup;
  for (int i = 0; i < size(); ++i) lookup[exponents_[i]] = i;
  std::vector<int> sum(n_vars);
  for (int a = 0; a < size(); ++a) {
    for (int b = 0; b < size(); ++b) {
      if (degrees_[a] + degrees_[b] > max_degree) continue;
      for (int v = 0; v < n_vars; ++v) sum[v] = exponents_[a][v] + exponents_[b][v];
      products_.push_back({a, b, lookup.at(sum)});
    }
  }
}

int JetSpace::index_of(const std::vector<int>& exps) const {
  int deg = 0;
  for (int e : exps) deg += e;
  if (deg > max_degree_ || static_cast<int>(exps.size()) != n_vars_) return -1;
  for (int i = 0; i < size(); ++i) {
    if (degrees_[i] == deg && exponents_[i] == exps) return i;
  }
  return -1;
}

Jet::Jet(std::shared_ptr<const JetSpace> space, double constant)
    : space_(std::move(space)), c_(space_->size(), 0.0) {
  c_[0] = constant;
}

Jet Jet::variable(std::shared_ptr<const JetSpace> space, int var, double value) {
  Jet j(space, value);
  std::vector<int> exps(space->n_vars(), 0);
  exps.at(var) = 1;
  if (space->max_degree() >= 1) j.c_[space->index_of(exps)] = 1.0;
  return j;
}

Jet& Jet::operator+=(const Jet& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet out(a.space_);
  for (const auto& p : a.space_->products()) out.c_[p.c] += a.c_[p.a] * b.c_[p.b];
  return out;
}

Jet Jet::compose(const std::vector<double>& coef) const {
  Jet u = *this;
  u.c_[0] = 0.0;
  Jet out(space_, coef.at(0));
  Jet power(space_, 1.0);
  for (int n = 1; n <= space_->max_degree() && n < static_cast<int>(coef.size()); ++n) {
    power = power * u;
    out += power * coef[n];
  }
  return out;
}

Jet exp(const Jet& a) {
  const int K = a.space().max_degree();
  std::vector<double> coef(K + 1);
  const double e0 = std::exp(a.constant());
  double fact = 1.0;
  for (int n = 0; n <= K; ++n) {
    if (n > 0) fact *= n;
    coef[n] = e0 / fact;
  }
  return a.compose(coef);
}

Jet log(const Jet& a) {
  const double a0 = a.constant();
  if (!(a0 > 0.0)) throw InvalidArgument("jet log: requires a positive constant term");
  const int K = a.space().max_degree();
  std::vector<double> coef(K + 1);
  coef[0] = std::log(a0);
  for (int n = 1; n <= K; ++n) {
    coef[n] = (n % 2 == 1 ? 1.0 : -1.0) / (n * std::pow(a0, n));
  }
  return a.compose(coef);
}

}  // namespace projlab
