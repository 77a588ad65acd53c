#pragma once

#include <memory>
#include <vector>

namespace projlab {

/// Index set of monomials of total degree <= max_degree in n_vars variables,
/// ordered by degree, then reverse-lexicographically by exponent vector.
class JetSpace {
 public:
  JetSpace(int n_vars, int max_degree);

  int n_vars() const { return n_vars_; }
  int max_degree() const { return max_degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  const std::vector<int>& exponents(int idx) const { return exponents_[idx]; }
  int degree(int idx) const { return degrees_[idx]; }
  /// Index of the monomial with the given exponents; -1 if out of range.
  int index_of(const std::vector<int>& exps) const;

  struct Product {
    int a, b, c;
  };
  /// All (a, b, c) with monomial_a * monomial_b = monomial_c, deg c <= max.
  const std::vector<Product>& products() const { return products_; }

 private:
  int n_vars_;
  int max_degree_;
  std::vector<std::vector<int>> exponents_;
  std::vector<int> degrees_;
  std::vector<Product> products_;
};

/// Truncated multivariate Taylor polynomial over a JetSpace.
class Jet {
 public:
  explicit Jet(std::shared_ptr<const JetSpace> space, double constant = 0.0);
  static Jet variable(std::shared_ptr<const JetSpace> space, int var, double value = 0.0);

  const JetSpace& space() const { return *space_; }
  double constant() const { return c_[0]; }
  double coefficient(int idx) const { return c_[idx]; }
  const std::vector<double>& coefficients() const { return c_; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator*(const Jet& a, const Jet& b);

  /// sum_n coef[n] (this - constant)^n for n up to the max degree, where
  /// coef[n] are the Taylor coefficients of a univariate function at the
  /// constant term.
  Jet compose(const std::vector<double>& coef) const;

 private:
  std::shared_ptr<const JetSpace> space_;
  std::vector<double> c_;
};

/// exp and log of a jet (log requires a positive constant term).
Jet exp(const Jet& a);
Jet log(const Jet& a);

}  // namespace projlab
