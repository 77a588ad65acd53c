#pragma once

#include <string>
#include <utility>
#include <vector>

#include "projlab/types.hpp"

namespace projlab {

/// A monomial in the entries of S_k - I_k: a sorted multiset of index pairs
/// (i, j), i <= j. Stored 0-based; formatted and parsed 1-based as
/// "e12*e34" ("1" for the empty monomial).
class MonomialSpec {
 public:
  using Pair = std::pair<int, int>;

  MonomialSpec() = default;
  /// Pairs given 1-based in any order; (j, i) is normalized to (i, j).
  MonomialSpec(int k, const std::vector<Pair>& pairs_one_based);

  /// Parses "e12*e13" / "e1_2*e1_3" / "1".
  static MonomialSpec parse(int k, const std::string& text);

  /// prod_{i=1}^m (S-I)_{j_{i-1}+1, j_{i-1}+2} ... (S-I)_{j_i - 1, j_i}.
  static MonomialSpec open_chain(int k, const std::vector<int>& j_indices);
  /// (S-I)_{1,2} ... (S-I)_{j-1,j} (S-I)_{j,1}; for j = 1 this is (S-I)_{1,1}.
  static MonomialSpec closed_chain(int k, int j);

  int k() const { return k_; }
  int degree() const { return static_cast<int>(factors_.size()); }
  const std::vector<Pair>& factors() const { return factors_; }
  /// Largest index used (1-based); 0 for the empty monomial.
  int max_index() const;
  /// Set of indices used, 1-based, sorted.
  std::vector<int> indices() const;
  /// True if some pair occurs exactly once.
  bool has_linear_factor() const;

  /// Product of e(i, j) over the factors (e symmetric, 0-based).
  double evaluate(const Matrix& e) const;

  std::string to_string() const;

  bool operator==(const MonomialSpec& o) const { return k_ == o.k_ && factors_ == o.factors_; }
  bool operator<(const MonomialSpec& o) const {
    return k_ != o.k_ ? k_ < o.k_ : factors_ < o.factors_;
  }

 private:
  int k_ = 0;
  std::vector<Pair> factors_;
};

/// Monomial H with every index relabeled through perm (0-based, perm[i] is
/// the new label of i).
MonomialSpec relabel(const MonomialSpec& h, const std::vector<int>& perm);

}  // namespace projlab
