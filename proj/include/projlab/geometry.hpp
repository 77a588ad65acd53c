#pragma once

#include "projlab/rng.hpp"
#include "projlab/types.hpp"

namespace projlab {

/// Unit vector beta in R^d.
class Direction {
 public:
  /// Normalizes `v`; throws InvalidArgument if ||v|| < 1e-8.
  static Direction from_vector(const Vector& v);

  const Vector& beta() const { return beta_; }
  int dim() const { return static_cast<int>(beta_.size()); }

  /// (I - beta beta') v, applied as v - beta (beta' v).
  Vector complement(ConstVectorRef v) const;

 private:
  explicit Direction(Vector beta) : beta_(std::move(beta)) {}
  Vector beta_;
};

/// Draws beta uniformly on the unit sphere by normalizing a Gaussian vector.
Direction sample_direction(int d, Stream& stream);

/// W = x beta + (I - beta beta') v.
Vector make_w(const Direction& beta, double x, ConstVectorRef v);

/// In-place variant of make_w writing into `out`.
void make_w_into(const Direction& beta, double x, ConstVectorRef v, VectorRef out);

}  // namespace projlab
