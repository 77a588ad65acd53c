#include "projlab/geometry.hpp"

namespace projlab {

namespace {
constexpr double kMinRawNorm = 1e-8;
}

Direction Direction::from_vector(const Vector& v) {
  const double n = v.norm();
  if (!(n >= kMinRawNorm)) throw InvalidArgument("direction: ||v|| must be >= 1e-8");
  return Direction(v / n);
}

Vector Direction::complement(ConstVectorRef v) const {
  return v - beta_ * beta_.dot(v);
}

Direction sample_direction(int d, Stream& stream) {
  if (d < 1) throw InvalidArgument("sample_direction: d must be >= 1");
  Vector g(d);
  for (;;) {
    for (int i = 0; i < d; ++i) g[i] = stream.normal();
    if (g.norm() >= kMinRawNorm) return Direction::from_vector(g);
  }
}

Vector make_w(const Direction& beta, double x, ConstVectorRef v) {
  Vector out(v.size());
  make_w_into(beta, x, v, out);
  return out;
}

void make_w_into(const Direction& beta, double x, ConstVectorRef v, VectorRef out) {
  const Vector& b = beta.beta();
  if (v.size() != b.size()) throw InvalidArgument("make_w: dimension mismatch");
  const double c = x - b.dot(v);
  out = v + c * b;
}

}  // namespace projlab
