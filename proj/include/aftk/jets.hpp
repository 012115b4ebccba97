#ifndef AFTK_JETS_HPP
#define AFTK_JETS_HPP

#include <array>

namespace aftk {

// Second-order forward-mode jet in three variables: carries a value together
// with its gradient and (packed) Hessian so polynomial recurrences evaluated
// in jets yield exact first and second partial derivatives.
// Hessian packing order: xx, xy, xz, yy, yz, zz.
struct Jet2 {
  double v = 0.0;
  std::array<double, 3> g{0.0, 0.0, 0.0};
  std::array<double, 6> h{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};

  Jet2() = default;
  explicit Jet2(double value) : v(value) {}

  // seed an independent variable: value with unit gradient in slot i
  static Jet2 variable(double value, int i) {
    Jet2 j(value);
    j.g[i] = 1.0;
    return j;
  }

  Jet2& operator+=(const Jet2& o) {
    v += o.v;
    for (int i = 0; i < 3; ++i) g[i] += o.g[i];
    for (int i = 0; i < 6; ++i) h[i] += o.h[i];
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    v -= o.v;
    for (int i = 0; i < 3; ++i) g[i] -= o.g[i];
    for (int i = 0; i < 6; ++i) h[i] -= o.h[i];
    return *this;
  }
  Jet2& operator*=(double s) {
    v *= s;
    for (int i = 0; i < 3; ++i) g[i] *= s;
    for (int i = 0; i < 6; ++i) h[i] *= s;
    return *this;
  }
};

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator*(Jet2 a, double s) { return a *= s; }
inline Jet2 operator*(double s, Jet2 a) { return a *= s; }
inline Jet2 operator-(const Jet2& a) { return a * -1.0; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.v = a.v * b.v;
  for (int i = 0; i < 3; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  // Leibniz for the Hessian: (ab)_ij = a_ij b + a_i b_j + a_j b_i + a b_ij
  static constexpr int hi[6] = {0, 0, 0, 1, 1, 2};
  static constexpr int hj[6] = {0, 1, 2, 1, 2, 2};
  for (int k = 0; k < 6; ++k) {
    const int i = hi[k], j = hj[k];
    r.h[k] = a.h[k] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[k];
  }
  return r;
}

}  // namespace aftk

#endif
