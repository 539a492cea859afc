#pragma once

// Forward-mode dual numbers with a fixed number of partials, used to
// differentiate the per-node discrete residual exactly.

#include <array>
#include <cmath>
#include <type_traits>

namespace mcflab {

template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit lift of constants
  static Dual seed(double value, int k) {
    Dual r(value);
    r.d[k] = 1.0;
    return r;
  }
};

template <class T>
inline double value_of(const T& x) {
  if constexpr (std::is_same_v<T, double>) return x; else return x.v;
}

/// Drops derivative information (Picard linearization freezes coefficients).
template <class T>
inline T detach(const T& x) {
  return T(value_of(x));
}

template <int N>
inline Dual<N> operator+(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v + b.v);
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k] + b.d[k];
  return r;
}
template <int N>
inline Dual<N> operator-(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v - b.v);
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k] - b.d[k];
  return r;
}
template <int N>
inline Dual<N> operator-(const Dual<N>& a) {
  Dual<N> r(-a.v);
  for (int k = 0; k < N; ++k) r.d[k] = -a.d[k];
  return r;
}
template <int N>
inline Dual<N> operator*(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v * b.v);
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k] * b.v + a.v * b.d[k];
  return r;
}
template <int N>
inline Dual<N> operator/(const Dual<N>& a, const Dual<N>& b) {
  const double inv = 1.0 / b.v;
  Dual<N> r(a.v * inv);
  for (int k = 0; k < N; ++k) r.d[k] = (a.d[k] - r.v * b.d[k]) * inv;
  return r;
}
template <int N>
inline Dual<N> operator*(double s, const Dual<N>& a) {
  Dual<N> r(s * a.v);
  for (int k = 0; k < N; ++k) r.d[k] = s * a.d[k];
  return r;
}
template <int N>
inline Dual<N> operator*(const Dual<N>& a, double s) { return s * a; }
template <int N>
inline Dual<N> operator/(const Dual<N>& a, double s) { return (1.0 / s) * a; }
template <int N>
inline Dual<N> operator/(double s, const Dual<N>& a) { return Dual<N>(s) / a; }
template <int N>
inline Dual<N> operator+(const Dual<N>& a, double s) {
  Dual<N> r = a;
  r.v += s;
  return r;
}
template <int N>
inline Dual<N> operator+(double s, const Dual<N>& a) { return a + s; }
template <int N>
inline Dual<N> operator-(const Dual<N>& a, double s) { return a + (-s); }
template <int N>
inline Dual<N> operator-(double s, const Dual<N>& a) { return (-a) + s; }

template <int N>
inline Dual<N> sqrt(const Dual<N>& a) {
  const double s = std::sqrt(a.v);
  Dual<N> r(s);
  const double c = 0.5 / s;
  for (int k = 0; k < N; ++k) r.d[k] = c * a.d[k];
  return r;
}

}  // namespace mcflab
