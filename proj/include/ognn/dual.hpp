#pragma once

#include <cmath>

namespace ognn {

/// Forward-mode dual number carrying tangents with respect to the two Jacobi
/// exponents a and b.
struct DualReal {
  double value = 0.0;
  double da = 0.0;
  double db = 0.0;

  constexpr DualReal() = default;
  constexpr DualReal(double v) : value(v) {}  // NOLINT: constants promote implicitly
  constexpr DualReal(double v, double d_a, double d_b) : value(v), da(d_a), db(d_b) {}

  DualReal& operator+=(const DualReal& o) {
    value += o.value;
    da += o.da;
    db += o.db;
    return *this;
  }
  DualReal& operator-=(const DualReal& o) {
    value -= o.value;
    da -= o.da;
    db -= o.db;
    return *this;
  }
  DualReal& operator*=(const DualReal& o) {
    da = da * o.value + value * o.da;
    db = db * o.value + value * o.db;
    value *= o.value;
    return *this;
  }
  DualReal& operator/=(const DualReal& o) {
    const double inv = 1.0 / o.value;
    const double q = value * inv;
    da = (da - q * o.da) * inv;
    db = (db - q * o.db) * inv;
    value = q;
    return *this;
  }
};

inline DualReal operator-(DualReal x) { return {-x.value, -x.da, -x.db}; }
inline DualReal operator+(DualReal x, const DualReal& y) { return x += y; }
inline DualReal operator-(DualReal x, const DualReal& y) { return x -= y; }
inline DualReal operator*(DualReal x, const DualReal& y) { return x *= y; }
inline DualReal operator/(DualReal x, const DualReal& y) { return x /= y; }

inline DualReal sqrt(const DualReal& x) {
  const double s = std::sqrt(x.value);
  const double h = 0.5 / s;
  return {s, h * x.da, h * x.db};
}

inline DualReal exp(const DualReal& x) {
  const double e = std::exp(x.value);
  return {e, e * x.da, e * x.db};
}

inline DualReal log(const DualReal& x) { return {std::log(x.value), x.da / x.value, x.db / x.value}; }

inline double value_of(double x) { return x; }
inline double value_of(const DualReal& x) { return x.value; }

}  // namespace ognn
