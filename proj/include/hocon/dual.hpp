#pragma once

// Forward-mode dual numbers. Nesting (Dual<Dual<double>>, ...) gives higher
// derivatives; every derivative in the engine goes through this type.

#include <cmath>
#include <concepts>
#include <type_traits>

#include <Eigen/Core>

namespace hocon {

template <class T>
struct Dual;

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

template <class A>
concept Arithmetic = std::is_arithmetic_v<A>;

template <class T>
struct Dual {
  using value_type = T;

  T v{};
  T d{};

  constexpr Dual() = default;
  constexpr Dual(const T& value) : v(value), d(0) {}  // NOLINT
  constexpr Dual(const T& value, const T& deriv) : v(value), d(deriv) {}
  // Lets literals reach the innermost level of a nested dual.
  template <Arithmetic A>
    requires(!std::is_same_v<A, T>)
  constexpr Dual(A value) : v(value), d(0) {}  // NOLINT

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    *this = *this / o;
    return *this;
  }
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

// Innermost real value of a possibly nested dual.
inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) {
  return primal(x.v);
}

template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.v, -a.d};
}
template <class T>
Dual<T> operator+(const Dual<T>& a) {
  return a;
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.v + b.v, a.d + b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.v - b.v, a.d - b.d};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T inv = T(1) / b.v;
  T q = a.v * inv;
  return {q, (a.d - q * b.d) * inv};
}

template <class T, Arithmetic A>
Dual<T> operator+(const Dual<T>& a, A b) {
  return {a.v + b, a.d};
}
template <class T, Arithmetic A>
Dual<T> operator+(A a, const Dual<T>& b) {
  return {a + b.v, b.d};
}
template <class T, Arithmetic A>
Dual<T> operator-(const Dual<T>& a, A b) {
  return {a.v - b, a.d};
}
template <class T, Arithmetic A>
Dual<T> operator-(A a, const Dual<T>& b) {
  return {a - b.v, -b.d};
}
template <class T, Arithmetic A>
Dual<T> operator*(const Dual<T>& a, A b) {
  return {a.v * b, a.d * b};
}
template <class T, Arithmetic A>
Dual<T> operator*(A a, const Dual<T>& b) {
  return {a * b.v, a * b.d};
}
template <class T, Arithmetic A>
Dual<T> operator/(const Dual<T>& a, A b) {
  return {a.v / b, a.d / b};
}
template <class T, Arithmetic A>
Dual<T> operator/(A a, const Dual<T>& b) {
  return Dual<T>(T(a)) / b;
}

// Comparisons look at the primal value only.
template <class T>
bool operator<(const Dual<T>& a, const Dual<T>& b) {
  return primal(a) < primal(b);
}
template <class T>
bool operator>(const Dual<T>& a, const Dual<T>& b) {
  return primal(a) > primal(b);
}
template <class T>
bool operator<=(const Dual<T>& a, const Dual<T>& b) {
  return primal(a) <= primal(b);
}
template <class T>
bool operator>=(const Dual<T>& a, const Dual<T>& b) {
  return primal(a) >= primal(b);
}
template <class T>
bool operator==(const Dual<T>& a, const Dual<T>& b) {
  return a.v == b.v && a.d == b.d;
}
template <class T, Arithmetic A>
bool operator<(const Dual<T>& a, A b) {
  return primal(a) < b;
}
template <class T, Arithmetic A>
bool operator>(const Dual<T>& a, A b) {
  return primal(a) > b;
}

using std::abs;
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tan;

template <class T>
Dual<T> sin(const Dual<T>& a) {
  return {sin(a.v), cos(a.v) * a.d};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
  return {cos(a.v), -sin(a.v) * a.d};
}
template <class T>
Dual<T> tan(const Dual<T>& a) {
  T t = tan(a.v);
  return {t, (T(1) + t * t) * a.d};
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.v);
  return {e, e * a.d};
}
template <class T>
Dual<T> log(const Dual<T>& a) {
  return {log(a.v), a.d / a.v};
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  T s = sqrt(a.v);
  return {s, a.d / (T(2) * s)};
}
template <class T>
Dual<T> abs(const Dual<T>& a) {
  return primal(a) < 0.0 ? -a : a;
}
template <class T>
Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
  using std::atan2;
  T r2 = x.v * x.v + y.v * y.v;
  return {atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / r2};
}

// sign() of the primal value; its derivative is zero away from the origin.
template <class T>
double sign(const T& a) {
  double p = primal(a);
  return p > 0.0 ? 1.0 : (p < 0.0 ? -1.0 : 0.0);
}

template <class T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Scalar type carried by an Eigen vector argument of a generic model lambda.
template <class V>
using scalar_of = typename std::decay_t<V>::Scalar;

template <class T>
VecT<T> lift(const Vec& x) {
  return x.template cast<T>();
}

}  // namespace hocon

namespace Eigen {

template <class T>
struct NumTraits<hocon::Dual<T>> : NumTraits<double> {
  using Real = hocon::Dual<T>;
  using NonInteger = hocon::Dual<T>;
  using Nested = hocon::Dual<T>;
  using Literal = hocon::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2 * NumTraits<T>::ReadCost,
    AddCost = 2 * NumTraits<T>::AddCost,
    MulCost = 3 * NumTraits<T>::MulCost + NumTraits<T>::AddCost
  };
};

template <class T, class BinaryOp>
struct ScalarBinaryOpTraits<hocon::Dual<T>, double, BinaryOp> {
  using ReturnType = hocon::Dual<T>;
};
template <class T, class BinaryOp>
struct ScalarBinaryOpTraits<double, hocon::Dual<T>, BinaryOp> {
  using ReturnType = hocon::Dual<T>;
};

}  // namespace Eigen
