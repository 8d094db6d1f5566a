#pragma once

// Derivative helpers on top of Dual<T>. All of them take the function as a
// generic callable so they nest: a gradient evaluated at Dual<double> points
// yields a derivative of the gradient.

#include <functional>
#include <tuple>
#include <vector>

#include "hocon/dual.hpp"

namespace hocon {

template <class T>
VecT<Dual<T>> seed(const VecT<T>& x, const VecT<T>& dir) {
  VecT<Dual<T>> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = Dual<T>(x(i), dir(i));
  return out;
}

template <class T>
VecT<Dual<T>> seed_unit(const VecT<T>& x, Eigen::Index k) {
  VecT<Dual<T>> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = Dual<T>(x(i), T(i == k ? 1.0 : 0.0));
  return out;
}

template <class T>
VecT<Dual<T>> constant(const VecT<T>& x) {
  VecT<Dual<T>> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = Dual<T>(x(i));
  return out;
}

template <class T>
VecT<T> values(const VecT<Dual<T>>& x) {
  VecT<T> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = x(i).v;
  return out;
}

template <class T>
VecT<T> tangents(const VecT<Dual<T>>& x) {
  VecT<T> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = x(i).d;
  return out;
}

template <class T>
MatT<T> tangents(const MatT<Dual<T>>& x) {
  MatT<T> out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) out(i, j) = x(i, j).d;
  return out;
}

/// Gradient of a scalar function; `f` is called with VecT<Dual<T>>.
template <class T, class F>
VecT<T> gradient(F&& f, const VecT<T>& x) {
  VecT<T> g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) g(k) = f(seed_unit(x, k)).d;
  return g;
}

/// Jacobian of a vector function; `f` is called with VecT<Dual<T>>.
template <class T, class F>
MatT<T> jacobian(F&& f, const VecT<T>& x, Eigen::Index rows) {
  MatT<T> J(rows, x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    VecT<Dual<T>> y = f(seed_unit(x, k));
    for (Eigen::Index i = 0; i < rows; ++i) J(i, k) = y(i).d;
  }
  return J;
}

/// Type-erased callable instantiated once per scalar type in `Ts...`. Built
/// from a generic lambda, so one model definition serves every AD level.
template <template <class> class Sig, class... Ts>
class MultiFunction {
 public:
  MultiFunction() = default;

  template <class G>
  explicit MultiFunction(const G& g) : fns_(std::function<Sig<Ts>>(g)...), set_(true) {}

  template <class T>
  const std::function<Sig<T>>& get() const {
    return std::get<std::function<Sig<T>>>(fns_);
  }

  explicit operator bool() const noexcept { return set_; }

 private:
  std::tuple<std::function<Sig<Ts>>...> fns_;
  bool set_ = false;
};

template <class T>
using Derivs = std::vector<VecT<T>>;

template <class T>
using ScalarSig = T(const VecT<T>&, const VecT<T>&);
template <class T>
using ResidualSig = VecT<T>(const Derivs<T>&);
template <class T>
using MatrixSig = MatT<T>(const Derivs<T>&);

// Scalar levels needed by the assembler: values (double), first derivatives of
// an assembly (D1), and the nested levels the mass matrix and its derivative
// require.
using LagrangianFunction = MultiFunction<ScalarSig, double, D1, D2, D3>;
using ResidualFunction = MultiFunction<ResidualSig, double, D1, D2, D3>;
using MatrixFunction = MultiFunction<MatrixSig, double, D1, D2>;

template <class T>
Derivs<T> lift(const std::vector<Vec>& jet) {
  Derivs<T> out;
  out.reserve(jet.size());
  for (const auto& v : jet) out.push_back(v.template cast<T>());
  return out;
}

template <class T>
Derivs<Dual<T>> constant(const Derivs<T>& jet) {
  Derivs<Dual<T>> out;
  out.reserve(jet.size());
  for (const auto& v : jet) out.push_back(constant(v));
  return out;
}

}  // namespace hocon
