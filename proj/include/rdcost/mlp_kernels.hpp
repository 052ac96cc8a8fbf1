#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "rdcost/mlp.hpp"

// Forward and backward passes of the two-hidden-layer network over a flat
// parameter vector. Templated on the scalar so the gradient checks can run
// the exact same code in long double.
namespace rdcost::kernels {

template <class T>
inline T activate(Activation a, T z) {
  switch (a) {
    case Activation::ReLU: return z > T(0) ? z : T(0);
    case Activation::Tanh: return std::tanh(z);
    case Activation::Sigmoid: return T(1) / (T(1) + std::exp(-z));
    case Activation::Identity: break;
  }
  return z;
}

/// Derivative in terms of the pre-activation z and activation value y.
template <class T>
inline T activate_grad(Activation a, T z, T y) {
  switch (a) {
    case Activation::ReLU: return z > T(0) ? T(1) : T(0);
    case Activation::Tanh: return T(1) - y * y;
    case Activation::Sigmoid: return y * (T(1) - y);
    case Activation::Identity: break;
  }
  return T(1);
}

template <class T>
struct Workspace {
  std::vector<T> z1, h1, a1, z2, h2, a2, g1, g2;

  explicit Workspace(const Layout& l)
      : z1(l.n1), h1(l.n1), a1(l.n1), z2(l.n2), h2(l.n2), a2(l.n2), g1(l.n1), g2(l.n2) {}
};

/// h1/h2 in the workspace hold the activations, a1/a2 the same after the
/// dropout multipliers. Null masks mean no dropout.
template <class T, class X>
T forward(const Layout& l, const T* p, Activation act, const X* x, const T* m1, const T* m2, Workspace<T>& ws) {
  const T* W1 = p + l.w1();
  const T* b1 = p + l.b1();
  for (std::size_t j = 0; j < l.n1; ++j) {
    T s = b1[j];
    const T* w = W1 + j * l.d;
    for (std::size_t k = 0; k < l.d; ++k) s += w[k] * static_cast<T>(x[k]);
    ws.z1[j] = s;
    ws.h1[j] = activate(act, s);
    ws.a1[j] = ws.h1[j] * (m1 ? m1[j] : T(1));
  }
  const T* W2 = p + l.w2();
  const T* b2 = p + l.b2();
  for (std::size_t j = 0; j < l.n2; ++j) {
    T s = b2[j];
    const T* w = W2 + j * l.n1;
    for (std::size_t k = 0; k < l.n1; ++k) s += w[k] * ws.a1[k];
    ws.z2[j] = s;
    ws.h2[j] = activate(act, s);
    ws.a2[j] = ws.h2[j] * (m2 ? m2[j] : T(1));
  }
  const T* w3 = p + l.w3();
  T out = p[l.b3()];
  for (std::size_t k = 0; k < l.n2; ++k) out += w3[k] * ws.a2[k];
  return out;
}

/// Adds g * d(yhat)/d(theta) into `grad`, using the state left by forward()
/// with the same masks.
template <class T, class X>
void backward_accumulate(const Layout& l, const T* p, Activation act, const X* x, const T* m1, const T* m2, T g,
                         Workspace<T>& ws, T* grad) {
  const T* w3 = p + l.w3();
  grad[l.b3()] += g;
  T* gw3 = grad + l.w3();
  for (std::size_t k = 0; k < l.n2; ++k) {
    gw3[k] += g * ws.a2[k];
    const T mask = m2 ? m2[k] : T(1);
    ws.g2[k] = g * w3[k] * mask * activate_grad(act, ws.z2[k], ws.h2[k]);
  }
  const T* W2 = p + l.w2();
  T* gW2 = grad + l.w2();
  T* gb2 = grad + l.b2();
  for (std::size_t j = 0; j < l.n1; ++j) ws.g1[j] = T(0);
  for (std::size_t k = 0; k < l.n2; ++k) {
    const T gk = ws.g2[k];
    gb2[k] += gk;
    T* row = gW2 + k * l.n1;
    const T* wrow = W2 + k * l.n1;
    for (std::size_t j = 0; j < l.n1; ++j) {
      row[j] += gk * ws.a1[j];
      ws.g1[j] += gk * wrow[j];
    }
  }
  T* gW1 = grad + l.w1();
  T* gb1 = grad + l.b1();
  for (std::size_t j = 0; j < l.n1; ++j) {
    const T mask = m1 ? m1[j] : T(1);
    const T gj = ws.g1[j] * mask * activate_grad(act, ws.z1[j], ws.h1[j]);
    gb1[j] += gj;
    T* row = gW1 + j * l.d;
    for (std::size_t k = 0; k < l.d; ++k) row[k] += gj * static_cast<T>(x[k]);
  }
}

/// Batch-mean squared error and its gradient, accumulated row by row.
/// Reference implementation for the blocked parallel kernel.
template <class T, class X>
T batch_loss_and_gradient(const Layout& l, std::span<const T> params, Activation act, const X* rows_data,
                          std::size_t row_stride, std::span<const std::size_t> rows, std::span<const T> targets,
                          std::span<const T> masks1, std::span<const T> masks2, std::span<T> grad) {
  Workspace<T> ws(l);
  for (auto& g : grad) g = T(0);
  const T inv_n = T(1) / static_cast<T>(rows.size());
  T loss = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const X* x = rows_data + rows[i] * row_stride;
    const T* m1 = masks1.empty() ? nullptr : masks1.data() + i * l.n1;
    const T* m2 = masks2.empty() ? nullptr : masks2.data() + i * l.n2;
    const T yhat = forward(l, params.data(), act, x, m1, m2, ws);
    const T r = yhat - targets[i];
    loss += r * r;
    backward_accumulate(l, params.data(), act, x, m1, m2, T(2) * r * inv_n, ws, grad.data());
  }
  return loss * inv_n;
}

namespace serial {
double batch_gradient(const Layout& l, std::span<const double> params, Activation act, const Matrix& X,
                      std::span<const std::size_t> rows, std::span<const double> targets,
                      std::span<const double> masks1, std::span<const double> masks2, std::span<double> grad);
void predict(const Layout& l, std::span<const double> params, Activation act, const Matrix& X,
             std::span<const std::size_t> rows, std::span<double> out);
}  // namespace serial

namespace parallel {
/// Rows are cut into fixed blocks of kGradBlock; block partials are summed
/// in block order, so the result does not depend on the thread count.
inline constexpr std::size_t kGradBlock = 16;

double batch_gradient(const Layout& l, std::span<const double> params, Activation act, const Matrix& X,
                      std::span<const std::size_t> rows, std::span<const double> targets,
                      std::span<const double> masks1, std::span<const double> masks2, std::span<double> grad);
void predict(const Layout& l, std::span<const double> params, Activation act, const Matrix& X,
             std::span<const std::size_t> rows, std::span<double> out);
}  // namespace parallel

}  // namespace rdcost::kernels
