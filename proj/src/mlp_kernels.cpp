#include "rdcost/mlp_kernels.hpp"

#include <algorithm>

namespace rdcost::kernels {
namespace {

// Sum of squared residuals over rows [lo, hi); adds scale * d(r^2)/d(theta)
// into grad.
double accumulate_chunk(const Layout& l, std::span<const double> params, Activation act, const Matrix& X,
                        std::span<const std::size_t> rows, std::span<const double> targets,
                        std::span<const double> masks1, std::span<const double> masks2, std::size_t lo, std::size_t hi,
                        double scale, double* grad, Workspace<double>& ws) {
  double sse = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double* x = X.row(rows[i]).data();
    const double* m1 = masks1.empty() ? nullptr : masks1.data() + i * l.n1;
    const double* m2 = masks2.empty() ? nullptr : masks2.data() + i * l.n2;
    const double yhat = forward(l, params.data(), act, x, m1, m2, ws);
    const double r = yhat - targets[i];
    sse += r * r;
    backward_accumulate(l, params.data(), act, x, m1, m2, 2.0 * r * scale, ws, grad);
  }
  return sse;
}

void check(const Layout& l, std::span<const double> params, const Matrix& X, std::span<const std::size_t> rows,
           std::span<const double> targets, std::span<const double> masks1, std::span<const double> masks2,
           std::span<double> grad) {
  if (params.size() != l.size() || grad.size() != l.size()) throw ShapeError("parameter vector size mismatch");
  if (X.cols() != l.d) throw ShapeError("input dimension mismatch");
  if (targets.size() != rows.size()) throw ShapeError("targets do not match batch rows");
  if (rows.empty()) throw RangeError("empty batch");
  if (!masks1.empty() && masks1.size() != rows.size() * l.n1) throw ShapeError("layer-1 mask size mismatch");
  if (!masks2.empty() && masks2.size() != rows.size() * l.n2) throw ShapeError("layer-2 mask size mismatch");
}

}  // namespace

namespace serial {

double batch_gradient(const Layout& l, std::span<const double> params, Activation act, const Matrix& X,
                      std::span<const std::size_t> rows, std::span<const double> targets,
                      std::span<const double> masks1, std::span<const double> masks2, std::span<double> grad) {
  check(l, params, X, rows, targets, masks1, masks2, grad);
  std::fill(grad.begin(), grad.end(), 0.0);
  Workspace<double> ws(l);
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  const double sse = accumulate_chunk(l, params, act, X, rows, targets, masks1, masks2, 0, rows.size(), inv_n,
                                      grad.data(), ws);
  return sse * inv_n;
}

void predict(const Layout& l, std::span<const double> params, Activation act, const Matrix& X,
             std::span<const std::size_t> rows, std::span<double> out) {
  if (X.cols() != l.d) throw ShapeError("input dimension mismatch");
  Workspace<double> ws(l);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[i] = forward(l, params.data(), act, X.row(rows[i]).data(), static_cast<const double*>(nullptr),
                     static_cast<const double*>(nullptr), ws);
  }
}

}  // namespace serial

namespace parallel {

double batch_gradient(const Layout& l, std::span<const double> params, Activation act, const Matrix& X,
                      std::span<const std::size_t> rows, std::span<const double> targets,
                      std::span<const double> masks1, std::span<const double> masks2, std::span<double> grad) {
  check(l, params, X, rows, targets, masks1, masks2, grad);
  const std::size_t n = rows.size();
  const std::size_t chunks = std::min<std::size_t>((n + kGradBlock - 1) / kGradBlock, 64);
  const double inv_n = 1.0 / static_cast<double>(n);
  std::fill(grad.begin(), grad.end(), 0.0);
  if (chunks <= 1) {
    Workspace<double> ws(l);
    return accumulate_chunk(l, params, act, X, rows, targets, masks1, masks2, 0, n, inv_n, grad.data(), ws) * inv_n;
  }
  const std::size_t P = l.size();
  std::vector<double> partial(chunks * P, 0.0);
  std::vector<double> sse(chunks, 0.0);
  const auto nc = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel
  {
    Workspace<double> ws(l);
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < nc; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      const std::size_t lo = cu * n / chunks;
      const std::size_t hi = (cu + 1) * n / chunks;
      sse[cu] = accumulate_chunk(l, params, act, X, rows, targets, masks1, masks2, lo, hi, inv_n,
                                 partial.data() + cu * P, ws);
    }
  }
  double total = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    total += sse[c];
    const double* src = partial.data() + c * P;
    for (std::size_t k = 0; k < P; ++k) grad[k] += src[k];
  }
  return total * inv_n;
}

void predict(const Layout& l, std::span<const double> params, Activation act, const Matrix& X,
             std::span<const std::size_t> rows, std::span<double> out) {
  if (X.cols() != l.d) throw ShapeError("input dimension mismatch");
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel
  {
    Workspace<double> ws(l);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      out[iu] = forward(l, params.data(), act, X.row(rows[iu]).data(), static_cast<const double*>(nullptr),
                        static_cast<const double*>(nullptr), ws);
    }
  }
}

}  // namespace parallel

}  // namespace rdcost::kernels
