#include "rdcost/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rdcost::kernels {
namespace {

inline void expand_row(std::span<const double> in, std::span<const Monomial> terms, std::span<double> out) {
  for (std::size_t t = 0; t < terms.size(); ++t) {
    double v = 1.0;
    for (std::size_t c : terms[t]) v *= in[c];
    out[t] = v;
  }
}

inline void standardize_row(std::span<double> row, std::span<const double> mean, std::span<const double> std) {
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / std[c];
}

void check_expand_shape(const Matrix& in, std::span<const Monomial> terms, Matrix& out) {
  if (out.rows() != in.rows() || out.cols() != terms.size()) out = Matrix(in.rows(), terms.size());
}

}  // namespace

namespace serial {

void expand_monomials(const Matrix& in, std::span<const Monomial> terms, Matrix& out) {
  check_expand_shape(in, terms, out);
  for (std::size_t r = 0; r < in.rows(); ++r) expand_row(in.row(r), terms, out.row(r));
}

void standardize(Matrix& X, std::span<const double> mean, std::span<const double> std) {
  for (std::size_t r = 0; r < X.rows(); ++r) standardize_row(X.row(r), mean, std);
}

}  // namespace serial

namespace parallel {

void expand_monomials(const Matrix& in, std::span<const Monomial> terms, Matrix& out) {
  check_expand_shape(in, terms, out);
  const auto n = static_cast<std::ptrdiff_t>(in.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    expand_row(in.row(static_cast<std::size_t>(r)), terms, out.row(static_cast<std::size_t>(r)));
  }
}

void standardize(Matrix& X, std::span<const double> mean, std::span<const double> std) {
  const auto n = static_cast<std::ptrdiff_t>(X.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) standardize_row(X.row(static_cast<std::size_t>(r)), mean, std);
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace rdcost::kernels
