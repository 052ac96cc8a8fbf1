#pragma once

#include <span>

#include "rdcost/features.hpp"
#include "rdcost/matrix.hpp"

// Row-parallel data kernels. Each OpenMP kernel in `parallel` has a plain
// loop twin in `serial` that the tests compare against and the benchmark
// times. Both produce bit-identical results: every output cell is written by
// exactly one iteration and no cross-row reduction happens here.
namespace rdcost::kernels {

namespace serial {
void expand_monomials(const Matrix& in, std::span<const Monomial> terms, Matrix& out);
void standardize(Matrix& X, std::span<const double> mean, std::span<const double> std);
}  // namespace serial

namespace parallel {
void expand_monomials(const Matrix& in, std::span<const Monomial> terms, Matrix& out);
void standardize(Matrix& X, std::span<const double> mean, std::span<const double> std);
}  // namespace parallel

/// Threads OpenMP would use for a parallel region (1 without OpenMP).
int max_threads();

}  // namespace rdcost::kernels
