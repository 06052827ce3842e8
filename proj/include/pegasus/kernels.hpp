#pragma once

#include "pegasus/matrix.hpp"

// Dense kernels used by the manifolds and detectors. Every kernel exists
// twice: the production OpenMP version (this namespace) and a plain serial
// version under kernels::ref. The parallel versions partition work so that
// each output element is accumulated in exactly the same order as the serial
// code — results are bit-identical for any thread count, which the kernel
// tests assert and the rest of the project relies on for reproducibility.

namespace pegasus::kernels {

// Clamp OpenMP's thread count (0 = leave the runtime default).
void set_threads(int n);
int max_threads();

// C[n×m] = A[n×k] · B[k×m]
Matrix matmul(const Matrix& A, const Matrix& B);
// C[n×m] = A[n×k] · B[m×k]ᵀ
Matrix matmul_bt(const Matrix& A, const Matrix& B);
// C[p×q] = A[n×p]ᵀ · B[n×q]
Matrix matmul_at(const Matrix& A, const Matrix& B);

// Column sums / means (accumulated over rows in ascending order).
Vector col_sum(const Matrix& A);
Vector col_mean(const Matrix& A);

// Per-row mean squared difference: out[i] = Σ_j (A(i,j)−B(i,j))² / cols.
Vector row_mse(const Matrix& A, const Matrix& B);

// D(i,j) = ‖A.row(i) − B.row(j)‖²  (clamped at 0 against cancellation).
Matrix pairwise_sqdist(const Matrix& A, const Matrix& B);

void add_row_inplace(Matrix& A, const Vector& v);
void sub_row_inplace(Matrix& A, const Vector& v);

namespace ref {

Matrix matmul(const Matrix& A, const Matrix& B);
Matrix matmul_bt(const Matrix& A, const Matrix& B);
Matrix matmul_at(const Matrix& A, const Matrix& B);
Vector col_sum(const Matrix& A);
Vector col_mean(const Matrix& A);
Vector row_mse(const Matrix& A, const Matrix& B);
Matrix pairwise_sqdist(const Matrix& A, const Matrix& B);

} // namespace ref

} // namespace pegasus::kernels
