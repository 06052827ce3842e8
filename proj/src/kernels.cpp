#include "pegasus/kernels.hpp"

#include <algorithm>
#include <cstdint>

#include <omp.h>

#include "pegasus/errors.hpp"

namespace pegasus::kernels {

namespace {

using i64 = std::int64_t;

void check_mul(const Matrix& A, const Matrix& B, std::size_t inner_a, std::size_t inner_b,
               const char* what) {
    if (inner_a != inner_b) throw ShapeMismatch(what);
    (void)A;
    (void)B;
}

// Row-block size for the transposed products; keeps a block of A/B rows hot
// while preserving ascending accumulation order per output element.
constexpr i64 kRowBlock = 64;

} // namespace

void set_threads(int n) {
    if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

Matrix matmul(const Matrix& A, const Matrix& B) {
    check_mul(A, B, A.cols(), B.rows(), "matmul: A.cols != B.rows");
    const i64 n = A.rows(), k = A.cols(), m = B.cols();
    Matrix C(n, m);
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < n; ++i) {
        double* c = C.row(i);
        const double* a = A.row(i);
        for (i64 l = 0; l < k; ++l) {
            const double a_il = a[l];
            const double* b = B.row(l);
            for (i64 j = 0; j < m; ++j) c[j] += a_il * b[j];
        }
    }
    return C;
}

Matrix matmul_bt(const Matrix& A, const Matrix& B) {
    check_mul(A, B, A.cols(), B.cols(), "matmul_bt: A.cols != B.cols");
    const i64 n = A.rows(), k = A.cols(), m = B.rows();
    Matrix C(n, m);
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < n; ++i) {
        double* c = C.row(i);
        const double* a = A.row(i);
        for (i64 j = 0; j < m; ++j) {
            const double* b = B.row(j);
            double acc = 0.0;
            for (i64 l = 0; l < k; ++l) acc += a[l] * b[l];
            c[j] = acc;
        }
    }
    return C;
}

Matrix matmul_at(const Matrix& A, const Matrix& B) {
    check_mul(A, B, A.rows(), B.rows(), "matmul_at: A.rows != B.rows");
    const i64 n = A.rows(), p = A.cols(), q = B.cols();
    Matrix C(p, q);
    for (i64 r0 = 0; r0 < n; r0 += kRowBlock) {
        const i64 r1 = std::min(n, r0 + kRowBlock);
#pragma omp parallel for schedule(static)
        for (i64 i = 0; i < p; ++i) {
            double* c = C.row(i);
            for (i64 r = r0; r < r1; ++r) {
                const double a_ri = A(r, i);
                const double* b = B.row(r);
                for (i64 j = 0; j < q; ++j) c[j] += a_ri * b[j];
            }
        }
    }
    return C;
}

Vector col_sum(const Matrix& A) {
    const i64 n = A.rows(), m = A.cols();
    Vector out(m, 0.0);
#pragma omp parallel for schedule(static)
    for (i64 j = 0; j < m; ++j) {
        double acc = 0.0;
        for (i64 r = 0; r < n; ++r) acc += A(r, j);
        out[j] = acc;
    }
    return out;
}

Vector col_mean(const Matrix& A) {
    const i64 n = A.rows(), m = A.cols();
    if (n == 0) throw ShapeMismatch("col_mean: empty matrix");
    Vector out = col_sum(A);
    for (i64 j = 0; j < m; ++j) out[j] /= static_cast<double>(n);
    return out;
}

Vector row_mse(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw ShapeMismatch("row_mse: shape mismatch");
    const i64 n = A.rows(), m = A.cols();
    if (m == 0) throw ShapeMismatch("row_mse: zero columns");
    Vector out(n, 0.0);
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < n; ++i) {
        const double* a = A.row(i);
        const double* b = B.row(i);
        double acc = 0.0;
        for (i64 j = 0; j < m; ++j) {
            const double d = a[j] - b[j];
            acc += d * d;
        }
        out[i] = acc / static_cast<double>(m);
    }
    return out;
}

Matrix pairwise_sqdist(const Matrix& A, const Matrix& B) {
    check_mul(A, B, A.cols(), B.cols(), "pairwise_sqdist: dimension mismatch");
    const i64 n = A.rows(), m = B.rows(), d = A.cols();
    Matrix D(n, m);
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < n; ++i) {
        const double* a = A.row(i);
        double* out = D.row(i);
        for (i64 j = 0; j < m; ++j) {
            const double* b = B.row(j);
            double acc = 0.0;
            for (i64 l = 0; l < d; ++l) {
                const double diff = a[l] - b[l];
                acc += diff * diff;
            }
            out[j] = acc;
        }
    }
    return D;
}

void add_row_inplace(Matrix& A, const Vector& v) {
    if (A.cols() != v.size()) throw ShapeMismatch("add_row_inplace: width mismatch");
    const i64 n = A.rows(), m = A.cols();
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < n; ++i) {
        double* a = A.row(i);
        for (i64 j = 0; j < m; ++j) a[j] += v[j];
    }
}

void sub_row_inplace(Matrix& A, const Vector& v) {
    if (A.cols() != v.size()) throw ShapeMismatch("sub_row_inplace: width mismatch");
    const i64 n = A.rows(), m = A.cols();
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < n; ++i) {
        double* a = A.row(i);
        for (i64 j = 0; j < m; ++j) a[j] -= v[j];
    }
}

namespace ref {

Matrix matmul(const Matrix& A, const Matrix& B) {
    check_mul(A, B, A.cols(), B.rows(), "matmul: A.cols != B.rows");
    const i64 n = A.rows(), k = A.cols(), m = B.cols();
    Matrix C(n, m);
    for (i64 i = 0; i < n; ++i) {
        double* c = C.row(i);
        const double* a = A.row(i);
        for (i64 l = 0; l < k; ++l) {
            const double a_il = a[l];
            const double* b = B.row(l);
            for (i64 j = 0; j < m; ++j) c[j] += a_il * b[j];
        }
    }
    return C;
}

Matrix matmul_bt(const Matrix& A, const Matrix& B) {
    check_mul(A, B, A.cols(), B.cols(), "matmul_bt: A.cols != B.cols");
    const i64 n = A.rows(), k = A.cols(), m = B.rows();
    Matrix C(n, m);
    for (i64 i = 0; i < n; ++i) {
        double* c = C.row(i);
        const double* a = A.row(i);
        for (i64 j = 0; j < m; ++j) {
            const double* b = B.row(j);
            double acc = 0.0;
            for (i64 l = 0; l < k; ++l) acc += a[l] * b[l];
            c[j] = acc;
        }
    }
    return C;
}

Matrix matmul_at(const Matrix& A, const Matrix& B) {
    check_mul(A, B, A.rows(), B.rows(), "matmul_at: A.rows != B.rows");
    const i64 n = A.rows(), p = A.cols(), q = B.cols();
    Matrix C(p, q);
    for (i64 r0 = 0; r0 < n; r0 += kRowBlock) {
        const i64 r1 = std::min(n, r0 + kRowBlock);
        for (i64 i = 0; i < p; ++i) {
            double* c = C.row(i);
            for (i64 r = r0; r < r1; ++r) {
                const double a_ri = A(r, i);
                const double* b = B.row(r);
                for (i64 j = 0; j < q; ++j) c[j] += a_ri * b[j];
            }
        }
    }
    return C;
}

Vector col_sum(const Matrix& A) {
    const i64 n = A.rows(), m = A.cols();
    Vector out(m, 0.0);
    for (i64 j = 0; j < m; ++j) {
        double acc = 0.0;
        for (i64 r = 0; r < n; ++r) acc += A(r, j);
        out[j] = acc;
    }
    return out;
}

Vector col_mean(const Matrix& A) {
    const i64 n = A.rows(), m = A.cols();
    if (n == 0) throw ShapeMismatch("col_mean: empty matrix");
    Vector out = col_sum(A);
    for (i64 j = 0; j < m; ++j) out[j] /= static_cast<double>(n);
    return out;
}

Vector row_mse(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw ShapeMismatch("row_mse: shape mismatch");
    const i64 n = A.rows(), m = A.cols();
    if (m == 0) throw ShapeMismatch("row_mse: zero columns");
    Vector out(n, 0.0);
    for (i64 i = 0; i < n; ++i) {
        const double* a = A.row(i);
        const double* b = B.row(i);
        double acc = 0.0;
        for (i64 j = 0; j < m; ++j) {
            const double d = a[j] - b[j];
            acc += d * d;
        }
        out[i] = acc / static_cast<double>(m);
    }
    return out;
}

Matrix pairwise_sqdist(const Matrix& A, const Matrix& B) {
    check_mul(A, B, A.cols(), B.cols(), "pairwise_sqdist: dimension mismatch");
    const i64 n = A.rows(), m = B.rows(), d = A.cols();
    Matrix D(n, m);
    for (i64 i = 0; i < n; ++i) {
        const double* a = A.row(i);
        double* out = D.row(i);
        for (i64 j = 0; j < m; ++j) {
            const double* b = B.row(j);
            double acc = 0.0;
            for (i64 l = 0; l < d; ++l) {
                const double diff = a[l] - b[l];
                acc += diff * diff;
            }
            out[j] = acc;
        }
    }
    return D;
}

} // namespace ref

} // namespace pegasus::kernels
