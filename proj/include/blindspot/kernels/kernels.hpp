#pragma once

#include <cstddef>
#include <string_view>

namespace blindspot::kernels {

// Table of the numeric inner-loop kernels used by the GP and acquisition
// code. Two implementations exist: a scalar reference and an AVX2 variant;
// one is selected at process start (see active_ops) and every caller goes
// through the table, so a whole run uses a single consistent backend.
//
// Conventions: all matrices are row-major, lower-triangular factors are
// stored with the upper triangle zeroed, and `inv2ls[k] = 0.5 / ls[k]^2`
// pre-bakes the RBF lengthscales.
struct Ops {
    const char* name;

    // v[i] = exp(v[i])
    void (*exp_inplace)(double* v, std::size_t n);

    double (*dot)(const double* a, const double* b, std::size_t n);

    double (*sum_sq)(const double* v, std::size_t n);

    // w[i] += c * v[i]
    void (*axpy)(double c, const double* v, double* w, std::size_t n);

    // w[i] *= c
    void (*scal)(double c, double* w, std::size_t n);

    // Symmetric RBF gram matrix: K[i,j] = sf2 * exp(-sum_k (X[i,k]-X[j,k])^2 * inv2ls[k]).
    // Both triangles are filled from one evaluation, so K is exactly symmetric.
    void (*rbf_gram)(const double* X, std::size_t n, std::size_t d, const double* inv2ls,
                     double sf2, double* K);

    // Cross kernel, transposed layout: Kt[i*m + c] = k(X[i], Q[c]) for n
    // training rows against m query rows. The n-major layout is what the
    // batched triangular solve wants.
    void (*rbf_cross_t)(const double* X, std::size_t n, const double* Q, std::size_t m,
                        std::size_t d, const double* inv2ls, double sf2, double* Kt);

    // In-place Cholesky of the lower triangle of A (row-major n x n);
    // zeroes the upper triangle. Returns false if A is not positive
    // definite. Row-bordered ordering: row i is derived only from rows
    // < i, so factoring an appended matrix reproduces the old rows bit
    // for bit.
    bool (*cholesky)(double* A, std::size_t n);

    // Solve L x = b in place (forward substitution).
    void (*trsv_lower)(const double* L, std::size_t n, double* b);

    // Solve L^T x = b in place (backward substitution).
    void (*trsv_lower_t)(const double* L, std::size_t n, double* b);

    // Solve L W = B in place, B row-major n x m (each column one rhs).
    void (*trsm_lower_multi)(const double* L, std::size_t n, double* B, std::size_t m);

    // y[c] += sum_i A[i*m + c] * x[i]   (A^T x, accumulating)
    void (*gemv_t_acc)(const double* A, std::size_t n, std::size_t m, const double* x, double* y);

    // out[c] += sum_i A[i*m + c]^2   (column-wise sum of squares, accumulating)
    void (*colsq_acc)(const double* A, std::size_t n, std::size_t m, double* out);
};

const Ops& scalar_ops();

#if defined(BLINDSPOT_HAVE_AVX2)
const Ops& avx2_ops();
#endif

// True when this CPU can run the AVX2 variant (and it was compiled in).
bool avx2_available();

// Backend selected once per process: BLINDSPOT_KERNELS=scalar|avx2 forces a
// choice, otherwise the best available variant wins.
const Ops& active_ops();

// Lookup by name ("scalar", "avx2"); nullptr when unknown or unavailable.
const Ops* ops_by_name(std::string_view name);

}  // namespace blindspot::kernels
