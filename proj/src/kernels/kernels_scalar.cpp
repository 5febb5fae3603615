// Scalar reference kernels. These define the semantics the AVX2 variants are
// equivalence-tested against; keep them simple enough to audit by eye.

#include "blindspot/kernels/kernels.hpp"

#include <cmath>
#include <cstring>
#include <vector>

namespace blindspot::kernels {
namespace {

void s_exp_inplace(double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(v[i]);
}

double s_dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double s_sum_sq(const double* v, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i] * v[i];
    return s;
}

void s_axpy(double c, const double* v, double* w, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) w[i] += c * v[i];
}

void s_scal(double c, double* w, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) w[i] *= c;
}

void s_rbf_gram(const double* X, std::size_t n, std::size_t d, const double* inv2ls, double sf2,
                double* K) {
    for (std::size_t i = 0; i < n; ++i) {
        K[i * n + i] = sf2;
        for (std::size_t j = 0; j < i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = X[i * d + k] - X[j * d + k];
                s += diff * diff * inv2ls[k];
            }
            const double v = sf2 * std::exp(-s);
            K[i * n + j] = v;
            K[j * n + i] = v;
        }
    }
}

void s_rbf_cross_t(const double* X, std::size_t n, const double* Q, std::size_t m, std::size_t d,
                   const double* inv2ls, double sf2, double* Kt) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < m; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = X[i * d + k] - Q[c * d + k];
                s += diff * diff * inv2ls[k];
            }
            Kt[i * m + c] = sf2 * std::exp(-s);
        }
    }
}

bool s_cholesky(double* A, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double* ri = A + i * n;
        for (std::size_t j = 0; j < i; ++j) {
            const double* rj = A + j * n;
            ri[j] = (ri[j] - s_dot(ri, rj, j)) / rj[j];
        }
        const double s = ri[i] - s_sum_sq(ri, i);
        if (!(s > 0.0) || !std::isfinite(s)) return false;
        ri[i] = std::sqrt(s);
        for (std::size_t j = i + 1; j < n; ++j) ri[j] = 0.0;
    }
    return true;
}

void s_trsv_lower(const double* L, std::size_t n, double* b) {
    for (std::size_t j = 0; j < n; ++j) {
        const double* rj = L + j * n;
        b[j] = (b[j] - s_dot(rj, b, j)) / rj[j];
    }
}

void s_trsv_lower_t(const double* L, std::size_t n, double* b) {
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= L[j * n + i] * b[j];
        b[i] = s / L[i * n + i];
    }
}

void s_trsm_lower_multi(const double* L, std::size_t n, double* B, std::size_t m) {
    for (std::size_t j = 0; j < n; ++j) {
        double* rj = B + j * m;
        for (std::size_t i = 0; i < j; ++i) s_axpy(-L[j * n + i], B + i * m, rj, m);
        s_scal(1.0 / L[j * n + j], rj, m);
    }
}

void s_gemv_t_acc(const double* A, std::size_t n, std::size_t m, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) s_axpy(x[i], A + i * m, y, m);
}

void s_colsq_acc(const double* A, std::size_t n, std::size_t m, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* ri = A + i * m;
        for (std::size_t c = 0; c < m; ++c) out[c] += ri[c] * ri[c];
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar",   s_exp_inplace, s_dot,      s_sum_sq,           s_axpy,
        s_scal,     s_rbf_gram,    s_rbf_cross_t, s_cholesky,      s_trsv_lower,
        s_trsv_lower_t, s_trsm_lower_multi, s_gemv_t_acc, s_colsq_acc,
    };
    return ops;
}

}  // namespace blindspot::kernels
