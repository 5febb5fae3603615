// AVX2+FMA kernel variants. This TU is the only one compiled with -mavx2;
// nothing here runs unless dispatch confirmed CPU support at startup.

#include "blindspot/kernels/kernels.hpp"

#if defined(BLINDSPOT_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstring>
#include <vector>

namespace blindspot::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// exp on 4 lanes, Cephes-style rational approximation (~1-2 ulp).
inline __m256d exp4(__m256d x) {
    const __m256d max_in = _mm256_set1_pd(709.782712893383996843);
    const __m256d min_in = _mm256_set1_pd(-745.133219101941108420);
    const __m256d log2e = _mm256_set1_pd(1.44269504088896340736);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

    const __m256d over = _mm256_cmp_pd(x, max_in, _CMP_GT_OQ);
    const __m256d under = _mm256_cmp_pd(x, min_in, _CMP_LT_OQ);
    __m256d xc = _mm256_min_pd(_mm256_max_pd(x, min_in), max_in);

    __m256d nf = _mm256_floor_pd(_mm256_fmadd_pd(xc, log2e, _mm256_set1_pd(0.5)));
    xc = _mm256_fnmadd_pd(nf, c1, xc);
    xc = _mm256_fnmadd_pd(nf, c2, xc);

    const __m256d xx = _mm256_mul_pd(xc, xc);
    __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
    p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(3.02994407707441961300e-2));
    p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(9.99999999999999999910e-1));
    p = _mm256_mul_pd(p, xc);
    __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.52448340349684104192e-3));
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.27265548208155028766e-1));
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.00000000000000000005e0));
    const __m256d r = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    __m256d res = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));

    // scale by 2^n in two half-steps so results below DBL_MIN still land on
    // the subnormal grid instead of flushing to zero
    const __m128i n32 = _mm256_cvtpd_epi32(nf);
    const __m128i h1 = _mm_srai_epi32(n32, 1);
    const __m128i h2 = _mm_sub_epi32(n32, h1);
    const __m256i bias = _mm256_set1_epi64x(1023);
    const __m256i p1 =
        _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(h1), bias), 52);
    const __m256i p2 =
        _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(h2), bias), 52);
    res = _mm256_mul_pd(_mm256_mul_pd(res, _mm256_castsi256_pd(p1)), _mm256_castsi256_pd(p2));

    res = _mm256_andnot_pd(under, res);
    res = _mm256_blendv_pd(res, _mm256_set1_pd(HUGE_VAL), over);
    return res;
}

void a_exp_inplace(double* v, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(v + i, exp4(_mm256_loadu_pd(v + i)));
    if (i < n) {
        double buf[4] = {0, 0, 0, 0};
        std::memcpy(buf, v + i, (n - i) * sizeof(double));
        _mm256_storeu_pd(buf, exp4(_mm256_loadu_pd(buf)));
        std::memcpy(v + i, buf, (n - i) * sizeof(double));
    }
}

double a_dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double a_sum_sq(const double* v, std::size_t n) { return a_dot(v, v, n); }

void a_axpy(double c, const double* v, double* w, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_pd(w + i,
                         _mm256_fmadd_pd(vc, _mm256_loadu_pd(v + i), _mm256_loadu_pd(w + i)));
        _mm256_storeu_pd(
            w + i + 4, _mm256_fmadd_pd(vc, _mm256_loadu_pd(v + i + 4), _mm256_loadu_pd(w + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(w + i,
                         _mm256_fmadd_pd(vc, _mm256_loadu_pd(v + i), _mm256_loadu_pd(w + i)));
    for (; i < n; ++i) w[i] += c * v[i];
}

void a_scal(double c, double* w, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(w + i, _mm256_mul_pd(vc, _mm256_loadu_pd(w + i)));
    for (; i < n; ++i) w[i] *= c;
}

// d x n transpose so the j/c loops below can use contiguous loads.
std::vector<double> transpose(const double* X, std::size_t n, std::size_t d) {
    std::vector<double> t(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) t[k * n + i] = X[i * d + k];
    return t;
}

void a_rbf_gram(const double* X, std::size_t n, std::size_t d, const double* inv2ls, double sf2,
                double* K) {
    const std::vector<double> Xt = transpose(X, n, d);
    const __m256d vsf2 = _mm256_set1_pd(sf2);
    const __m256d neg = _mm256_set1_pd(-0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* ri = K + i * n;
        std::size_t j = 0;
        for (; j + 4 <= i; j += 4) {
            __m256d acc = _mm256_setzero_pd();
            for (std::size_t k = 0; k < d; ++k) {
                const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(X[i * d + k]),
                                                   _mm256_loadu_pd(Xt.data() + k * n + j));
                acc = _mm256_fmadd_pd(_mm256_mul_pd(diff, diff), _mm256_set1_pd(inv2ls[k]), acc);
            }
            _mm256_storeu_pd(ri + j, _mm256_mul_pd(vsf2, exp4(_mm256_xor_pd(acc, neg))));
        }
        for (; j < i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = X[i * d + k] - X[j * d + k];
                s += diff * diff * inv2ls[k];
            }
            ri[j] = sf2 * std::exp(-s);
        }
        ri[i] = sf2;
        for (std::size_t jj = 0; jj < i; ++jj) K[jj * n + i] = ri[jj];
    }
}

void a_rbf_cross_t(const double* X, std::size_t n, const double* Q, std::size_t m, std::size_t d,
                   const double* inv2ls, double sf2, double* Kt) {
    const std::vector<double> Qt = transpose(Q, m, d);
    const __m256d vsf2 = _mm256_set1_pd(sf2);
    const __m256d neg = _mm256_set1_pd(-0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* ri = Kt + i * m;
        std::size_t c = 0;
        for (; c + 4 <= m; c += 4) {
            __m256d acc = _mm256_setzero_pd();
            for (std::size_t k = 0; k < d; ++k) {
                const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(X[i * d + k]),
                                                   _mm256_loadu_pd(Qt.data() + k * m + c));
                acc = _mm256_fmadd_pd(_mm256_mul_pd(diff, diff), _mm256_set1_pd(inv2ls[k]), acc);
            }
            _mm256_storeu_pd(ri + c, _mm256_mul_pd(vsf2, exp4(_mm256_xor_pd(acc, neg))));
        }
        for (; c < m; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = X[i * d + k] - Q[c * d + k];
                s += diff * diff * inv2ls[k];
            }
            ri[c] = sf2 * std::exp(-s);
        }
    }
}

bool a_cholesky(double* A, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double* ri = A + i * n;
        for (std::size_t j = 0; j < i; ++j) {
            const double* rj = A + j * n;
            ri[j] = (ri[j] - a_dot(ri, rj, j)) / rj[j];
        }
        const double s = ri[i] - a_sum_sq(ri, i);
        if (!(s > 0.0) || !std::isfinite(s)) return false;
        ri[i] = std::sqrt(s);
        for (std::size_t j = i + 1; j < n; ++j) ri[j] = 0.0;
    }
    return true;
}

void a_trsv_lower(const double* L, std::size_t n, double* b) {
    for (std::size_t j = 0; j < n; ++j) {
        const double* rj = L + j * n;
        b[j] = (b[j] - a_dot(rj, b, j)) / rj[j];
    }
}

void a_trsv_lower_t(const double* L, std::size_t n, double* b) {
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= L[j * n + i] * b[j];
        b[i] = s / L[i * n + i];
    }
}

// 4x8 register tile of the panel update B[r0..r0+4) -= L[r0..r0+4, 0:kk) * B[0:kk).
inline void tile4x8(const double* L, std::size_t n, double* B, std::size_t m, std::size_t r0,
                    std::size_t c0, std::size_t kk) {
    double* p0 = B + (r0 + 0) * m + c0;
    double* p1 = B + (r0 + 1) * m + c0;
    double* p2 = B + (r0 + 2) * m + c0;
    double* p3 = B + (r0 + 3) * m + c0;
    __m256d a00 = _mm256_loadu_pd(p0), a01 = _mm256_loadu_pd(p0 + 4);
    __m256d a10 = _mm256_loadu_pd(p1), a11 = _mm256_loadu_pd(p1 + 4);
    __m256d a20 = _mm256_loadu_pd(p2), a21 = _mm256_loadu_pd(p2 + 4);
    __m256d a30 = _mm256_loadu_pd(p3), a31 = _mm256_loadu_pd(p3 + 4);
    const double* l0 = L + (r0 + 0) * n;
    const double* l1 = L + (r0 + 1) * n;
    const double* l2 = L + (r0 + 2) * n;
    const double* l3 = L + (r0 + 3) * n;
    for (std::size_t k = 0; k < kk; ++k) {
        const double* bk = B + k * m + c0;
        const __m256d b0 = _mm256_loadu_pd(bk);
        const __m256d b1 = _mm256_loadu_pd(bk + 4);
        __m256d a;
        a = _mm256_set1_pd(l0[k]);
        a00 = _mm256_fnmadd_pd(a, b0, a00);
        a01 = _mm256_fnmadd_pd(a, b1, a01);
        a = _mm256_set1_pd(l1[k]);
        a10 = _mm256_fnmadd_pd(a, b0, a10);
        a11 = _mm256_fnmadd_pd(a, b1, a11);
        a = _mm256_set1_pd(l2[k]);
        a20 = _mm256_fnmadd_pd(a, b0, a20);
        a21 = _mm256_fnmadd_pd(a, b1, a21);
        a = _mm256_set1_pd(l3[k]);
        a30 = _mm256_fnmadd_pd(a, b0, a30);
        a31 = _mm256_fnmadd_pd(a, b1, a31);
    }
    _mm256_storeu_pd(p0, a00);
    _mm256_storeu_pd(p0 + 4, a01);
    _mm256_storeu_pd(p1, a10);
    _mm256_storeu_pd(p1 + 4, a11);
    _mm256_storeu_pd(p2, a20);
    _mm256_storeu_pd(p2 + 4, a21);
    _mm256_storeu_pd(p3, a30);
    _mm256_storeu_pd(p3 + 4, a31);
}

// Same update for one row and a column tail narrower than 8.
inline void tile_row_tail(const double* L, std::size_t n, double* B, std::size_t m, std::size_t r,
                          std::size_t c0, std::size_t c1, std::size_t kk) {
    const double* lr = L + r * n;
    for (std::size_t c = c0; c < c1; ++c) {
        double s = B[r * m + c];
        for (std::size_t k = 0; k < kk; ++k) s -= lr[k] * B[k * m + c];
        B[r * m + c] = s;
    }
}

void a_trsm_lower_multi(const double* L, std::size_t n, double* B, std::size_t m) {
    constexpr std::size_t kRowBlock = 32;
    for (std::size_t j0 = 0; j0 < n; j0 += kRowBlock) {
        const std::size_t j1 = (j0 + kRowBlock < n) ? j0 + kRowBlock : n;
        if (j0 > 0) {
            std::size_t r = j0;
            for (; r + 4 <= j1; r += 4) {
                std::size_t c = 0;
                for (; c + 8 <= m; c += 8) tile4x8(L, n, B, m, r, c, j0);
                for (std::size_t rr = r; rr < r + 4; ++rr) tile_row_tail(L, n, B, m, rr, c, m, j0);
            }
            for (; r < j1; ++r) tile_row_tail(L, n, B, m, r, 0, m, j0);
        }
        for (std::size_t j = j0; j < j1; ++j) {
            double* rj = B + j * m;
            for (std::size_t i = j0; i < j; ++i) a_axpy(-L[j * n + i], B + i * m, rj, m);
            a_scal(1.0 / L[j * n + j], rj, m);
        }
    }
}

void a_gemv_t_acc(const double* A, std::size_t n, std::size_t m, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) a_axpy(x[i], A + i * m, y, m);
}

void a_colsq_acc(const double* A, std::size_t n, std::size_t m, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* ri = A + i * m;
        std::size_t c = 0;
        for (; c + 4 <= m; c += 4) {
            const __m256d v = _mm256_loadu_pd(ri + c);
            _mm256_storeu_pd(out + c, _mm256_fmadd_pd(v, v, _mm256_loadu_pd(out + c)));
        }
        for (; c < m; ++c) out[c] += ri[c] * ri[c];
    }
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops = {
        "avx2",     a_exp_inplace, a_dot,      a_sum_sq,           a_axpy,
        a_scal,     a_rbf_gram,    a_rbf_cross_t, a_cholesky,      a_trsv_lower,
        a_trsv_lower_t, a_trsm_lower_multi, a_gemv_t_acc, a_colsq_acc,
    };
    return ops;
}

}  // namespace blindspot::kernels

#endif  // BLINDSPOT_HAVE_AVX2
