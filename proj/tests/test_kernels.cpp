#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "blindspot/kernels/kernels.hpp"
#include "blindspot/rng.hpp"

using namespace blindspot;
using kernels::Ops;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (double& x : v) x = lo + (hi - lo) * rng.unit();
    return v;
}

// SPD matrix via A = B B^T + n I.
std::vector<double> random_spd(Rng& rng, std::size_t n) {
    std::vector<double> b = random_vec(rng, n * n);
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += b[i * n + k] * b[j * n + k];
            a[i * n + j] = s + (i == j ? static_cast<double>(n) : 0.0);
        }
    return a;
}

bool close_rel(double a, double b, double tol) {
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    return std::abs(a - b) <= tol * scale;
}

void check_all_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        INFO("element ", i);
        CHECK(close_rel(a[i], b[i], tol));
    }
}

// The AVX2 variant must agree with the scalar reference on every kernel;
// tolerances allow for reassociated summation only.
void check_variant_equivalence(const Ops& ref, const Ops& alt) {
    Rng rng(20240811);
    const std::vector<std::size_t> sizes = {1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 33, 64, 100};

    for (std::size_t n : sizes) {
        auto a = random_vec(rng, n);
        auto b = random_vec(rng, n);
        CHECK(close_rel(ref.dot(a.data(), b.data(), n), alt.dot(a.data(), b.data(), n), 1e-12));
        CHECK(close_rel(ref.sum_sq(a.data(), n), alt.sum_sq(a.data(), n), 1e-12));

        auto w1 = b, w2 = b;
        ref.axpy(0.37, a.data(), w1.data(), n);
        alt.axpy(0.37, a.data(), w2.data(), n);
        check_all_close(w1, w2, 1e-13);

        auto e1 = a, e2 = a;
        ref.exp_inplace(e1.data(), n);
        alt.exp_inplace(e2.data(), n);
        check_all_close(e1, e2, 1e-13);
    }

    // gram/cross on assorted shapes
    for (const auto& [n, m, d] : std::vector<std::array<std::size_t, 3>>{
             {1, 1, 1}, {3, 5, 2}, {8, 7, 6}, {20, 33, 6}, {17, 4, 3}}) {
        auto X = random_vec(rng, n * d, 0.0, 1.0);
        auto Q = random_vec(rng, m * d, 0.0, 1.0);
        std::vector<double> inv2ls(d);
        for (double& v : inv2ls) v = 0.5 + 3.0 * rng.unit();

        std::vector<double> k1(n * n), k2(n * n);
        ref.rbf_gram(X.data(), n, d, inv2ls.data(), 1.7, k1.data());
        alt.rbf_gram(X.data(), n, d, inv2ls.data(), 1.7, k2.data());
        check_all_close(k1, k2, 1e-12);

        std::vector<double> c1(n * m), c2(n * m);
        ref.rbf_cross_t(X.data(), n, Q.data(), m, d, inv2ls.data(), 1.7, c1.data());
        alt.rbf_cross_t(X.data(), n, Q.data(), m, d, inv2ls.data(), 1.7, c2.data());
        check_all_close(c1, c2, 1e-12);
    }

    // factor / solves on SPD systems, including sizes around the trsm_lower_multi
    // row-block boundary (32) and column-tile boundary (8)
    for (std::size_t n : {1u, 2u, 5u, 31u, 32u, 33u, 70u}) {
        auto A = random_spd(rng, n);
        auto L1 = A, L2 = A;
        REQUIRE(ref.cholesky(L1.data(), n));
        REQUIRE(alt.cholesky(L2.data(), n));
        check_all_close(L1, L2, 1e-10);

        auto rhs = random_vec(rng, n);
        auto x1 = rhs, x2 = rhs;
        ref.trsv_lower(L1.data(), n, x1.data());
        alt.trsv_lower(L1.data(), n, x2.data());
        check_all_close(x1, x2, 1e-10);
        ref.trsv_lower_t(L1.data(), n, x1.data());
        alt.trsv_lower_t(L1.data(), n, x2.data());
        check_all_close(x1, x2, 1e-10);

        for (std::size_t m : {1u, 3u, 8u, 13u, 40u}) {
            auto B = random_vec(rng, n * m);
            auto w1 = B, w2 = B;
            ref.trsm_lower_multi(L1.data(), n, w1.data(), m);
            alt.trsm_lower_multi(L1.data(), n, w2.data(), m);
            check_all_close(w1, w2, 1e-9);

            std::vector<double> y1(m, 0.1), y2(m, 0.1);
            auto xv = random_vec(rng, n);
            ref.gemv_t_acc(B.data(), n, m, xv.data(), y1.data());
            alt.gemv_t_acc(B.data(), n, m, xv.data(), y2.data());
            check_all_close(y1, y2, 1e-11);

            std::vector<double> s1(m, 0.0), s2(m, 0.0);
            ref.colsq_acc(B.data(), n, m, s1.data());
            alt.colsq_acc(B.data(), n, m, s2.data());
            check_all_close(s1, s2, 1e-11);
        }
    }
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar cholesky round-trips L L^T") {
    Rng rng(7);
    const std::size_t n = 12;
    auto A = random_spd(rng, n);
    auto L = A;
    REQUIRE(kernels::scalar_ops().cholesky(L.data(), n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += L[i * n + k] * L[j * n + k];
            CHECK(close_rel(s, A[i * n + j], 1e-10));
        }
        for (std::size_t j = i + 1; j < n; ++j) CHECK(L[i * n + j] == 0.0);
    }
}

TEST_CASE("scalar cholesky rejects an indefinite matrix") {
    std::vector<double> A = {1.0, 2.0, 2.0, 1.0};  // eigenvalues 3, -1
    CHECK_FALSE(kernels::scalar_ops().cholesky(A.data(), 2));
}

TEST_CASE("scalar trsm solves against direct substitution") {
    Rng rng(11);
    const std::size_t n = 9, m = 5;
    auto A = random_spd(rng, n);
    auto L = A;
    REQUIRE(kernels::scalar_ops().cholesky(L.data(), n));
    auto B = random_vec(rng, n * m);
    auto W = B;
    kernels::scalar_ops().trsm_lower_multi(L.data(), n, W.data(), m);
    // L W must reproduce B
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < m; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k <= i; ++k) s += L[i * n + k] * W[k * m + c];
            CHECK(close_rel(s, B[i * m + c], 1e-10));
        }
}

TEST_CASE("avx2 variant matches the scalar reference") {
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 not available on this host; skipping");
        return;
    }
    const Ops* avx2 = kernels::ops_by_name("avx2");
    REQUIRE(avx2 != nullptr);
    check_variant_equivalence(kernels::scalar_ops(), *avx2);
}

TEST_CASE("avx2 exp stays within 4 ulp of libm over the kernel input range") {
    if (!kernels::avx2_available()) return;
    const Ops& avx2 = *kernels::ops_by_name("avx2");
    std::vector<double> xs;
    for (double x = -700.0; x <= 700.0; x += 0.37) xs.push_back(x);
    xs.insert(xs.end(), {-746.0, -709.0, -708.3964186, 0.0, 1e-300, 709.78, 710.0, 800.0});
    auto got = xs;
    avx2.exp_inplace(got.data(), got.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double expect = std::exp(xs[i]);
        INFO("x = ", xs[i]);
        if (expect == 0.0 || std::isinf(expect)) {
            CHECK(got[i] == expect);
        } else if (expect < std::numeric_limits<double>::min()) {
            // subnormal range: a couple of grid steps of slack for the
            // split-scale double rounding
            CHECK(std::abs(got[i] - expect) <= 1e-322);
        } else {
            CHECK(std::abs(got[i] - expect) <=
                  4.0 * std::abs(expect) * std::numeric_limits<double>::epsilon());
        }
    }
}

TEST_CASE("active backend dispatch is consistent") {
    const Ops& active = kernels::active_ops();
    CHECK((std::string(active.name) == "scalar" || std::string(active.name) == "avx2"));
    CHECK(kernels::ops_by_name("scalar") == &kernels::scalar_ops());
    CHECK(kernels::ops_by_name("nope") == nullptr);
}

}  // TEST_SUITE(kernels)
