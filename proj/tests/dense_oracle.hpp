#pragma once

// Test-only brute-force GP oracle: naive kernel evaluation plus a long
// double Gauss-Jordan inverse of (K + (noise + jitter) I). Shares no code
// with the library's kernel/factorization path.

#include <cmath>
#include <numbers>
#include <vector>

#include "blindspot/gp.hpp"
#include "blindspot/matrix.hpp"

namespace oracle {

struct DensePosterior {
    double mean = 0.0;
    double variance = 0.0;
};

class DenseGp {
  public:
    DenseGp(const blindspot::Matrix& X, const std::vector<double>& y,
            const blindspot::GpHyperparams& h, double jitter)
        : X_(X), h_(h) {
        const std::size_t n = y.size();
        std::vector<long double> A(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                A[i * n + j] = kern(X.row(i), X.row(j));
                if (i == j) A[i * n + j] += static_cast<long double>(h.noise_variance) + jitter;
            }
        inv_ = invert(A, n, log_det_);

        long double mean = 0.0L;
        for (double v : y) mean += v;
        mean /= static_cast<long double>(n);
        y_mean_ = mean;
        resid_.resize(n);
        for (std::size_t i = 0; i < n; ++i) resid_[i] = static_cast<long double>(y[i]) - mean;
        alpha_.assign(n, 0.0L);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) alpha_[i] += inv_[i * n + j] * resid_[j];
    }

    DensePosterior posterior(const double* q) const {
        const std::size_t n = resid_.size();
        std::vector<long double> kq(n);
        for (std::size_t i = 0; i < n; ++i) kq[i] = kern(X_.row(i), q);
        long double mean = y_mean_;
        for (std::size_t i = 0; i < n; ++i) mean += kq[i] * alpha_[i];
        long double quad = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            long double row = 0.0L;
            for (std::size_t j = 0; j < n; ++j) row += inv_[i * n + j] * kq[j];
            quad += kq[i] * row;
        }
        DensePosterior p;
        p.mean = static_cast<double>(mean);
        p.variance = static_cast<double>(static_cast<long double>(h_.signal_variance) - quad);
        if (p.variance < 0.0) p.variance = 0.0;
        return p;
    }

    double log_marginal_likelihood() const {
        const std::size_t n = resid_.size();
        long double quad = 0.0L;
        for (std::size_t i = 0; i < n; ++i) quad += resid_[i] * alpha_[i];
        const long double lml = -0.5L * quad - 0.5L * log_det_ -
                                0.5L * static_cast<long double>(n) *
                                    std::log(2.0L * std::numbers::pi_v<long double>);
        return static_cast<double>(lml);
    }

  private:
    long double kern(const double* a, const double* b) const {
        long double s = 0.0L;
        for (std::size_t k = 0; k < X_.cols; ++k) {
            const long double diff = (static_cast<long double>(a[k]) - b[k]) /
                                     static_cast<long double>(h_.lengthscales[k]);
            s += diff * diff;
        }
        return static_cast<long double>(h_.signal_variance) * std::exp(-0.5L * s);
    }

    static std::vector<long double> invert(std::vector<long double> a, std::size_t n,
                                           long double& log_det) {
        std::vector<long double> inv(n * n, 0.0L);
        for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0L;
        log_det = 0.0L;
        for (std::size_t j = 0; j < n; ++j) {
            const long double pivot = a[j * n + j];
            log_det += std::log(pivot);
            for (std::size_t c = 0; c < n; ++c) {
                a[j * n + c] /= pivot;
                inv[j * n + c] /= pivot;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (i == j) continue;
                const long double f = a[i * n + j];
                if (f == 0.0L) continue;
                for (std::size_t c = 0; c < n; ++c) {
                    a[i * n + c] -= f * a[j * n + c];
                    inv[i * n + c] -= f * inv[j * n + c];
                }
            }
        }
        return inv;
    }

    const blindspot::Matrix& X_;
    blindspot::GpHyperparams h_;
    std::vector<long double> inv_;
    std::vector<long double> resid_;
    std::vector<long double> alpha_;
    long double y_mean_ = 0.0L;
    long double log_det_ = 0.0L;
};

}  // namespace oracle
