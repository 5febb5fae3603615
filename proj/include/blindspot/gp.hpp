#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "blindspot/matrix.hpp"

namespace blindspot {

// ARD RBF kernel hyperparameters, in unit-cube units.
struct GpHyperparams {
    std::vector<double> lengthscales;
    double signal_variance = 1.0;
    double noise_variance = 1e-2;
};

// Box bounds enforced during hyperparameter fitting.
struct GpHyperparamBounds {
    double lengthscale_lo = 0.05;
    double lengthscale_hi = 10.0;
    double signal_variance_lo = 0.01;
    double signal_variance_hi = 4.0;
    double noise_variance_lo = 1e-4;
    double noise_variance_hi = 1.0;
};

// k(a, b) = sf2 * exp(-1/2 sum_k ((a_k - b_k) / ls_k)^2)
double rbf_kernel(std::span<const double> a, std::span<const double> b, const GpHyperparams& h);

// Exact GP regression model. Targets are regressed directly as reals after
// centering by their empirical mean. Immutable after fit; concurrent
// posterior queries are safe.
class GpModel {
  public:
    // Factorizes K + (noise + jitter) I with an escalating jitter schedule
    // (1e-8..1e-2 of signal variance, x10 per retry); throws CholeskyFailure
    // when exhausted. X rows must lie in the unit cube.
    static GpModel fit(Matrix X, std::vector<double> y, GpHyperparams h);

    // Model extended by one observation. Reuses the existing factor via a
    // bordered update, which agrees with a from-scratch refit to roundoff;
    // falls back to a full fit when the new diagonal entry degenerates.
    GpModel appended(std::span<const double> x_new, double y_new) const;

    // Posterior of the latent function at one query point. Variance is
    // clamped at zero when roundoff drives it slightly negative.
    void posterior(std::span<const double> q, double& mean, double& variance) const;

    // Batched posterior over Q (row-major m x d). Returns the number of
    // negative-variance clamps.
    std::size_t posterior_batch(const double* Q, std::size_t m, double* means,
                                double* variances) const;

    std::size_t size() const { return y_.size(); }
    std::size_t dim() const { return X_.cols; }
    const Matrix& inputs() const { return X_; }
    const std::vector<double>& targets() const { return y_; }
    double target_mean() const { return y_mean_; }
    const GpHyperparams& hyperparams() const { return h_; }
    const Matrix& factor() const { return L_; }
    double jitter() const { return jitter_; }

  private:
    GpModel() = default;
    void refresh_alpha();

    Matrix X_;
    std::vector<double> y_;
    double y_mean_ = 0.0;
    GpHyperparams h_;
    std::vector<double> inv2ls_;  // 0.5 / ls^2 per dimension
    double jitter_ = 0.0;
    Matrix L_;
    std::vector<double> alpha_;  // (K + noise I)^-1 (y - mean)
};

// -1/2 r^T A^-1 r - sum log diag(L) - n/2 log(2 pi), r = y - mean(y),
// A = K + (noise + jitter) I. Shares fit's jitter schedule.
double log_marginal_likelihood(const Matrix& X, std::span<const double> y,
                               const GpHyperparams& h);

struct HyperparamFitOptions {
    GpHyperparamBounds bounds;
    bool ard = true;
    int starts = 8;
    int max_evals_per_start = 200;
    // Replaces the first Latin-hypercube start; used for warm refits.
    std::optional<GpHyperparams> warm_start;
};

// Maximizes the log marginal likelihood with multi-start coordinate descent
// in log-hyperparameter space (geometric step halving, bounded evaluation
// budget per start). Deterministic per seed; ties between starts go to the
// lowest start index. Throws CholeskyFailure only if every start fails.
GpHyperparams fit_hyperparams(const Matrix& X, std::span<const double> y, std::uint64_t rng_seed,
                              const HyperparamFitOptions& opts = {});

}  // namespace blindspot
