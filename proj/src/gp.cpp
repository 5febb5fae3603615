#include "blindspot/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "blindspot/errors.hpp"
#include "blindspot/kernels/kernels.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

namespace {

constexpr double kJitterBase = 1e-8;  // relative to signal variance
constexpr double kJitterMax = 1e-2;

std::vector<double> make_inv2ls(const GpHyperparams& h, std::size_t d) {
    if (h.lengthscales.size() != d)
        throw DimensionMismatch("hyperparams have " + std::to_string(h.lengthscales.size()) +
                                " lengthscales, data has dimension " + std::to_string(d));
    std::vector<double> inv2ls(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double ls = h.lengthscales[k];
        if (!(ls > 0.0)) throw ConfigError("lengthscales must be positive");
        inv2ls[k] = 0.5 / (ls * ls);
    }
    return inv2ls;
}

void validate_unit_rows(const Matrix& X) {
    for (double v : X.data)
        if (!(v >= 0.0 && v <= 1.0))
            throw OutOfUnitCube("GP inputs must lie in the unit cube; saw " + std::to_string(v));
}

// Factorizes K + (noise + jitter) I, escalating jitter until the Cholesky
// succeeds. Returns the jitter used.
double factorize(const Matrix& K, double noise, double sf2, Matrix& L) {
    const std::size_t n = K.rows;
    const auto& ops = kernels::active_ops();
    for (double jitter = kJitterBase * sf2; jitter <= kJitterMax * sf2 * (1.0 + 1e-12);
         jitter *= 10.0) {
        L = K;
        for (std::size_t i = 0; i < n; ++i) L.at(i, i) += noise + jitter;
        if (ops.cholesky(L.data.data(), n)) return jitter;
    }
    throw CholeskyFailure("kernel matrix not positive definite after jitter escalation");
}

}  // namespace

double rbf_kernel(std::span<const double> a, std::span<const double> b, const GpHyperparams& h) {
    if (a.size() != b.size() || a.size() != h.lengthscales.size())
        throw DimensionMismatch("rbf_kernel: mismatched vector/lengthscale dimensions");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = (a[k] - b[k]) / h.lengthscales[k];
        s += diff * diff;
    }
    return h.signal_variance * std::exp(-0.5 * s);
}

GpModel GpModel::fit(Matrix X, std::vector<double> y, GpHyperparams h) {
    if (X.rows != y.size()) throw DimensionMismatch("fit: X rows != y length");
    if (y.empty()) throw ConfigError("fit: need at least one observation");
    validate_unit_rows(X);

    GpModel m;
    m.inv2ls_ = make_inv2ls(h, X.cols);
    m.X_ = std::move(X);
    m.y_ = std::move(y);
    m.h_ = std::move(h);

    const std::size_t n = m.y_.size();
    const auto& ops = kernels::active_ops();
    Matrix K(n, n);
    ops.rbf_gram(m.X_.data.data(), n, m.X_.cols, m.inv2ls_.data(), m.h_.signal_variance,
                 K.data.data());
    m.jitter_ = factorize(K, m.h_.noise_variance, m.h_.signal_variance, m.L_);
    m.refresh_alpha();
    return m;
}

void GpModel::refresh_alpha() {
    const std::size_t n = y_.size();
    y_mean_ = 0.0;
    for (double v : y_) y_mean_ += v;
    y_mean_ /= static_cast<double>(n);
    alpha_.resize(n);
    for (std::size_t i = 0; i < n; ++i) alpha_[i] = y_[i] - y_mean_;
    const auto& ops = kernels::active_ops();
    ops.trsv_lower(L_.data.data(), n, alpha_.data());
    ops.trsv_lower_t(L_.data.data(), n, alpha_.data());
}

GpModel GpModel::appended(std::span<const double> x_new, double y_new) const {
    if (x_new.size() != dim()) throw DimensionMismatch("appended: wrong point dimension");
    for (double v : x_new)
        if (!(v >= 0.0 && v <= 1.0)) throw OutOfUnitCube("appended: point outside unit cube");

    const std::size_t n = size();
    const auto& ops = kernels::active_ops();

    std::vector<double> v(n);
    ops.rbf_cross_t(X_.data.data(), n, x_new.data(), 1, dim(), inv2ls_.data(), h_.signal_variance,
                    v.data());
    ops.trsv_lower(L_.data.data(), n, v.data());
    const double diag2 =
        h_.signal_variance + (h_.noise_variance + jitter_) - ops.sum_sq(v.data(), n);

    Matrix X2 = X_;
    X2.append_row(x_new.data());
    std::vector<double> y2 = y_;
    y2.push_back(y_new);

    if (!(diag2 > 0.0) || !std::isfinite(diag2)) {
        // Degenerate bordered update (e.g. duplicate input at low noise):
        // refit from scratch so the jitter schedule can escalate.
        return fit(std::move(X2), std::move(y2), h_);
    }

    GpModel m;
    m.X_ = std::move(X2);
    m.y_ = std::move(y2);
    m.h_ = h_;
    m.inv2ls_ = inv2ls_;
    m.jitter_ = jitter_;
    m.L_ = Matrix(n + 1, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double* src = L_.row(i);
        std::copy(src, src + n, m.L_.row(i));
    }
    std::copy(v.begin(), v.end(), m.L_.row(n));
    m.L_.at(n, n) = std::sqrt(diag2);
    m.refresh_alpha();
    return m;
}

void GpModel::posterior(std::span<const double> q, double& mean, double& variance) const {
    if (q.size() != dim()) throw DimensionMismatch("posterior: wrong query dimension");
    const std::size_t n = size();
    const auto& ops = kernels::active_ops();
    std::vector<double> kq(n);
    ops.rbf_cross_t(X_.data.data(), n, q.data(), 1, dim(), inv2ls_.data(), h_.signal_variance,
                    kq.data());
    mean = y_mean_ + ops.dot(kq.data(), alpha_.data(), n);
    ops.trsv_lower(L_.data.data(), n, kq.data());
    variance = std::max(h_.signal_variance - ops.sum_sq(kq.data(), n), 0.0);
}

std::size_t GpModel::posterior_batch(const double* Q, std::size_t m, double* means,
                                     double* variances) const {
    const std::size_t n = size();
    const auto& ops = kernels::active_ops();
    std::vector<double> Kt(n * m);
    ops.rbf_cross_t(X_.data.data(), n, Q, m, dim(), inv2ls_.data(), h_.signal_variance,
                    Kt.data());

    std::fill(means, means + m, y_mean_);
    ops.gemv_t_acc(Kt.data(), n, m, alpha_.data(), means);

    ops.trsm_lower_multi(L_.data.data(), n, Kt.data(), m);
    std::fill(variances, variances + m, 0.0);
    ops.colsq_acc(Kt.data(), n, m, variances);

    std::size_t clamps = 0;
    for (std::size_t c = 0; c < m; ++c) {
        const double var = h_.signal_variance - variances[c];
        if (var < 0.0) {
            variances[c] = 0.0;
            ++clamps;
        } else {
            variances[c] = var;
        }
    }
    return clamps;
}

double log_marginal_likelihood(const Matrix& X, std::span<const double> y,
                               const GpHyperparams& h) {
    if (X.rows != y.size()) throw DimensionMismatch("log_marginal_likelihood: X rows != y length");
    if (y.empty()) throw ConfigError("log_marginal_likelihood: empty data");
    const std::size_t n = y.size();
    const auto& ops = kernels::active_ops();
    const std::vector<double> inv2ls = make_inv2ls(h, X.cols);

    Matrix K(n, n);
    ops.rbf_gram(X.data.data(), n, X.cols, inv2ls.data(), h.signal_variance, K.data.data());
    Matrix L;
    factorize(K, h.noise_variance, h.signal_variance, L);

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - mean;
    ops.trsv_lower(L.data.data(), n, r.data());

    double logdet_half = 0.0;
    for (std::size_t i = 0; i < n; ++i) logdet_half += std::log(L.at(i, i));

    return -0.5 * ops.sum_sq(r.data(), n) - logdet_half -
           0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

namespace {

struct LogBox {
    std::vector<double> lo, hi;
};

GpHyperparams point_to_hyperparams(std::span<const double> p, bool ard, std::size_t d) {
    GpHyperparams h;
    if (ard) {
        h.lengthscales.resize(d);
        for (std::size_t k = 0; k < d; ++k) h.lengthscales[k] = std::exp(p[k]);
    } else {
        h.lengthscales.assign(d, std::exp(p[0]));
    }
    h.signal_variance = std::exp(p[p.size() - 2]);
    h.noise_variance = std::exp(p[p.size() - 1]);
    return h;
}

}  // namespace

GpHyperparams fit_hyperparams(const Matrix& X, std::span<const double> y, std::uint64_t rng_seed,
                              const HyperparamFitOptions& opts) {
    if (y.size() < 2) throw ConfigError("fit_hyperparams: need at least two observations");
    if (X.rows != y.size()) throw DimensionMismatch("fit_hyperparams: X rows != y length");
    const std::size_t d = X.cols;
    const std::size_t p_ls = opts.ard ? d : 1;
    const std::size_t p_dim = p_ls + 2;

    LogBox box;
    box.lo.resize(p_dim);
    box.hi.resize(p_dim);
    for (std::size_t k = 0; k < p_ls; ++k) {
        box.lo[k] = std::log(opts.bounds.lengthscale_lo);
        box.hi[k] = std::log(opts.bounds.lengthscale_hi);
    }
    box.lo[p_ls] = std::log(opts.bounds.signal_variance_lo);
    box.hi[p_ls] = std::log(opts.bounds.signal_variance_hi);
    box.lo[p_ls + 1] = std::log(opts.bounds.noise_variance_lo);
    box.hi[p_ls + 1] = std::log(opts.bounds.noise_variance_hi);

    const auto objective = [&](std::span<const double> p) -> double {
        try {
            return log_marginal_likelihood(X, y, point_to_hyperparams(p, opts.ard, d));
        } catch (const CholeskyFailure&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    // Latin-hypercube starts over the log-bounds box.
    const int n_starts = std::max(opts.starts, 1);
    Rng rng(rng_seed);
    std::vector<std::vector<double>> starts(n_starts, std::vector<double>(p_dim));
    std::vector<std::size_t> perm(n_starts);
    for (std::size_t k = 0; k < p_dim; ++k) {
        for (int i = 0; i < n_starts; ++i) perm[i] = i;
        for (std::size_t i = n_starts; i-- > 1;) std::swap(perm[i], perm[rng.index(i + 1)]);
        for (int i = 0; i < n_starts; ++i) {
            const double u = (static_cast<double>(perm[i]) + rng.unit()) / n_starts;
            starts[i][k] = box.lo[k] + u * (box.hi[k] - box.lo[k]);
        }
    }
    if (opts.warm_start) {
        const GpHyperparams& w = *opts.warm_start;
        for (std::size_t k = 0; k < p_ls; ++k)
            starts[0][k] = std::clamp(std::log(w.lengthscales[opts.ard ? k : 0]), box.lo[k],
                                      box.hi[k]);
        starts[0][p_ls] = std::clamp(std::log(w.signal_variance), box.lo[p_ls], box.hi[p_ls]);
        starts[0][p_ls + 1] =
            std::clamp(std::log(w.noise_variance), box.lo[p_ls + 1], box.hi[p_ls + 1]);
    }

    double best_val = -std::numeric_limits<double>::infinity();
    std::vector<double> best_point;

    for (const auto& start : starts) {
        std::vector<double> cur = start;
        int evals = 0;
        double f_cur = objective(cur);
        ++evals;

        std::vector<double> step(p_dim);
        for (std::size_t k = 0; k < p_dim; ++k) step[k] = (box.hi[k] - box.lo[k]) / 8.0;

        while (evals < opts.max_evals_per_start) {
            bool improved = false;
            for (std::size_t k = 0; k < p_dim && evals < opts.max_evals_per_start; ++k) {
                for (const double dir : {+1.0, -1.0}) {
                    const double moved = std::clamp(cur[k] + dir * step[k], box.lo[k], box.hi[k]);
                    if (moved == cur[k]) continue;
                    std::vector<double> cand = cur;
                    cand[k] = moved;
                    const double f = objective(cand);
                    ++evals;
                    if (f > f_cur) {
                        cur = std::move(cand);
                        f_cur = f;
                        improved = true;
                        break;
                    }
                    if (evals >= opts.max_evals_per_start) break;
                }
            }
            if (!improved) {
                double max_step = 0.0;
                for (std::size_t k = 0; k < p_dim; ++k) {
                    step[k] *= 0.5;
                    max_step = std::max(max_step, step[k]);
                }
                if (max_step < 1e-3) break;
            }
        }

        if (f_cur > best_val) {
            best_val = f_cur;
            best_point = cur;
        }
    }

    if (!std::isfinite(best_val))
        throw CholeskyFailure("fit_hyperparams: every start failed to factorize");
    return point_to_hyperparams(best_point, opts.ard, d);
}

}  // namespace blindspot
