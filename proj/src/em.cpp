#include "riskbudget/errors.hpp"
#include "riskbudget/models.hpp"
#include "riskbudget/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace riskbudget {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct WorkingComponent {
    double weight = 0;
    Vector mu;
    Matrix scale;
    double nu = kInf;  // inf: Gaussian component
};

// Cholesky with the ridge guard: on failure add 1e-10 * trace / d to the
// diagonal, repeatedly scaled up, before giving up.
Matrix guarded_factor(Matrix& m) {
    m = 0.5 * (m + m.transpose());
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    const double d = static_cast<double>(m.rows());
    double ridge = 1e-10 * std::max(m.trace(), std::numeric_limits<double>::min()) / d;
    for (int attempt = 0; attempt < 12; ++attempt, ridge *= 10.0) {
        Matrix r = m;
        r.diagonal().array() += ridge;
        llt.compute(r);
        if (llt.info() == Eigen::Success) {
            m = r;
            return llt.matrixL();
        }
    }
    throw NumericError("EM: scatter matrix singular even after regularization");
}

// k-means++ seeding plus a few Lloyd passes on standardized data; returns
// the hard cluster label of each row.
std::vector<std::size_t> kmeans_labels(const RowMatrix& X, std::size_t k, const EMConfig& config) {
    const Eigen::Index n = X.rows();
    const Vector mean = X.colwise().mean().transpose();
    Vector sd = ((X.rowwise() - mean.transpose()).array().square().colwise().sum() /
                 static_cast<double>(n))
                    .sqrt()
                    .transpose();
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
        if (!(sd[j] > 0)) {
            sd[j] = 1.0;
        }
    }
    const Matrix Z = (X.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();

    Rng rng(derive_seed(config.seed, Stream::em_init));
    std::vector<Vector> centers;
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    centers.push_back(Z.row(first(rng)).transpose());
    Vector dist2 = (Z.rowwise() - centers.back().transpose()).rowwise().squaredNorm();
    while (centers.size() < k) {
        const double total = dist2.sum();
        Eigen::Index pick = 0;
        if (total > 0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            for (pick = 0; pick < n - 1; ++pick) {
                target -= dist2[pick];
                if (target <= 0) {
                    break;
                }
            }
        } else {
            pick = first(rng);
        }
        centers.push_back(Z.row(pick).transpose());
        dist2 = dist2.cwiseMin((Z.rowwise() - centers.back().transpose()).rowwise().squaredNorm());
    }

    std::vector<std::size_t> labels(static_cast<std::size_t>(n), 0);
    for (int it = 0; it <= config.kmeans_iterations; ++it) {
        Matrix d2(n, static_cast<Eigen::Index>(k));
        for (std::size_t c = 0; c < k; ++c) {
            d2.col(static_cast<Eigen::Index>(c)) =
                (Z.rowwise() - centers[c].transpose()).rowwise().squaredNorm();
        }
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            d2.row(i).minCoeff(&best);
            if (labels[static_cast<std::size_t>(i)] != static_cast<std::size_t>(best)) {
                labels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
                changed = true;
            }
        }
        if (it > 0 && !changed) {
            break;
        }
        std::vector<Vector> sums(k, Vector::Zero(Z.cols()));
        std::vector<double> counts(k, 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums[labels[static_cast<std::size_t>(i)]] += Z.row(i).transpose();
            counts[labels[static_cast<std::size_t>(i)]] += 1.0;
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centers[c] = sums[c] / counts[c];
            }
        }
    }
    return labels;
}

std::vector<WorkingComponent> initial_components(const RowMatrix& X, std::size_t k,
                                                 const std::vector<double>& nu,
                                                 const EMConfig& config) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const auto labels = kmeans_labels(X, k, config);
    const Vector global_mean = X.colwise().mean().transpose();
    const Matrix centered = X.rowwise() - global_mean.transpose();
    const Matrix global_cov = centered.transpose() * centered / static_cast<double>(n);

    std::vector<WorkingComponent> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (labels[static_cast<std::size_t>(i)] == c) {
                rows.push_back(i);
            }
        }
        auto& w = out[c];
        w.nu = nu[c];
        const auto m = static_cast<Eigen::Index>(rows.size());
        if (m > d) {
            Matrix sub(m, d);
            for (Eigen::Index r = 0; r < m; ++r) {
                sub.row(r) = X.row(rows[static_cast<std::size_t>(r)]);
            }
            w.mu = sub.colwise().mean().transpose();
            const Matrix sc = sub.rowwise() - w.mu.transpose();
            w.scale = sc.transpose() * sc / static_cast<double>(m);
            w.weight = static_cast<double>(m) / static_cast<double>(n);
        } else {
            w.mu = global_mean;
            w.scale = global_cov;
            w.weight = std::max<double>(static_cast<double>(m), 1.0) / static_cast<double>(n);
        }
        if (std::isfinite(w.nu) && w.nu > 2.0) {
            w.scale *= (w.nu - 2.0) / w.nu;
        }
    }
    double total = 0;
    for (const auto& w : out) {
        total += w.weight;
    }
    for (auto& w : out) {
        w.weight /= total;
    }
    return out;
}

template <class Model, class Build>
EMFit<Model> run_em(const ReturnSample& sample, std::size_t k, const std::vector<double>& nu,
                    const EMConfig& config, Build build) {
    const RowMatrix& X = sample.data();
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (k < 1) {
        throw InputError("EM: at least one component required");
    }
    if (n <= d * static_cast<Eigen::Index>(k)) {
        throw InputError("EM: need more than d * N observations (n = " + std::to_string(n) + ")");
    }
    if (config.max_iterations < 1 || !(config.tolerance > 0)) {
        throw InputError("EM: max_iterations must be >= 1 and tolerance > 0");
    }

    auto comps = initial_components(X, k, nu, config);
    const auto K = static_cast<Eigen::Index>(k);
    Matrix logp(n, K);
    Matrix weight_u(n, K);  // u_ik; 1 for Gaussian components
    std::vector<double> trace;
    bool converged = false;
    int iterations = 0;

    for (int it = 0; it < config.max_iterations; ++it) {
        // E-step
        for (Eigen::Index c = 0; c < K; ++c) {
            auto& w = comps[static_cast<std::size_t>(c)];
            const Matrix L = guarded_factor(w.scale);
            const Matrix centered = (X.rowwise() - w.mu.transpose()).transpose();
            const Matrix z = L.triangularView<Eigen::Lower>().solve(centered);
            const Vector delta = z.colwise().squaredNorm().transpose();
            const double half_log_det = L.diagonal().array().log().sum();
            const double dd = static_cast<double>(d);
            if (std::isinf(w.nu)) {
                const double base = std::log(w.weight) - 0.5 * dd * std::log(2.0 * std::numbers::pi) -
                                    half_log_det;
                logp.col(c) = (base - 0.5 * delta.array()).matrix();
                weight_u.col(c).setOnes();
            } else {
                const double base = std::log(w.weight) + std::lgamma(0.5 * (w.nu + dd)) -
                                    std::lgamma(0.5 * w.nu) -
                                    0.5 * dd * std::log(w.nu * std::numbers::pi) - half_log_det;
                logp.col(c) =
                    (base - 0.5 * (w.nu + dd) * (delta.array() / w.nu).log1p()).matrix();
                weight_u.col(c) = ((w.nu + dd) / (w.nu + delta.array())).matrix();
            }
        }
        const Vector row_max = logp.rowwise().maxCoeff();
        Matrix tau = (logp.colwise() - row_max).array().exp().matrix();
        const Vector row_sum = tau.rowwise().sum();
        const double ll = (row_max.array() + row_sum.array().log()).sum();
        if (!std::isfinite(ll)) {
            throw NumericError("EM: non-finite log-likelihood at iteration " + std::to_string(it));
        }
        tau = tau.array().colwise() / row_sum.array();
        trace.push_back(ll);
        iterations = it;
        if (trace.size() >= 2) {
            const double prev = trace[trace.size() - 2];
            if (std::abs(ll - prev) <= config.tolerance * std::abs(prev)) {
                converged = true;
                break;
            }
        }
        if (it + 1 == config.max_iterations) {
            break;
        }

        // M-step
        for (Eigen::Index c = 0; c < K; ++c) {
            auto& w = comps[static_cast<std::size_t>(c)];
            const double tau_sum = tau.col(c).sum();
            if (!(tau_sum > 0)) {
                throw NumericError("EM: component " + std::to_string(c) + " lost all responsibility");
            }
            const Vector tu = tau.col(c).cwiseProduct(weight_u.col(c));
            const double tu_sum = tu.sum();
            w.weight = tau_sum / static_cast<double>(n);
            w.mu = (X.transpose() * tu) / tu_sum;
            const Matrix centered = X.rowwise() - w.mu.transpose();
            w.scale = centered.transpose() * (centered.array().colwise() * tu.array()).matrix() /
                      tau_sum;
        }
        double total = 0;
        for (const auto& w : comps) {
            total += w.weight;
        }
        for (auto& w : comps) {
            w.weight /= total;
        }
    }

    for (auto& w : comps) {
        guarded_factor(w.scale);
    }
    return EMFit<Model>{build(comps), std::move(trace), iterations + 1, converged};
}

}  // namespace

EMFit<StudentTMixture> em_fit_tmix(const ReturnSample& sample, std::size_t components,
                                   const std::vector<double>& nu_fixed, const EMConfig& config) {
    if (nu_fixed.size() != components) {
        throw InputError("em_fit_tmix: need one degrees-of-freedom value per component");
    }
    for (double nu : nu_fixed) {
        if (!(nu > 1.0) || !std::isfinite(nu)) {
            throw InputError("em_fit_tmix: degrees of freedom must be finite and > 1");
        }
    }
    return run_em<StudentTMixture>(sample, components, nu_fixed, config,
                                   [](const std::vector<WorkingComponent>& comps) {
                                       std::vector<StudentTMixture::Component> out;
                                       for (const auto& w : comps) {
                                           out.push_back({w.weight, w.mu, w.scale, w.nu});
                                       }
                                       return StudentTMixture(std::move(out));
                                   });
}

EMFit<GaussianMixture> em_fit_gmix(const ReturnSample& sample, std::size_t components,
                                   const EMConfig& config) {
    return run_em<GaussianMixture>(sample, components, std::vector<double>(components, kInf),
                                   config, [](const std::vector<WorkingComponent>& comps) {
                                       std::vector<GaussianMixture::Component> out;
                                       for (const auto& w : comps) {
                                           out.push_back({w.weight, w.mu, w.scale});
                                       }
                                       return GaussianMixture(std::move(out));
                                   });
}

}  // namespace riskbudget
