#include "riskbudget/models.hpp"

#include "loss_law.hpp"
#include "riskbudget/errors.hpp"
#include "riskbudget/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <thread>

namespace riskbudget {
namespace {

constexpr double kParamTolerance = 1e-12;

Matrix checked_factor(const Matrix& m, Eigen::Index d, std::size_t k, const char* what) {
    if (m.rows() != d || m.cols() != d) {
        throw InputError(std::string(what) + " " + std::to_string(k) + ": expected " +
                         std::to_string(d) + "x" + std::to_string(d) + " matrix");
    }
    if (!m.allFinite()) {
        throw InputError(std::string(what) + " " + std::to_string(k) + ": non-finite entry");
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kParamTolerance) {
        throw InputError(std::string(what) + " " + std::to_string(k) + ": not symmetric");
    }
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw InputError(std::string(what) + " " + std::to_string(k) +
                         ": not positive-definite (Cholesky failed)");
    }
    return llt.matrixL();
}

void check_weights(const std::vector<double>& w) {
    if (w.empty()) {
        throw InputError("mixture: at least one component required");
    }
    double s = 0;
    for (double p : w) {
        if (!std::isfinite(p) || p <= 0.0) {
            throw InputError("mixture: component weights must be strictly positive");
        }
        s += p;
    }
    if (std::abs(s - 1.0) > kParamTolerance) {
        throw InputError("mixture: component weights must sum to 1, got " + std::to_string(s));
    }
}

double log_sum_exp(const Vector& v) {
    const double m = v.maxCoeff();
    return m + std::log((v.array() - m).exp().sum());
}

double half_log_det(const Matrix& lower) {
    return lower.diagonal().array().log().sum();
}

// Log-density of a location-scale elliptical component at x, given the lower
// Cholesky factor of its scale matrix. nu = inf selects the normal law.
double component_log_density(const Vector& x, const Vector& mu, const Matrix& factor, double nu) {
    const auto d = static_cast<double>(x.size());
    const Vector z = factor.triangularView<Eigen::Lower>().solve(x - mu);
    const double delta = z.squaredNorm();
    if (std::isinf(nu)) {
        return -0.5 * d * std::log(2.0 * std::numbers::pi) - half_log_det(factor) - 0.5 * delta;
    }
    return std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
           0.5 * d * std::log(nu * std::numbers::pi) - half_log_det(factor) -
           0.5 * (nu + d) * std::log1p(delta / nu);
}

template <class DrawRow>
RowMatrix sample_in_blocks(Eigen::Index n, Eigen::Index d, std::uint64_t seed, unsigned jobs,
                           DrawRow draw_row) {
    if (n < 1) {
        throw InputError("sample: n must be at least 1");
    }
    RowMatrix out(n, d);
    const Eigen::Index blocks = (n + kSampleBlockRows - 1) / kSampleBlockRows;
    auto run = [&](unsigned worker, unsigned stride) {
        for (Eigen::Index b = worker; b < blocks; b += stride) {
            Rng rng(derive_seed(seed, Stream::sample, static_cast<std::uint64_t>(b)));
            const Eigen::Index lo = b * kSampleBlockRows;
            const Eigen::Index hi = std::min(n, lo + kSampleBlockRows);
            draw_row(rng, out, lo, hi);
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(blocks)));
    if (jobs == 1) {
        run(0, 1);
    } else {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < jobs; ++w) {
            workers.emplace_back(run, w, jobs);
        }
    }
    return out;
}

std::size_t pick_component(double u, const std::vector<double>& cumulative) {
    for (std::size_t k = 0; k + 1 < cumulative.size(); ++k) {
        if (u < cumulative[k]) {
            return k;
        }
    }
    return cumulative.size() - 1;
}

}  // namespace

// StudentTMixture -------------------------------------------------------------

StudentTMixture::StudentTMixture(std::vector<Component> components)
    : components_(std::move(components)) {
    std::vector<double> w;
    for (const auto& c : components_) {
        w.push_back(c.weight);
    }
    check_weights(w);
    dim_ = components_.front().location.size();
    if (dim_ < 1) {
        throw InputError("tmix: dimension must be at least 1");
    }
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const auto& c = components_[k];
        if (c.location.size() != dim_ || !c.location.allFinite()) {
            throw InputError("tmix: location " + std::to_string(k) + " has wrong size or non-finite entries");
        }
        if (!(c.nu > 1.0) || !std::isfinite(c.nu)) {
            throw InputError("tmix: degrees of freedom must be finite and > 1 (component " +
                             std::to_string(k) + ")");
        }
        factors_.push_back(checked_factor(c.scale, dim_, k, "tmix scale"));
    }
}

Vector StudentTMixture::mean() const {
    Vector m = Vector::Zero(dim_);
    for (const auto& c : components_) {
        m += c.weight * c.location;
    }
    return m;
}

Matrix StudentTMixture::covariance() const {
    const Vector m = mean();
    Matrix cov = Matrix::Zero(dim_, dim_);
    for (const auto& c : components_) {
        if (!(c.nu > 2.0)) {
            throw InputError("tmix: covariance requires nu > 2 in every component");
        }
        const Vector dm = c.location - m;
        cov += c.weight * (c.nu / (c.nu - 2.0) * c.scale + dm * dm.transpose());
    }
    return cov;
}

double StudentTMixture::log_density(const Vector& x) const {
    Vector terms(static_cast<Eigen::Index>(components_.size()));
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const auto& c = components_[k];
        terms[static_cast<Eigen::Index>(k)] =
            std::log(c.weight) + component_log_density(x, c.location, factors_[k], c.nu);
    }
    return log_sum_exp(terms);
}

double StudentTMixture::mean_log_likelihood(const RowMatrix& X) const {
    double s = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        s += log_density(X.row(i).transpose());
    }
    return s / static_cast<double>(X.rows());
}

// GaussianMixture -------------------------------------------------------------

GaussianMixture::GaussianMixture(std::vector<Component> components)
    : components_(std::move(components)) {
    std::vector<double> w;
    for (const auto& c : components_) {
        w.push_back(c.weight);
    }
    check_weights(w);
    dim_ = components_.front().location.size();
    if (dim_ < 1) {
        throw InputError("gmix: dimension must be at least 1");
    }
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const auto& c = components_[k];
        if (c.location.size() != dim_ || !c.location.allFinite()) {
            throw InputError("gmix: location " + std::to_string(k) + " has wrong size or non-finite entries");
        }
        factors_.push_back(checked_factor(c.covariance, dim_, k, "gmix covariance"));
    }
}

Vector GaussianMixture::mean() const {
    Vector m = Vector::Zero(dim_);
    for (const auto& c : components_) {
        m += c.weight * c.location;
    }
    return m;
}

Matrix GaussianMixture::covariance() const {
    const Vector m = mean();
    Matrix cov = Matrix::Zero(dim_, dim_);
    for (const auto& c : components_) {
        const Vector dm = c.location - m;
        cov += c.weight * (c.covariance + dm * dm.transpose());
    }
    return cov;
}

double GaussianMixture::log_density(const Vector& x) const {
    Vector terms(static_cast<Eigen::Index>(components_.size()));
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const auto& c = components_[k];
        terms[static_cast<Eigen::Index>(k)] =
            std::log(c.weight) + component_log_density(x, c.location, factors_[k],
                                                       std::numeric_limits<double>::infinity());
    }
    return log_sum_exp(terms);
}

double GaussianMixture::mean_log_likelihood(const RowMatrix& X) const {
    double s = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        s += log_density(X.row(i).transpose());
    }
    return s / static_cast<double>(X.rows());
}

Eigen::Index dimension(const ReturnModel& model) {
    return std::visit([](const auto& m) { return m.dimension(); }, model);
}

Matrix covariance(const ReturnModel& model) {
    return std::visit([](const auto& m) { return m.covariance(); }, model);
}

// ReturnSample ----------------------------------------------------------------

ReturnSample::ReturnSample(RowMatrix data, std::optional<SampleProvenance> provenance)
    : data_(std::move(data)), provenance_(std::move(provenance)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
        throw InputError("sample: need at least one row and one column");
    }
    if (!data_.allFinite()) {
        throw InputError("sample: all returns must be finite");
    }
}

ReturnSample ReturnSample::scaled(double lambda) const {
    return ReturnSample(data_ * lambda, provenance_);
}

// Sampling --------------------------------------------------------------------

ReturnSample sample_tmix(const StudentTMixture& model, Eigen::Index n, std::uint64_t seed,
                         unsigned jobs) {
    const Eigen::Index d = model.dimension();
    std::vector<double> cumulative;
    double acc = 0;
    for (const auto& c : model.components()) {
        acc += c.weight;
        cumulative.push_back(acc);
    }
    auto draw = [&](Rng& rng, RowMatrix& out, Eigen::Index lo, Eigen::Index hi) {
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<std::chi_squared_distribution<double>> chi2;
        for (const auto& c : model.components()) {
            chi2.emplace_back(c.nu);
        }
        Vector z(d);
        for (Eigen::Index i = lo; i < hi; ++i) {
            const std::size_t k = pick_component(uniform(rng), cumulative);
            for (Eigen::Index j = 0; j < d; ++j) {
                z[j] = normal(rng);
            }
            const double nu = model.components()[k].nu;
            const double mix = std::sqrt(nu / chi2[k](rng));
            const Vector shock = model.scale_factor(k).triangularView<Eigen::Lower>() * z;
            out.row(i) = (model.components()[k].location + mix * shock).transpose();
        }
    };
    return ReturnSample(sample_in_blocks(n, d, seed, jobs, draw), SampleProvenance{seed, "tmix"});
}

ReturnSample sample_gmix(const GaussianMixture& model, Eigen::Index n, std::uint64_t seed,
                         unsigned jobs) {
    const Eigen::Index d = model.dimension();
    std::vector<double> cumulative;
    double acc = 0;
    for (const auto& c : model.components()) {
        acc += c.weight;
        cumulative.push_back(acc);
    }
    auto draw = [&](Rng& rng, RowMatrix& out, Eigen::Index lo, Eigen::Index hi) {
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector z(d);
        for (Eigen::Index i = lo; i < hi; ++i) {
            const std::size_t k = pick_component(uniform(rng), cumulative);
            for (Eigen::Index j = 0; j < d; ++j) {
                z[j] = normal(rng);
            }
            const Vector shock = model.covariance_factor(k).triangularView<Eigen::Lower>() * z;
            out.row(i) = (model.components()[k].location + shock).transpose();
        }
    };
    return ReturnSample(sample_in_blocks(n, d, seed, jobs, draw), SampleProvenance{seed, "gmix"});
}

ReturnSample sample_model(const ReturnModel& model, Eigen::Index n, std::uint64_t seed,
                          unsigned jobs) {
    return std::visit(
        [&](const auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, StudentTMixture>) {
                return sample_tmix(m, n, seed, jobs);
            } else {
                return sample_gmix(m, n, seed, jobs);
            }
        },
        model);
}

// Loss distribution -------------------------------------------------------------

double loss_cdf_tmix(const StudentTMixture& model, const RawAllocation& y, double z) {
    if (y.size() != model.dimension()) {
        throw InputError("loss_cdf_tmix: allocation dimension mismatch");
    }
    if (std::isinf(z)) {
        return z > 0 ? 1.0 : 0.0;
    }
    return detail::LossMixture(model, y.values()).cdf(z);
}

double loss_pdf_tmix(const StudentTMixture& model, const RawAllocation& y, double z) {
    if (y.size() != model.dimension()) {
        throw InputError("loss_pdf_tmix: allocation dimension mismatch");
    }
    if (std::isinf(z)) {
        return 0.0;
    }
    return detail::LossMixture(model, y.values()).pdf(z);
}

}  // namespace riskbudget
