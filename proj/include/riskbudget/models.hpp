#pragma once

#include "riskbudget/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace riskbudget {

/// Mixture of multivariate Student-t laws t(mu_k, Lambda_k, nu_k).
///
/// Invariants (checked on construction, InputError otherwise): weights
/// strictly positive and summing to 1 within 1e-12, scale matrices symmetric
/// within 1e-12 and positive-definite, nu_k > 1 so that the mean exists.
class StudentTMixture {
public:
    struct Component {
        double weight = 0;
        Vector location;
        Matrix scale;
        double nu = 0;
    };

    explicit StudentTMixture(std::vector<Component> components);

    Eigen::Index dimension() const noexcept { return dim_; }
    std::size_t size() const noexcept { return components_.size(); }
    const std::vector<Component>& components() const noexcept { return components_; }
    const Component& component(std::size_t k) const { return components_.at(k); }

    /// Lower Cholesky factor of the k-th scale matrix.
    const Matrix& scale_factor(std::size_t k) const { return factors_.at(k); }

    Vector mean() const;
    /// Requires every nu_k > 2; throws InputError otherwise.
    Matrix covariance() const;

    double log_density(const Vector& x) const;
    /// Average log-density over the rows of X.
    double mean_log_likelihood(const RowMatrix& X) const;

private:
    Eigen::Index dim_ = 0;
    std::vector<Component> components_;
    std::vector<Matrix> factors_;
};

/// Mixture of multivariate normal laws N(mu_k, Sigma_k).
class GaussianMixture {
public:
    struct Component {
        double weight = 0;
        Vector location;
        Matrix covariance;
    };

    explicit GaussianMixture(std::vector<Component> components);

    Eigen::Index dimension() const noexcept { return dim_; }
    std::size_t size() const noexcept { return components_.size(); }
    const std::vector<Component>& components() const noexcept { return components_; }
    const Component& component(std::size_t k) const { return components_.at(k); }
    const Matrix& covariance_factor(std::size_t k) const { return factors_.at(k); }

    Vector mean() const;
    Matrix covariance() const;

    double log_density(const Vector& x) const;
    double mean_log_likelihood(const RowMatrix& X) const;

private:
    Eigen::Index dim_ = 0;
    std::vector<Component> components_;
    std::vector<Matrix> factors_;
};

using ReturnModel = std::variant<StudentTMixture, GaussianMixture>;

Eigen::Index dimension(const ReturnModel& model);
Matrix covariance(const ReturnModel& model);

struct SampleProvenance {
    std::uint64_t seed = 0;
    std::string model_id;
};

/// n x d matrix of asset returns, one observation per row.
class ReturnSample {
public:
    /// Throws InputError when empty or when any entry is not finite.
    explicit ReturnSample(RowMatrix data, std::optional<SampleProvenance> provenance = {});

    const RowMatrix& data() const noexcept { return data_; }
    Eigen::Index rows() const noexcept { return data_.rows(); }
    Eigen::Index cols() const noexcept { return data_.cols(); }
    const std::optional<SampleProvenance>& provenance() const noexcept { return provenance_; }

    /// New sample with every return multiplied by lambda.
    ReturnSample scaled(double lambda) const;

private:
    RowMatrix data_;
    std::optional<SampleProvenance> provenance_;
};

// Sampling ------------------------------------------------------------------
//
// Rows are generated in fixed-size blocks, each with its own generator seeded
// from (seed, block index); the output is identical for any `jobs` value.

inline constexpr Eigen::Index kSampleBlockRows = 4096;

ReturnSample sample_tmix(const StudentTMixture& model, Eigen::Index n, std::uint64_t seed,
                         unsigned jobs = 1);
ReturnSample sample_gmix(const GaussianMixture& model, Eigen::Index n, std::uint64_t seed,
                         unsigned jobs = 1);
ReturnSample sample_model(const ReturnModel& model, Eigen::Index n, std::uint64_t seed,
                          unsigned jobs = 1);

// Loss distribution of -y'X under a Student-t mixture -----------------------

double loss_cdf_tmix(const StudentTMixture& model, const RawAllocation& y, double z);
double loss_pdf_tmix(const StudentTMixture& model, const RawAllocation& y, double z);

// EM fitting -----------------------------------------------------------------

struct EMConfig {
    double tolerance = 1e-8;   // relative log-likelihood change
    int max_iterations = 500;
    std::uint64_t seed = 0;    // k-means++ seeding
    int kmeans_iterations = 20;
};

template <class Model>
struct EMFit {
    Model model;
    std::vector<double> log_likelihood_trace;  // total log-likelihood after each E-step
    int iterations = 0;
    bool converged = false;
};

/// Student-t mixture EM with degrees of freedom held fixed at nu_fixed.
EMFit<StudentTMixture> em_fit_tmix(const ReturnSample& sample, std::size_t components,
                                   const std::vector<double>& nu_fixed,
                                   const EMConfig& config = {});

EMFit<GaussianMixture> em_fit_gmix(const ReturnSample& sample, std::size_t components,
                                   const EMConfig& config = {});

// Synthetic ground-truth generator -------------------------------------------

/// Ranges for the two-component Student-t generator. Defaults are daily-return
/// magnitudes: locations around 1e-3, scale matrices around 1e-4.
struct DGPSpec {
    double weight_min = 0.6;
    double weight_max = 0.8;
    double nu_calm = 4.0;
    double nu_stress = 2.5;
    double location_calm_min = 0.0;
    double location_calm_max = 0.002;
    double location_stress_min = -0.003;
    double location_stress_max = 0.0;
    double vol_min = 0.008;
    double vol_max = 0.02;
    double stress_vol_multiplier_min = 1.0;
    double stress_vol_multiplier_max = 2.0;
    double avg_correlation_calm = 0.3;
    double avg_correlation_stress = 0.5;
    int factors = 0;        // 0: max(2, d / 4)
    double ridge = 0.05;    // epsilon in A'A/k + epsilon I before rescaling
};

StudentTMixture synth_dgp(Eigen::Index d, std::uint64_t seed, const DGPSpec& spec = {});

}  // namespace riskbudget
