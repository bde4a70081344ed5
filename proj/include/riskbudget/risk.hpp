#pragma once

#include "riskbudget/measures.hpp"
#include "riskbudget/models.hpp"

#include <span>

namespace riskbudget {

// Semi-analytic VaR / ES of the loss -y'X under a mixture model ---------------

/// Root of loss_cdf(z) = alpha, to |F(z) - alpha| < 1e-12.
double var_tmix(const StudentTMixture& model, const RawAllocation& y, double alpha);
double es_tmix(const StudentTMixture& model, const RawAllocation& y, double alpha);
/// d ES / d y, closed form.
Vector es_tmix_gradient(const StudentTMixture& model, const RawAllocation& y, double alpha);

double var_gmix(const GaussianMixture& model, const RawAllocation& y, double alpha);
double es_gmix(const GaussianMixture& model, const RawAllocation& y, double alpha);
Vector es_gmix_gradient(const GaussianMixture& model, const RawAllocation& y, double alpha);

double var_model(const ReturnModel& model, const RawAllocation& y, double alpha);
double es_model(const ReturnModel& model, const RawAllocation& y, double alpha);
Vector es_model_gradient(const ReturnModel& model, const RawAllocation& y, double alpha);

/// sqrt(y' Sigma y) and Sigma y / sqrt(y' Sigma y). Throws InputError for non-SPD Sigma.
std::pair<double, Vector> volatility_value_and_gradient(const Matrix& sigma, const RawAllocation& y);

// Empirical estimators on a vector of losses ----------------------------------

/// Hyndman-Fan method 7: h = (n - 1) alpha + 1, linear interpolation. alpha in [0, 1].
double empirical_var_method7(std::span<const double> losses, double alpha);

/// Mean of the losses at or above the method-7 quantile.
double empirical_es(std::span<const double> losses, double alpha);

/// Exact Rockafellar-Uryasev minimum on the sample:
/// min_zeta zeta + mean((L - zeta)_+) / (1 - alpha). alpha in [0, 1).
double discrete_es(std::span<const double> losses, double alpha);

/// Minimizer and minimum of zeta -> mean(a^p (L - zeta)_+^p + b^p (L - zeta)_-^p).
struct DeviationMinimum {
    double zeta = 0;
    double value = 0;
};
DeviationMinimum minimize_deviation(std::span<const double> losses, double a, double b, double p);

/// Full-sample value of the risk measure (not homogenized). ES uses
/// empirical_es, spectral nodes use discrete_es, volatility uses the
/// population standard deviation.
double empirical_risk(const RiskMeasureSpec& spec, std::span<const double> losses);

/// Losses -X y, one per row.
Vector portfolio_losses(const Eigen::Ref<const RowMatrix>& X, const Vector& y);

// Stochastic objectives on a batch ------------------------------------------------
//
// Every objective is the batch mean of the homogenized measure integrand minus
// sum_i b_i log y_i. The tail indicator uses the strict inequality L > zeta.

struct Subgradient {
    Vector y;
    Vector zeta;
};

double ru_objective(const RiskMeasureSpec& spec, const Budgets& budgets, const RawAllocation& y,
                    const ZetaState& zeta, const Eigen::Ref<const RowMatrix>& batch);
Subgradient ru_subgradient(const RiskMeasureSpec& spec, const Budgets& budgets,
                           const RawAllocation& y, const ZetaState& zeta,
                           const Eigen::Ref<const RowMatrix>& batch);

double spectral_objective(const Spectral& spec, const SpectralGrid& grid, const Budgets& budgets,
                          const RawAllocation& y, const ZetaState& zeta,
                          const Eigen::Ref<const RowMatrix>& batch);
Subgradient spectral_subgradient(const Spectral& spec, const SpectralGrid& grid,
                                 const Budgets& budgets, const RawAllocation& y,
                                 const ZetaState& zeta, const Eigen::Ref<const RowMatrix>& batch);

double deviation_objective(const RiskMeasureSpec& spec, const Budgets& budgets,
                           const RawAllocation& y, const ZetaState& zeta,
                           const Eigen::Ref<const RowMatrix>& batch);
Subgradient deviation_subgradient(const RiskMeasureSpec& spec, const Budgets& budgets,
                                  const RawAllocation& y, const ZetaState& zeta,
                                  const Eigen::Ref<const RowMatrix>& batch);

/// Volatility as a stochastic objective: mean((L - zeta)^2) - sum b log y
/// (the a = b = 1, p = 2 deviation).
double volatility_objective(const Budgets& budgets, const RawAllocation& y, const ZetaState& zeta,
                            const Eigen::Ref<const RowMatrix>& batch);

/// Dispatches on the spec. `grid` is only read for spectral specs.
class StochasticObjective {
public:
    explicit StochasticObjective(RiskMeasureSpec spec);

    const RiskMeasureSpec& spec() const noexcept { return spec_; }
    const SpectralGrid& grid() const noexcept { return grid_; }
    Eigen::Index zeta_size() const noexcept { return zeta_size_; }

    double value(const Budgets& budgets, const RawAllocation& y, const ZetaState& zeta,
                 const Eigen::Ref<const RowMatrix>& batch) const;
    Subgradient subgradient(const Budgets& budgets, const RawAllocation& y, const ZetaState& zeta,
                            const Eigen::Ref<const RowMatrix>& batch) const;

    /// Exact minimizer in zeta of the objective on the given losses.
    ZetaState optimal_zeta(std::span<const double> losses) const;

private:
    RiskMeasureSpec spec_;
    SpectralGrid grid_;
    Eigen::Index zeta_size_ = 1;
};

// Risk functions R(y) ----------------------------------------------------------

/// Exact evaluator for volatility (any model), ES, ES/mean mixtures and
/// spectral measures (mixture models). Throws InputError for other specs.
RiskFunction exact_risk(const RiskMeasureSpec& spec, const ReturnModel& model);
bool has_exact_risk(const RiskMeasureSpec& spec);

/// Full-sample evaluator: value = empirical_risk on -X y, gradient by central
/// differences with step h.
RiskFunction sample_risk(const RiskMeasureSpec& spec, const ReturnSample& sample, double h = 1e-4);

}  // namespace riskbudget
