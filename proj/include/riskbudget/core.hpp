#pragma once

#include <Eigen/Dense>

#include <functional>

namespace riskbudget {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kSimplexTolerance = 1e-12;

/// Risk budgets: a point of the open simplex.
class Budgets {
public:
    /// Validates strict positivity and unit sum (within kSimplexTolerance), then
    /// renormalizes the sum exactly. Throws InputError otherwise.
    explicit Budgets(Vector b);

    static Budgets equal(Eigen::Index d);

    const Vector& values() const noexcept { return b_; }
    Eigen::Index size() const noexcept { return b_.size(); }
    double operator[](Eigen::Index i) const { return b_[i]; }

private:
    Vector b_;
};

/// Portfolio weights on the open simplex.
class Weights {
public:
    explicit Weights(Vector theta);

    const Vector& values() const noexcept { return theta_; }
    Eigen::Index size() const noexcept { return theta_.size(); }
    double operator[](Eigen::Index i) const { return theta_[i]; }

private:
    Vector theta_;
};

/// Unnormalized allocation in the open positive orthant.
class RawAllocation {
public:
    explicit RawAllocation(Vector y);

    const Vector& values() const noexcept { return y_; }
    Eigen::Index size() const noexcept { return y_.size(); }
    double operator[](Eigen::Index i) const { return y_[i]; }

private:
    Vector y_;
};

struct RiskContributionReport {
    Vector contributions;   // theta_i * dR/dtheta_i
    double total_risk = 0;  // R(theta)
    Vector budget_errors;   // contributions_i - b_i * R(theta)

    /// max_i |budget_errors_i| / |total_risk|
    double max_relative_budget_error() const;
};

/// Scalar risk R(y) and its gradient, defined on the open positive orthant.
struct RiskFunction {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
};

/// theta = y / sum(y). Throws InputError on non-positive or non-finite input.
Weights normalize(const RawAllocation& y);

/// 100 * ||a - b||_1
double l1_accuracy(const Weights& a, const Weights& b);
double l1_accuracy(const Vector& a, const Vector& b);

/// Euler decomposition of R at theta. Throws NumericError when the gradient or
/// the risk is not finite.
RiskContributionReport euler_audit(const Weights& theta, const RiskFunction& risk,
                                   const Budgets& budgets);

/// Central finite-difference gradient with absolute step h.
Vector central_difference_gradient(const std::function<double(const Vector&)>& f,
                                   const Vector& y, double h);

}  // namespace riskbudget
