#pragma once

// Projection of an elliptical mixture onto a portfolio: the loss -y'X is a
// scalar mixture of location-scale laws, one per component.

#include "riskbudget/models.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace riskbudget::detail {

/// Standard Student-t with nu degrees of freedom; nu = +inf is the standard normal.
struct StandardLaw {
    double nu = std::numeric_limits<double>::infinity();

    bool gaussian() const noexcept { return std::isinf(nu); }

    double pdf(double t) const {
        if (gaussian()) {
            return boost::math::pdf(boost::math::normal_distribution<double>(), t);
        }
        return boost::math::pdf(boost::math::students_t_distribution<double>(nu), t);
    }

    double cdf(double t) const {
        if (gaussian()) {
            return boost::math::cdf(boost::math::normal_distribution<double>(), t);
        }
        return boost::math::cdf(boost::math::students_t_distribution<double>(nu), t);
    }

    /// Integral of u f(u) over [t, +inf): (nu + t^2) f(t) / (nu - 1), phi(t) for the normal.
    double upper_first_moment(double t) const {
        if (gaussian()) {
            return pdf(t);
        }
        return (nu + t * t) * pdf(t) / (nu - 1.0);
    }
};

struct ProjectedComponent {
    double weight = 0;
    double mean_return = 0;  // y'mu_k
    double scale = 0;        // sqrt(y' Lambda_k y)
    Vector scale_times_y;    // Lambda_k y
    Vector location;         // mu_k
    StandardLaw law;
};

/// Loss -y'X as a scalar mixture: Z = sum_k 1{C=k} (scale_k T_k - mean_return_k).
class LossMixture {
public:
    LossMixture(const StudentTMixture& model, const Vector& y) {
        for (const auto& c : model.components()) {
            add(c.weight, c.location, c.scale, StandardLaw{c.nu}, y);
        }
    }

    LossMixture(const GaussianMixture& model, const Vector& y) {
        for (const auto& c : model.components()) {
            add(c.weight, c.location, c.covariance, StandardLaw{}, y);
        }
    }

    const std::vector<ProjectedComponent>& components() const noexcept { return parts_; }

    double standardized(const ProjectedComponent& c, double z) const {
        return (z + c.mean_return) / c.scale;
    }

    double cdf(double z) const {
        double s = 0;
        for (const auto& c : parts_) {
            s += c.weight * c.law.cdf(standardized(c, z));
        }
        return s;
    }

    double pdf(double z) const {
        double s = 0;
        for (const auto& c : parts_) {
            s += c.weight / c.scale * c.law.pdf(standardized(c, z));
        }
        return s;
    }

private:
    void add(double weight, const Vector& mu, const Matrix& scale, StandardLaw law,
             const Vector& y) {
        ProjectedComponent c;
        c.weight = weight;
        c.mean_return = y.dot(mu);
        c.scale_times_y = scale * y;
        c.scale = std::sqrt(y.dot(c.scale_times_y));
        c.location = mu;
        c.law = law;
        parts_.push_back(std::move(c));
    }

    std::vector<ProjectedComponent> parts_;
};

}  // namespace riskbudget::detail
