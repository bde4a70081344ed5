#pragma once

// Reference computations that do not go through the library's closed forms:
// densities written out directly, integrals by quadrature, minima by 1-d search.

#include "riskbudget/core.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <numbers>
#include <type_traits>
#include <utility>
#include <vector>

namespace oracle {

/// Standard Student-t density with nu degrees of freedom.
inline double t_density(double t, double nu) {
    const double c = std::exp(std::lgamma(0.5 * (nu + 1)) - std::lgamma(0.5 * nu)) /
                     std::sqrt(nu * std::numbers::pi);
    return c * std::pow(1.0 + t * t / nu, -0.5 * (nu + 1));
}

inline double normal_density(double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

/// Closed-form quantile of the standard Student-t with 4 degrees of freedom.
inline double t4_quantile(double p) {
    const double a = 4.0 * p * (1.0 - p);
    const double q = std::cos(std::acos(std::sqrt(a)) / 3.0) / std::sqrt(a);
    return (p < 0.5 ? -2.0 : 2.0) * std::sqrt(q - 1.0);
}

/// Location-scale law of a loss: density f((z - m) / s) / s with f the
/// Student-t density, or the normal density when nu is infinite.
struct LocationScaleT {
    double m;
    double s;
    double nu;

    double pdf(double z) const {
        const double t = (z - m) / s;
        return (std::isinf(nu) ? normal_density(t) : t_density(t, nu)) / s;
    }

    /// P(Z > z) by quadrature of the density.
    double tail(double z) const {
        boost::math::quadrature::exp_sinh<double> q;
        return q.integrate([&](double u) { return pdf(z + u); }, 0.0,
                           std::numeric_limits<double>::infinity());
    }

    /// E[(Z - z)_+] by quadrature.
    double stop_loss(double z) const {
        boost::math::quadrature::exp_sinh<double> q;
        return q.integrate([&](double u) { return u * pdf(z + u); }, 0.0,
                           std::numeric_limits<double>::infinity());
    }
};

/// Finite mixture of location-scale laws.
struct MixtureLaw {
    std::vector<std::pair<double, LocationScaleT>> parts;

    double tail(double z) const {
        double s = 0;
        for (const auto& [w, law] : parts) {
            s += w * law.tail(z);
        }
        return s;
    }
    double stop_loss(double z) const {
        double s = 0;
        for (const auto& [w, law] : parts) {
            s += w * law.stop_loss(z);
        }
        return s;
    }
    double mean() const {
        double s = 0;
        for (const auto& [w, law] : parts) {
            s += w * law.m;
        }
        return s;
    }
    double scale() const {
        double s = 0;
        for (const auto& [w, law] : parts) {
            s = std::max(s, law.s);
        }
        return s;
    }
};

/// Root of a monotone function on [lo, hi] to full double precision.
inline double bracket_root(const std::function<double(double)>& f, double lo, double hi) {
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(
        f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

/// Minimizer and minimum of zeta + E[(Z - zeta)_+] / (1 - alpha), found by
/// solving the first-order condition P(Z > zeta) = 1 - alpha.
template <class Law>
std::pair<double, double> ru_minimum(const Law& law, double alpha) {
    auto foc = [&](double z) { return (1.0 - alpha) - law.tail(z); };
    double center = 0, width = 0;
    if constexpr (std::is_same_v<Law, LocationScaleT>) {
        center = law.m;
        width = law.s;
    } else {
        center = law.mean();
        width = law.scale();
    }
    double lo = center - width;
    double hi = center + width;
    while (foc(lo) > 0) {
        lo = center - 2.0 * (center - lo);
    }
    while (foc(hi) < 0) {
        hi = center + 2.0 * (hi - center);
    }
    const double zeta = bracket_root(foc, lo, hi);
    return {zeta, zeta + law.stop_loss(zeta) / (1.0 - alpha)};
}

/// Golden-section search for a unimodal function on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// ES of a one-dimensional law given only its quantile function:
/// (1 / (1 - alpha)) * integral of VaR_s over (alpha, 1).
inline double es_from_quantile(const std::function<double(double)>& quantile, double alpha) {
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate(quantile, alpha, 1.0) / (1.0 - alpha);
}

/// Central differences with step h.
inline riskbudget::Vector fd_gradient(const std::function<double(const riskbudget::Vector&)>& f,
                                      const riskbudget::Vector& x, double h) {
    riskbudget::Vector g(x.size());
    riskbudget::Vector p = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        p[i] = x[i] + h;
        const double up = f(p);
        p[i] = x[i] - h;
        const double down = f(p);
        p[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Sorted copy.
inline std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace oracle
