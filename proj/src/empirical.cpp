#include "riskbudget/errors.hpp"
#include "riskbudget/risk.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace riskbudget {
namespace {

void require_nonempty(std::span<const double> losses, const char* what) {
    if (losses.empty()) {
        throw InputError(std::string(what) + ": empty loss vector");
    }
}

double mean_of(std::span<const double> x) {
    double s = 0;
    for (double v : x) {
        s += v;
    }
    return s / static_cast<double>(x.size());
}

// RU value zeta + mean((L - zeta)_+) / (1 - alpha) on ascending-sorted losses.
double ru_value_sorted(const std::vector<double>& sorted, double zeta, double alpha) {
    double tail = 0;
    for (auto it = std::upper_bound(sorted.begin(), sorted.end(), zeta); it != sorted.end(); ++it) {
        tail += *it - zeta;
    }
    return zeta + tail / (static_cast<double>(sorted.size()) * (1.0 - alpha));
}

// The RU function is convex and piecewise linear with kinks at the data, so
// its minimum is attained at the order statistic of rank ceil(n alpha); the
// neighbours are checked too to absorb rounding in n * alpha.
double discrete_es_sorted(const std::vector<double>& sorted, double alpha) {
    const auto n = static_cast<std::ptrdiff_t>(sorted.size());
    const auto k = static_cast<std::ptrdiff_t>(std::ceil(static_cast<double>(n) * alpha));
    double best = std::numeric_limits<double>::infinity();
    for (std::ptrdiff_t j = k - 2; j <= k + 1; ++j) {
        const auto idx = std::clamp<std::ptrdiff_t>(j, 0, n - 1);
        best = std::min(best, ru_value_sorted(sorted, sorted[static_cast<std::size_t>(idx)], alpha));
    }
    return best;
}

double deviation_value(std::span<const double> losses, double zeta, double a, double b, double p) {
    const double ap = std::pow(a, p);
    const double bp = std::pow(b, p);
    double s = 0;
    for (double l : losses) {
        const double r = l - zeta;
        if (r > 0) {
            s += ap * (p == 1.0 ? r : std::pow(r, p));
        } else if (r < 0) {
            s += bp * (p == 1.0 ? -r : std::pow(-r, p));
        }
    }
    return s / static_cast<double>(losses.size());
}

double deviation_slope(std::span<const double> losses, double zeta, double a, double b, double p) {
    const double ap = std::pow(a, p);
    const double bp = std::pow(b, p);
    double s = 0;
    for (double l : losses) {
        const double r = l - zeta;
        if (r > 0) {
            s -= p * ap * std::pow(r, p - 1.0);
        } else if (r < 0) {
            s += p * bp * std::pow(-r, p - 1.0);
        }
    }
    return s / static_cast<double>(losses.size());
}

}  // namespace

Vector portfolio_losses(const Eigen::Ref<const RowMatrix>& X, const Vector& y) {
    if (X.cols() != y.size()) {
        throw InputError("sample has " + std::to_string(X.cols()) + " columns, allocation has " +
                         std::to_string(y.size()) + " components");
    }
    return -(X * y);
}

double empirical_var_method7(std::span<const double> losses, double alpha) {
    require_nonempty(losses, "empirical_var_method7");
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw InputError("empirical_var_method7: alpha must lie in [0, 1]");
    }
    std::vector<double> x(losses.begin(), losses.end());
    const std::size_t n = x.size();
    const double h = static_cast<double>(n - 1) * alpha + 1.0;
    const auto lower = static_cast<std::size_t>(std::floor(h));  // 1-based
    const double frac = h - static_cast<double>(lower);
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(lower - 1), x.end());
    const double lo = x[lower - 1];
    if (lower >= n || frac == 0.0) {
        return lo;
    }
    const double hi = *std::min_element(x.begin() + static_cast<std::ptrdiff_t>(lower), x.end());
    return lo + frac * (hi - lo);
}

double empirical_es(std::span<const double> losses, double alpha) {
    const double q = empirical_var_method7(losses, alpha);
    double s = 0;
    std::size_t count = 0;
    for (double l : losses) {
        if (l >= q) {
            s += l;
            ++count;
        }
    }
    if (count == 0) {
        throw NumericError("empirical_es: empty tail");
    }
    return s / static_cast<double>(count);
}

double discrete_es(std::span<const double> losses, double alpha) {
    require_nonempty(losses, "discrete_es");
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw InputError("discrete_es: alpha must lie in [0, 1)");
    }
    std::vector<double> sorted(losses.begin(), losses.end());
    std::sort(sorted.begin(), sorted.end());
    return discrete_es_sorted(sorted, alpha);
}

DeviationMinimum minimize_deviation(std::span<const double> losses, double a, double b, double p) {
    require_nonempty(losses, "minimize_deviation");
    if (!(a > 0) || !(b > 0) || !(p >= 1.0)) {
        throw InputError("minimize_deviation: need a, b > 0 and p >= 1");
    }
    if (p == 2.0 && a == b) {
        const double m = mean_of(losses);
        return {m, deviation_value(losses, m, a, b, p)};
    }
    std::vector<double> sorted(losses.begin(), losses.end());
    std::sort(sorted.begin(), sorted.end());
    if (p == 1.0) {
        // Piecewise linear: minimum at the order statistic of rank ceil(n a / (a + b)).
        const auto n = static_cast<std::ptrdiff_t>(sorted.size());
        const auto k = static_cast<std::ptrdiff_t>(std::ceil(static_cast<double>(n) * a / (a + b)));
        DeviationMinimum best{0, std::numeric_limits<double>::infinity()};
        for (std::ptrdiff_t j = k - 2; j <= k + 1; ++j) {
            const double z = sorted[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, n - 1))];
            const double v = deviation_value(losses, z, a, b, p);
            if (v < best.value) {
                best = {z, v};
            }
        }
        return best;
    }
    // Strictly convex for p > 1: bisection on the monotone derivative.
    double lo = sorted.front();
    double hi = sorted.back();
    for (int it = 0; it < 200 && hi > lo; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (deviation_slope(losses, mid, a, b, p) > 0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    const double z = 0.5 * (lo + hi);
    return {z, deviation_value(losses, z, a, b, p)};
}

double empirical_risk(const RiskMeasureSpec& spec, std::span<const double> losses) {
    validate(spec);
    require_nonempty(losses, "empirical_risk");
    if (const auto* s = std::get_if<ExpectedShortfall>(&spec)) {
        return empirical_es(losses, s->alpha);
    }
    if (const auto* s = std::get_if<ESMeanMixture>(&spec)) {
        return s->beta * empirical_es(losses, s->alpha) + s->delta * mean_of(losses);
    }
    if (std::holds_alternative<Volatility>(spec)) {
        return std::sqrt(minimize_deviation(losses, 1.0, 1.0, 2.0).value);
    }
    if (const auto* s = std::get_if<Spectral>(&spec)) {
        const SpectralGrid grid = spectral_grid(*s);
        std::vector<double> sorted(losses.begin(), losses.end());
        std::sort(sorted.begin(), sorted.end());
        double r = 0;
        for (Eigen::Index k = 0; k < grid.s.size(); ++k) {
            r += grid.coeff[k] * discrete_es_sorted(sorted, grid.s[k]);
        }
        return s->subtract_mean ? r - mean_of(losses) : r;
    }
    if (const auto* s = std::get_if<Deviation>(&spec)) {
        const double v = minimize_deviation(losses, s->a, s->b, s->p).value;
        return s->p == 1.0 ? v : std::pow(v, 1.0 / s->p);
    }
    const auto& s = std::get<DeviationPlusMean>(spec);
    return minimize_deviation(losses, s.a, s.b, 1.0).value + s.delta * mean_of(losses);
}

}  // namespace riskbudget
