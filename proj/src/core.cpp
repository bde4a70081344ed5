#include "riskbudget/core.hpp"

#include "riskbudget/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace riskbudget {
namespace {

void require_positive_finite(const Vector& v, const char* what) {
    if (v.size() == 0) {
        throw InputError(std::string(what) + ": empty vector");
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] <= 0.0) {
            throw InputError(std::string(what) + ": component " + std::to_string(i) +
                             " must be finite and strictly positive, got " + std::to_string(v[i]));
        }
    }
}

Vector checked_simplex_point(Vector v, const char* what) {
    require_positive_finite(v, what);
    const double s = v.sum();
    if (std::abs(s - 1.0) > kSimplexTolerance) {
        throw InputError(std::string(what) + ": components must sum to 1, got " +
                         std::to_string(s));
    }
    v /= s;
    return v;
}

}  // namespace

Budgets::Budgets(Vector b) : b_(checked_simplex_point(std::move(b), "budgets")) {}

Budgets Budgets::equal(Eigen::Index d) {
    if (d < 1) {
        throw InputError("budgets: dimension must be at least 1");
    }
    return Budgets(Vector::Constant(d, 1.0 / static_cast<double>(d)));
}

Weights::Weights(Vector theta) : theta_(checked_simplex_point(std::move(theta), "weights")) {}

RawAllocation::RawAllocation(Vector y) : y_(std::move(y)) {
    require_positive_finite(y_, "allocation");
}

double RiskContributionReport::max_relative_budget_error() const {
    return budget_errors.cwiseAbs().maxCoeff() / std::abs(total_risk);
}

Weights normalize(const RawAllocation& y) {
    Vector w = y.values() / y.values().sum();
    // Push the rounding residual into the largest component so that the sum is
    // exactly 1.0; this makes normalize idempotent bit-for-bit.
    Eigen::Index largest = 0;
    w.maxCoeff(&largest);
    for (int pass = 0; pass < 4; ++pass) {
        const double s = w.sum();
        if (s == 1.0) {
            break;
        }
        w[largest] += 1.0 - s;
    }
    // The vectorized sum rounds partial sums, so one component alone may jump
    // over 1.0; walk each component by single ulps, largest first.
    if (w.sum() != 1.0) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(w.size()));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return w[a] > w[b]; });
        for (Eigen::Index i : order) {
            const Vector start = w;
            for (int step = 0; step < 32 && w.sum() != 1.0; ++step) {
                w[i] = std::nextafter(w[i], w.sum() < 1.0 ? 2.0 : 0.0);
            }
            if (w.sum() == 1.0) {
                break;
            }
            w = start;
        }
    }
    if (w.sum() != 1.0) {
        throw NumericError("normalize: cannot renormalize the weights to sum to 1");
    }
    return Weights(std::move(w));
}

double l1_accuracy(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw InputError("l1_accuracy: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    }
    return 100.0 * (a - b).cwiseAbs().sum();
}

double l1_accuracy(const Weights& a, const Weights& b) {
    return l1_accuracy(a.values(), b.values());
}

RiskContributionReport euler_audit(const Weights& theta, const RiskFunction& risk,
                                   const Budgets& budgets) {
    if (theta.size() != budgets.size()) {
        throw InputError("euler_audit: weights and budgets differ in dimension");
    }
    const Vector& t = theta.values();
    RiskContributionReport report;
    report.total_risk = risk.value(t);
    const Vector grad = risk.gradient(t);
    if (!std::isfinite(report.total_risk) || !grad.allFinite()) {
        throw NumericError("euler_audit: non-finite risk or gradient");
    }
    report.contributions = t.cwiseProduct(grad);
    report.budget_errors = report.contributions - budgets.values() * report.total_risk;
    return report;
}

Vector central_difference_gradient(const std::function<double(const Vector&)>& f,
                                   const Vector& y, double h) {
    Vector g(y.size());
    Vector probe = y;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        probe[i] = y[i] + h;
        const double up = f(probe);
        probe[i] = y[i] - h;
        const double down = f(probe);
        probe[i] = y[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

}  // namespace riskbudget
