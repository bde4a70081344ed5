#pragma once

#include "riskbudget/risk.hpp"
#include "riskbudget/solver.hpp"

#include <chrono>
#include <span>

namespace riskbudget::detail {

inline std::span<const double> as_span(const Vector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

/// lambda such that y0 = lambda b satisfies R(y0) g'(R(y0)) = 1 for g = x^q.
/// Falls back to 1 / fallback_scale when R(b) is not positive.
double ray_scale(double risk_at_b, double exponent, double fallback_scale);

/// Homogenized objective g(R) - sum b log y.
inline double homogenized(double risk, double exponent, const Budgets& b, const Vector& y) {
    const double g = exponent == 1.0 ? risk : std::pow(risk, exponent);
    return g - b.values().dot(y.array().log().matrix());
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// Builds the report: normalizes y, runs the Euler audit with hooks.audit or
/// the default evaluator, attaches positivity warnings. A null spec stands for
/// a caller-supplied risk function.
SolveReport finish_report(Method method, const RiskMeasureSpec* spec, const Budgets& budgets, const Vector& y,
                          Vector zeta, std::vector<TracePoint> trace, double wall_time,
                          long iterations, bool converged, const SolverConfig& config,
                          const SolveHooks& hooks, const RiskFunction& default_audit);

/// Deterministic descent on y with finite-difference gradients and
/// Barzilai-Borwein steps. `objective(y, k)` returns the objective at
/// iteration k (the sample may change with k).
struct DescentResult {
    Vector y;
    std::vector<TracePoint> trace;
    long iterations = 0;
    bool converged = false;
    std::vector<Vector> iterates;
};

DescentResult bb_descent(const std::function<double(const Vector&, long)>& objective,
                         const Vector& y0, const SolverConfig& config, long iterations,
                         bool stop_on_tolerance);

}  // namespace riskbudget::detail
