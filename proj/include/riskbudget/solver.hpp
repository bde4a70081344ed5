#pragma once

#include "riskbudget/errors.hpp"
#include "riskbudget/measures.hpp"
#include "riskbudget/models.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace riskbudget {

enum class Method { sgd, osbgd, msbgd, reference };

std::string to_string(Method m);
/// Accepts "sgd", "osbgd", "msbgd", "reference"; throws InputError otherwise.
Method method_from_string(const std::string& s);

struct StepSchedule {
    enum class Kind { constant, polynomial };
    Kind kind = Kind::polynomial;
    double base = 0.5;
    double exponent = 0.6;  // gamma_k = base / (1 + k)^exponent

    double at(long k) const;
};

struct SolverConfig {
    Method method = Method::sgd;
    Eigen::Index batch_size = 128;
    int epochs = 10;
    StepSchedule step;
    double averaging_fraction = 0.2;  // SGD: Polyak-Ruppert window
    int last_k = 5;                   // MSBGD: iterates averaged at the end
    double step_clip = 0.5;           // SGD: max relative change of y per step; 0 disables
    double fd_step = 1e-4;
    double stop_tol = 1e-6;
    int max_iters = 1000;             // OSBGD and reference
    int msbgd_iterations = 60;
    Eigen::Index resample_size = 100000;
    Eigen::Index pilot_size = 20000;  // SGD initialization chunk
    std::uint64_t seed = 0;
    unsigned jobs = 1;                // threads for sampling inside MSBGD
    long trace_every = 0;             // SGD objective trace thinning; 0 picks ~1000 points

    /// Throws InputError on out-of-domain fields.
    void validate() const;
};

struct TracePoint {
    long iteration = 0;
    double value = 0;
};

struct SolveReport {
    Weights weights;
    RawAllocation raw;
    ZetaState zeta;
    RiskContributionReport contributions;
    std::vector<TracePoint> objective_trace;
    double wall_time = 0;  // seconds, solver loop only
    long iterations = 0;
    bool converged = true;
    std::uint64_t seed = 0;
    Method method = Method::sgd;
    std::string measure;
    std::vector<std::string> warnings;
};

/// Optional extras for a solve.
struct SolveHooks {
    /// Called with (iteration, y, zeta) for the initial point and after every
    /// SGD step.
    std::function<void(long, const Vector&, const Vector&)> observer;
    /// Evaluator used for the contribution report; defaults to the solver's
    /// own (sample or exact) evaluator.
    std::optional<RiskFunction> audit;
    /// Starting raw allocation; defaults to scaled budgets.
    std::optional<Vector> initial_y;
};

/// Thrown when a deterministic solver stops without meeting its tolerance.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, std::vector<TracePoint> trace)
        : NumericError(what), trace_(std::move(trace)) {}
    const std::vector<TracePoint>& trace() const noexcept { return trace_; }

private:
    std::vector<TracePoint> trace_;
};

SolveReport sgd_solve(const RiskMeasureSpec& spec, const Budgets& budgets,
                      const ReturnSample& sample, const SolverConfig& config,
                      const SolveHooks& hooks = {});

SolveReport osbgd_solve(const RiskMeasureSpec& spec, const Budgets& budgets,
                        const ReturnSample& sample, const SolverConfig& config,
                        const SolveHooks& hooks = {});

SolveReport msbgd_solve(const RiskMeasureSpec& spec, const Budgets& budgets,
                        const ReturnModel& model, const SolverConfig& config,
                        const SolveHooks& hooks = {});

/// Minimizes g(R(y)) - sum b log y with the exact evaluator of the spec
/// until the gradient infinity-norm drops below config.stop_tol.
SolveReport reference_solve(const RiskMeasureSpec& spec, const Budgets& budgets,
                            const ReturnModel& model, const SolverConfig& config,
                            const SolveHooks& hooks = {});

/// Same, for a risk function given directly (value and gradient in y) with
/// homogenization exponent q.
SolveReport reference_solve(const RiskFunction& risk, double exponent, const Budgets& budgets,
                            const SolverConfig& config, const SolveHooks& hooks = {});

/// Runs config.method from `starts` seeded random initial points.
struct MultistartResult {
    double max_pairwise_l1 = 0;
    std::vector<Weights> solutions;
};

MultistartResult multistart_uniqueness_check(const RiskMeasureSpec& spec, const Budgets& budgets,
                                             const ReturnSample& sample, const SolverConfig& config,
                                             int starts);
MultistartResult multistart_uniqueness_check(const RiskMeasureSpec& spec, const Budgets& budgets,
                                             const ReturnModel& model, const SolverConfig& config,
                                             int starts);

/// Warnings for ES-family specs whose risk is not positive at the
/// equal-weight portfolio or at the points with 0.9 mass on one asset.
std::vector<std::string> positivity_warnings(const RiskMeasureSpec& spec, const RiskFunction& risk,
                                             Eigen::Index d);

}  // namespace riskbudget
