#pragma once

#include "riskbudget/bench.hpp"
#include "riskbudget/measures.hpp"
#include "riskbudget/models.hpp"
#include "riskbudget/solver.hpp"

#include <json.hpp>

#include <cstddef>

namespace riskbudget {

using Json = nlohmann::ordered_json;

/// {"measure": "volatility"|"es"|"es_mean"|"spectral"|"deviation"|"deviation_mean",
///  plus the fields of the chosen measure}. Unknown keys are rejected.
RiskMeasureSpec spec_from_json(const Json& j);
Json spec_to_json(const RiskMeasureSpec& spec);

/// Fields not present keep the value they have in `base`.
SolverConfig solver_config_from_json(const Json& j, SolverConfig base = {});
Json solver_config_to_json(const SolverConfig& config);

DGPSpec dgp_from_json(const Json& j, DGPSpec base = {});
Json dgp_to_json(const DGPSpec& spec);

ExperimentSpec experiment_from_json(const Json& j, ExperimentSpec base = {});
Json experiment_to_json(const ExperimentSpec& spec);

/// Array of positive numbers summing to one; an empty or missing value means equal budgets.
Budgets budgets_from_json(const Json& j, Eigen::Index d);

/// Weights, raw allocation, zeta, contributions, warnings and the objective
/// trace thinned to at most max_trace points (0 keeps all of it). Wall time is
/// included only when `timing` is set.
Json report_to_json(const SolveReport& report, bool timing, std::size_t max_trace = 1000);

/// Parses text as JSON, throwing InputError with line and column on failure.
Json parse_json(const std::string& text, const std::string& source);

}  // namespace riskbudget
