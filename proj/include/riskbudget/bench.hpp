#pragma once

#include "riskbudget/measures.hpp"
#include "riskbudget/models.hpp"
#include "riskbudget/solver.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace riskbudget {

/// How the model-based methods obtain their model from the historical sample.
/// model_free runs SGD and OSBGD on the historical sample itself.
enum class Setting { model_free, true_params, tmix_em, gmix_em };

std::string to_string(Setting s);
Setting setting_from_string(const std::string& s);

/// Accuracy / timing study: for each dimension and repetition, draw a ground
/// truth model, a historical sample, a reference portfolio, then run each
/// method per setting and record 100 * L1 accuracy and solver wall time.
struct ExperimentSpec {
    std::vector<Eigen::Index> dims{10};
    int repetitions = 10;
    double alpha = 0.95;
    DGPSpec dgp;
    Eigen::Index history_size = 3500;
    Eigen::Index simulation_size = 1000000;
    std::vector<Setting> settings{Setting::model_free, Setting::true_params};
    std::vector<double> nu_fixed{4.0, 2.5};
    SolverConfig sgd_history;    // model-free SGD: 100 epochs
    SolverConfig osbgd;          // both settings
    SolverConfig sgd_simulated;  // model-based SGD: 4 epochs
    SolverConfig msbgd;
    SolverConfig reference;
    std::uint64_t seed = 0;
    unsigned jobs = 1;

    ExperimentSpec();
    void validate() const;
};

struct RepetitionResult {
    Eigen::Index d = 0;
    int repetition = 0;
    Setting setting = Setting::model_free;
    Method method = Method::sgd;
    double accuracy = 0;  // 100 * ||theta_ref - theta||_1
    double time = 0;      // seconds
    std::string error;    // empty on success
};

struct BenchRow {
    Eigen::Index d = 0;
    Method method = Method::sgd;
    Setting setting = Setting::model_free;
    double accuracy_mean = 0;
    double accuracy_std = 0;  // population standard deviation; 0 when m = 1
    double time_mean = 0;
    double time_std = 0;
    int errors = 0;
};

struct StudyResult {
    std::vector<RepetitionResult> repetitions;
    std::vector<BenchRow> rows;
};

/// Seed of repetition r at dimension d.
std::uint64_t repetition_seed(std::uint64_t master, Eigen::Index d, int r);

StudyResult run_accuracy_study(const ExperimentSpec& spec,
                               const std::function<void(const RepetitionResult&)>& progress = {});

/// Mean and standard deviation per (d, setting, method), ordered by first appearance.
std::vector<BenchRow> aggregate(const std::vector<RepetitionResult>& reps);

/// CSV columns: d, method, setting, acc_mean, acc_std, time_mean, time_std, errors.
/// Without timing the time fields are left empty.
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows, bool timing);
void write_repetitions_csv(std::ostream& os, const std::vector<RepetitionResult>& reps, bool timing);
std::vector<BenchRow> read_bench_csv(std::istream& is);

// Measure comparison ------------------------------------------------------------

struct ComparisonRow {
    std::string measure;
    Weights weights;
    std::vector<std::string> warnings;
};

/// Solves the RB problem for each measure with SGD on one seeded sample of
/// `sample_size` draws from the model.
std::vector<ComparisonRow> compare_measures(const ReturnModel& model,
                                            const std::vector<RiskMeasureSpec>& measures,
                                            const Budgets& budgets, const SolverConfig& config,
                                            Eigen::Index sample_size);

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows);

/// The measures of the default comparison table.
std::vector<RiskMeasureSpec> default_comparison_measures();

// SGD trace ------------------------------------------------------------------------

/// Runs SGD and writes one CSV row per iterate (initial point included):
/// iteration, y_1..y_d, zeta_1..zeta_K, theta_1..theta_d.
SolveReport write_sgd_trace(std::ostream& os, const RiskMeasureSpec& spec, const Budgets& budgets,
                            const ReturnSample& sample, const SolverConfig& config);

}  // namespace riskbudget
