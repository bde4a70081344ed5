#include "riskbudget/bench.hpp"

#include "riskbudget/csv.hpp"
#include "riskbudget/risk.hpp"
#include "riskbudget/rng.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

namespace riskbudget {

std::string to_string(Setting s) {
    switch (s) {
        case Setting::model_free:
            return "model_free";
        case Setting::true_params:
            return "true_params";
        case Setting::tmix_em:
            return "tmix_em";
        case Setting::gmix_em:
            return "gmix_em";
    }
    return "unknown";
}

Setting setting_from_string(const std::string& s) {
    for (Setting v : {Setting::model_free, Setting::true_params, Setting::tmix_em, Setting::gmix_em}) {
        if (s == to_string(v)) {
            return v;
        }
    }
    throw InputError("unknown setting '" + s +
                     "' (expected model_free, true_params, tmix_em or gmix_em)");
}

ExperimentSpec::ExperimentSpec() {
    sgd_history.method = Method::sgd;
    sgd_history.epochs = 100;
    osbgd.method = Method::osbgd;
    sgd_simulated.method = Method::sgd;
    sgd_simulated.epochs = 4;
    msbgd.method = Method::msbgd;
    reference.method = Method::reference;
}

void ExperimentSpec::validate() const {
    if (dims.empty()) {
        throw InputError("experiment: dims must not be empty");
    }
    for (Eigen::Index d : dims) {
        if (d < 2) {
            throw InputError("experiment: every dimension must be >= 2");
        }
    }
    if (repetitions < 1) {
        throw InputError("experiment: repetitions must be >= 1");
    }
    if (!(alpha > 0 && alpha < 1)) {
        throw InputError("experiment: alpha must lie in (0, 1)");
    }
    if (history_size < 2 || simulation_size < 2) {
        throw InputError("experiment: sample sizes must be >= 2");
    }
    if (settings.empty()) {
        throw InputError("experiment: settings must not be empty");
    }
    if (nu_fixed.size() != 2) {
        throw InputError("experiment: nu_fixed needs two values");
    }
    for (const auto* c : {&sgd_history, &osbgd, &sgd_simulated, &msbgd, &reference}) {
        c->validate();
    }
}

std::uint64_t repetition_seed(std::uint64_t master, Eigen::Index d, int r) {
    return derive_seed({master, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(r)});
}

namespace {

std::vector<RepetitionResult> run_repetition(const ExperimentSpec& spec, Eigen::Index d, int r) {
    const std::uint64_t seed = repetition_seed(spec.seed, d, r);
    const RiskMeasureSpec measure = ExpectedShortfall{spec.alpha};
    const Budgets budgets = Budgets::equal(d);
    std::vector<RepetitionResult> out;

    auto record = [&](Setting setting, Method method, const std::function<SolveReport()>& solve,
                      const Weights* reference) {
        RepetitionResult res{d, r, setting, method, 0, 0, {}};
        if (reference == nullptr) {
            res.error = "reference portfolio unavailable";
        } else {
            try {
                const SolveReport rep = solve();
                res.accuracy = l1_accuracy(*reference, rep.weights);
                res.time = rep.wall_time;
            } catch (const std::exception& e) {
                res.error = e.what();
            }
        }
        out.push_back(std::move(res));
    };
    auto with_seed = [&](SolverConfig c, std::uint64_t tag) {
        c.seed = derive_seed(seed, Stream::repetition, tag);
        return c;
    };

    const StudentTMixture truth = synth_dgp(d, seed, spec.dgp);
    const ReturnModel truth_model = truth;
    const ReturnSample history = sample_tmix(truth, spec.history_size, derive_seed(seed, Stream::sample, 0));
    std::optional<Weights> reference;
    std::string reference_error;
    try {
        reference = reference_solve(measure, budgets, truth_model, spec.reference).weights;
    } catch (const std::exception& e) {
        reference_error = e.what();
    }
    SolveHooks hooks;
    hooks.audit = exact_risk(measure, truth_model);
    const Weights* ref = reference ? &*reference : nullptr;

    for (std::size_t si = 0; si < spec.settings.size(); ++si) {
        const Setting setting = spec.settings[si];
        if (setting == Setting::model_free) {
            record(setting, Method::sgd, [&] {
                return sgd_solve(measure, budgets, history, with_seed(spec.sgd_history, 10 * si + 1), hooks);
            }, ref);
            record(setting, Method::osbgd, [&] {
                return osbgd_solve(measure, budgets, history, with_seed(spec.osbgd, 10 * si + 2), hooks);
            }, ref);
            continue;
        }
        std::optional<ReturnModel> model;
        std::string fit_error;
        try {
            EMConfig em;
            em.seed = derive_seed(seed, Stream::em_init, si);
            if (setting == Setting::true_params) {
                model = truth_model;
            } else if (setting == Setting::tmix_em) {
                model = em_fit_tmix(history, 2, spec.nu_fixed, em).model;
            } else {
                model = em_fit_gmix(history, 2, em).model;
            }
        } catch (const std::exception& e) {
            fit_error = std::string("model fit failed: ") + e.what();
        }
        if (!model) {
            for (Method m : {Method::sgd, Method::osbgd, Method::msbgd}) {
                out.push_back({d, r, setting, m, 0, 0, fit_error});
            }
            continue;
        }
        const ReturnSample simulated = sample_model(
            *model, spec.simulation_size, derive_seed(seed, Stream::sample, 1 + si), 1);
        record(setting, Method::sgd, [&] {
            return sgd_solve(measure, budgets, simulated, with_seed(spec.sgd_simulated, 10 * si + 1), hooks);
        }, ref);
        record(setting, Method::osbgd, [&] {
            return osbgd_solve(measure, budgets, simulated, with_seed(spec.osbgd, 10 * si + 2), hooks);
        }, ref);
        record(setting, Method::msbgd, [&] {
            return msbgd_solve(measure, budgets, *model, with_seed(spec.msbgd, 10 * si + 3), hooks);
        }, ref);
    }
    if (!reference) {
        for (auto& res : out) {
            res.error = "reference solve failed: " + reference_error;
        }
    }
    return out;
}

}  // namespace

StudyResult run_accuracy_study(const ExperimentSpec& spec,
                               const std::function<void(const RepetitionResult&)>& progress) {
    spec.validate();
    std::vector<std::pair<Eigen::Index, int>> tasks;
    for (Eigen::Index d : spec.dims) {
        for (int r = 0; r < spec.repetitions; ++r) {
            tasks.emplace_back(d, r);
        }
    }
    std::vector<std::vector<RepetitionResult>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            results[t] = run_repetition(spec, tasks[t].first, tasks[t].second);
            if (progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                for (const auto& res : results[t]) {
                    progress(res);
                }
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(tasks.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
    }
    StudyResult out;
    for (auto& block : results) {
        for (auto& res : block) {
            out.repetitions.push_back(std::move(res));
        }
    }
    out.rows = aggregate(out.repetitions);
    return out;
}

std::vector<BenchRow> aggregate(const std::vector<RepetitionResult>& reps) {
    std::vector<BenchRow> rows;
    std::vector<std::vector<const RepetitionResult*>> groups;
    for (const auto& res : reps) {
        std::size_t g = 0;
        while (g < rows.size() && !(rows[g].d == res.d && rows[g].method == res.method &&
                                    rows[g].setting == res.setting)) {
            ++g;
        }
        if (g == rows.size()) {
            BenchRow row;
            row.d = res.d;
            row.method = res.method;
            row.setting = res.setting;
            rows.push_back(row);
            groups.emplace_back();
        }
        groups[g].push_back(&res);
    }
    for (std::size_t g = 0; g < rows.size(); ++g) {
        double n = 0, acc = 0, acc2 = 0, t = 0, t2 = 0;
        for (const auto* res : groups[g]) {
            if (!res->error.empty()) {
                ++rows[g].errors;
                continue;
            }
            n += 1;
            acc += res->accuracy;
            t += res->time;
        }
        if (n == 0) {
            continue;
        }
        acc /= n;
        t /= n;
        for (const auto* res : groups[g]) {
            if (res->error.empty()) {
                acc2 += (res->accuracy - acc) * (res->accuracy - acc);
                t2 += (res->time - t) * (res->time - t);
            }
        }
        rows[g].accuracy_mean = acc;
        rows[g].accuracy_std = std::sqrt(acc2 / n);
        rows[g].time_mean = t;
        rows[g].time_std = std::sqrt(t2 / n);
    }
    return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows, bool timing) {
    write_csv_row(os, {"d", "method", "setting", "acc_mean", "acc_std", "time_mean", "time_std", "errors"});
    for (const auto& r : rows) {
        write_csv_row(os, {std::to_string(r.d), to_string(r.method), to_string(r.setting),
                           format_double(r.accuracy_mean), format_double(r.accuracy_std),
                           timing ? format_double(r.time_mean) : "",
                           timing ? format_double(r.time_std) : "", std::to_string(r.errors)});
    }
}

void write_repetitions_csv(std::ostream& os, const std::vector<RepetitionResult>& reps, bool timing) {
    write_csv_row(os, {"d", "repetition", "setting", "method", "accuracy", "time", "error"});
    for (const auto& r : reps) {
        write_csv_row(os, {std::to_string(r.d), std::to_string(r.repetition), to_string(r.setting),
                           to_string(r.method), format_double(r.accuracy),
                           timing ? format_double(r.time) : "", r.error});
    }
}

std::vector<BenchRow> read_bench_csv(std::istream& is) {
    const CsvTable t = read_csv(is, true);
    const std::vector<std::string> expected{"d",         "method",   "setting",  "acc_mean",
                                            "acc_std",   "time_mean", "time_std", "errors"};
    if (t.header != expected) {
        throw InputError("bench CSV: unexpected header");
    }
    auto num = [](const std::string& s) { return s.empty() ? 0.0 : parse_double(s); };
    std::vector<BenchRow> rows;
    for (const auto& f : t.rows) {
        BenchRow r;
        r.d = static_cast<Eigen::Index>(parse_double(f[0]));
        r.method = method_from_string(f[1]);
        r.setting = setting_from_string(f[2]);
        r.accuracy_mean = num(f[3]);
        r.accuracy_std = num(f[4]);
        r.time_mean = num(f[5]);
        r.time_std = num(f[6]);
        r.errors = static_cast<int>(parse_double(f[7]));
        rows.push_back(r);
    }
    return rows;
}

std::vector<ComparisonRow> compare_measures(const ReturnModel& model,
                                            const std::vector<RiskMeasureSpec>& measures,
                                            const Budgets& budgets, const SolverConfig& config,
                                            Eigen::Index sample_size) {
    if (measures.empty()) {
        throw InputError("compare: no measures given");
    }
    const ReturnSample sample = sample_model(model, sample_size, config.seed, config.jobs);
    std::vector<ComparisonRow> rows;
    for (const auto& m : measures) {
        SolveHooks hooks;
        if (has_exact_risk(m)) {
            hooks.audit = exact_risk(m, model);
        }
        SolveReport rep = sgd_solve(m, budgets, sample, config, hooks);
        rows.push_back({label(m), rep.weights, rep.warnings});
    }
    return rows;
}

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
    std::vector<std::string> header{"measure"};
    const Eigen::Index d = rows.empty() ? 0 : rows.front().weights.size();
    for (Eigen::Index i = 0; i < d; ++i) {
        header.push_back("asset_" + std::to_string(i + 1));
    }
    write_csv_row(os, header);
    for (const auto& r : rows) {
        std::vector<std::string> f{r.measure};
        for (Eigen::Index i = 0; i < d; ++i) {
            f.push_back(format_double(r.weights[i]));
        }
        write_csv_row(os, f);
    }
}

std::vector<RiskMeasureSpec> default_comparison_measures() {
    return {
        Volatility{},
        Deviation{1.0, 1.0, 1.0},
        ESMeanMixture{1.0, -1.0, 0.95},
        Spectral{0.05, 20, true},
        DeviationPlusMean{1.0, 1.0, 1.0, 1.0},
        ExpectedShortfall{0.95},
        Spectral{0.05, 20, false},
        Deviation{std::sqrt(0.99), std::sqrt(0.01), 2.0},
    };
}

SolveReport write_sgd_trace(std::ostream& os, const RiskMeasureSpec& spec, const Budgets& budgets,
                            const ReturnSample& sample, const SolverConfig& config) {
    const Eigen::Index d = sample.cols();
    const Eigen::Index k = std::max<Eigen::Index>(1, zeta_size(spec));
    std::vector<std::string> header{"iteration"};
    for (Eigen::Index i = 0; i < d; ++i) {
        header.push_back("y_" + std::to_string(i + 1));
    }
    if (k == 1) {
        header.push_back("zeta");
    } else {
        for (Eigen::Index j = 0; j < k; ++j) {
            header.push_back("zeta_" + std::to_string(j + 1));
        }
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        header.push_back("theta_" + std::to_string(i + 1));
    }
    write_csv_row(os, header);
    std::vector<std::string> fields;
    SolveHooks hooks;
    hooks.observer = [&](long it, const Vector& y, const Vector& zeta) {
        fields.clear();
        fields.push_back(std::to_string(it));
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            fields.push_back(format_double(y[i]));
        }
        for (Eigen::Index j = 0; j < zeta.size(); ++j) {
            fields.push_back(format_double(zeta[j]));
        }
        const double s = y.sum();
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            fields.push_back(format_double(y[i] / s));
        }
        write_csv_row(os, fields);
    };
    return sgd_solve(spec, budgets, sample, config, hooks);
}

}  // namespace riskbudget
