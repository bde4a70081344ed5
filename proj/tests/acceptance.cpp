// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "oracles.hpp"

#include "riskbudget/bench.hpp"
#include "riskbudget/config.hpp"
#include "riskbudget/model_io.hpp"
#include "riskbudget/risk.hpp"
#include "riskbudget/rng.hpp"
#include "riskbudget/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace riskbudget;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

ReturnModel load(const std::string& name) { return read_model_file(RB_DATA_DIR "/models/" + name); }

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

SolverConfig reference_config() {
    SolverConfig c;
    c.method = Method::reference;
    return c;
}

std::string vec(const Vector& v, int digits = 5) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        os << (i ? " " : "(") << v[i];
    }
    os << ")";
    return os.str();
}

// Each check appends its evidence to `detail` and returns the verdict.
struct Criterion {
    std::string name;
    bool (*run)(std::ostringstream& detail);
};

const Vector expected_weights = (Vector(4) << 0.17958, 0.28127, 0.30483, 0.23432).finished();

bool reference_erc(std::ostringstream& out) {
    const ReturnModel m = load("tmix4_daily.json");
    const auto t0 = Clock::now();
    const SolveReport r = reference_solve(ExpectedShortfall{0.95}, Budgets::equal(4), m, reference_config());
    const double elapsed = seconds_since(t0);
    const double werr = (r.weights.values() - expected_weights).cwiseAbs().maxCoeff();
    const double cerr = (r.contributions.contributions.array() - 0.00806).abs().maxCoeff();
    out << "weights " << vec(r.weights.values()) << " max|dw| " << werr << ", contributions "
        << vec(r.contributions.contributions, 7) << " max|dc| " << cerr << ", " << elapsed << " s";
    return werr <= 5e-4 && cerr <= 5e-5 && elapsed < 10.0;
}

bool sgd_large_sample(std::ostringstream& out) {
    const ReturnModel m = load("tmix4_daily.json");
    const SolveReport ref = reference_solve(ExpectedShortfall{0.95}, Budgets::equal(4), m, reference_config());
    std::vector<double> acc;
    double worst_time = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto t0 = Clock::now();
        const ReturnSample s = sample_model(m, 1000000, seed, jobs());
        SolverConfig c;
        c.batch_size = 128;
        c.epochs = 10;
        c.averaging_fraction = 0.2;
        c.seed = seed;
        const SolveReport r = sgd_solve(ExpectedShortfall{0.95}, Budgets::equal(4), s, c);
        worst_time = std::max(worst_time, seconds_since(t0));
        acc.push_back(l1_accuracy(ref.weights, r.weights));
    }
    std::vector<double> sorted = acc;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[2];
    out << "100*L1 per seed";
    for (double a : acc) {
        out << " " << a;
    }
    out << ", median " << median << ", slowest seed " << worst_time << " s";
    return median <= 0.3 && worst_time < 60.0;
}

std::vector<ComparisonRow> compare(const std::string& model, const std::vector<RiskMeasureSpec>& specs) {
    SolverConfig c;
    c.seed = 1;
    c.jobs = jobs();
    return compare_measures(load(model), specs, Budgets::equal(3), c, 1000000);
}

bool compare_gaussian(std::ostringstream& out) {
    const auto rows = compare("gmix3_normal.json", {Volatility{}, Deviation{1, 1, 1}, ESMeanMixture{1, -1, 0.95},
                                                    Spectral{0.05, 20, true}});
    const Vector expected_vol = (Vector(3) << 0.60916, 0.22200, 0.16884).finished();
    const double vol_err = l1_accuracy(rows[0].weights.values(), expected_vol);
    double spread = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << rows[i].measure << " " << vec(rows[i].weights.values()) << "; ";
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            spread = std::max(spread, l1_accuracy(rows[i].weights, rows[j].weights));
        }
    }
    out << "volatility 100*L1 " << vol_err << ", max pairwise " << spread;
    return vol_err <= 0.5 && spread <= 0.7;
}

bool compare_skewed(std::ostringstream& out) {
    const auto rows = compare("gmix3_skewed.json", {Volatility{}, ExpectedShortfall{0.95}});
    const Vector expected_es = (Vector(3) << 0.44055, 0.21511, 0.34434).finished();
    const double es_err = l1_accuracy(rows[1].weights.values(), expected_es);
    out << "ES " << vec(rows[1].weights.values()) << " 100*L1 " << es_err << ", volatility "
        << vec(rows[0].weights.values());
    return es_err <= 1.5 && rows[1].weights[0] < rows[0].weights[0];
}

bool accuracy_study(std::ostringstream& out) {
    ExperimentSpec s;
    s.dims = {10};
    s.repetitions = 10;
    s.history_size = 3500;
    s.settings = {Setting::model_free, Setting::true_params};
    s.jobs = jobs();
    const StudyResult r = run_accuracy_study(s);
    double sgd = -1, osbgd = -1, worst_true = 0;
    bool errors = false;
    for (const auto& row : r.rows) {
        errors = errors || row.errors > 0;
        out << to_string(row.setting) << "/" << to_string(row.method) << " " << row.accuracy_mean << " ("
            << row.accuracy_std << "); ";
        if (row.setting == Setting::model_free) {
            (row.method == Method::sgd ? sgd : osbgd) = row.accuracy_mean;
        } else {
            worst_true = std::max(worst_true, row.accuracy_mean);
        }
    }
    const auto in_band = [](double a) { return a >= 3.0 && a <= 9.0; };
    return !errors && std::abs(sgd - osbgd) <= 2.0 && in_band(sgd) && in_band(osbgd) && worst_true < 1.0;
}

bool ru_equivalence(std::ostringstream& out) {
    const Eigen::Index d = 3;
    Matrix scale(d, d);
    scale << 1.0, 0.3, 0.1, 0.3, 2.0, 0.4, 0.1, 0.4, 1.5;
    const Vector mu = (Vector(d) << 0.2, -0.1, 0.05).finished();
    const StudentTMixture model({{1.0, mu, scale, 4.0}});
    Rng rng(2024);
    std::uniform_real_distribution<double> uy(0.1, 2.0), ua(0.8, 0.995);
    double worst_es = 0, worst_var = 0;
    for (int t = 0; t < 20; ++t) {
        Vector y(d);
        for (auto& v : y) {
            v = uy(rng);
        }
        const double alpha = ua(rng);
        const oracle::LocationScaleT law{-mu.dot(y), std::sqrt(y.dot(scale * y)), 4.0};
        const auto [zeta, value] = oracle::ru_minimum(law, alpha);
        worst_es = std::max(worst_es, std::abs(value - es_tmix(model, RawAllocation(y), alpha)));
        worst_var = std::max(worst_var, std::abs(zeta - var_tmix(model, RawAllocation(y), alpha)));
    }
    out << "max |RU min - ES| " << worst_es << ", max |argmin - VaR| " << worst_var;
    return worst_es <= 1e-6 && worst_var <= 1e-6;
}

bool discrete_oracle(std::ostringstream& out) {
    std::vector<double> losses(10);
    for (int i = 0; i < 10; ++i) {
        losses[static_cast<std::size_t>(i)] = i + 1.0;
    }
    const double var = empirical_var_method7(losses, 0.8);
    const double es = empirical_es(losses, 0.8);
    // Scan zeta over [0, 11] on a grid that contains the integers exactly.
    auto ru = [&](double z) {
        double s = 0;
        for (double l : losses) {
            s += std::max(l - z, 0.0);
        }
        return z + s / 10.0 / 0.2;
    };
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> grid;
    for (int k = 0; k <= 1100; ++k) {
        grid.push_back(k / 100.0);
        best = std::min(best, ru(grid.back()));
    }
    double lo = 1e300, hi = -1e300;
    for (double z : grid) {
        if (ru(z) <= best + 1e-12) {
            lo = std::min(lo, z);
            hi = std::max(hi, z);
        }
    }
    const double disc = discrete_es(losses, 0.8);
    out << "VaR " << var << ", ES " << es << ", scan minimum " << best << " on [" << lo << ", " << hi
        << "], discrete_es " << disc;
    return std::abs(var - 8.2) < 1e-12 && std::abs(es - 9.5) < 1e-12 && std::abs(best - 9.5) < 1e-12 &&
           std::abs(lo - 8.0) < 1e-12 && std::abs(hi - 9.0) < 1e-12 && std::abs(disc - 9.5) < 1e-12;
}

bool subgradients(std::ostringstream& out) {
    Rng rng(31);
    const Eigen::Index d = 4, n = 64;
    std::student_t_distribution<double> t4(4.0);
    RowMatrix batch(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            batch(i, j) = t4(rng) + 0.1 * static_cast<double>(j);
        }
    }
    const Budgets b = Budgets::equal(d);
    std::uniform_real_distribution<double> uy(0.5, 2.0);
    const std::vector<std::pair<std::string, RiskMeasureSpec>> families{
        {"RU", ExpectedShortfall{0.9}}, {"spectral", Spectral{0.2, 6, false}}, {"deviation", Deviation{0.9, 0.4, 1.5}}};
    bool ok = true;
    for (const auto& [family, spec] : families) {
        const StochasticObjective obj(spec);
        double worst = 0;
        for (int t = 0; t < 100; ++t) {
            Vector y(d);
            for (auto& v : y) {
                v = uy(rng);
            }
            const Vector L = portfolio_losses(batch, y);
            const std::vector<double> s = oracle::sorted(std::vector<double>(L.data(), L.data() + L.size()));
            std::uniform_int_distribution<std::size_t> pick(0, s.size() - 2);
            Vector zeta(obj.zeta_size());
            for (auto& z : zeta) {
                std::size_t i = pick(rng);
                while (s[i + 1] - s[i] < 1e-3) {
                    i = pick(rng);
                }
                z = 0.5 * (s[i] + s[i + 1]);
            }
            Vector x(d + zeta.size());
            x << y, zeta;
            auto f = [&](const Vector& v) {
                return obj.value(b, RawAllocation(v.head(d)), ZetaState{v.tail(v.size() - d)}, batch);
            };
            const Subgradient g = obj.subgradient(b, RawAllocation(y), ZetaState{zeta}, batch);
            Vector an(x.size());
            an << g.y, g.zeta;
            const Vector fd = oracle::fd_gradient(f, x, 1e-6);
            worst = std::max(worst, (an - fd).norm() / an.norm());
        }
        out << family << " max relative error " << worst << "; ";
        ok = ok && worst <= 1e-5;
    }
    return ok;
}

bool properties(std::ostringstream& out) {
    Rng rng(77);
    std::uniform_real_distribution<double> uy(0.1, 2.0), ua(0.8, 0.99), ul(0.2, 5.0), uc(-3.0, 3.0);
    const ReturnModel tmix = load("tmix4_daily.json");
    const ReturnModel gmix = load("gmix3_skewed.json");
    const ReturnSample sample = sample_model(gmix, 20000, 9);
    auto random_y = [&](Eigen::Index d) {
        Vector y(d);
        for (auto& v : y) {
            v = uy(rng);
        }
        return y;
    };

    // Positive homogeneity of the exact and sample evaluators.
    double homog = 0;
    const std::vector<RiskMeasureSpec> specs{Volatility{}, ExpectedShortfall{0.95}, ESMeanMixture{1, -1, 0.9},
                                             Spectral{0.05, 20, false}, Deviation{1, 1, 1}, Deviation{0.8, 0.3, 2}};
    for (int t = 0; t < 20; ++t) {
        const Vector y = random_y(3);
        const double lambda = ul(rng);
        const RawAllocation ry(y), sy(Vector(lambda * y));
        const double es = es_model(gmix, ry, 0.95);
        homog = std::max(homog, std::abs(es_model(gmix, sy, 0.95) - lambda * es) / std::abs(lambda * es));
        for (const auto& spec : specs) {
            const Vector L = portfolio_losses(sample.data(), y);
            const Vector Ls = lambda * L;
            const double r = empirical_risk(spec, {L.data(), static_cast<std::size_t>(L.size())});
            const double rs = empirical_risk(spec, {Ls.data(), static_cast<std::size_t>(Ls.size())});
            homog = std::max(homog, std::abs(rs - lambda * r) / std::abs(lambda * r));
        }
    }

    // ES >= VaR under both families.
    double es_gap = 1e300;
    for (int t = 0; t < 20; ++t) {
        const double alpha = ua(rng);
        const RawAllocation y4(random_y(4)), y3(random_y(3));
        es_gap = std::min(es_gap, es_model(tmix, y4, alpha) - var_model(tmix, y4, alpha));
        es_gap = std::min(es_gap, es_model(gmix, y3, alpha) - var_model(gmix, y3, alpha));
    }

    // Deviation measures ignore constant shifts of the loss.
    double shift = 0;
    for (int t = 0; t < 20; ++t) {
        const Vector L = portfolio_losses(sample.data(), random_y(3));
        const Vector Lc = (L.array() + uc(rng)).matrix();
        for (const auto& spec : {RiskMeasureSpec{Deviation{1, 1, 1}}, RiskMeasureSpec{Deviation{0.8, 0.3, 2}},
                                 RiskMeasureSpec{Deviation{1, 1, 1.5}}, RiskMeasureSpec{Volatility{}}}) {
            const double r = empirical_risk(spec, {L.data(), static_cast<std::size_t>(L.size())});
            const double rc = empirical_risk(spec, {Lc.data(), static_cast<std::size_t>(Lc.size())});
            shift = std::max(shift, std::abs(rc - r) / r);
        }
    }

    // Euler residuals: reference below 1e-3, SGD below 1e-2 under the exact evaluator.
    const Budgets skew((Vector(4) << 0.7, 0.1, 0.1, 0.1).finished());
    const SolveReport ref = reference_solve(ExpectedShortfall{0.95}, skew, tmix, reference_config());
    SolveHooks hooks;
    hooks.audit = exact_risk(ExpectedShortfall{0.95}, tmix);
    SolverConfig sc;
    sc.seed = 11;
    sc.jobs = jobs();
    const SolveReport sgd = sgd_solve(ExpectedShortfall{0.95}, Budgets::equal(4),
                                      sample_model(tmix, 1000000, 11, jobs()), sc, hooks);
    const double euler_ref = ref.contributions.max_relative_budget_error();
    const double euler_sgd = sgd.contributions.max_relative_budget_error();

    // Uniqueness from 5 random starts.
    const double multi_ref =
        multistart_uniqueness_check(ExpectedShortfall{0.95}, Budgets::equal(3), gmix, reference_config(), 5)
            .max_pairwise_l1;
    SolverConfig oc;
    oc.method = Method::osbgd;
    const double multi_os =
        multistart_uniqueness_check(ExpectedShortfall{0.95}, Budgets::equal(3), sample, oc, 5).max_pairwise_l1;

    // The RB portfolio is no riskier than the budget portfolio.
    double dominance = -1e300;
    for (const auto& spec : {RiskMeasureSpec{Volatility{}}, RiskMeasureSpec{ExpectedShortfall{0.95}},
                             RiskMeasureSpec{Spectral{0.05, 20, false}}}) {
        const RiskFunction risk = exact_risk(spec, gmix);
        for (int t = 0; t < 3; ++t) {
            const Vector y = random_y(3);
            const Budgets bud(Vector(y / y.sum()));
            const SolveReport r = reference_solve(spec, bud, gmix, reference_config());
            dominance = std::max(dominance, risk.value(r.weights.values()) - risk.value(bud.values()));
        }
    }

    out << "homogeneity " << homog << ", min ES-VaR " << es_gap << ", shift " << shift << ", Euler ref "
        << euler_ref << " sgd " << euler_sgd << ", multistart ref " << multi_ref << " osbgd " << multi_os
        << ", max R(theta)-R(b) " << dominance;
    return homog < 1e-9 && es_gap > 0 && shift < 1e-9 && euler_ref < 1e-3 && euler_sgd < 1e-2 &&
           multi_ref < 0.5 && multi_os < 0.5 && dominance <= 1e-8;
}

bool determinism(std::ostringstream& out) {
    const ReturnModel m = load("tmix4_daily.json");
    auto run = [&]() {
        std::ostringstream os;
        SolverConfig c;
        c.seed = 3;
        c.epochs = 2;
        const ReturnSample s = sample_model(m, 50000, 3, jobs());
        write_sample_csv(os, sample_model(m, 100, 3), true);
        write_sgd_trace(os, ExpectedShortfall{0.95}, Budgets::equal(4), s, c);
        os << report_to_json(sgd_solve(ExpectedShortfall{0.95}, Budgets::equal(4), s, c), false).dump(2);
        os << report_to_json(reference_solve(ExpectedShortfall{0.95}, Budgets::equal(4), m, reference_config()), false)
                  .dump(2);
        write_comparison_csv(os, compare_measures(m, {ExpectedShortfall{0.95}, Deviation{1, 1, 1}},
                                                  Budgets::equal(4), c, 20000));
        ExperimentSpec e;
        e.dims = {4};
        e.repetitions = 2;
        e.history_size = 500;
        e.simulation_size = 5000;
        e.sgd_history.epochs = 2;
        e.msbgd.msbgd_iterations = 4;
        e.msbgd.last_k = 2;
        e.msbgd.resample_size = 2000;
        e.settings = {Setting::model_free, Setting::tmix_em};
        e.seed = 8;
        e.jobs = jobs();
        const StudyResult r = run_accuracy_study(e);
        write_bench_csv(os, r.rows, false);
        write_repetitions_csv(os, r.repetitions, false);
        return os.str();
    };
    const std::string a = run();
    const std::string b = run();
    out << a.size() << " bytes per run";
    return a == b;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"reference ERC on the four-asset t mixture", reference_erc},
        {"SGD on 1e6 draws matches the reference", sgd_large_sample},
        {"measure comparison, Gaussian model", compare_gaussian},
        {"measure comparison, skewed mixture", compare_skewed},
        {"accuracy study d=10 m=10 n=3500", accuracy_study},
        {"RU minimum equals closed-form ES and VaR", ru_equivalence},
        {"discrete quantile and ES oracle", discrete_oracle},
        {"subgradients match finite differences", subgradients},
        {"property suite", properties},
        {"determinism of outputs", determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        std::ostringstream detail;
        bool pass = false;
        const auto t0 = Clock::now();
        try {
            pass = c.run(detail);
        } catch (const std::exception& e) {
            detail << " exception: " << e.what();
        }
        failures += pass ? 0 : 1;
        std::cout << (pass ? "PASS " : "FAIL ") << c.name << " [" << seconds_since(t0) << " s]: " << detail.str()
                  << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " passed"
              << std::endl;
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
