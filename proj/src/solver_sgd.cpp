#include "riskbudget/rng.hpp"
#include "solver_internal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace riskbudget {
namespace {

constexpr double kDivergenceThreshold = 1e12;

double population_sd(const Vector& x) {
    const double m = x.mean();
    return std::sqrt((x.array() - m).square().mean());
}

RowMatrix gather(const RowMatrix& data, const std::vector<Eigen::Index>& idx, std::size_t begin,
                 std::size_t end) {
    RowMatrix out(static_cast<Eigen::Index>(end - begin), data.cols());
    for (std::size_t i = begin; i < end; ++i) {
        out.row(static_cast<Eigen::Index>(i - begin)) = data.row(idx[i]);
    }
    return out;
}

// Seeded subset of min(n, size) rows used to scale the starting point.
RowMatrix pilot_rows(const RowMatrix& data, Eigen::Index size, std::uint64_t seed) {
    const Eigen::Index n = data.rows();
    if (size >= n) {
        return data;
    }
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    Rng rng(derive_seed(seed, Stream::pilot));
    for (Eigen::Index i = 0; i < size; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    return gather(data, idx, 0, static_cast<std::size_t>(size));
}

}  // namespace

SolveReport sgd_solve(const RiskMeasureSpec& spec, const Budgets& budgets,
                      const ReturnSample& sample, const SolverConfig& config,
                      const SolveHooks& hooks) {
    validate(spec);
    config.validate();
    const RowMatrix& data = sample.data();
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (budgets.size() != d) {
        throw InputError("sgd: budgets have " + std::to_string(budgets.size()) +
                         " components, sample has " + std::to_string(d) + " assets");
    }
    if (n < config.batch_size) {
        throw InputError("sgd: sample has fewer rows than the batch size");
    }

    const StochasticObjective objective(spec);
    const double q = homogenization_exponent(spec);
    const Vector& b = budgets.values();

    // Starting point: budgets scaled along their ray, zeta at its exact
    // minimizer on the pilot rows.
    const RowMatrix pilot = pilot_rows(data, config.pilot_size, config.seed);
    const Vector loss_b = portfolio_losses(pilot, b);
    const double lambda =
        detail::ray_scale(empirical_risk(spec, detail::as_span(loss_b)), q, population_sd(loss_b));
    Vector y = hooks.initial_y ? *hooks.initial_y : Vector(lambda * b);
    if (y.size() != d) {
        throw InputError("sgd: initial allocation has the wrong dimension");
    }
    (void)RawAllocation(y);  // validates positivity
    const Vector loss0 = portfolio_losses(pilot, y);
    Vector zeta = objective.optimal_zeta(detail::as_span(loss0)).zeta;
    double sigma0 = population_sd(loss0);
    if (!(sigma0 > 0)) {
        sigma0 = std::max(1e-12, loss0.cwiseAbs().maxCoeff());
    }

    // Diagonal preconditioner: inverse barrier curvature for y, inverse
    // secant slope of the zeta-subgradient on the pilot rows for zeta.
    const Vector py = lambda * lambda * b;
    Vector pz(zeta.size());
    {
        const RawAllocation ry(y);
        for (Eigen::Index k = 0; k < zeta.size(); ++k) {
            double w = 0.5 * sigma0;
            double slope = 0;
            for (int attempt = 0; attempt < 8 && !(slope > 0); ++attempt, w *= 2.0) {
                ZetaState up{zeta}, down{zeta};
                up.zeta[k] += w;
                down.zeta[k] -= w;
                const double gu = objective.subgradient(budgets, ry, up, pilot).zeta[k];
                const double gd = objective.subgradient(budgets, ry, down, pilot).zeta[k];
                slope = (gu - gd) / (2.0 * w);
            }
            pz[k] = slope > 0 ? 1.0 / slope : sigma0;
        }
    }

    const auto batch = static_cast<std::size_t>(config.batch_size);
    const auto batches_per_epoch = (static_cast<std::size_t>(n) + batch - 1) / batch;
    const long total = static_cast<long>(batches_per_epoch) * config.epochs;
    const long averaged = std::max<long>(
        1, static_cast<long>(std::ceil(config.averaging_fraction * static_cast<double>(total))));
    const long average_from = total - averaged;  // iterates k > average_from are averaged
    const long trace_every = config.trace_every > 0 ? config.trace_every
                                                    : std::max<long>(1, total / 1000);
    const double floor = 1e-8 * y.mean();

    Vector sum_y = Vector::Zero(d);
    Vector sum_zeta = Vector::Zero(zeta.size());
    std::vector<TracePoint> trace;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    if (hooks.observer) {
        hooks.observer(0, y, zeta);
    }
    const detail::Stopwatch clock;
    long k = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(config.seed, Stream::shuffle, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t bi = 0; bi < batches_per_epoch; ++bi) {
            const std::size_t lo = bi * batch;
            const std::size_t hi = std::min(lo + batch, static_cast<std::size_t>(n));
            const RowMatrix rows = gather(data, order, lo, hi);

            const Subgradient g = objective.subgradient(budgets, RawAllocation(y), ZetaState{zeta}, rows);
            const double gamma = config.step.at(k);
            Vector dy = -gamma * py.cwiseProduct(g.y);
            Vector dz = -gamma * pz.cwiseProduct(g.zeta);
            if (config.step_clip > 0) {
                dy = dy.cwiseMax(-config.step_clip * y).cwiseMin(config.step_clip * y);
                dz = dz.cwiseMax(-sigma0).cwiseMin(sigma0);
            }
            y += dy;
            zeta += dz;
            ++k;
            if (!y.allFinite() || !zeta.allFinite()) {
                throw DivergenceError(static_cast<std::size_t>(k), "non-finite iterate");
            }
            y = y.cwiseMax(floor);

            const double value = objective.value(budgets, RawAllocation(y), ZetaState{zeta}, rows);
            if (!std::isfinite(value) || value > kDivergenceThreshold) {
                throw DivergenceError(static_cast<std::size_t>(k),
                                      "objective " + std::to_string(value) + " exceeds 1e12");
            }
            if (k > average_from) {
                sum_y += y;
                sum_zeta += zeta;
            }
            if (k % trace_every == 0 || k == total) {
                trace.push_back({k, value});
            }
            if (hooks.observer) {
                hooks.observer(k, y, zeta);
            }
        }
    }
    const double wall = clock.seconds();
    const auto count = static_cast<double>(total - average_from);
    return detail::finish_report(Method::sgd, &spec, budgets, sum_y / count, sum_zeta / count, std::move(trace),
                                 wall, k, true, config, hooks,
                                 sample_risk(spec, sample, config.fd_step));
}

}  // namespace riskbudget
