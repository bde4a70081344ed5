#include "riskbudget/errors.hpp"
#include "riskbudget/risk.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace riskbudget {
namespace {

struct RuParams {
    double alpha = 0;
    double beta = 1;
    double delta = 0;
};

RuParams ru_params(const RiskMeasureSpec& spec) {
    if (const auto* s = std::get_if<ExpectedShortfall>(&spec)) {
        return {s->alpha, 1.0, 0.0};
    }
    if (const auto* s = std::get_if<ESMeanMixture>(&spec)) {
        return {s->alpha, s->beta, s->delta};
    }
    throw InputError("ru objective requires an ES or ES/mean spec, got " + label(spec));
}

struct DevParams {
    double a = 1;
    double b = 1;
    double p = 2;
    double delta = 0;
};

DevParams dev_params(const RiskMeasureSpec& spec) {
    if (std::holds_alternative<Volatility>(spec)) {
        return {};
    }
    if (const auto* s = std::get_if<Deviation>(&spec)) {
        return {s->a, s->b, s->p, 0.0};
    }
    if (const auto* s = std::get_if<DeviationPlusMean>(&spec)) {
        return {s->a, s->b, s->p, s->delta};
    }
    throw InputError("deviation objective requires a deviation spec, got " + label(spec));
}

void check_inputs(const Budgets& budgets, const RawAllocation& y, const ZetaState& zeta,
                  const Eigen::Ref<const RowMatrix>& batch, Eigen::Index zeta_len) {
    if (budgets.size() != y.size() || batch.cols() != y.size()) {
        throw InputError("objective: budgets, allocation and batch dimensions differ");
    }
    if (batch.rows() < 1) {
        throw InputError("objective: empty batch");
    }
    if (zeta.zeta.size() != zeta_len) {
        throw InputError("objective: zeta has length " + std::to_string(zeta.zeta.size()) +
                         ", expected " + std::to_string(zeta_len));
    }
    if (!zeta.zeta.allFinite()) {
        throw InputError("objective: zeta must be finite");
    }
}

double log_barrier(const Budgets& budgets, const RawAllocation& y) {
    return budgets.values().dot(y.values().array().log().matrix());
}

Vector barrier_gradient(const Budgets& budgets, const RawAllocation& y) {
    return -budgets.values().cwiseQuotient(y.values());
}

// Sum of batch rows whose loss exceeds zeta, and their count.
std::pair<Vector, double> active_rows(const Eigen::Ref<const RowMatrix>& batch, const Vector& losses,
                                      double zeta) {
    Vector sum = Vector::Zero(batch.cols());
    double count = 0;
    for (Eigen::Index i = 0; i < losses.size(); ++i) {
        if (losses[i] > zeta) {
            sum += batch.row(i).transpose();
            count += 1;
        }
    }
    return {sum, count};
}

double sorted_order_statistic(std::span<const double> losses, double level) {
    std::vector<double> x(losses.begin(), losses.end());
    const auto n = static_cast<double>(x.size());
    auto k = static_cast<std::ptrdiff_t>(std::ceil(n * level)) - 1;
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(x.size()) - 1);
    std::nth_element(x.begin(), x.begin() + k, x.end());
    return x[static_cast<std::size_t>(k)];
}

}  // namespace

double ru_objective(const RiskMeasureSpec& spec, const Budgets& budgets, const RawAllocation& y,
                    const ZetaState& zeta, const Eigen::Ref<const RowMatrix>& batch) {
    const RuParams prm = ru_params(spec);
    check_inputs(budgets, y, zeta, batch, 1);
    const Vector L = portfolio_losses(batch, y.values());
    const double z = zeta.zeta[0];
    const double hinge = (L.array() - z).max(0.0).mean();
    return prm.beta * (z + hinge / (1.0 - prm.alpha)) + prm.delta * L.mean() -
           log_barrier(budgets, y);
}

Subgradient ru_subgradient(const RiskMeasureSpec& spec, const Budgets& budgets,
                           const RawAllocation& y, const ZetaState& zeta,
                           const Eigen::Ref<const RowMatrix>& batch) {
    const RuParams prm = ru_params(spec);
    check_inputs(budgets, y, zeta, batch, 1);
    const Vector L = portfolio_losses(batch, y.values());
    const auto n = static_cast<double>(batch.rows());
    const auto [sum_x, count] = active_rows(batch, L, zeta.zeta[0]);
    Subgradient g;
    g.zeta = Vector::Constant(1, prm.beta * (1.0 - count / (n * (1.0 - prm.alpha))));
    g.y = -prm.beta * sum_x / (n * (1.0 - prm.alpha)) + barrier_gradient(budgets, y);
    if (prm.delta != 0.0) {
        g.y -= prm.delta * batch.colwise().mean().transpose();
    }
    return g;
}

double spectral_objective(const Spectral& spec, const SpectralGrid& grid, const Budgets& budgets,
                          const RawAllocation& y, const ZetaState& zeta,
                          const Eigen::Ref<const RowMatrix>& batch) {
    check_inputs(budgets, y, zeta, batch, grid.s.size());
    const Vector L = portfolio_losses(batch, y.values());
    double v = 0;
    for (Eigen::Index k = 0; k < grid.s.size(); ++k) {
        const double z = zeta.zeta[k];
        v += grid.coeff[k] * (z + (L.array() - z).max(0.0).mean() / (1.0 - grid.s[k]));
    }
    if (spec.subtract_mean) {
        v -= L.mean();
    }
    return v - log_barrier(budgets, y);
}

Subgradient spectral_subgradient(const Spectral& spec, const SpectralGrid& grid,
                                 const Budgets& budgets, const RawAllocation& y,
                                 const ZetaState& zeta, const Eigen::Ref<const RowMatrix>& batch) {
    check_inputs(budgets, y, zeta, batch, grid.s.size());
    const Vector L = portfolio_losses(batch, y.values());
    const auto n = static_cast<double>(batch.rows());
    Subgradient g{barrier_gradient(budgets, y), Vector(grid.s.size())};
    for (Eigen::Index k = 0; k < grid.s.size(); ++k) {
        const auto [sum_x, count] = active_rows(batch, L, zeta.zeta[k]);
        const double w = grid.coeff[k] / (1.0 - grid.s[k]);
        g.zeta[k] = grid.coeff[k] - w * count / n;
        g.y -= w * sum_x / n;
    }
    if (spec.subtract_mean) {
        g.y += batch.colwise().mean().transpose();
    }
    return g;
}

double deviation_objective(const RiskMeasureSpec& spec, const Budgets& budgets,
                           const RawAllocation& y, const ZetaState& zeta,
                           const Eigen::Ref<const RowMatrix>& batch) {
    const DevParams prm = dev_params(spec);
    check_inputs(budgets, y, zeta, batch, 1);
    const Vector L = portfolio_losses(batch, y.values());
    const double z = zeta.zeta[0];
    const double ap = std::pow(prm.a, prm.p);
    const double bp = std::pow(prm.b, prm.p);
    double s = 0;
    for (Eigen::Index i = 0; i < L.size(); ++i) {
        const double r = L[i] - z;
        if (r > 0) {
            s += ap * std::pow(r, prm.p);
        } else if (r < 0) {
            s += bp * std::pow(-r, prm.p);
        }
    }
    double v = s / static_cast<double>(L.size());
    if (prm.delta != 0.0) {
        v += prm.delta * L.mean();
    }
    return v - log_barrier(budgets, y);
}

Subgradient deviation_subgradient(const RiskMeasureSpec& spec, const Budgets& budgets,
                                  const RawAllocation& y, const ZetaState& zeta,
                                  const Eigen::Ref<const RowMatrix>& batch) {
    const DevParams prm = dev_params(spec);
    check_inputs(budgets, y, zeta, batch, 1);
    const Vector L = portfolio_losses(batch, y.values());
    const auto n = static_cast<double>(batch.rows());
    const double z = zeta.zeta[0];
    const double ap = std::pow(prm.a, prm.p);
    const double bp = std::pow(prm.b, prm.p);
    double dz = 0;
    Vector dy = Vector::Zero(y.size());
    for (Eigen::Index i = 0; i < L.size(); ++i) {
        const double r = L[i] - z;
        if (r > 0) {
            const double w = prm.p * ap * std::pow(r, prm.p - 1.0);
            dz -= w;
            dy -= w * batch.row(i).transpose();
        } else if (r < 0) {
            const double w = prm.p * bp * std::pow(-r, prm.p - 1.0);
            dz += w;
            dy += w * batch.row(i).transpose();
        }
    }
    Subgradient g{dy / n + barrier_gradient(budgets, y), Vector::Constant(1, dz / n)};
    if (prm.delta != 0.0) {
        g.y -= prm.delta * batch.colwise().mean().transpose();
    }
    return g;
}

double volatility_objective(const Budgets& budgets, const RawAllocation& y, const ZetaState& zeta,
                            const Eigen::Ref<const RowMatrix>& batch) {
    return deviation_objective(Volatility{}, budgets, y, zeta, batch);
}

// StochasticObjective -----------------------------------------------------------

StochasticObjective::StochasticObjective(RiskMeasureSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    if (const auto* s = std::get_if<Spectral>(&spec_)) {
        grid_ = spectral_grid(*s);
    }
    zeta_size_ = std::max<Eigen::Index>(1, riskbudget::zeta_size(spec_));
}

double StochasticObjective::value(const Budgets& budgets, const RawAllocation& y,
                                  const ZetaState& zeta,
                                  const Eigen::Ref<const RowMatrix>& batch) const {
    if (is_es_family(spec_)) {
        return ru_objective(spec_, budgets, y, zeta, batch);
    }
    if (const auto* s = std::get_if<Spectral>(&spec_)) {
        return spectral_objective(*s, grid_, budgets, y, zeta, batch);
    }
    return deviation_objective(spec_, budgets, y, zeta, batch);
}

Subgradient StochasticObjective::subgradient(const Budgets& budgets, const RawAllocation& y,
                                             const ZetaState& zeta,
                                             const Eigen::Ref<const RowMatrix>& batch) const {
    if (is_es_family(spec_)) {
        return ru_subgradient(spec_, budgets, y, zeta, batch);
    }
    if (const auto* s = std::get_if<Spectral>(&spec_)) {
        return spectral_subgradient(*s, grid_, budgets, y, zeta, batch);
    }
    return deviation_subgradient(spec_, budgets, y, zeta, batch);
}

ZetaState StochasticObjective::optimal_zeta(std::span<const double> losses) const {
    if (losses.empty()) {
        throw InputError("optimal_zeta: empty loss vector");
    }
    if (const auto* s = std::get_if<ExpectedShortfall>(&spec_)) {
        return {Vector::Constant(1, sorted_order_statistic(losses, s->alpha))};
    }
    if (const auto* s = std::get_if<ESMeanMixture>(&spec_)) {
        return {Vector::Constant(1, sorted_order_statistic(losses, s->alpha))};
    }
    if (std::holds_alternative<Spectral>(spec_)) {
        std::vector<double> x(losses.begin(), losses.end());
        std::sort(x.begin(), x.end());
        const auto n = static_cast<double>(x.size());
        Vector z(grid_.s.size());
        for (Eigen::Index k = 0; k < z.size(); ++k) {
            auto idx = static_cast<std::ptrdiff_t>(std::ceil(n * grid_.s[k])) - 1;
            idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(x.size()) - 1);
            z[k] = x[static_cast<std::size_t>(idx)];
        }
        return {z};
    }
    const DevParams prm = dev_params(spec_);
    return {Vector::Constant(1, minimize_deviation(losses, prm.a, prm.b, prm.p).zeta)};
}

}  // namespace riskbudget
