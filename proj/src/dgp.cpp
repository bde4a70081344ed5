#include "riskbudget/errors.hpp"
#include "riskbudget/models.hpp"
#include "riskbudget/rng.hpp"

#include <string>

namespace riskbudget {
namespace {

void check_range(double lo, double hi, const char* name) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
        throw InputError(std::string("DGPSpec: invalid range for ") + name);
    }
}

double draw(Rng& rng, double lo, double hi) {
    if (lo == hi) {
        return lo;
    }
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// rho * 11' + (1 - rho) * normalize(A'A / k + eps I), A a k x d Gaussian factor matrix.
Matrix random_correlation(Rng& rng, Eigen::Index d, int factors, double ridge, double rho) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix A(factors, d);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            A(i, j) = normal(rng);
        }
    }
    Matrix C = A.transpose() * A / static_cast<double>(factors);
    C.diagonal().array() += ridge;
    const Vector inv_sd = C.diagonal().array().rsqrt();
    C = inv_sd.asDiagonal() * C * inv_sd.asDiagonal();
    Matrix R = Matrix::Constant(d, d, rho) + (1.0 - rho) * C;
    R.diagonal().setOnes();
    return 0.5 * (R + R.transpose());
}

}  // namespace

StudentTMixture synth_dgp(Eigen::Index d, std::uint64_t seed, const DGPSpec& spec) {
    if (d < 2) {
        throw InputError("synth_dgp: d must be at least 2");
    }
    check_range(spec.weight_min, spec.weight_max, "weight");
    check_range(spec.location_calm_min, spec.location_calm_max, "location_calm");
    check_range(spec.location_stress_min, spec.location_stress_max, "location_stress");
    check_range(spec.vol_min, spec.vol_max, "vol");
    check_range(spec.stress_vol_multiplier_min, spec.stress_vol_multiplier_max,
                "stress_vol_multiplier");
    if (!(spec.weight_min > 0) || !(spec.weight_max < 1)) {
        throw InputError("DGPSpec: weight range must lie in (0, 1)");
    }
    if (!(spec.vol_min > 0) || !(spec.stress_vol_multiplier_min > 0)) {
        throw InputError("DGPSpec: volatilities must be positive");
    }
    if (!(spec.nu_calm > 1) || !(spec.nu_stress > 1)) {
        throw InputError("DGPSpec: degrees of freedom must exceed 1");
    }
    for (double rho : {spec.avg_correlation_calm, spec.avg_correlation_stress}) {
        if (!(rho >= 0.0 && rho < 1.0)) {
            throw InputError("DGPSpec: average correlation must lie in [0, 1)");
        }
    }
    if (!(spec.ridge > 0) || spec.factors < 0) {
        throw InputError("DGPSpec: ridge must be positive and factors non-negative");
    }
    const int factors = spec.factors > 0 ? spec.factors
                                         : std::max<int>(2, static_cast<int>(d / 4));

    Rng rng(derive_seed(seed, Stream::dgp));
    const double p = draw(rng, spec.weight_min, spec.weight_max);

    Vector mu_calm(d), mu_stress(d), vol_calm(d), vol_stress(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        mu_calm[i] = draw(rng, spec.location_calm_min, spec.location_calm_max);
        mu_stress[i] = draw(rng, spec.location_stress_min, spec.location_stress_max);
        vol_calm[i] = draw(rng, spec.vol_min, spec.vol_max);
        vol_stress[i] = vol_calm[i] *
                        draw(rng, spec.stress_vol_multiplier_min, spec.stress_vol_multiplier_max);
    }
    const Matrix R_calm = random_correlation(rng, d, factors, spec.ridge, spec.avg_correlation_calm);
    const Matrix R_stress =
        random_correlation(rng, d, factors, spec.ridge, spec.avg_correlation_stress);

    // Scale matrices chosen so that each component's covariance has the drawn
    // volatilities (when nu > 2).
    auto scale_for = [](const Vector& vol, const Matrix& R, double nu) {
        const double shrink = nu > 2.0 ? (nu - 2.0) / nu : 1.0;
        Matrix S = shrink * (vol.asDiagonal() * R * vol.asDiagonal());
        return Matrix(0.5 * (S + S.transpose()));
    };

    return StudentTMixture({
        {p, mu_calm, scale_for(vol_calm, R_calm, spec.nu_calm), spec.nu_calm},
        {1.0 - p, mu_stress, scale_for(vol_stress, R_stress, spec.nu_stress), spec.nu_stress},
    });
}

}  // namespace riskbudget
