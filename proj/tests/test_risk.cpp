#include "oracles.hpp"

#include "riskbudget/errors.hpp"
#include "riskbudget/model_io.hpp"
#include "riskbudget/risk.hpp"
#include "riskbudget/rng.hpp"

#include <doctest.h>

using namespace riskbudget;

namespace {

std::span<const double> view(const std::vector<double>& v) { return {v.data(), v.size()}; }

StudentTMixture single_t4(Eigen::Index d) {
    return StudentTMixture({{1.0, Vector::Zero(d), Matrix::Identity(d, d), 4.0}});
}

StudentTMixture daily_model() {
    return std::get<StudentTMixture>(read_model_file(RB_DATA_DIR "/models/tmix4_daily.json"));
}

oracle::MixtureLaw loss_law(const StudentTMixture& m, const Vector& y) {
    oracle::MixtureLaw law;
    for (const auto& c : m.components()) {
        law.parts.push_back({c.weight, {-y.dot(c.location), std::sqrt(y.dot(c.scale * y)), c.nu}});
    }
    return law;
}

oracle::MixtureLaw loss_law(const GaussianMixture& m, const Vector& y) {
    oracle::MixtureLaw law;
    for (const auto& c : m.components()) {
        law.parts.push_back({c.weight,
                             {-y.dot(c.location), std::sqrt(y.dot(c.covariance * y)),
                              std::numeric_limits<double>::infinity()}});
    }
    return law;
}

// Hyndman-Fan type 7 written from its definition.
double quantile7(std::vector<double> x, double alpha) {
    std::sort(x.begin(), x.end());
    const double h = (static_cast<double>(x.size()) - 1.0) * alpha;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - std::floor(h)) * (x[hi] - x[lo]);
}

double ru_value(const std::vector<double>& x, double zeta, double alpha) {
    double s = 0;
    for (double v : x) {
        s += std::max(v - zeta, 0.0);
    }
    return zeta + s / (static_cast<double>(x.size()) * (1.0 - alpha));
}

double dev_value(const std::vector<double>& x, double zeta, double a, double b, double p) {
    double s = 0;
    for (double v : x) {
        const double r = v - zeta;
        s += r > 0 ? std::pow(a * r, p) : std::pow(-b * r, p);
    }
    return s / static_cast<double>(x.size());
}

std::vector<double> random_losses(Rng& rng, std::size_t n) {
    std::student_t_distribution<double> t(3.0);
    std::vector<double> x(n);
    for (auto& v : x) {
        v = t(rng);
    }
    return x;
}

}  // namespace

TEST_CASE("standard t4 VaR and ES") {
    const StudentTMixture m = single_t4(1);
    const RawAllocation y(Vector::Ones(1));
    CHECK(var_tmix(m, y, 0.95) == doctest::Approx(oracle::t4_quantile(0.95)).epsilon(1e-10));
    CHECK(var_tmix(m, y, 0.95) == doctest::Approx(2.131847).epsilon(1e-6));
    const double es = oracle::es_from_quantile(oracle::t4_quantile, 0.95);
    CHECK(es_tmix(m, y, 0.95) == doctest::Approx(es).epsilon(1e-9));
    CHECK(es_tmix(m, y, 0.95) == doctest::Approx(3.20287).epsilon(1e-6));
}

TEST_CASE("t mixture ES equals the minimum of the RU function") {
    const StudentTMixture m = daily_model();
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    for (int t = 0; t < 5; ++t) {
        Vector y(4);
        for (auto& v : y) {
            v = u(rng);
        }
        const double alpha = 0.9 + 0.02 * t;
        const auto [zeta, value] = oracle::ru_minimum(loss_law(m, y), alpha);
        CHECK(var_tmix(m, RawAllocation(y), alpha) == doctest::Approx(zeta).epsilon(1e-9));
        CHECK(es_tmix(m, RawAllocation(y), alpha) == doctest::Approx(value).epsilon(1e-9));
    }
}

TEST_CASE("gaussian mixture ES equals the minimum of the RU function") {
    const GaussianMixture m = std::get<GaussianMixture>(read_model_file(RB_DATA_DIR "/models/gmix3_skewed.json"));
    Vector y(3);
    y << 0.5, 0.2, 0.3;
    for (double alpha : {0.9, 0.95, 0.99}) {
        const auto [zeta, value] = oracle::ru_minimum(loss_law(m, y), alpha);
        CHECK(var_gmix(m, RawAllocation(y), alpha) == doctest::Approx(zeta).epsilon(1e-9));
        CHECK(es_gmix(m, RawAllocation(y), alpha) == doctest::Approx(value).epsilon(1e-9));
    }
}

TEST_CASE("ES gradients match finite differences and satisfy Euler") {
    const StudentTMixture m = daily_model();
    Vector y(4);
    y << 0.3, 0.2, 0.1, 0.4;
    const Vector g = es_tmix_gradient(m, RawAllocation(y), 0.95);
    const Vector fd = oracle::fd_gradient([&](const Vector& v) { return es_tmix(m, RawAllocation(v), 0.95); }, y, 1e-6);
    CHECK((g - fd).norm() / g.norm() < 1e-7);
    CHECK(y.dot(g) == doctest::Approx(es_tmix(m, RawAllocation(y), 0.95)).epsilon(1e-12));

    const GaussianMixture gm = std::get<GaussianMixture>(read_model_file(RB_DATA_DIR "/models/gmix3_skewed.json"));
    Vector z(3);
    z << 0.5, 0.2, 0.3;
    const Vector gg = es_gmix_gradient(gm, RawAllocation(z), 0.95);
    const Vector gfd = oracle::fd_gradient([&](const Vector& v) { return es_gmix(gm, RawAllocation(v), 0.95); }, z, 1e-6);
    CHECK((gg - gfd).norm() / gg.norm() < 1e-7);
}

TEST_CASE("ES dominates VaR and scales with the allocation") {
    const StudentTMixture m = daily_model();
    Rng rng(8);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int t = 0; t < 20; ++t) {
        Vector y(4);
        for (auto& v : y) {
            v = u(rng);
        }
        const double alpha = 0.8 + 0.01 * t;
        const RawAllocation ya(y);
        CHECK(es_tmix(m, ya, alpha) >= var_tmix(m, ya, alpha));
        const double lambda = u(rng);
        CHECK(es_tmix(m, RawAllocation(lambda * y), alpha) ==
              doctest::Approx(lambda * es_tmix(m, ya, alpha)).epsilon(1e-10));
    }
}

TEST_CASE("volatility value and gradient") {
    Matrix s(2, 2);
    s << 0.04, 0.01, 0.01, 0.09;
    Vector y(2);
    y << 1.0, 2.0;
    const auto [v, g] = volatility_value_and_gradient(s, RawAllocation(y));
    CHECK(v == doctest::Approx(std::sqrt(0.04 + 4 * 0.01 + 4 * 0.09)));
    const Vector fd = oracle::fd_gradient(
        [&](const Vector& x) { return std::sqrt(x.dot(s * x)); }, y, 1e-6);
    CHECK((g - fd).norm() < 1e-8);
}

TEST_CASE("empirical quantile and ES on a small sample") {
    std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
    for (double a : {0.0, 0.1, 0.5, 0.73, 0.95, 1.0}) {
        CHECK(empirical_var_method7(view(x), a) == doctest::Approx(quantile7(x, a)).epsilon(1e-14));
    }
    std::vector<double> ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(empirical_var_method7(view(ten), 0.8) == doctest::Approx(8.2));
    CHECK(empirical_es(view(ten), 0.8) == doctest::Approx(9.5));
    CHECK(discrete_es(view(ten), 0.8) == doctest::Approx(9.5));
    CHECK_THROWS_AS(empirical_var_method7({}, 0.5), InputError);
    CHECK_THROWS_AS(empirical_var_method7(view(ten), 1.5), InputError);
    CHECK_THROWS_AS(discrete_es(view(ten), 1.0), InputError);
}

TEST_CASE("discrete ES is the exact minimum over all kinks") {
    Rng rng(12);
    for (int t = 0; t < 30; ++t) {
        const auto x = random_losses(rng, 37 + 7 * t);
        const double alpha = 0.5 + 0.015 * t;
        double best = std::numeric_limits<double>::infinity();
        for (double z : x) {
            best = std::min(best, ru_value(x, z, alpha));
        }
        CHECK(discrete_es(view(x), alpha) == doctest::Approx(best).epsilon(1e-13));
    }
}

TEST_CASE("deviation minimizer agrees with golden-section search") {
    Rng rng(4);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        for (int t = 0; t < 5; ++t) {
            const auto x = random_losses(rng, 101);
            const double a = u(rng), b = u(rng);
            const auto res = minimize_deviation(view(x), a, b, p);
            const auto s = oracle::sorted(x);
            const double z = oracle::golden_section(
                [&](double c) { return dev_value(x, c, a, b, p); }, s.front(), s.back(), 1e-12);
            CHECK(res.value == doctest::Approx(dev_value(x, z, a, b, p)).epsilon(1e-9));
            CHECK(res.value <= dev_value(x, z, a, b, p) + 1e-12);
        }
    }
    std::vector<double> x{1, 2, 3, 10};
    const auto med = minimize_deviation(view(x), 1, 1, 1);
    CHECK(med.value == doctest::Approx(dev_value(x, 2.5, 1, 1, 1)));
    const auto mean = minimize_deviation(view(x), 1, 1, 2);
    CHECK(mean.zeta == doctest::Approx(4.0));
}

TEST_CASE("empirical risks: homogeneity and translation behaviour") {
    Rng rng(21);
    const auto x = random_losses(rng, 500);
    std::vector<double> scaled(x.size()), shifted(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        scaled[i] = 2.5 * x[i];
        shifted[i] = x[i] + 1.7;
    }
    const std::vector<RiskMeasureSpec> specs{
        Volatility{}, ExpectedShortfall{0.9}, ESMeanMixture{1.0, -1.0, 0.9}, Spectral{0.1, 12, false},
        Spectral{0.1, 12, true}, Deviation{1.0, 1.0, 1.0}, Deviation{0.8, 0.3, 2.0},
        DeviationPlusMean{1.0, 1.0, 1.0, 1.0}};
    for (const auto& spec : specs) {
        CAPTURE(label(spec));
        const double r = empirical_risk(spec, view(x));
        CHECK(empirical_risk(spec, view(scaled)) == doctest::Approx(2.5 * r).epsilon(1e-10));
    }
    for (const auto& spec : {RiskMeasureSpec{Volatility{}}, RiskMeasureSpec{Deviation{1.0, 1.0, 1.0}},
                             RiskMeasureSpec{Deviation{0.8, 0.3, 2.0}}, RiskMeasureSpec{Spectral{0.1, 12, true}},
                             RiskMeasureSpec{ESMeanMixture{1.0, -1.0, 0.9}}}) {
        CAPTURE(label(spec));
        CHECK(empirical_risk(spec, view(shifted)) ==
              doctest::Approx(empirical_risk(spec, view(x))).epsilon(1e-10));
    }
    CHECK(empirical_risk(ExpectedShortfall{0.9}, view(shifted)) ==
          doctest::Approx(empirical_risk(ExpectedShortfall{0.9}, view(x)) + 1.7).epsilon(1e-10));
    double m = 0;
    for (double v : x) {
        m += v;
    }
    m /= static_cast<double>(x.size());
    CHECK(empirical_risk(Volatility{}, view(x)) ==
          doctest::Approx(std::sqrt(dev_value(x, m, 1, 1, 2))).epsilon(1e-12));
}

TEST_CASE("spectral grid") {
    const SpectralGrid g = spectral_grid(Spectral{0.05, 20, false});
    CHECK(g.coeff.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.coeff.minCoeff() > 0);
    CHECK(g.s[0] > 0);
    CHECK(g.s[g.s.size() - 1] <= kSpectralMaxLevel);
    for (Eigen::Index k = 1; k < g.s.size(); ++k) {
        CHECK(g.s[k] > g.s[k - 1]);
    }
    // Weights rise towards the tail up to the mode of (1 - s) h'(s).
    Eigen::Index mode = 0;
    g.coeff.maxCoeff(&mode);
    for (Eigen::Index k = 1; k <= mode; ++k) {
        CHECK(g.coeff[k] > g.coeff[k - 1]);
    }
    CHECK_THROWS_AS(spectral_grid(Spectral{1.0, 20, false}), InputError);
    CHECK_THROWS_AS(spectral_grid(Spectral{0.05, 0, false}), InputError);

    Rng rng(5);
    const auto x = random_losses(rng, 300);
    double mix = 0;
    for (Eigen::Index k = 0; k < g.s.size(); ++k) {
        mix += g.coeff[k] * discrete_es(view(x), g.s[k]);
    }
    CHECK(empirical_risk(Spectral{0.05, 20, false}, view(x)) == doctest::Approx(mix).epsilon(1e-13));
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(validate(ExpectedShortfall{1.0}), InputError);
    CHECK_THROWS_AS(validate(ExpectedShortfall{0.0}), InputError);
    CHECK_THROWS_AS(validate(Deviation{-1.0, 1.0, 2.0}), InputError);
    CHECK_THROWS_AS(validate(Deviation{1.0, 1.0, 0.5}), InputError);
    CHECK_THROWS_AS(validate(DeviationPlusMean{1.0, 1.0, 2.0, 1.0}), InputError);
    CHECK_THROWS_AS(validate(Spectral{0.0, 20, false}), InputError);
    CHECK(homogenization_exponent(Volatility{}) == 2.0);
    CHECK(homogenization_exponent(ExpectedShortfall{}) == 1.0);
    CHECK(homogenization_exponent(Deviation{1.0, 1.0, 3.0}) == 3.0);
    CHECK(label(ESMeanMixture{}) == "ES_0.95-E");
    CHECK(label(Spectral{0.05, 20, true}) == "rho_h(c=0.05)-E");
    CHECK(label(DeviationPlusMean{}) == "MAD+E");
}

TEST_CASE("exact risk functions agree with their sample counterparts") {
    const StudentTMixture m = daily_model();
    const ReturnModel model = m;
    const ReturnSample s = sample_tmix(m, 400000, 17);
    Vector y(4);
    y << 0.25, 0.25, 0.25, 0.25;
    for (const auto& spec : {RiskMeasureSpec{ExpectedShortfall{0.95}}, RiskMeasureSpec{ESMeanMixture{1.0, -1.0, 0.95}},
                             RiskMeasureSpec{Spectral{0.05, 20, false}}}) {
        CAPTURE(label(spec));
        const RiskFunction exact = exact_risk(spec, model);
        const RiskFunction sample = sample_risk(spec, s);
        CHECK(sample.value(y) == doctest::Approx(exact.value(y)).epsilon(0.02));
        const Vector fd = oracle::fd_gradient(exact.value, y, 1e-6);
        CHECK((exact.gradient(y) - fd).norm() / fd.norm() < 1e-6);
    }
    CHECK_THROWS_AS(exact_risk(Deviation{}, model), InputError);
    CHECK(!has_exact_risk(Deviation{}));
}

TEST_CASE("spectral exact risk is the ES mixture") {
    const StudentTMixture m = daily_model();
    const Spectral spec{0.05, 20, true};
    const SpectralGrid g = spectral_grid(spec);
    Vector y(4);
    y << 0.1, 0.2, 0.3, 0.4;
    double mix = 0;
    for (Eigen::Index k = 0; k < g.s.size(); ++k) {
        mix += g.coeff[k] * es_tmix(m, RawAllocation(y), g.s[k]);
    }
    mix += y.dot(m.mean());
    CHECK(exact_risk(spec, m).value(y) == doctest::Approx(mix).epsilon(1e-12));
}
