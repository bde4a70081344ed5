#include "riskbudget/core.hpp"
#include "riskbudget/errors.hpp"
#include "riskbudget/rng.hpp"

#include <doctest.h>

using namespace riskbudget;

TEST_CASE("budgets validate the open simplex") {
    CHECK_NOTHROW(Budgets(Vector::Constant(4, 0.25)));
    CHECK_THROWS_AS(Budgets(Vector::Constant(4, 0.3)), InputError);
    Vector b(3);
    b << 0.5, 0.5, 0.0;
    CHECK_THROWS_AS(Budgets{b}, InputError);
    b << 0.5, 0.6, -0.1;
    CHECK_THROWS_AS(Budgets{b}, InputError);
    CHECK_THROWS_AS(Budgets{Vector()}, InputError);
    CHECK(Budgets::equal(5).values().sum() == doctest::Approx(1.0));
}

TEST_CASE("raw allocations must be strictly positive and finite") {
    Vector y(2);
    y << 1.0, std::nan("");
    CHECK_THROWS_AS(RawAllocation{y}, InputError);
    y << 1.0, 0.0;
    CHECK_THROWS_AS(RawAllocation{y}, InputError);
}

TEST_CASE("normalize sums to one exactly and is idempotent") {
    Rng rng(7);
    std::uniform_real_distribution<double> u(0.01, 100.0);
    for (int t = 0; t < 200; ++t) {
        Vector y(7);
        for (auto& v : y) {
            v = u(rng);
        }
        const Weights w = normalize(RawAllocation(y));
        CHECK(w.values().sum() == 1.0);
        const Weights again = normalize(RawAllocation(w.values()));
        CHECK(again.values() == w.values());
        CHECK((w.values() - y / y.sum()).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("l1 accuracy is 100 times the L1 distance") {
    Vector a(3), b(3);
    a << 0.2, 0.3, 0.5;
    b << 0.25, 0.25, 0.5;
    CHECK(l1_accuracy(a, b) == doctest::Approx(10.0));
    CHECK_THROWS_AS(l1_accuracy(a, Vector(Vector::Ones(2))), InputError);
}

TEST_CASE("euler audit of a linear risk function") {
    // R(y) = c'y has contributions c_i y_i.
    Vector c(3);
    c << 1.0, 2.0, 3.0;
    RiskFunction r{[&](const Vector& y) { return c.dot(y); }, [&](const Vector&) { return c; }};
    Vector t(3);
    t << 6.0 / 11, 3.0 / 11, 2.0 / 11;
    const auto rep = euler_audit(Weights(t), r, Budgets::equal(3));
    CHECK(rep.contributions.sum() == doctest::Approx(rep.total_risk));
    CHECK(rep.max_relative_budget_error() < 1e-12);
}

TEST_CASE("central differences are exact on quadratics") {
    auto f = [](const Vector& y) { return y.squaredNorm() + 3 * y[0] * y[1]; };
    Vector y(2);
    y << 1.5, -0.5;
    const Vector g = central_difference_gradient(f, y, 1e-3);
    CHECK(g[0] == doctest::Approx(2 * 1.5 + 3 * -0.5).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(2 * -0.5 + 3 * 1.5).epsilon(1e-9));
}

TEST_CASE("seed fan-out is deterministic and separates streams") {
    CHECK(derive_seed({1, 2, 3}) == derive_seed({1, 2, 3}));
    CHECK(derive_seed({1, 2, 3}) != derive_seed({1, 3, 2}));
    CHECK(derive_seed(5, Stream::sample, 0) != derive_seed(5, Stream::shuffle, 0));
    CHECK(derive_seed(5, Stream::sample, 0) != derive_seed(5, Stream::sample, 1));
}
