#include "matchfield/errors.hpp"
#include "matchfield/scenario.hpp"
#include "matchfield/types.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace matchfield;

namespace {

bool mentions(const ValidationReport &r, const std::string &needle)
{
    return std::any_of(r.violations.begin(), r.violations.end(),
                       [&](const std::string &v) { return v.find(needle) != std::string::npos; });
}

InputMatrices k1_table(double theta)
{
    InputMatrices m(1);
    m.eta(0, 0) = 1.0;
    m.theta(0, 0) = theta;
    m.recompute_b();
    m.sigma(0, 0, 0, 0) = 1.0;
    m.varsigma(0, 0, 0) = 1.0;
    return m;
}

} // namespace

TEST_CASE("type space ordering puts matched cells first, then unmatched")
{
    TypeSpace s(3);
    CHECK(s.extended_size() == 12);
    CHECK(s.index(0, 0) == 0);
    CHECK(s.index(1, 2) == 5);
    CHECK(s.index(0, kUnmatched) == 9);
    CHECK(s.index(2, kUnmatched) == 11);
    for (std::size_t i = 0; i < s.extended_size(); ++i)
        CHECK(s.index(s.at(i)) == i);
    CHECK_THROWS_AS(TypeSpace(0), InvalidInputs);
}

TEST_CASE("validate_distribution")
{
    SUBCASE("single type summing to one")
    {
        Distribution p(1, {0.4, 0.6});
        CHECK(validate_distribution(p).ok());
    }
    SUBCASE("asymmetric matched mass is flagged")
    {
        Distribution p(2);
        p.matched(0, 1) = 0.3;
        p.matched(1, 0) = 0.2;
        p.unmatched(0) = 0.25;
        p.unmatched(1) = 0.25;
        const auto r = validate_distribution(p);
        CHECK_FALSE(r.ok());
        CHECK(mentions(r, "asymmetric"));
    }
    SUBCASE("uniform over six cells")
    {
        Distribution p(2, std::vector<double>(6, 1.0 / 6.0));
        CHECK(validate_distribution(p).ok());
    }
    SUBCASE("negative and unnormalized mass")
    {
        Distribution p(1, {-0.1, 0.9});
        const auto r = validate_distribution(p);
        CHECK(mentions(r, "negative"));
        CHECK(mentions(r, "total mass"));
    }
}

TEST_CASE("validate_inputs")
{
    SUBCASE("single-type table is valid and b = 1 - theta")
    {
        const auto m = k1_table(0.5);
        CHECK(validate_inputs(m).ok());
        CHECK(m.b(0) == 0.5);
    }
    SUBCASE("eta row summing past one")
    {
        auto m = InputMatrices::identity(2);
        m.eta(0, 0) = 0.7;
        m.eta(0, 1) = 0.7;
        CHECK(mentions(validate_inputs(m), "eta row 1"));
    }
    SUBCASE("theta rows exceeding one make b negative")
    {
        auto m = InputMatrices::identity(2);
        m.theta(0, 0) = 0.6;
        m.theta(0, 1) = 0.6;
        m.theta(1, 0) = 0.1;
        m.theta(1, 1) = 0.1;
        m.recompute_b();
        CHECK(m.b(0) == doctest::Approx(-0.2));
        const auto r = validate_inputs(m);
        CHECK(mentions(r, "b[1]"));
        CHECK_FALSE(mentions(r, "b[2]"));
    }
    SUBCASE("asymmetric xi and sigma")
    {
        auto m = InputMatrices::identity(2);
        m.xi(0, 1) = 0.2;
        CHECK(mentions(validate_inputs(m), "xi[1][2]"));
        m = InputMatrices::identity(2);
        m.sigma(0, 1, 0, 1) = 0.5;
        m.sigma(0, 1, 1, 1) = 0.5;
        CHECK(mentions(validate_inputs(m), "mirror-symmetric"));
    }
}

TEST_CASE("normalization invariants imply persist + dissolve mass is one")
{
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 200; ++trial) {
        const int K = 1 + trial % 5;
        const auto m = testing::random_inputs(testing::random_distribution(K, gen), gen);
        REQUIRE(validate_inputs(m).ok());
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l) {
                double s = 0.0, v = 0.0;
                for (double x : m.sigma_block(k, l))
                    s += x;
                for (double x : m.varsigma_row(k, l))
                    v += x;
                CHECK(std::abs((1.0 - m.xi(k, l)) * s + m.xi(k, l) * v - 1.0) <= 1e-12);
            }
    }
}

TEST_CASE("evaluate_intensities")
{
    SUBCASE("constant mode returns the table unchanged")
    {
        IntensitySpec spec;
        spec.tables = {{k1_table(0.3)}};
        Distribution p(1, {0.2, 0.8});
        CHECK(evaluate_intensities(spec, 0, 1, p) == k1_table(0.3));
        CHECK(evaluate_intensities(spec, 0, 17, Distribution(1, {1.0, 0.0})) == k1_table(0.3));
    }
    SUBCASE("feedback mode evaluates min(c u, cap)")
    {
        IntensitySpec spec;
        spec.mode = IntensityMode::feedback;
        spec.tables = {{k1_table(0.0)}};
        spec.feedback = {{{{1.0}}, {{0.8}}}};
        const auto m = evaluate_intensities(spec, 0, 1, Distribution(1, {0.4, 0.6}));
        CHECK(m.theta(0, 0) == 0.6);
        CHECK(m.b(0) == doctest::Approx(0.4));
        const auto capped = evaluate_intensities(spec, 0, 1, Distribution(1, {0.0, 1.0}));
        CHECK(capped.theta(0, 0) == 0.8);
    }
    SUBCASE("feedback evaluation is pure")
    {
        IntensitySpec spec;
        spec.mode = IntensityMode::feedback;
        spec.tables = {{InputMatrices::identity(2)}};
        spec.feedback = {{{{0.5, 0.3}, {0.3, 0.4}}, {{1.0, 1.0}, {1.0, 1.0}}}};
        std::mt19937_64 gen(5);
        const auto p = testing::random_distribution(2, gen);
        CHECK(evaluate_intensities(spec, 0, 3, p) == evaluate_intensities(spec, 0, 3, p));
    }
    SUBCASE("schedule mode picks the period's table")
    {
        IntensitySpec spec;
        spec.mode = IntensityMode::schedule;
        spec.tables = {{k1_table(0.1), k1_table(0.2)}};
        Distribution p(1, {0.0, 1.0});
        CHECK(evaluate_intensities(spec, 0, 1, p).theta(0, 0) == 0.1);
        CHECK(evaluate_intensities(spec, 0, 2, p).theta(0, 0) == 0.2);
        CHECK_THROWS_AS(evaluate_intensities(spec, 0, 3, p), InvalidInputs);
    }
    SUBCASE("an evaluated table breaking invariants is rejected")
    {
        IntensitySpec spec;
        spec.mode = IntensityMode::feedback;
        spec.tables = {{InputMatrices::identity(2)}};
        spec.feedback = {{{{2.0, 2.0}, {0.0, 0.0}}, {{1.0, 1.0}, {1.0, 1.0}}}};
        Distribution p(2);
        p.unmatched(0) = 0.5;
        p.unmatched(1) = 0.5;
        CHECK_THROWS_AS(evaluate_intensities(spec, 0, 1, p), InvalidInputs);
    }
}

TEST_CASE("environment paths")
{
    EnvironmentProcess env;
    env.states = {"a", "b"};
    env.transition = {{0.0, 1.0}, {1.0, 0.0}};
    env.initial = 1;
    CHECK(env.validate(4).ok());
    CHECK(env.realize_path(4, 123) == std::vector<int>{1, 0, 1, 0});

    env.transition = {{0.5, 0.5}, {0.5, 0.5}};
    const auto a = env.realize_path(50, 9);
    CHECK(a == env.realize_path(50, 9));
    CHECK(a.size() == 50);

    env.path_mode = PathMode::fixed;
    env.path = {0, 0, 1};
    CHECK(env.realize_path(2, 1) == std::vector<int>{0, 0});
    CHECK_FALSE(env.validate(4).ok());

    env.transition = {{0.5, 0.6}, {0.5, 0.5}};
    CHECK_FALSE(env.validate(3).ok());
}
