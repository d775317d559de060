#include "matchfield/errors.hpp"
#include "matchfield/markov.hpp"
#include "matchfield/scenario_io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace matchfield;

namespace {

double max_abs_diff(const Distribution &a, const Distribution &b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

InputMatrices k1_half()
{
    auto m = InputMatrices::identity(1);
    m.theta(0, 0) = 0.5;
    m.recompute_b();
    return m;
}

} // namespace

TEST_CASE("identity inputs give the identity matrix")
{
    for (int K = 1; K <= 4; ++K) {
        const auto z = build_transition_matrix(InputMatrices::identity(K));
        for (std::size_t i = 0; i < z.dim(); ++i)
            for (std::size_t j = 0; j < z.dim(); ++j)
                CHECK(z(i, j) == (i == j ? 1.0 : 0.0));
    }
}

TEST_CASE("single-type entries")
{
    const auto z = build_transition_matrix(k1_half());
    const ExtendedType pair{0, 0}, single{0, kUnmatched};
    CHECK(z(single, pair) == 0.5);
    CHECK(z(single, single) == 0.5);
    CHECK(z(pair, pair) == 1.0);
    CHECK(z(pair, single) == 0.0);

    const auto out = evolve(Distribution(1, {0.4, 0.6}), z);
    CHECK(out.matched(0, 0) == 0.7);
    CHECK(out.unmatched(0) == 0.3);
}

TEST_CASE("randomized rows are stochastic and p z agrees with gamma")
{
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 300; ++trial) {
        const int K = 1 + trial % 5;
        const auto p = testing::random_distribution(K, gen);
        const auto m = testing::random_inputs(p, gen);
        const auto z = build_transition_matrix(m);
        CHECK(z.max_row_defect() <= 1e-12);
        CHECK(validate_transition(z).ok());
        CHECK(max_abs_diff(evolve(p, z), gamma(p, m).hat) <= 1e-10);
    }
}

TEST_CASE("evolve rejects bad matrices")
{
    Distribution p(1, {0.4, 0.6});
    auto z = TransitionMatrix::identity(1);
    z(0, 0) = 0.5;
    CHECK_THROWS_AS(evolve(p, z), InvalidInputs);
    CHECK_THROWS_AS(evolve(Distribution(2), TransitionMatrix::identity(1)), InvalidInputs);
}

TEST_CASE("z depends on the previous distribution only through the staged ones")
{
    // Identical eta rows erase where the mass came from: any two p with the
    // same matched and unmatched totals have the same post-mutation law.
    auto base = InputMatrices::identity(2);
    for (int k = 0; k < 2; ++k) {
        base.eta(k, 0) = 0.3;
        base.eta(k, 1) = 0.7;
    }
    IntensityFn fn = [&](const Distribution &p) {
        auto m = base;
        const double u0 = p.unmatched(0), u1 = p.unmatched(1);
        m.theta(0, 0) = 0.4 * u0;
        m.theta(1, 1) = 0.4 * u1;
        m.theta(0, 1) = 0.2 * u1;
        m.theta(1, 0) = 0.2 * u0;
        m.recompute_b();
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l)
                m.xi(k, l) = 0.1 + 0.5 * p.matched(k, l);
        return m;
    };

    Distribution a(2), b(2), c(2);
    a.matched(0, 0) = 0.2;
    a.unmatched(0) = 0.5;
    a.unmatched(1) = 0.3;
    b.matched(1, 1) = 0.1;
    b.matched(0, 1) = b.matched(1, 0) = 0.05;
    b.unmatched(1) = 0.8;
    c.matched(0, 0) = 0.4;
    c.unmatched(0) = 0.6;

    const auto sa = stage_inputs(a, fn), sb = stage_inputs(b, fn);
    REQUIRE(max_abs_diff(sa.check, sb.check) <= 1e-15);
    const auto za = build_transition_matrix(a, fn), zb = build_transition_matrix(b, fn);
    const auto zc = build_transition_matrix(c, fn);
    double same = 0.0, differ = 0.0;
    for (std::size_t i = 0; i < za.dim(); ++i)
        for (std::size_t j = 0; j < za.dim(); ++j) {
            same = std::max(same, std::abs(za(i, j) - zb(i, j)));
            differ = std::max(differ, std::abs(za(i, j) - zc(i, j)));
        }
    CHECK(same <= 1e-15);
    CHECK(differ > 1e-3);
}

TEST_CASE("transition matrices along a trajectory reproduce it")
{
    const auto sc = load_scenario(testing::scenario_dir() / "k3_feedback.json");
    const auto traj = iterate_meanfield(sc, sc.environment_path(0));
    const auto zs = transition_matrices(traj);
    REQUIRE(static_cast<int>(zs.size()) == sc.horizon);
    for (int n = 1; n <= sc.horizon; ++n) {
        CHECK(zs[n - 1].period() == n);
        CHECK(zs[n - 1].env_state() == traj.env_path[n - 1]);
        CHECK(max_abs_diff(evolve(traj.hat[n - 1], zs[n - 1]), traj.hat[n]) <= 1e-10);
    }
}

TEST_CASE("agent paths")
{
    SUBCASE("identity inputs keep the agent where it starts")
    {
        const auto sc = load_scenario(testing::scenario_dir() / "identity.json");
        const auto traj = iterate_meanfield(sc, sc.environment_path(0));
        for (const ExtendedType b0 : {ExtendedType{0, 1}, ExtendedType{1, kUnmatched}}) {
            const auto path = simulate_agent_path(b0, traj, 5);
            REQUIRE(static_cast<int>(path.size()) == sc.horizon + 1);
            for (const auto &b : path)
                CHECK(b == b0);
        }
    }
    SUBCASE("absorbing design: once matched, the pair cell never changes")
    {
        auto m = InputMatrices::identity(2);
        m.theta(0, 0) = 0.5;
        m.theta(0, 1) = 0.5;
        m.theta(1, 0) = 0.5;
        m.theta(1, 1) = 0.5;
        m.recompute_b();
        std::vector<TransitionMatrix> zs(30, build_transition_matrix(m));
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto path = simulate_agent_path({static_cast<int>(seed % 2), kUnmatched}, zs, seed);
            CHECK_FALSE(path[1].partner == kUnmatched);
            for (std::size_t n = 2; n < path.size(); ++n)
                CHECK(path[n] == path[1]);
        }
    }
    SUBCASE("same seed, same path")
    {
        const auto sc = load_scenario(testing::scenario_dir() / "k2_feedback.json");
        const auto traj = iterate_meanfield(sc, sc.environment_path(0));
        CHECK(simulate_agent_path({0, kUnmatched}, traj, 42) == simulate_agent_path({0, kUnmatched}, traj, 42));
    }
}
