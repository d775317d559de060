#pragma once

#include "matchfield/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace matchfield {

enum class PathMode { fixed, sampled };

/// Finite-state common environment. Period n = 1..horizon is assigned one
/// state; period 1 is `initial`, later periods follow `transition`.
struct EnvironmentProcess {
    std::vector<std::string> states{"default"};
    std::vector<std::vector<double>> transition{{1.0}};
    int initial = 0;
    PathMode path_mode = PathMode::sampled;
    /// Used when path_mode == fixed; entry n-1 is the state of period n.
    std::vector<int> path;

    int state_count() const { return static_cast<int>(states.size()); }
    ValidationReport validate(int horizon, double tol = 1e-12) const;

    /// Realized path of length `horizon` (entry n-1 for period n).
    std::vector<int> realize_path(int horizon, std::uint64_t seed) const;

    friend bool operator==(const EnvironmentProcess &, const EnvironmentProcess &) = default;
};

enum class IntensityMode { constant, schedule, feedback };

/// Proportional-search rule: theta[k][l](p) = min(c[k][l] * p(l,J), cap[k][l]).
struct FeedbackRule {
    std::vector<std::vector<double>> c;
    std::vector<std::vector<double>> cap;

    friend bool operator==(const FeedbackRule &, const FeedbackRule &) = default;
};

struct IntensitySpec {
    IntensityMode mode = IntensityMode::constant;
    /// constant/feedback: tables[state] has one entry;
    /// schedule: tables[state][n-1] for period n.
    std::vector<std::vector<InputMatrices>> tables;
    /// feedback only, one per state.
    std::vector<FeedbackRule> feedback;

    friend bool operator==(const IntensitySpec &, const IntensitySpec &) = default;
};

/// Evaluated intensities as a function of the distribution they condition on.
using IntensityFn = std::function<InputMatrices(const Distribution &)>;

/// Tables for (env_state, period n) evaluated at p. Throws InvalidInputs when
/// the result breaks an InputMatrices invariant.
InputMatrices evaluate_intensities(const IntensitySpec &spec, int env_state, int n, const Distribution &p,
                                   double tol = 1e-12);

IntensityFn bind_intensities(const IntensitySpec &spec, int env_state, int n, double tol = 1e-12);

/// Constant function returning m.
IntensityFn constant_intensities(InputMatrices m);

struct ScenarioConfig {
    int types = 1;
    int horizon = 1;
    std::int64_t population = 2;
    std::uint64_t master_seed = 0;
    int replications = 1;
    Distribution p0;
    EnvironmentProcess environment;
    IntensitySpec intensities;

    /// Static validity: p0, environment, table shapes and every fixed table.
    ValidationReport validate(double tol = 1e-12) const;

    /// Environment path of one replication.
    std::vector<int> environment_path(int replication) const;

    friend bool operator==(const ScenarioConfig &, const ScenarioConfig &) = default;
};

} // namespace matchfield
