#include "matchfield/scenario.hpp"

#include "matchfield/errors.hpp"
#include "matchfield/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace matchfield {

ValidationReport EnvironmentProcess::validate(int horizon, double tol) const
{
    ValidationReport report;
    const int S = state_count();
    if (S < 1) {
        report.add("environment needs at least one state");
        return report;
    }
    if (static_cast<int>(transition.size()) != S)
        report.add(fmt::format("environment transition has {} rows, expected {}", transition.size(), S));
    for (std::size_t r = 0; r < transition.size(); ++r) {
        if (static_cast<int>(transition[r].size()) != S) {
            report.add(fmt::format("environment transition row {} has {} entries, expected {}", r,
                                   transition[r].size(), S));
            continue;
        }
        double total = 0.0;
        for (double x : transition[r]) {
            if (!(x >= 0.0 && x <= 1.0))
                report.add(fmt::format("environment transition row {} has entry {} outside [0,1]", r, x));
            total += x;
        }
        if (!(std::abs(total - 1.0) <= tol))
            report.add(fmt::format("environment transition row {} sums to {:.17g}", r, total));
    }
    if (initial < 0 || initial >= S)
        report.add(fmt::format("environment initial state {} out of range", initial));
    if (path_mode == PathMode::fixed) {
        if (static_cast<int>(path.size()) < horizon)
            report.add(fmt::format("fixed environment path has {} periods, horizon is {}", path.size(),
                                   horizon));
        for (int s : path)
            if (s < 0 || s >= S) {
                report.add(fmt::format("fixed environment path references state {}", s));
                break;
            }
    }
    return report;
}

std::vector<int> EnvironmentProcess::realize_path(int horizon, std::uint64_t seed) const
{
    if (path_mode == PathMode::fixed)
        return {path.begin(), path.begin() + horizon};

    std::vector<int> out;
    out.reserve(horizon);
    Rng rng(seed);
    int state = initial;
    for (int n = 1; n <= horizon; ++n) {
        if (n > 1)
            state = static_cast<int>(rng.categorical(transition[state]));
        out.push_back(state);
    }
    return out;
}

namespace {

const InputMatrices &select_table(const IntensitySpec &spec, int env_state, int n)
{
    if (env_state < 0 || env_state >= static_cast<int>(spec.tables.size()))
        throw InvalidInputs(fmt::format("environment state {} has no intensity tables", env_state));
    const auto &per_state = spec.tables[env_state];
    const std::size_t slot = spec.mode == IntensityMode::schedule ? static_cast<std::size_t>(n - 1) : 0;
    if (n < 1 || slot >= per_state.size())
        throw InvalidInputs(fmt::format("no intensity table for state {} period {}", env_state, n));
    return per_state[slot];
}

} // namespace

InputMatrices evaluate_intensities(const IntensitySpec &spec, int env_state, int n, const Distribution &p,
                                   double tol)
{
    InputMatrices m = select_table(spec, env_state, n);
    if (m.types() != p.types())
        throw InvalidInputs("intensity tables and distribution disagree on the type count");

    if (spec.mode == IntensityMode::feedback) {
        const FeedbackRule &rule = spec.feedback.at(env_state);
        const int K = m.types();
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l)
                m.theta(k, l) = std::min(rule.c[k][l] * p.unmatched(l), rule.cap[k][l]);
        m.recompute_b();
    }

    require_valid(validate_inputs(m, tol),
                  fmt::format("intensities at state {} period {}", env_state, n));
    return m;
}

IntensityFn bind_intensities(const IntensitySpec &spec, int env_state, int n, double tol)
{
    return [&spec, env_state, n, tol](const Distribution &p) {
        return evaluate_intensities(spec, env_state, n, p, tol);
    };
}

IntensityFn constant_intensities(InputMatrices m)
{
    return [m = std::move(m)](const Distribution &) { return m; };
}

ValidationReport ScenarioConfig::validate(double tol) const
{
    ValidationReport report;
    auto merge = [&report](const ValidationReport &other, const std::string &prefix) {
        for (const auto &v : other.violations)
            report.add(prefix + v);
    };

    if (types < 1)
        report.add("types must be at least 1");
    if (horizon < 1)
        report.add("horizon must be at least 1");
    if (population < 2)
        report.add("population must be at least 2");
    if (replications < 1)
        report.add("replications must be at least 1");
    if (!report.ok())
        return report;

    if (p0.types() != types)
        report.add(fmt::format("p0 has {} types, expected {}", p0.types(), types));
    else
        merge(validate_distribution(p0, tol), "p0: ");

    merge(environment.validate(horizon, tol), "");

    const int S = environment.state_count();
    if (static_cast<int>(intensities.tables.size()) != S) {
        report.add(fmt::format("intensities define {} states, environment has {}", intensities.tables.size(),
                               S));
        return report;
    }
    for (int s = 0; s < S; ++s) {
        const auto &per_state = intensities.tables[s];
        const std::string &label = environment.states[s];
        if (intensities.mode == IntensityMode::schedule) {
            if (static_cast<int>(per_state.size()) < horizon)
                report.add(fmt::format("state '{}' schedules {} periods, horizon is {}", label, per_state.size(),
                                       horizon));
        } else if (per_state.size() != 1) {
            report.add(fmt::format("state '{}' must have exactly one table", label));
        }
        for (std::size_t t = 0; t < per_state.size(); ++t) {
            const auto &m = per_state[t];
            const std::string prefix = intensities.mode == IntensityMode::schedule
                                           ? fmt::format("state '{}' period {}: ", label, t + 1)
                                           : fmt::format("state '{}': ", label);
            if (m.types() != types) {
                report.add(prefix + "table type count mismatch");
                continue;
            }
            merge(validate_inputs(m, tol), prefix);
        }
    }

    if (intensities.mode == IntensityMode::feedback) {
        if (static_cast<int>(intensities.feedback.size()) != S) {
            report.add("feedback mode needs c and cap for every environment state");
            return report;
        }
        for (int s = 0; s < S; ++s) {
            const auto &rule = intensities.feedback[s];
            const std::string &label = environment.states[s];
            auto check = [&](const std::vector<std::vector<double>> &mat, const char *name, bool unit) {
                if (static_cast<int>(mat.size()) != types) {
                    report.add(fmt::format("state '{}': {} must be {}x{}", label, name, types, types));
                    return;
                }
                for (int k = 0; k < types; ++k) {
                    if (static_cast<int>(mat[k].size()) != types) {
                        report.add(fmt::format("state '{}': {} must be {}x{}", label, name, types, types));
                        return;
                    }
                    for (int l = 0; l < types; ++l) {
                        const double x = mat[k][l];
                        if (!std::isfinite(x) || x < 0.0 || (unit && x > 1.0))
                            report.add(fmt::format("state '{}': {}[{}][{}] = {} out of range", label, name,
                                                   k + 1, l + 1, x));
                    }
                }
            };
            check(rule.c, "c", false);
            check(rule.cap, "cap", true);
        }
    } else if (!intensities.feedback.empty()) {
        report.add("c/cap are only valid in feedback mode");
    }
    return report;
}

std::vector<int> ScenarioConfig::environment_path(int replication) const
{
    return environment.realize_path(
        horizon, derive_seed(master_seed, static_cast<std::uint64_t>(replication), 0, Stream::environment));
}

} // namespace matchfield
