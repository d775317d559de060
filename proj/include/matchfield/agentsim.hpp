#pragma once

#include "matchfield/rng.hpp"
#include "matchfield/scenario.hpp"
#include "matchfield/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace matchfield {

using AgentIndex = std::uint32_t;

/// Finite population: agent types plus a partial matching stored as an
/// involution (partner[i] == i means unmatched).
struct Population {
    int types = 1;
    std::vector<int> alpha;
    std::vector<AgentIndex> partner;
    /// Last period started; step_mutation opens period + 1.
    int period = 0;
    std::uint64_t seed = 0;
    int replication = 0;

    std::size_t size() const { return alpha.size(); }
    bool is_matched(std::size_t i) const { return partner[i] != i; }
    /// Extended type of agent i, partner type recomputed from the matching.
    ExtendedType extended_type(std::size_t i) const
    {
        return {alpha[i], is_matched(i) ? alpha[partner[i]] : kUnmatched};
    }
};

/// True when partner is an involution and every type is in range.
bool check_population(const Population &pop);

struct EmpiricalSnapshot {
    Stage stage = Stage::hat;
    Distribution distribution;
};

/// Cross-sectional distribution: agent counts per extended type over N.
Distribution empirical_distribution(const Population &pop);

/// Agents laid out per extended type with counts rounded from N * p0 by
/// largest remainder in pair units (matched) and agent units (unmatched),
/// then shuffled with `seed`. Throws InfeasibleRounding if no consistent
/// layout exists.
Population init_population(const Distribution &p0, std::int64_t agents, std::uint64_t seed, int replication = 0);

/// Opens the next period and redraws every agent's type from its eta row.
/// Pairs are untouched. eta should be evaluated at the previous end-of-period
/// snapshot.
EmpiricalSnapshot step_mutation(Population &pop, const InputMatrices &m);

/// Expected new pair counts per type pair, row-major K x K with only k <= l
/// filled: off-diagonal (theta[k][l] U_k + theta[l][k] U_l) / 2, diagonal
/// theta[k][k] U_k / 2.
std::vector<double> pair_targets(std::span<const std::int64_t> unmatched, const InputMatrices &m);

/// Integer pair counts: floor plus a Bernoulli draw on the fractional part,
/// then clamped so no pool is overdrawn. Throws MatchingInfeasible when the
/// expected demand on a pool already exceeds its size.
std::vector<std::int64_t> round_pair_targets(std::span<const std::int64_t> unmatched, const InputMatrices &m,
                                             Rng &rng);

/// Forms new pairs among unmatched agents; existing pairs persist. theta/b
/// should be evaluated at the post-mutation snapshot.
EmpiricalSnapshot step_matching(Population &pop, const InputMatrices &m);

/// Visits each pair once: dissolves with probability xi, otherwise redraws
/// both types jointly from sigma; dissolving sides draw independently from
/// varsigma. xi/sigma/varsigma should be evaluated at the post-matching
/// snapshot.
EmpiricalSnapshot step_breakup(Population &pop, const InputMatrices &m);

struct PeriodSnapshots {
    int env_state = 0;
    std::array<Distribution, 3> stages; // indexed by Stage
};

struct SimulationResult {
    int replication = 0;
    std::vector<int> env_path;
    Distribution initial;
    /// periods[n-1] holds period n.
    std::vector<PeriodSnapshots> periods;
    Population final_population;
};

/// Init plus `horizon` periods, intensities re-evaluated at the live
/// empirical distributions. Deterministic given (master_seed, replication,
/// env_path).
SimulationResult run_simulation(const ScenarioConfig &scenario, const std::vector<int> &env_path, int replication,
                                double tol = 1e-12);

/// Binary dump: version byte, N (u64), alpha (i32 x N), partner (u32 x N),
/// little-endian.
void dump_population(const Population &pop, std::ostream &out);
/// Restores alpha and partner; `types` bounds the type labels. Throws
/// InvalidInputs on a malformed stream.
Population load_population(std::istream &in, int types);

} // namespace matchfield
