#include "matchfield/agentsim.hpp"

#include "matchfield/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

namespace matchfield {

bool check_population(const Population &pop)
{
    const std::size_t N = pop.size();
    if (pop.partner.size() != N)
        return false;
    for (std::size_t i = 0; i < N; ++i) {
        if (pop.alpha[i] < 0 || pop.alpha[i] >= pop.types)
            return false;
        const AgentIndex j = pop.partner[i];
        if (j >= N || pop.partner[j] != i)
            return false;
    }
    return true;
}

Distribution empirical_distribution(const Population &pop)
{
    const int K = pop.types;
    const TypeSpace space(K);
    std::vector<std::int64_t> counts(space.extended_size(), 0);
    for (std::size_t i = 0; i < pop.size(); ++i)
        ++counts[space.index(pop.extended_type(i))];
    Distribution p(K);
    const double n = static_cast<double>(pop.size());
    for (std::size_t c = 0; c < counts.size(); ++c)
        p[c] = static_cast<double>(counts[c]) / n;
    return p;
}

namespace {

struct RoundingUnit {
    int own;
    int partner;      // kUnmatched for single agents
    std::int64_t size; // agents per unit
    double weight;     // target number of units
    std::int64_t count = 0;
    bool bumped = false;
};

template <typename T> void shuffle(std::vector<T> &v, Rng &rng)
{
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace

Population init_population(const Distribution &p0, std::int64_t agents, std::uint64_t seed, int replication)
{
    require_valid(validate_distribution(p0, 1e-9), "initial distribution");
    if (agents < 2)
        throw InvalidInputs("population needs at least 2 agents");
    if (agents > static_cast<std::int64_t>(std::numeric_limits<AgentIndex>::max()))
        throw InvalidInputs("population too large");

    const int K = p0.types();
    const double N = static_cast<double>(agents);
    std::vector<RoundingUnit> units;
    for (int k = 0; k < K; ++k)
        for (int l = k; l < K; ++l) {
            const double w = k == l ? N * p0.matched(k, k) / 2.0 : N * (p0.matched(k, l) + p0.matched(l, k)) / 2.0;
            units.push_back({k, l, 2, w});
        }
    for (int k = 0; k < K; ++k)
        units.push_back({k, kUnmatched, 1, N * p0.unmatched(k)});

    std::int64_t remaining = agents;
    for (auto &u : units) {
        u.count = static_cast<std::int64_t>(std::floor(u.weight));
        remaining -= u.count * u.size;
    }
    if (remaining < 0)
        throw InfeasibleRounding("initial distribution over-allocates the population");

    auto frac = [](const RoundingUnit &u) { return u.weight - std::floor(u.weight); };
    std::vector<std::size_t> order(units.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac(units[a]) > frac(units[b]); });
    for (std::size_t idx : order) {
        auto &u = units[idx];
        if (remaining >= u.size && frac(u) > 0.0) {
            ++u.count;
            u.bumped = true;
            remaining -= u.size;
        }
    }
    // Only a single agent can be left over: a pair unit did not fit.
    if (remaining == 1) {
        auto single = std::find_if(order.begin(), order.end(), [&](std::size_t i) {
            return units[i].size == 1 && !units[i].bumped;
        });
        if (single != order.end()) {
            ++units[*single].count;
            units[*single].bumped = true;
            remaining = 0;
        } else {
            auto pair = std::find_if(order.begin(), order.end(), [&](std::size_t i) {
                return units[i].size == 2 && !units[i].bumped;
            });
            auto drop = std::find_if(order.rbegin(), order.rend(), [&](std::size_t i) {
                return units[i].size == 1 && units[i].bumped;
            });
            if (pair != order.end() && drop != order.rend()) {
                ++units[*pair].count;
                units[*pair].bumped = true;
                --units[*drop].count;
                remaining = 0;
            }
        }
    }
    if (remaining != 0)
        throw InfeasibleRounding(
            fmt::format("cannot place {} leftover agent(s) within one unit per cell", remaining));

    std::vector<int> alpha;
    std::vector<AgentIndex> partner;
    alpha.reserve(agents);
    partner.reserve(agents);
    for (const auto &u : units) {
        for (std::int64_t c = 0; c < u.count; ++c) {
            const auto i = static_cast<AgentIndex>(alpha.size());
            if (u.partner == kUnmatched) {
                alpha.push_back(u.own);
                partner.push_back(i);
            } else {
                alpha.push_back(u.own);
                alpha.push_back(u.partner);
                partner.push_back(i + 1);
                partner.push_back(i);
            }
        }
    }

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(replication), 0, Stream::init));
    std::vector<AgentIndex> perm(alpha.size());
    std::iota(perm.begin(), perm.end(), AgentIndex{0});
    shuffle(perm, rng);

    Population pop;
    pop.types = K;
    pop.seed = seed;
    pop.replication = replication;
    pop.alpha.resize(alpha.size());
    pop.partner.resize(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        pop.alpha[perm[i]] = alpha[i];
        pop.partner[perm[i]] = perm[partner[i]];
    }
    return pop;
}

namespace {

Rng stream_rng(const Population &pop, Stream stream)
{
    return Rng(derive_seed(pop.seed, static_cast<std::uint64_t>(pop.replication),
                           static_cast<std::uint64_t>(pop.period), stream));
}

void require_types(const Population &pop, const InputMatrices &m)
{
    if (pop.types != m.types())
        throw InvalidInputs("population and intensity tables disagree on the type count");
}

} // namespace

EmpiricalSnapshot step_mutation(Population &pop, const InputMatrices &m)
{
    require_types(pop, m);
    ++pop.period;
    Rng rng = stream_rng(pop, Stream::mutation);
    for (auto &a : pop.alpha)
        a = static_cast<int>(rng.categorical(m.eta_row(a)));
    return {Stage::check, empirical_distribution(pop)};
}

std::vector<double> pair_targets(std::span<const std::int64_t> unmatched, const InputMatrices &m)
{
    const int K = m.types();
    std::vector<double> t(static_cast<std::size_t>(K) * K, 0.0);
    for (int k = 0; k < K; ++k) {
        const double uk = static_cast<double>(unmatched[k]);
        t[k * K + k] = m.theta(k, k) * uk / 2.0;
        for (int l = k + 1; l < K; ++l)
            t[k * K + l] = (m.theta(k, l) * uk + m.theta(l, k) * static_cast<double>(unmatched[l])) / 2.0;
    }
    return t;
}

std::vector<std::int64_t> round_pair_targets(std::span<const std::int64_t> unmatched, const InputMatrices &m,
                                             Rng &rng)
{
    const int K = m.types();
    const auto t = pair_targets(unmatched, m);
    auto cell = [K](int a, int b) { return a <= b ? a * K + b : b * K + a; };

    for (int k = 0; k < K; ++k) {
        double demand = 2.0 * t[cell(k, k)];
        for (int l = 0; l < K; ++l)
            if (l != k)
                demand += t[cell(k, l)];
        const double pool = static_cast<double>(unmatched[k]);
        if (demand > pool * (1.0 + 1e-9) + 1e-9)
            throw MatchingInfeasible(fmt::format(
                "expected {:.6g} unmatched type-{} agents to enter pairs but only {} are available", demand, k + 1,
                unmatched[k]));
    }

    std::vector<std::int64_t> n(t.size(), 0);
    std::vector<bool> rounded_up(t.size(), false);
    for (int k = 0; k < K; ++k)
        for (int l = k; l < K; ++l) {
            const std::size_t c = cell(k, l);
            const double fl = std::floor(t[c]);
            n[c] = static_cast<std::int64_t>(fl);
            if (rng.bernoulli(t[c] - fl)) {
                ++n[c];
                rounded_up[c] = true;
            }
        }

    auto used = [&](int k) {
        std::int64_t u = 2 * n[cell(k, k)];
        for (int l = 0; l < K; ++l)
            if (l != k)
                u += n[cell(k, l)];
        return u;
    };
    for (int k = 0; k < K; ++k) {
        while (used(k) > unmatched[k]) {
            // Undo a round-up touching pool k first, then the largest cell.
            int pick = -1;
            for (int l = 0; l < K && pick < 0; ++l)
                if (rounded_up[cell(k, l)] && n[cell(k, l)] > 0)
                    pick = l;
            if (pick < 0) {
                std::int64_t best = 0;
                for (int l = 0; l < K; ++l)
                    if (n[cell(k, l)] > best) {
                        best = n[cell(k, l)];
                        pick = l;
                    }
            }
            const std::size_t c = cell(k, pick);
            --n[c];
            rounded_up[c] = false;
        }
    }
    return n;
}

EmpiricalSnapshot step_matching(Population &pop, const InputMatrices &m)
{
    require_types(pop, m);
    const int K = pop.types;
    Rng rng = stream_rng(pop, Stream::matching);

    std::vector<std::vector<AgentIndex>> pools(K);
    for (std::size_t i = 0; i < pop.size(); ++i)
        if (!pop.is_matched(i))
            pools[pop.alpha[i]].push_back(static_cast<AgentIndex>(i));
    std::vector<std::int64_t> sizes(K);
    for (int k = 0; k < K; ++k)
        sizes[k] = static_cast<std::int64_t>(pools[k].size());

    const auto pairs = round_pair_targets(sizes, m, rng);
    for (auto &pool : pools)
        shuffle(pool, rng);

    std::vector<std::size_t> cursor(K, 0);
    for (int k = 0; k < K; ++k)
        for (int l = k; l < K; ++l)
            for (std::int64_t c = 0; c < pairs[k * K + l]; ++c) {
                const AgentIndex a = pools[k][cursor[k]++];
                const AgentIndex b = pools[l][cursor[l]++];
                pop.partner[a] = b;
                pop.partner[b] = a;
            }
    return {Stage::ccheck, empirical_distribution(pop)};
}

EmpiricalSnapshot step_breakup(Population &pop, const InputMatrices &m)
{
    require_types(pop, m);
    const int K = pop.types;
    Rng rng = stream_rng(pop, Stream::breakup);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const AgentIndex j = pop.partner[i];
        if (j <= i)
            continue;
        const int k = pop.alpha[i];
        const int l = pop.alpha[j];
        if (rng.bernoulli(m.xi(k, l))) {
            pop.partner[i] = static_cast<AgentIndex>(i);
            pop.partner[j] = j;
            pop.alpha[i] = static_cast<int>(rng.categorical(m.varsigma_row(k, l)));
            pop.alpha[j] = static_cast<int>(rng.categorical(m.varsigma_row(l, k)));
        } else {
            const auto joint = rng.categorical(m.sigma_block(k, l));
            pop.alpha[i] = static_cast<int>(joint / K);
            pop.alpha[j] = static_cast<int>(joint % K);
        }
    }
    return {Stage::hat, empirical_distribution(pop)};
}

SimulationResult run_simulation(const ScenarioConfig &scenario, const std::vector<int> &env_path, int replication,
                                double tol)
{
    if (static_cast<int>(env_path.size()) < scenario.horizon)
        throw InvalidInputs(fmt::format("environment path covers {} periods, horizon is {}", env_path.size(),
                                        scenario.horizon));
    SimulationResult result;
    result.replication = replication;
    result.env_path.assign(env_path.begin(), env_path.begin() + scenario.horizon);

    Population pop = init_population(scenario.p0, scenario.population, scenario.master_seed, replication);
    result.initial = empirical_distribution(pop);
    Distribution previous = result.initial;
    for (int n = 1; n <= scenario.horizon; ++n) {
        const int s = result.env_path[n - 1];
        PeriodSnapshots snap;
        snap.env_state = s;
        auto check = step_mutation(pop, evaluate_intensities(scenario.intensities, s, n, previous, tol));
        auto ccheck = step_matching(pop, evaluate_intensities(scenario.intensities, s, n, check.distribution, tol));
        auto hat = step_breakup(pop, evaluate_intensities(scenario.intensities, s, n, ccheck.distribution, tol));
        previous = hat.distribution;
        snap.stages[static_cast<int>(Stage::check)] = std::move(check.distribution);
        snap.stages[static_cast<int>(Stage::ccheck)] = std::move(ccheck.distribution);
        snap.stages[static_cast<int>(Stage::hat)] = std::move(hat.distribution);
        result.periods.push_back(std::move(snap));
    }
    result.final_population = std::move(pop);
    return result;
}

namespace {

constexpr std::uint8_t kDumpVersion = 1;

void put_u32(std::ostream &out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::ostream &out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(std::istream &in, int bytes)
{
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof())
            throw InvalidInputs("truncated population dump");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

} // namespace

void dump_population(const Population &pop, std::ostream &out)
{
    out.put(static_cast<char>(kDumpVersion));
    put_u64(out, pop.size());
    for (int a : pop.alpha)
        put_u32(out, static_cast<std::uint32_t>(static_cast<std::int32_t>(a)));
    for (AgentIndex p : pop.partner)
        put_u32(out, p);
}

Population load_population(std::istream &in, int types)
{
    const auto version = get_le(in, 1);
    if (version != kDumpVersion)
        throw InvalidInputs(fmt::format("unsupported population dump version {}", version));
    const auto N = get_le(in, 8);
    if (N > std::numeric_limits<AgentIndex>::max())
        throw InvalidInputs("population dump too large");
    Population pop;
    pop.types = types;
    pop.alpha.resize(N);
    pop.partner.resize(N);
    for (auto &a : pop.alpha)
        a = static_cast<std::int32_t>(static_cast<std::uint32_t>(get_le(in, 4)));
    for (auto &p : pop.partner)
        p = static_cast<AgentIndex>(get_le(in, 4));
    if (!check_population(pop))
        throw InvalidInputs("population dump violates the matching involution or type range");
    return pop;
}

} // namespace matchfield
