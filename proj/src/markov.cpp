#include "matchfield/markov.hpp"

#include "matchfield/errors.hpp"
#include "matchfield/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace matchfield {

TransitionMatrix::TransitionMatrix(int types, int period, int env_state)
    : space_(types), period_(period), env_state_(env_state), z_(space_.extended_size() * space_.extended_size(), 0.0)
{
}

double TransitionMatrix::max_row_defect() const
{
    double worst = 0.0;
    for (std::size_t r = 0; r < dim(); ++r) {
        double s = 0.0;
        for (double x : row(r))
            s += x;
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

TransitionMatrix TransitionMatrix::identity(int types)
{
    TransitionMatrix z(types);
    for (std::size_t i = 0; i < z.dim(); ++i)
        z(i, i) = 1.0;
    return z;
}

ValidationReport validate_transition(const TransitionMatrix &z, double tol)
{
    ValidationReport report;
    for (std::size_t r = 0; r < z.dim(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < z.dim(); ++c) {
            const double x = z(r, c);
            if (!(x >= -tol && x <= 1.0 + tol))
                report.add(fmt::format("z[{}][{}] = {} outside [0,1]", r, c, x));
            s += x;
        }
        if (!(std::abs(s - 1.0) <= tol))
            report.add(fmt::format("row {} sums to {:.17g}", r, s));
    }
    return report;
}

TransitionMatrix build_transition_matrix(const InputMatrices &m, int period, int env_state)
{
    const int K = m.types();
    TransitionMatrix z(K, period, env_state);

    // Per pre-break-up pair (k1,l1): mass kept in each (k,l) and sent to each (k,J).
    std::vector<double> keep(static_cast<std::size_t>(K) * K * K * K), split(static_cast<std::size_t>(K) * K * K);
    for (int k1 = 0; k1 < K; ++k1)
        for (int l1 = 0; l1 < K; ++l1)
            for (int k = 0; k < K; ++k) {
                for (int l = 0; l < K; ++l)
                    keep[((k1 * K + l1) * K + k) * K + l] = (1.0 - m.xi(k1, l1)) * m.sigma(k1, l1, k, l);
                split[(k1 * K + l1) * K + k] = m.xi(k1, l1) * m.varsigma(k1, l1, k);
            }

    for (int src_own = 0; src_own < K; ++src_own) {
        // Source unmatched (k',J).
        const ExtendedType src{src_own, kUnmatched};
        for (int k = 0; k < K; ++k) {
            for (int l = 0; l < K; ++l) {
                double s = 0.0;
                for (int k1 = 0; k1 < K; ++k1)
                    for (int l1 = 0; l1 < K; ++l1)
                        s += keep[((k1 * K + l1) * K + k) * K + l] * m.theta(k1, l1) * m.eta(src_own, k1);
                z(src, ExtendedType{k, l}) = s;
            }
            double s = m.b(k) * m.eta(src_own, k);
            for (int k1 = 0; k1 < K; ++k1)
                for (int l1 = 0; l1 < K; ++l1)
                    s += split[(k1 * K + l1) * K + k] * m.theta(k1, l1) * m.eta(src_own, k1);
            z(src, ExtendedType{k, kUnmatched}) = s;
        }

        // Source matched (k',l').
        for (int src_partner = 0; src_partner < K; ++src_partner) {
            const ExtendedType msrc{src_own, src_partner};
            for (int k = 0; k < K; ++k) {
                for (int l = 0; l < K; ++l) {
                    double s = 0.0;
                    for (int k1 = 0; k1 < K; ++k1)
                        for (int l1 = 0; l1 < K; ++l1)
                            s += keep[((k1 * K + l1) * K + k) * K + l] * m.eta(src_own, k1)
                                 * m.eta(src_partner, l1);
                    z(msrc, ExtendedType{k, l}) = s;
                }
                double s = 0.0;
                for (int k1 = 0; k1 < K; ++k1)
                    for (int l1 = 0; l1 < K; ++l1)
                        s += split[(k1 * K + l1) * K + k] * m.eta(src_own, k1) * m.eta(src_partner, l1);
                z(msrc, ExtendedType{k, kUnmatched}) = s;
            }
        }
    }
    return z;
}

TransitionMatrix build_transition_matrix(const Distribution &p_prev, const IntensityFn &intensities, int period,
                                         int env_state, double tol)
{
    const StagedInputs staged = stage_inputs(p_prev, intensities, tol);
    return build_transition_matrix(staged.inputs, period, env_state);
}

Distribution evolve(const Distribution &p, const TransitionMatrix &z, double tol)
{
    if (p.types() != z.types())
        throw InvalidInputs("distribution and transition matrix disagree on the type count");
    require_valid(validate_transition(z, tol), "transition matrix");
    Distribution out(p.types());
    for (std::size_t src = 0; src < z.dim(); ++src) {
        const double mass = p[src];
        if (mass == 0.0)
            continue;
        const auto r = z.row(src);
        for (std::size_t dst = 0; dst < z.dim(); ++dst)
            out[dst] += mass * r[dst];
    }
    return out;
}

std::vector<TransitionMatrix> transition_matrices(const MeanfieldTrajectory &traj)
{
    std::vector<TransitionMatrix> out;
    out.reserve(traj.inputs.size());
    for (std::size_t n = 0; n < traj.inputs.size(); ++n)
        out.push_back(build_transition_matrix(traj.inputs[n], static_cast<int>(n + 1), traj.env_path[n]));
    return out;
}

std::vector<ExtendedType> simulate_agent_path(ExtendedType beta0, std::span<const TransitionMatrix> matrices,
                                              std::uint64_t seed)
{
    std::vector<ExtendedType> path{beta0};
    path.reserve(matrices.size() + 1);
    Rng rng(seed);
    std::size_t current = matrices.empty() ? 0 : matrices.front().space().index(beta0);
    for (const auto &z : matrices) {
        current = rng.categorical(z.row(current));
        path.push_back(z.space().at(current));
    }
    return path;
}

std::vector<ExtendedType> simulate_agent_path(ExtendedType beta0, const MeanfieldTrajectory &traj,
                                              std::uint64_t seed)
{
    const auto matrices = transition_matrices(traj);
    return simulate_agent_path(beta0, matrices, seed);
}

} // namespace matchfield
