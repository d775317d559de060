#include "matchfield/meanfield.hpp"

#include "matchfield/errors.hpp"

#include <cmath>
#include <fmt/format.h>

namespace matchfield {

namespace {

void check_types(const Distribution &p, const InputMatrices &m)
{
    if (p.types() != m.types())
        throw InvalidInputs(fmt::format("distribution has {} types, tables have {}", p.types(), m.types()));
}

void check_eta(const InputMatrices &m, double tol)
{
    const int K = m.types();
    for (int k = 0; k < K; ++k) {
        double row = 0.0;
        for (int j = 0; j < K; ++j) {
            const double x = m.eta(k, j);
            if (!(x >= 0.0 && x <= 1.0))
                throw InvalidInputs(fmt::format("eta[{}][{}] = {} outside [0,1]", k + 1, j + 1, x));
            row += x;
        }
        if (!(std::abs(row - 1.0) <= tol))
            throw InvalidInputs(fmt::format("eta row {} sums to {:.17g}", k + 1, row));
    }
}

void check_breakup(const InputMatrices &m, double tol)
{
    const int K = m.types();
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) {
            if (!(m.xi(k, l) >= 0.0 && m.xi(k, l) <= 1.0))
                throw InvalidInputs(fmt::format("xi[{}][{}] = {} outside [0,1]", k + 1, l + 1, m.xi(k, l)));
            double s = 0.0;
            for (double x : m.sigma_block(k, l))
                s += x;
            if (!(std::abs(s - 1.0) <= tol))
                throw InvalidInputs(fmt::format("sigma[{}][{}] sums to {:.17g}", k + 1, l + 1, s));
            double v = 0.0;
            for (double x : m.varsigma_row(k, l))
                v += x;
            if (!(std::abs(v - 1.0) <= tol))
                throw InvalidInputs(fmt::format("varsigma[{}][{}] sums to {:.17g}", k + 1, l + 1, v));
        }
}

} // namespace

Distribution mutation_step(const Distribution &p, const InputMatrices &m, double tol)
{
    check_types(p, m);
    check_eta(m, tol);
    const int K = p.types();
    Distribution out(K);
    for (int k1 = 0; k1 < K; ++k1) {
        for (int l1 = 0; l1 < K; ++l1) {
            const double mass = p.matched(k1, l1);
            if (mass == 0.0)
                continue;
            for (int k = 0; k < K; ++k) {
                const double ek = m.eta(k1, k) * mass;
                for (int l = 0; l < K; ++l)
                    out.matched(k, l) += ek * m.eta(l1, l);
            }
        }
        const double single = p.unmatched(k1);
        for (int k = 0; k < K; ++k)
            out.unmatched(k) += m.eta(k1, k) * single;
    }
    return out;
}

Distribution matching_step(const Distribution &p_check, const InputMatrices &m, double tol)
{
    check_types(p_check, m);
    const int K = p_check.types();
    for (int k = 0; k < K; ++k)
        for (int l = k + 1; l < K; ++l) {
            const double forward = m.theta(k, l) * p_check.unmatched(k);
            const double backward = m.theta(l, k) * p_check.unmatched(l);
            if (!(std::abs(forward - backward) <= tol))
                throw MatchingInfeasible(fmt::format(
                    "matched mass created for ({},{}) is {:.17g} but for ({},{}) is {:.17g}", k + 1, l + 1,
                    forward, l + 1, k + 1, backward));
        }

    Distribution out = p_check;
    for (int k = 0; k < K; ++k) {
        const double single = p_check.unmatched(k);
        for (int l = 0; l < K; ++l)
            out.matched(k, l) += m.theta(k, l) * single;
        out.unmatched(k) = m.b(k) * single;
    }
    return out;
}

Distribution breakup_step(const Distribution &p_ccheck, const InputMatrices &m, double tol)
{
    check_types(p_ccheck, m);
    check_breakup(m, tol);
    const int K = p_ccheck.types();
    Distribution out(K);
    for (int k = 0; k < K; ++k)
        out.unmatched(k) = p_ccheck.unmatched(k);
    for (int k1 = 0; k1 < K; ++k1)
        for (int l1 = 0; l1 < K; ++l1) {
            const double mass = p_ccheck.matched(k1, l1);
            if (mass == 0.0)
                continue;
            const double persist = (1.0 - m.xi(k1, l1)) * mass;
            const double dissolve = m.xi(k1, l1) * mass;
            for (int k = 0; k < K; ++k) {
                for (int l = 0; l < K; ++l)
                    out.matched(k, l) += persist * m.sigma(k1, l1, k, l);
                out.unmatched(k) += dissolve * m.varsigma(k1, l1, k);
            }
        }
    return out;
}

GammaStages gamma(const Distribution &p, const InputMatrices &m, double tol)
{
    GammaStages s;
    s.check = mutation_step(p, m, tol);
    s.ccheck = matching_step(s.check, m, tol);
    s.hat = breakup_step(s.ccheck, m, tol);
    return s;
}

StagedInputs stage_inputs(const Distribution &p, const IntensityFn &intensities, double tol)
{
    StagedInputs staged{intensities(p), {}, {}};
    staged.check = mutation_step(p, staged.inputs, tol);
    staged.inputs.take_matching(intensities(staged.check));
    staged.ccheck = matching_step(staged.check, staged.inputs, tol);
    staged.inputs.take_breakup(intensities(staged.ccheck));
    return staged;
}

GammaStages gamma(const Distribution &p, const IntensityFn &intensities, double tol)
{
    StagedInputs staged = stage_inputs(p, intensities, tol);
    GammaStages s;
    s.hat = breakup_step(staged.ccheck, staged.inputs, tol);
    s.check = std::move(staged.check);
    s.ccheck = std::move(staged.ccheck);
    return s;
}

Distribution gamma_closed_form(const Distribution &p, const InputMatrices &m)
{
    check_types(p, m);
    const int K = p.types();

    // post-mutation masses
    std::vector<double> pm(static_cast<std::size_t>(K) * K, 0.0), pj(K, 0.0);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) {
            double s = 0.0;
            for (int k1 = 0; k1 < K; ++k1)
                for (int l1 = 0; l1 < K; ++l1)
                    s += m.eta(k1, k) * m.eta(l1, l) * p.matched(k1, l1);
            pm[k * K + l] = s;
        }
    for (int k = 0; k < K; ++k) {
        double s = 0.0;
        for (int l = 0; l < K; ++l)
            s += p.unmatched(l) * m.eta(l, k);
        pj[k] = s;
    }

    Distribution out(K);
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < K; ++l) {
            double existing = 0.0, fresh = 0.0;
            for (int k1 = 0; k1 < K; ++k1)
                for (int l1 = 0; l1 < K; ++l1) {
                    const double keep = (1.0 - m.xi(k1, l1)) * m.sigma(k1, l1, k, l);
                    existing += keep * pm[k1 * K + l1];
                    fresh += keep * m.theta(k1, l1) * pj[k1];
                }
            out.matched(k, l) = existing + fresh;
        }
        double existing = 0.0, fresh = 0.0;
        for (int k1 = 0; k1 < K; ++k1)
            for (int l1 = 0; l1 < K; ++l1) {
                const double split = m.xi(k1, l1) * m.varsigma(k1, l1, k);
                existing += split * pm[k1 * K + l1];
                fresh += split * m.theta(k1, l1) * pj[k1];
            }
        out.unmatched(k) = m.b(k) * pj[k] + existing + fresh;
    }
    return out;
}

MeanfieldTrajectory iterate_meanfield(const ScenarioConfig &scenario, const std::vector<int> &env_path,
                                      double tol)
{
    if (static_cast<int>(env_path.size()) < scenario.horizon)
        throw InvalidInputs(fmt::format("environment path covers {} periods, horizon is {}", env_path.size(),
                                        scenario.horizon));
    MeanfieldTrajectory traj;
    traj.env_path.assign(env_path.begin(), env_path.begin() + scenario.horizon);
    traj.check.push_back(scenario.p0);
    traj.ccheck.push_back(scenario.p0);
    traj.hat.push_back(scenario.p0);
    for (int n = 1; n <= scenario.horizon; ++n) {
        const auto fn = bind_intensities(scenario.intensities, traj.env_path[n - 1], n, tol);
        StagedInputs staged = stage_inputs(traj.hat.back(), fn, tol);
        traj.hat.push_back(breakup_step(staged.ccheck, staged.inputs, tol));
        traj.check.push_back(std::move(staged.check));
        traj.ccheck.push_back(std::move(staged.ccheck));
        traj.inputs.push_back(std::move(staged.inputs));
    }
    return traj;
}

} // namespace matchfield
