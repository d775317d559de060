#pragma once

#include "matchfield/scenario.hpp"
#include "matchfield/types.hpp"

#include <vector>

namespace matchfield {

/// Expected post-mutation distribution. Only the eta part of `m` is read.
Distribution mutation_step(const Distribution &p, const InputMatrices &m, double tol = 1e-12);

/// Expected post-matching distribution. Reads theta and b, which must have
/// been evaluated at `p_check`. Throws MatchingInfeasible when the matched
/// mass created for (k,l) and (l,k) differs by more than `tol`.
Distribution matching_step(const Distribution &p_check, const InputMatrices &m, double tol = 1e-12);

/// Expected end-of-period distribution. Reads xi, sigma, varsigma.
Distribution breakup_step(const Distribution &p_ccheck, const InputMatrices &m, double tol = 1e-12);

struct GammaStages {
    Distribution check;
    Distribution ccheck;
    Distribution hat;
};

/// One period of the mean-field map with fixed tables.
GammaStages gamma(const Distribution &p, const InputMatrices &m, double tol = 1e-12);

/// Tables assembled according to the conditioning of each sub-step:
/// eta at the previous end-of-period distribution, theta/b at the
/// post-mutation distribution, xi/sigma/varsigma at the post-matching one.
struct StagedInputs {
    InputMatrices inputs;
    Distribution check;
    Distribution ccheck;
};

StagedInputs stage_inputs(const Distribution &p, const IntensityFn &intensities, double tol = 1e-12);

/// One period with distribution-dependent intensities.
GammaStages gamma(const Distribution &p, const IntensityFn &intensities, double tol = 1e-12);

/// End-of-period distribution from the two-term closed-form sums, using the
/// post-mutation distribution and theta * p(k,J) directly rather than the
/// post-matching distribution. Independent of matching_step/breakup_step.
Distribution gamma_closed_form(const Distribution &p, const InputMatrices &m);

struct MeanfieldTrajectory {
    /// env_path[n-1] is the environment state of period n.
    std::vector<int> env_path;
    /// Index n = 0..horizon; check[0] and ccheck[0] are unused copies of p0.
    std::vector<Distribution> check;
    std::vector<Distribution> ccheck;
    std::vector<Distribution> hat;
    /// Staged tables of period n at index n-1.
    std::vector<InputMatrices> inputs;

    int horizon() const { return static_cast<int>(env_path.size()); }
};

MeanfieldTrajectory iterate_meanfield(const ScenarioConfig &scenario, const std::vector<int> &env_path,
                                      double tol = 1e-12);

} // namespace matchfield
