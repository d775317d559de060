#pragma once

#include "matchfield/meanfield.hpp"
#include "matchfield/scenario.hpp"
#include "matchfield/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace matchfield {

/// Single-agent extended-type transition matrix from period n-1 to n.
/// Rows and columns follow the canonical TypeSpace ordering.
class TransitionMatrix {
public:
    explicit TransitionMatrix(int types, int period = 0, int env_state = 0);

    int types() const { return space_.types(); }
    const TypeSpace &space() const { return space_; }
    std::size_t dim() const { return space_.extended_size(); }
    int period() const { return period_; }
    int env_state() const { return env_state_; }

    double &operator()(std::size_t src, std::size_t dst) { return z_[src * dim() + dst]; }
    double operator()(std::size_t src, std::size_t dst) const { return z_[src * dim() + dst]; }
    double &operator()(ExtendedType src, ExtendedType dst) { return (*this)(space_.index(src), space_.index(dst)); }
    double operator()(ExtendedType src, ExtendedType dst) const
    {
        return (*this)(space_.index(src), space_.index(dst));
    }

    std::span<const double> row(std::size_t src) const
    {
        return std::span<const double>(z_).subspan(src * dim(), dim());
    }

    /// max over rows of |row sum - 1|.
    double max_row_defect() const;

    static TransitionMatrix identity(int types);

private:
    TypeSpace space_;
    int period_;
    int env_state_;
    std::vector<double> z_;
};

ValidationReport validate_transition(const TransitionMatrix &z, double tol = 1e-12);

/// Transition matrix from tables already staged (see stage_inputs).
TransitionMatrix build_transition_matrix(const InputMatrices &staged, int period = 0, int env_state = 0);

/// Stages the intensities at p_prev and builds the matrix.
TransitionMatrix build_transition_matrix(const Distribution &p_prev, const IntensityFn &intensities,
                                         int period = 0, int env_state = 0, double tol = 1e-12);

/// Row vector p times z. Throws InvalidInputs if shapes disagree or z is not
/// row-stochastic within `tol`.
Distribution evolve(const Distribution &p, const TransitionMatrix &z, double tol = 1e-9);

/// z^1..z^horizon along a mean-field trajectory.
std::vector<TransitionMatrix> transition_matrices(const MeanfieldTrajectory &traj);

/// Sampled single-agent path beta^0..beta^H, one draw per period from the
/// current row of z^n.
std::vector<ExtendedType> simulate_agent_path(ExtendedType beta0, std::span<const TransitionMatrix> matrices,
                                              std::uint64_t seed);

std::vector<ExtendedType> simulate_agent_path(ExtendedType beta0, const MeanfieldTrajectory &traj,
                                              std::uint64_t seed);

} // namespace matchfield
