#pragma once

// Phase-space distributions: Wigner and general kernel distributions on
// (q, p) slices, their marginals, the delta-type de Broglie-Bohm momentum
// field and its generating kernel, and a rank-1 factorization probe.

#include <array>
#include <string>
#include <vector>

#include "phasecur/kernels.hpp"
#include "phasecur/numerics.hpp"
#include "phasecur/states.hpp"

namespace phasecur {

/// Index lists per axis into the q and p grids; an empty list selects the full axis.
struct Selection {
    std::array<std::vector<std::size_t>, 3> q;
    std::array<std::vector<std::size_t>, 3> p;

    static Selection all() { return {}; }
    /// Single q point (nearest grid point) with the full p grid.
    static Selection at_q(const Grid3& q_grid, const Vec3& q);
};

struct PhaseSpaceSlice {
    Grid3 q_grid;
    Grid3 p_grid;
    std::array<std::vector<std::size_t>, 3> q_index;
    std::array<std::vector<std::size_t>, 3> p_index;
    std::vector<cplx> values;  // q-major, p-minor; each block row-major over its axes
    std::string kernel_id;
    double masked_fraction = 0.0;
    bool reliable = true;

    std::size_t q_count() const { return q_index[0].size() * q_index[1].size() * q_index[2].size(); }
    std::size_t p_count() const { return p_index[0].size() * p_index[1].size() * p_index[2].size(); }
    cplx at(std::size_t iq, std::size_t ip) const { return values[iq * p_count() + ip]; }

    Index3 q_local(std::size_t iq) const;
    Index3 p_local(std::size_t ip) const;
    Vec3 q_point(std::size_t iq) const;
    Vec3 p_point(std::size_t ip) const;
    bool q_axis_full(int a) const { return q_index[a].size() == q_grid.n(a); }
    bool p_axis_full(int a) const { return p_index[a].size() == p_grid.n(a); }
};

struct DistributionOptions {
    std::size_t memory_cap = std::size_t{1} << 22;
    /// Evaluate psi(q +- hbar tau / 2) from the analytic descriptor when present.
    bool analytic_shift = true;
};

PhaseSpaceSlice wigner_transform(const Wavefunction& psi, const Grid3& p_grid, const Selection& selection,
                                 const DistributionOptions& options = {});

/// F^(theta, tau) = f(theta, tau) W^(theta, tau), transformed back onto the slice.
PhaseSpaceSlice generalized_distribution(const Wavefunction& psi, const Kernel& kernel, const Grid3& p_grid,
                                         const Selection& selection, const DistributionOptions& options = {});

/// Int F dp at every selected q; requires full p axes.
std::vector<cplx> position_marginal(const PhaseSpaceSlice& f);
/// Int F dq at every selected p; requires full q axes.
std::vector<cplx> momentum_marginal(const PhaseSpaceSlice& f);

struct Marginals {
    std::vector<cplx> position;
    std::vector<cplx> momentum;
};
Marginals marginals(const PhaseSpaceSlice& f);

/// rho(q) delta(p - P(q)), P = grad S + (hbar/2)(grad log rho) x b.
struct MomentumField {
    Grid3 grid;
    std::vector<double> weight;
    std::array<std::vector<double>, 3> momentum;
    std::vector<bool> defined;  // rho above the node floor
    Vec3 b{};
};

MomentumField dbb_field(const Wavefunction& psi, const Vec3& b, double node_floor = 1e-13);

/// Ratio of the delta-distribution characteristic function to the ambiguity
/// function; throws SmallDenominator when |denominator| < eps_den.
cplx dbb_kernel_eval(const Wavefunction& psi, const Vec3& b, const Vec3& theta, const Vec3& tau,
                     double eps_den = 1e-10);

/// The same kernel as a Kernel object (psi-dependent, with lattice evaluation;
/// masked lattice points fall back to f = 1 and are counted).
Kernel dbb_kernel(const Wavefunction& psi, const Vec3& b, double eps_den = 1e-10);

/// Relative L2 distance between F on the (axis_a, axis_b) sub-lattice and its
/// best rank-1 approximation; remaining axes are fixed at the selected point
/// nearest the origin.
double factorization_defect(const PhaseSpaceSlice& f, int axis_a, int axis_b);

}  // namespace phasecur
