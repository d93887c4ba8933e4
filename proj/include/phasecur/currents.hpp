#pragma once

// Probability currents: the moment current of a phase-space distribution,
// the closed form induced by a kernel, the spin-like reference family, and
// the conservation diagnostics built on them.

#include <optional>
#include <string>
#include <vector>

#include "phasecur/distributions.hpp"
#include "phasecur/kernels.hpp"
#include "phasecur/states.hpp"

namespace phasecur {

enum class CurrentProvenance { Moment, ClosedForm, SpinLikeRef, Schrodinger };
std::string to_string(CurrentProvenance p);

struct CurrentField {
    VectorField j;  // complex; the imaginary part is kept as a diagnostic
    CurrentProvenance provenance = CurrentProvenance::Schrodinger;
    std::string label;
    /// Flat grid indices carrying values; empty means every point.
    std::vector<std::size_t> sites;

    const Grid3& grid() const { return j.grid; }
    CVec3 at(std::size_t flat) const { return j.at(flat); }
    CVec3 at(const Vec3& q) const { return j.at(j.grid.flat(j.grid.nearest(q))); }
    double max_imag() const { return j.max_abs_imag(); }
};

CurrentField schrodinger_current_field(const Wavefunction& psi);

/// -(i/m) Inverse[D(theta) rho^(theta)], the kernel-dependent addition to the Schrodinger current.
VectorField kernel_extra_term(const Wavefunction& psi, const Kernel& kernel);

/// j_S plus the kernel term; complex in general.
CurrentField current_closed_form(const Wavefunction& psi, const Kernel& kernel);

/// (lambda hbar / 2m) grad rho x a'.
VectorField spin_term(const Wavefunction& psi, double lambda, const Vec3& a_prime);

/// j_S + (lambda hbar / 2m) grad rho x a'. Requires |a'| = 1 unless lambda = 0.
CurrentField spin_like_current(const Wavefunction& psi, double lambda, const Vec3& a_prime);

struct MomentOptions {
    /// Largest |F| allowed on the faces of the p box.
    double p_leak_tol = 1e-10;
    double mass = 1.0;
};

/// (1/m) Int p F(q, p) dp at every retained q of the slice (rectangle rule).
CurrentField current_from_moment(const PhaseSpaceSlice& f, const MomentOptions& options = {});
/// weight * P / m.
CurrentField current_from_moment(const MomentumField& f, const PhysicalConstants& constants);

ScalarField divergence(const CurrentField& j);

/// Precomputes rho(t +- dt), the Schrodinger current and grad rho at t, so
/// many (lambda, a') pairs can be checked against one state and time.
class ContinuityProbe {
public:
    ContinuityProbe(const StateSpec& spec, double t, double dt, const Grid3& grid,
                    const PhysicalConstants& constants = {}, const RealizeOptions& options = {});

    /// Relative L2 norm of d rho/dt + div j over the norm of d rho/dt.
    double residual(double lambda, const Vec3& a_prime) const;

private:
    PhysicalConstants constants_;
    std::vector<cplx> drho_;
    VectorField schrodinger_;
    VectorField grad_rho_;
    double drho_norm_ = 0.0;
};

/// Relative L2 residual of d rho/dt + div j, with d rho/dt from a central
/// difference of the analytic state and j the spin-like current at t.
double continuity_residual(const StateSpec& spec, double lambda, const Vec3& a_prime, double t, double dt,
                           const Grid3& grid, const PhysicalConstants& constants = {});

struct MeanMomentumCheck {
    CVec3 from_current{};             // m Int j dq
    Vec3 quantum{};                   // <p>
    std::optional<CVec3> correction;  // -i d f(0, tau)/d tau |_0, empty when not evaluable
    double gap = 0.0;                 // |m Int j - <p> - correction|
    bool equal = false;               // correction vanishes and gap within tol
};

MeanMomentumCheck mean_momentum_check(const Wavefunction& psi, const Kernel& kernel, double tol = 1e-8);

}  // namespace phasecur
