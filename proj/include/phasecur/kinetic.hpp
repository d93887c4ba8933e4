#pragma once

// Local kinetic energy density of the spin-like distribution family.

#include "phasecur/states.hpp"

namespace phasecur {

struct KineticField {
    ScalarField K;   // real part of the density; imaginary residue reported separately
    Vec3 b{};
    double max_imag = 0.0;

    const Grid3& grid() const { return K.grid; }
};

/// The three pieces of K, each as a complex field.
struct KineticTerms {
    ScalarField symmetric;  // -(hbar^2/8m)(psi* lap psi + psi lap psi* - 2 grad psi* . grad psi)
    ScalarField cross;      // (i hbar^2/2m)(grad psi* x grad psi) . b
    ScalarField curl;       // (hbar^2/8m)(b x grad)^2 rho
};

KineticTerms kinetic_terms(const Wavefunction& psi, const Vec3& b);

/// Sum of the three terms; throws RealityViolation if the sum has an
/// imaginary residue above reality_tol.
KineticField local_kinetic_energy(const Wavefunction& psi, const Vec3& b, double reality_tol = 1e-8);

/// (b x grad).(b x grad) rho as b . curl(b x grad rho).
ScalarField b_cross_grad_squared(const ScalarField& rho, const Vec3& b);
/// The same operator expanded as |b|^2 lap rho - (b . grad)^2 rho.
ScalarField b_cross_grad_squared_expanded(const ScalarField& rho, const Vec3& b);

struct MeanKineticCheck {
    double integral = 0.0;  // Int K dq
    double quantum = 0.0;   // <p^2/2m>
    double difference = 0.0;
};

MeanKineticCheck mean_kinetic_check(const Wavefunction& psi, const Vec3& b);

}  // namespace phasecur
