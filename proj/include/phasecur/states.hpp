#pragma once

// Analytic test wavefunctions with exact time evolution: free Gaussian
// packets, harmonic-oscillator superpositions, and per-axis product states.
// Every state is a finite sum of products of one-dimensional factors, which
// keeps evaluation at arbitrary (shifted or complex) points cheap and exact.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phasecur/numerics.hpp"

namespace phasecur {

enum class StateKind { GaussianPacket, HoSuperposition, ProductState };

struct HoTerm {
    std::array<int, 3> n{0, 0, 0};
    cplx c{1.0, 0.0};
};

/// One axis of a product state.
struct FactorSpec {
    enum class Kind { Gaussian, Oscillator } kind = Kind::Gaussian;
    double sigma0 = 1.0;
    double q0 = 0.0;
    double p0 = 0.0;
    double omega = 1.0;
    std::vector<cplx> coefficients{1.0};  // oscillator amplitudes c_n, n = 0, 1, ...
};

struct StateSpec {
    StateKind kind = StateKind::GaussianPacket;
    double sigma0 = 1.0;
    Vec3 q0{0.0, 0.0, 0.0};
    Vec3 p0{0.0, 0.0, 0.0};
    double omega = 1.0;
    std::vector<HoTerm> terms;               // ho_superposition
    std::array<FactorSpec, 3> factors{};     // product_state

    static StateSpec gaussian(double sigma0, Vec3 q0 = {}, Vec3 p0 = {});
    /// c_n along one axis, other axes in the ground state.
    static StateSpec ho_axis(int axis, const std::vector<cplx>& coefficients, double omega = 1.0);
    static StateSpec ho(std::vector<HoTerm> terms, double omega = 1.0);
    static StateSpec product(std::array<FactorSpec, 3> factors);

    void validate() const;
};

StateKind state_kind_from_string(const std::string& name);
std::string to_string(StateKind kind);

/// Closed-form psi(q, t); accepts complex coordinates (all factors are entire).
class AnalyticState {
public:
    AnalyticState(const StateSpec& spec, const PhysicalConstants& constants);

    cplx operator()(const std::array<cplx, 3>& q, double t) const;
    cplx operator()(const Vec3& q, double t) const { return (*this)(std::array<cplx, 3>{q[0], q[1], q[2]}, t); }

    /// psi(q + shift, t) sampled at every point of the grid.
    std::vector<cplx> sample(const Grid3& grid, double t, const Vec3& shift = {}) const;

private:
    struct Factor {
        FactorSpec spec;
        cplx eval(cplx x, double t, const PhysicalConstants& k) const;
    };
    struct Term {
        cplx coefficient;
        std::array<Factor, 3> factors;
    };
    std::vector<Term> terms_;
    PhysicalConstants constants_;
};

struct RealizeOptions {
    /// Largest |psi|^2 tolerated on the box faces.
    double leak_tol = 1e-10;
    double norm_tol = 1e-10;
};

struct Wavefunction {
    StateSpec spec;
    double time = 0.0;
    ScalarField psi;
    PhysicalConstants constants;
    std::shared_ptr<const AnalyticState> analytic;  // null for grid-only data

    const Grid3& grid() const { return psi.grid; }

    /// psi(q + shift) on the grid: analytic when available, else spectral shift.
    std::vector<cplx> shifted(const Vec3& shift) const;
};

Wavefunction realize(const StateSpec& spec, double t, const Grid3& grid,
                     const PhysicalConstants& constants = {}, const RealizeOptions& options = {});

/// Wraps sampled values (no analytic descriptor); grid must be spectral.
Wavefunction from_samples(const ScalarField& psi, const PhysicalConstants& constants = {});

struct DensityPhase {
    ScalarField rho;    // real values
    ScalarField phase;  // S = hbar * unwrapped arg(psi); zero where undefined
    std::vector<bool> defined;
    std::size_t undefined_count = 0;
};

DensityPhase density_phase(const Wavefunction& psi, double node_floor = 1e-13);

ScalarField density(const Wavefunction& psi);

/// (hbar / 2mi)(psi* grad psi - grad psi* psi), imaginary residue checked then dropped.
VectorField schrodinger_current(const Wavefunction& psi, double reality_tol = 1e-8);

/// <p> = Int psi* (-i hbar grad) psi dq.
Vec3 mean_momentum(const Wavefunction& psi);

/// (1/2m) Int |hbar grad psi|^2 dq.
double mean_kinetic(const Wavefunction& psi);

/// psi~(p) = (2 pi hbar)^-3/2 Int exp(-i p.q / hbar) psi(q) dq by direct quadrature.
cplx momentum_amplitude(const Wavefunction& psi, const Vec3& p);

}  // namespace phasecur
