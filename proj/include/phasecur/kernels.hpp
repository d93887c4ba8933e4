#pragma once

// Kernels f(theta, tau) selecting a member of the Cohen class, their tau
// gradient at tau = 0, and the admissibility checker.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phasecur/numerics.hpp"
#include "phasecur/states.hpp"

namespace phasecur {

struct KernelParams {
    std::optional<Vec3> b;
    std::optional<double> c;
    std::optional<double> k;
    std::optional<double> sigma0;
};

/// Kernel values on the FFT-ordered theta lattice of a position grid at one tau.
struct LatticeValues {
    std::vector<cplx> values;
    std::size_t masked = 0;
};

struct Kernel {
    std::string id;
    std::function<cplx(const Vec3& theta, const Vec3& tau)> eval;
    /// Analytic d f / d tau |_{tau=0} as a function of theta; empty when unknown.
    std::function<CVec3(const Vec3& theta)> tau_grad0;
    /// Optional vectorized evaluation; kernels without it are evaluated pointwise.
    std::function<LatticeValues(const Grid3& q_grid, const Vec3& tau)> lattice_eval;
    KernelParams params;
    PhysicalConstants constants;
    bool psi_dependent = false;
    /// g(q, p) is not an integrable function; the distribution cannot be materialized.
    bool distribution_valued = false;
    /// f == 1 identically.
    bool trivial = false;

    cplx operator()(const Vec3& theta, const Vec3& tau) const { return eval(theta, tau); }
};

/// Names: wigner | kirkwood | spin_like | spin_like_regularized |
/// cohen_phi_gaussian | gauss_tau. The dbb kernel needs a wavefunction and is
/// built by dbb_kernel() in distributions.hpp.
Kernel builtin(const std::string& name, const KernelParams& params = {}, const PhysicalConstants& constants = {});

std::vector<std::string> builtin_names();

/// Cohen's construction from a normalized, entire function phi, evaluated by
/// quadrature of |phi(q - i w)|^2 over `quadrature_grid`, w = (k hbar / 2)(tau x theta).
Kernel cohen_phi_kernel(const StateSpec& phi, double k, const Grid3& quadrature_grid,
                        const PhysicalConstants& constants = {});

/// Wraps an arbitrary callable as a kernel (no analytic gradient).
Kernel custom_kernel(std::string id, std::function<cplx(const Vec3&, const Vec3&)> eval,
                     const PhysicalConstants& constants = {});

struct TauGradient {
    CVec3 value{};
    double error_estimate = 0.0;
    bool analytic = false;
};

/// Analytic when available, else central differences with one Richardson level
/// at step h = 1e-3 / (1 + |theta|).
TauGradient tau_gradient0(const Kernel& kernel, const Vec3& theta);

/// d f / d tau |_0 on every point of the FFT-ordered theta lattice of q_grid,
/// Nyquist components averaged over both signs.
std::array<std::vector<cplx>, 3> tau_gradient_lattice(const Kernel& kernel, const Grid3& q_grid);

struct ConditionResult {
    bool pass = false;
    double deviation = 0.0;
};

struct AdmissibilityReport {
    std::string kernel_id;
    double tol = 0.0;
    ConditionResult cond_2_2a;        // f(theta, 0) = 1
    ConditionResult cond_2_2b;        // f(0, tau) = 1
    ConditionResult reality;          // f*(theta, tau) = f(-theta, -tau)
    ConditionResult divergence_free;  // theta . D(theta) = 0
    Vec3 fitted_b{};
    double fitted_b_imag = 0.0;       // norm of the imaginary part of the fit
    double fit_residual = 0.0;        // relative
    CVec3 mean_momentum_term{};       // d f(0, tau) / d tau |_0
    bool gradient_analytic = false;
};

/// 3 axis directions x magnitudes {0.5, 1, 2} plus 20 random unit directions.
std::vector<Vec3> default_theta_samples(std::uint64_t seed = 7);
/// 3 axis directions x magnitudes {0.25, 0.5, 1} plus 5 random directions of length 0.5.
std::vector<Vec3> default_tau_samples(std::uint64_t seed = 11);

AdmissibilityReport check_admissibility(const Kernel& kernel, const std::vector<Vec3>& theta_samples,
                                        const std::vector<Vec3>& tau_samples, double tol = 1e-6);

/// Least-squares fit of D(theta) = (hbar/2) theta x b; exposed for tests.
struct BFit {
    CVec3 b{};
    double residual = 0.0;
};
BFit fit_spin_vector(const std::vector<Vec3>& thetas, const std::vector<CVec3>& gradients, double hbar);

/// b = lambda a' with lambda = |b| and a' = b / |b| (a' = e_3 when b = 0).
std::pair<double, Vec3> split_spin_vector(const Vec3& b);

}  // namespace phasecur
