#include "phasecur/kinetic.hpp"

#include <cmath>

namespace phasecur {

namespace {

constexpr cplx kI{0.0, 1.0};

ScalarField conj_field(const ScalarField& f) {
    ScalarField out(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::conj(f[i]);
    return out;
}

}  // namespace

ScalarField b_cross_grad_squared(const ScalarField& rho, const Vec3& b) {
    const VectorField g = spectral_gradient(rho);
    VectorField v(rho.grid);
    for (std::size_t i = 0; i < rho.size(); ++i) v.set(i, cross3(to_complex(b), g.at(i)));

    // b . curl v
    std::array<VectorField, 3> dv{spectral_gradient(v.component(0)), spectral_gradient(v.component(1)),
                                  spectral_gradient(v.component(2))};
    ScalarField out(rho.grid);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const cplx c0 = dv[2].components[1][i] - dv[1].components[2][i];
        const cplx c1 = dv[0].components[2][i] - dv[2].components[0][i];
        const cplx c2 = dv[1].components[0][i] - dv[0].components[1][i];
        out[i] = b[0] * c0 + b[1] * c1 + b[2] * c2;
    }
    return out;
}

ScalarField b_cross_grad_squared_expanded(const ScalarField& rho, const Vec3& b) {
    const ScalarField lap = laplacian(rho);
    ScalarField directional(rho.grid);
    for (int a = 0; a < 3; ++a) {
        if (b[a] == 0.0) continue;
        const ScalarField d = spectral_derivative(rho, a);
        for (std::size_t i = 0; i < rho.size(); ++i) directional[i] += b[a] * d[i];
    }
    ScalarField second(rho.grid);
    for (int a = 0; a < 3; ++a) {
        if (b[a] == 0.0) continue;
        const ScalarField d = spectral_derivative(directional, a);
        for (std::size_t i = 0; i < rho.size(); ++i) second[i] += b[a] * d[i];
    }
    const double bb = dot(b, b);
    ScalarField out(rho.grid);
    for (std::size_t i = 0; i < rho.size(); ++i) out[i] = bb * lap[i] - second[i];
    return out;
}

KineticTerms kinetic_terms(const Wavefunction& psi, const Vec3& b) {
    const Grid3& g = psi.grid();
    const double hbar = psi.constants.hbar;
    const double m = psi.constants.mass;
    const ScalarField conj_psi = conj_field(psi.psi);
    const ScalarField lap = laplacian(psi.psi);
    const ScalarField lap_conj = laplacian(conj_psi);
    const VectorField grad = spectral_gradient(psi.psi);
    const VectorField grad_conj = spectral_gradient(conj_psi);

    KineticTerms t{ScalarField(g), ScalarField(g), ScalarField(g)};
    const CVec3 bc = to_complex(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const CVec3 gp = grad.at(i), gc = grad_conj.at(i);
        const cplx dots = gc[0] * gp[0] + gc[1] * gp[1] + gc[2] * gp[2];
        t.symmetric[i] = -(hbar * hbar / (8.0 * m)) * (conj_psi[i] * lap[i] + psi.psi[i] * lap_conj[i] - 2.0 * dots);
        const CVec3 c = cross3(gc, gp);
        t.cross[i] = (kI * hbar * hbar / (2.0 * m)) * (c[0] * bc[0] + c[1] * bc[1] + c[2] * bc[2]);
    }
    const ScalarField op = b_cross_grad_squared(density(psi), b);
    for (std::size_t i = 0; i < g.size(); ++i) t.curl[i] = (hbar * hbar / (8.0 * m)) * op[i];
    return t;
}

KineticField local_kinetic_energy(const Wavefunction& psi, const Vec3& b, double reality_tol) {
    const KineticTerms t = kinetic_terms(psi, b);
    KineticField out;
    out.b = b;
    out.K = ScalarField(psi.grid());
    for (std::size_t i = 0; i < out.K.size(); ++i) {
        const cplx v = t.symmetric[i] + t.cross[i] + t.curl[i];
        out.max_imag = std::max(out.max_imag, std::abs(v.imag()));
        out.K[i] = v.real();
    }
    if (out.max_imag > reality_tol) {
        throw Error(ErrorCode::RealityViolation, "kinetic density has imaginary residue " + std::to_string(out.max_imag));
    }
    return out;
}

MeanKineticCheck mean_kinetic_check(const Wavefunction& psi, const Vec3& b) {
    MeanKineticCheck out;
    out.integral = integrate(local_kinetic_energy(psi, b).K).real();
    out.quantum = mean_kinetic(psi);
    out.difference = out.integral - out.quantum;
    return out;
}

}  // namespace phasecur
