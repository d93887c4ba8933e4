#include "phasecur/currents.hpp"

#include <cmath>
#include <sstream>

namespace phasecur {

namespace {

constexpr cplx kI{0.0, 1.0};

double l2(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

}  // namespace

std::string to_string(CurrentProvenance p) {
    switch (p) {
        case CurrentProvenance::Moment: return "moment";
        case CurrentProvenance::ClosedForm: return "closed_form";
        case CurrentProvenance::SpinLikeRef: return "spin_like_ref";
        case CurrentProvenance::Schrodinger: return "schrodinger";
    }
    return "unknown";
}

CurrentField schrodinger_current_field(const Wavefunction& psi) {
    return {schrodinger_current(psi), CurrentProvenance::Schrodinger, "schrodinger", {}};
}

VectorField kernel_extra_term(const Wavefunction& psi, const Kernel& kernel) {
    const Grid3& g = psi.grid();
    const auto d = tau_gradient_lattice(kernel, g);
    const ScalarField rho = density(psi);
    const std::vector<cplx> rho_hat = spectral::to_theta(g, rho.values);
    const cplx pref = -kI / psi.constants.mass;
    VectorField out(g);
    for (int a = 0; a < 3; ++a) {
        std::vector<cplx> y(rho_hat.size());
        for (std::size_t k = 0; k < y.size(); ++k) y[k] = d[a][k] * rho_hat[k];
        y = spectral::from_theta(g, std::move(y));
        for (std::size_t i = 0; i < y.size(); ++i) out.components[a][i] = pref * y[i];
    }
    return out;
}

CurrentField current_closed_form(const Wavefunction& psi, const Kernel& kernel) {
    CurrentField out = schrodinger_current_field(psi);
    const VectorField extra = kernel_extra_term(psi, kernel);
    for (int a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < out.j.size(); ++i) out.j.components[a][i] += extra.components[a][i];
    out.provenance = CurrentProvenance::ClosedForm;
    out.label = kernel.id;
    return out;
}

VectorField spin_term(const Wavefunction& psi, double lambda, const Vec3& a_prime) {
    const VectorField grad = spectral_gradient(density(psi));
    const double pref = lambda * psi.constants.hbar / (2.0 * psi.constants.mass);
    VectorField out(psi.grid());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Vec3 g{grad.components[0][i].real(), grad.components[1][i].real(), grad.components[2][i].real()};
        const Vec3 c = cross(g, a_prime);
        for (int a = 0; a < 3; ++a) out.components[a][i] = pref * c[a];
    }
    return out;
}

CurrentField spin_like_current(const Wavefunction& psi, double lambda, const Vec3& a_prime) {
    if (lambda != 0.0 && std::abs(norm(a_prime) - 1.0) > 1e-12) {
        throw Error(ErrorCode::NonUnitVector, "a' must be a unit vector");
    }
    CurrentField out = schrodinger_current_field(psi);
    const VectorField s = spin_term(psi, lambda, a_prime);
    for (int a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < out.j.size(); ++i) out.j.components[a][i] += s.components[a][i];
    std::ostringstream label;
    label.precision(17);
    label << "lambda=" << lambda << " a'=(" << a_prime[0] << "," << a_prime[1] << "," << a_prime[2] << ")";
    out.provenance = CurrentProvenance::SpinLikeRef;
    out.label = label.str();
    return out;
}

CurrentField current_from_moment(const PhaseSpaceSlice& f, const MomentOptions& options) {
    for (int a = 0; a < 3; ++a)
        if (!f.p_axis_full(a)) throw Error(ErrorCode::ThinSlice, "the moment current needs the full p grid");
    const std::size_t pc = f.p_count();
    const Grid3& pg = f.p_grid;

    double leak = 0.0;
    std::vector<Vec3> p(pc);
    std::vector<bool> face(pc);
    for (std::size_t ip = 0; ip < pc; ++ip) {
        p[ip] = f.p_point(ip);
        const Index3 l = f.p_local(ip);
        bool on = false;
        for (int a = 0; a < 3; ++a) on = on || l[a] == 0 || l[a] + 1 == pg.n(a);
        face[ip] = on;
    }

    CurrentField out;
    out.j = VectorField(f.q_grid);
    out.provenance = CurrentProvenance::Moment;
    out.label = f.kernel_id;
    const double scale = pg.cell_volume() / options.mass;
    for (std::size_t iq = 0; iq < f.q_count(); ++iq) {
        CVec3 s{};
        for (std::size_t ip = 0; ip < pc; ++ip) {
            const cplx v = f.at(iq, ip);
            if (face[ip]) leak = std::max(leak, std::abs(v));
            for (int a = 0; a < 3; ++a) s[a] += p[ip][a] * v;
        }
        for (auto& c : s) c *= scale;
        const Index3 l = f.q_local(iq);
        const std::size_t flat = f.q_grid.flat(f.q_index[0][l[0]], f.q_index[1][l[1]], f.q_index[2][l[2]]);
        out.sites.push_back(flat);
        out.j.set(flat, s);
    }
    if (leak > options.p_leak_tol) {
        throw Error(ErrorCode::MomentumBoundaryLeakage,
                    "|F| on the p-box boundary is " + std::to_string(leak) + "; widen the momentum grid");
    }
    return out;
}

CurrentField current_from_moment(const MomentumField& f, const PhysicalConstants& constants) {
    CurrentField out;
    out.j = VectorField(f.grid);
    out.provenance = CurrentProvenance::Moment;
    out.label = "dbb";
    for (int a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < f.grid.size(); ++i) out.j.components[a][i] = f.weight[i] * f.momentum[a][i] / constants.mass;
    return out;
}

ScalarField divergence(const CurrentField& j) { return divergence(j.j); }

ContinuityProbe::ContinuityProbe(const StateSpec& spec, double t, double dt, const Grid3& grid,
                                 const PhysicalConstants& constants, const RealizeOptions& options)
    : constants_(constants) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    const ScalarField r0 = density(realize(spec, t - dt, grid, constants, options));
    const ScalarField r1 = density(realize(spec, t + dt, grid, constants, options));
    const Wavefunction now = realize(spec, t, grid, constants, options);
    schrodinger_ = schrodinger_current(now);
    grad_rho_ = spectral_gradient(density(now));
    drho_.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) drho_[i] = (r1[i] - r0[i]) / (2.0 * dt);
    drho_norm_ = l2(drho_);
    if (!(drho_norm_ > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "d rho/dt vanishes for this state and time; the relative residual is undefined");
    }
}

double ContinuityProbe::residual(double lambda, const Vec3& a_prime) const {
    if (lambda != 0.0 && std::abs(norm(a_prime) - 1.0) > 1e-12) {
        throw Error(ErrorCode::NonUnitVector, "a' must be a unit vector");
    }
    const double pref = lambda * constants_.hbar / (2.0 * constants_.mass);
    VectorField j = schrodinger_;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const CVec3 s = cross3(grad_rho_.at(i), to_complex(a_prime));
        for (int a = 0; a < 3; ++a) j.components[a][i] += pref * s[a];
    }
    const ScalarField div = divergence(j);
    std::vector<cplx> r(drho_.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = drho_[i] + div[i];
    return l2(r) / drho_norm_;
}

double continuity_residual(const StateSpec& spec, double lambda, const Vec3& a_prime, double t, double dt,
                           const Grid3& grid, const PhysicalConstants& constants) {
    return ContinuityProbe(spec, t, dt, grid, constants).residual(lambda, a_prime);
}

MeanMomentumCheck mean_momentum_check(const Wavefunction& psi, const Kernel& kernel, double tol) {
    MeanMomentumCheck out;
    const CurrentField j = current_closed_form(psi, kernel);
    for (int a = 0; a < 3; ++a) out.from_current[a] = psi.constants.mass * integrate(j.j.component(a));
    out.quantum = mean_momentum(psi);
    try {
        const TauGradient d0 = tau_gradient0(kernel, Vec3{});
        CVec3 c{};
        for (int a = 0; a < 3; ++a) c[a] = -kI * d0.value[a];
        out.correction = c;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFinite) throw;
    }
    double gap = 0.0;
    for (int a = 0; a < 3; ++a) {
        const cplx corr = out.correction ? (*out.correction)[a] : cplx{};
        gap = std::max(gap, std::abs(out.from_current[a] - out.quantum[a] - corr));
    }
    out.gap = gap;
    out.equal = out.correction && max_abs(*out.correction) <= tol && gap <= tol;
    return out;
}

}  // namespace phasecur
