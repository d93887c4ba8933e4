#include "phasecur/states.hpp"

#include <cmath>
#include <set>

namespace phasecur {

namespace {

constexpr cplx kI{0.0, 1.0};

double wrap_to_pi(double x) {
    while (x > kPi) x -= 2.0 * kPi;
    while (x <= -kPi) x += 2.0 * kPi;
    return x;
}

void check_unit_sum(const std::vector<cplx>& c, const char* what) {
    double s = 0.0;
    for (const auto& v : c) s += std::norm(v);
    if (std::abs(s - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + ": sum |c_n|^2 must equal 1");
    }
}

}  // namespace

StateSpec StateSpec::gaussian(double sigma0, Vec3 q0, Vec3 p0) {
    StateSpec s;
    s.kind = StateKind::GaussianPacket;
    s.sigma0 = sigma0;
    s.q0 = q0;
    s.p0 = p0;
    return s;
}

StateSpec StateSpec::ho_axis(int axis, const std::vector<cplx>& coefficients, double omega) {
    if (axis < 0 || axis > 2) throw Error(ErrorCode::InvalidArgument, "axis must be 0, 1 or 2");
    std::vector<HoTerm> terms;
    for (std::size_t n = 0; n < coefficients.size(); ++n) {
        if (coefficients[n] == cplx{}) continue;
        HoTerm t;
        t.n[axis] = static_cast<int>(n);
        t.c = coefficients[n];
        terms.push_back(t);
    }
    return ho(std::move(terms), omega);
}

StateSpec StateSpec::ho(std::vector<HoTerm> terms, double omega) {
    StateSpec s;
    s.kind = StateKind::HoSuperposition;
    s.omega = omega;
    s.terms = std::move(terms);
    return s;
}

StateSpec StateSpec::product(std::array<FactorSpec, 3> factors) {
    StateSpec s;
    s.kind = StateKind::ProductState;
    s.factors = std::move(factors);
    return s;
}

void StateSpec::validate() const {
    switch (kind) {
        case StateKind::GaussianPacket:
            if (!(sigma0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma0 must be positive");
            break;
        case StateKind::HoSuperposition: {
            if (!(omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega must be positive");
            if (terms.empty()) throw Error(ErrorCode::MissingParameter, "ho_superposition needs terms");
            std::set<std::array<int, 3>> seen;
            std::vector<cplx> c;
            for (const auto& t : terms) {
                for (int n : t.n)
                    if (n < 0) throw Error(ErrorCode::InvalidArgument, "oscillator quantum numbers must be >= 0");
                if (!seen.insert(t.n).second) {
                    throw Error(ErrorCode::InvalidArgument, "duplicate oscillator term");
                }
                c.push_back(t.c);
            }
            check_unit_sum(c, "ho_superposition");
            break;
        }
        case StateKind::ProductState:
            for (const auto& f : factors) {
                if (f.kind == FactorSpec::Kind::Gaussian) {
                    if (!(f.sigma0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "factor sigma0 must be positive");
                } else {
                    if (!(f.omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "factor omega must be positive");
                    check_unit_sum(f.coefficients, "oscillator factor");
                }
            }
            break;
    }
}

StateKind state_kind_from_string(const std::string& name) {
    if (name == "gaussian_packet") return StateKind::GaussianPacket;
    if (name == "ho_superposition") return StateKind::HoSuperposition;
    if (name == "product_state") return StateKind::ProductState;
    throw Error(ErrorCode::InvalidArgument, "unknown state kind '" + name + "'");
}

std::string to_string(StateKind kind) {
    switch (kind) {
        case StateKind::GaussianPacket: return "gaussian_packet";
        case StateKind::HoSuperposition: return "ho_superposition";
        case StateKind::ProductState: return "product_state";
    }
    return "unknown";
}

cplx AnalyticState::Factor::eval(cplx x, double t, const PhysicalConstants& k) const {
    if (spec.kind == FactorSpec::Kind::Gaussian) {
        const double s2 = spec.sigma0 * spec.sigma0;
        const cplx alpha = 1.0 + kI * k.hbar * t / (2.0 * k.mass * s2);
        const cplx xc = x - spec.q0 - spec.p0 * t / k.mass;
        const cplx expo = -xc * xc / (4.0 * s2 * alpha) + kI * spec.p0 * (x - spec.q0) / k.hbar -
                          kI * spec.p0 * spec.p0 * t / (2.0 * k.mass * k.hbar);
        return std::pow(2.0 * kPi * s2, -0.25) / std::sqrt(alpha) * std::exp(expo);
    }
    // Normalized Hermite functions by the stable three-term recurrence.
    const double scale = std::sqrt(k.mass * spec.omega / k.hbar);
    const cplx xi = x * scale;
    cplx prev{};
    cplx cur = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
    cplx sum{};
    for (std::size_t n = 0; n < spec.coefficients.size(); ++n) {
        if (spec.coefficients[n] != cplx{}) {
            const double energy = spec.omega * (static_cast<double>(n) + 0.5);
            sum += spec.coefficients[n] * cur * std::exp(-kI * energy * t);
        }
        const double nn = static_cast<double>(n);
        const cplx next = std::sqrt(2.0 / (nn + 1.0)) * xi * cur - std::sqrt(nn / (nn + 1.0)) * prev;
        prev = cur;
        cur = next;
    }
    return std::sqrt(scale) * sum;
}

AnalyticState::AnalyticState(const StateSpec& spec, const PhysicalConstants& constants) : constants_(constants) {
    spec.validate();
    constants.validate();
    auto gaussian_factor = [](double sigma0, double q0, double p0) {
        FactorSpec f;
        f.kind = FactorSpec::Kind::Gaussian;
        f.sigma0 = sigma0;
        f.q0 = q0;
        f.p0 = p0;
        return Factor{f};
    };
    switch (spec.kind) {
        case StateKind::GaussianPacket:
            terms_.push_back({1.0,
                              {gaussian_factor(spec.sigma0, spec.q0[0], spec.p0[0]),
                               gaussian_factor(spec.sigma0, spec.q0[1], spec.p0[1]),
                               gaussian_factor(spec.sigma0, spec.q0[2], spec.p0[2])}});
            break;
        case StateKind::HoSuperposition:
            for (const auto& t : spec.terms) {
                Term term{t.c, {}};
                for (int a = 0; a < 3; ++a) {
                    FactorSpec f;
                    f.kind = FactorSpec::Kind::Oscillator;
                    f.omega = spec.omega;
                    f.coefficients.assign(static_cast<std::size_t>(t.n[a]) + 1, cplx{});
                    f.coefficients.back() = 1.0;
                    term.factors[a] = Factor{f};
                }
                terms_.push_back(term);
            }
            break;
        case StateKind::ProductState:
            terms_.push_back({1.0, {Factor{spec.factors[0]}, Factor{spec.factors[1]}, Factor{spec.factors[2]}}});
            break;
    }
}

cplx AnalyticState::operator()(const std::array<cplx, 3>& q, double t) const {
    cplx sum{};
    for (const auto& term : terms_) {
        cplx p = term.coefficient;
        for (int a = 0; a < 3; ++a) p *= term.factors[a].eval(q[a], t, constants_);
        sum += p;
    }
    return sum;
}

std::vector<cplx> AnalyticState::sample(const Grid3& grid, double t, const Vec3& shift) const {
    std::vector<cplx> out(grid.size(), cplx{});
    std::array<std::vector<cplx>, 3> axis;
    for (const auto& term : terms_) {
        for (int a = 0; a < 3; ++a) {
            axis[a].resize(grid.n(a));
            for (std::size_t i = 0; i < grid.n(a); ++i) {
                axis[a][i] = term.factors[a].eval(grid.coord(a, i) + shift[a], t, constants_);
            }
        }
        std::size_t idx = 0;
        for (std::size_t i = 0; i < grid.n(0); ++i) {
            const cplx ci = term.coefficient * axis[0][i];
            for (std::size_t j = 0; j < grid.n(1); ++j) {
                const cplx cij = ci * axis[1][j];
                for (std::size_t k = 0; k < grid.n(2); ++k) out[idx++] += cij * axis[2][k];
            }
        }
    }
    return out;
}

std::vector<cplx> Wavefunction::shifted(const Vec3& shift) const {
    if (analytic) return analytic->sample(psi.grid, time, shift);
    return spectral_shift(psi, shift).values;
}

Wavefunction realize(const StateSpec& spec, double t, const Grid3& grid, const PhysicalConstants& constants,
                     const RealizeOptions& options) {
    grid.require_spectral();
    auto state = std::make_shared<const AnalyticState>(spec, constants);
    Wavefunction wf{spec, t, ScalarField(grid, state->sample(grid, t)), constants, state};

    double edge = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Index3 idx = grid.unflat(i);
        bool on_face = false;
        for (int a = 0; a < 3; ++a) on_face = on_face || idx[a] == 0 || idx[a] + 1 == grid.n(a);
        if (on_face) edge = std::max(edge, std::norm(wf.psi[i]));
    }
    if (edge > options.leak_tol) {
        throw Error(ErrorCode::BoundaryLeakage,
                    "|psi|^2 on the box boundary is " + std::to_string(edge) + "; enlarge the box");
    }
    double norm = 0.0;
    for (const auto& v : wf.psi.values) norm += std::norm(v);
    norm *= grid.cell_volume();
    if (std::abs(norm - 1.0) > options.norm_tol) {
        throw Error(ErrorCode::Resolution, "grid norm " + std::to_string(norm) + " deviates from 1");
    }
    return wf;
}

Wavefunction from_samples(const ScalarField& psi, const PhysicalConstants& constants) {
    psi.grid.require_spectral();
    constants.validate();
    Wavefunction wf;
    wf.psi = psi;
    wf.constants = constants;
    return wf;
}

ScalarField density(const Wavefunction& psi) {
    ScalarField rho(psi.grid());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi.psi[i]);
    return rho;
}

DensityPhase density_phase(const Wavefunction& wf, double node_floor) {
    const Grid3& g = wf.grid();
    DensityPhase out{density(wf), ScalarField(g), std::vector<bool>(g.size(), true), 0};
    std::vector<double> raw(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        raw[i] = std::arg(wf.psi[i]);
        if (out.rho[i].real() < node_floor) {
            out.defined[i] = false;
            ++out.undefined_count;
        }
    }
    std::vector<double> u(g.size(), 0.0);
    const Index3 c{g.n(0) / 2, g.n(1) / 2, g.n(2) / 2};

    // Sweeps outward from the box center along a line through `start`.
    auto sweep = [&](Index3 start, int axis) {
        const std::size_t n = g.n(axis);
        for (int dir : {+1, -1}) {
            Index3 prev = start;
            for (long s = static_cast<long>(start[axis]) + dir; s >= 0 && s < static_cast<long>(n); s += dir) {
                Index3 cur = prev;
                cur[axis] = static_cast<std::size_t>(s);
                const std::size_t fp = g.flat(prev), fc = g.flat(cur);
                u[fc] = u[fp] + wrap_to_pi(raw[fc] - raw[fp]);
                prev = cur;
            }
        }
    };
    u[g.flat(c)] = raw[g.flat(c)];
    sweep(c, 0);
    for (std::size_t i = 0; i < g.n(0); ++i) sweep({i, c[1], c[2]}, 1);
    for (std::size_t i = 0; i < g.n(0); ++i)
        for (std::size_t j = 0; j < g.n(1); ++j) sweep({i, j, c[2]}, 2);

    for (std::size_t i = 0; i < g.size(); ++i) out.phase[i] = out.defined[i] ? wf.constants.hbar * u[i] : 0.0;
    return out;
}

VectorField schrodinger_current(const Wavefunction& wf, double reality_tol) {
    const Grid3& g = wf.grid();
    ScalarField conj_psi(g);
    for (std::size_t i = 0; i < g.size(); ++i) conj_psi[i] = std::conj(wf.psi[i]);
    const VectorField grad = spectral_gradient(wf.psi);
    const VectorField grad_conj = spectral_gradient(conj_psi);
    const cplx pref = wf.constants.hbar / (2.0 * wf.constants.mass * kI);
    VectorField j(g);
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const cplx v = pref * (conj_psi[i] * grad.components[a][i] - grad_conj.components[a][i] * wf.psi[i]);
            worst = std::max(worst, std::abs(v.imag()));
            j.components[a][i] = v.real();
        }
    }
    if (worst > reality_tol) {
        throw Error(ErrorCode::RealityViolation, "Schrodinger current has imaginary residue " + std::to_string(worst));
    }
    return j;
}

Vec3 mean_momentum(const Wavefunction& wf) {
    const VectorField grad = spectral_gradient(wf.psi);
    Vec3 p{};
    for (int a = 0; a < 3; ++a) {
        cplx s{};
        for (std::size_t i = 0; i < wf.psi.size(); ++i) s += std::conj(wf.psi[i]) * grad.components[a][i];
        p[a] = (-kI * wf.constants.hbar * s * wf.grid().cell_volume()).real();
    }
    return p;
}

double mean_kinetic(const Wavefunction& wf) {
    const VectorField grad = spectral_gradient(wf.psi);
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
        for (const auto& v : grad.components[a]) s += std::norm(v);
    const double hbar = wf.constants.hbar;
    return hbar * hbar * s * wf.grid().cell_volume() / (2.0 * wf.constants.mass);
}

cplx momentum_amplitude(const Wavefunction& wf, const Vec3& p) {
    const Grid3& g = wf.grid();
    std::array<std::vector<cplx>, 3> ph;
    for (int a = 0; a < 3; ++a) {
        ph[a].resize(g.n(a));
        for (std::size_t i = 0; i < g.n(a); ++i) ph[a][i] = std::exp(-kI * p[a] * g.coord(a, i) / wf.constants.hbar);
    }
    cplx s{};
    std::size_t idx = 0;
    for (std::size_t i = 0; i < g.n(0); ++i)
        for (std::size_t j = 0; j < g.n(1); ++j) {
            const cplx pij = ph[0][i] * ph[1][j];
            for (std::size_t k = 0; k < g.n(2); ++k) s += pij * ph[2][k] * wf.psi[idx++];
        }
    return s * g.cell_volume() * std::pow(2.0 * kPi * wf.constants.hbar, -1.5);
}

}  // namespace phasecur
