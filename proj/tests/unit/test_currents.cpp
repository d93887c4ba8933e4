#include <doctest.h>

#include <random>

#include "phasecur/currents.hpp"

using namespace phasecur;

namespace {

const Grid3 kQ = Grid3::cubic(28, 14.0);

const Wavefunction& ground() {
    static const Wavefunction w = realize(StateSpec::gaussian(1.0), 0.0, kQ);
    return w;
}

const Wavefunction& moving() {
    static const Wavefunction w = realize(StateSpec::gaussian(1.0, {}, {1.0, 0.0, 0.0}), 0.0, kQ);
    return w;
}

double max_gap(const VectorField& a, const VectorField& b) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.components[c][i] - b.components[c][i]));
    return m;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::Io;
}

// rho at (1, 0, 0) for the unit Gaussian: (2 pi)^-3/2 e^-1/2 = 0.038510.
constexpr double kSpinValue = 0.019255;

}  // namespace

TEST_CASE("spin-like current of the Gaussian ground state") {
    const CurrentField j1 = spin_like_current(ground(), 1.0, {0, 0, 1});
    const CVec3 v = j1.at(Vec3{1, 0, 0});
    CHECK(std::abs(v[0]) < 1e-12);
    CHECK(v[1].real() == doctest::Approx(kSpinValue).epsilon(1e-4));
    CHECK(std::abs(v[2]) < 1e-12);
    CHECK(spin_like_current(ground(), 2.0, {0, 0, 1}).at(Vec3{1, 0, 0})[1].real() == doctest::Approx(0.038510).epsilon(1e-4));
    CHECK(j1.provenance == CurrentProvenance::SpinLikeRef);
    CHECK(code_of([] { spin_like_current(ground(), 1.0, {0, 0, 2}); }) == ErrorCode::NonUnitVector);
    CHECK_NOTHROW(spin_like_current(ground(), 0.0, {0, 0, 2}));
}

TEST_CASE("Kirkwood extra term is imaginary") {
    const VectorField extra = kernel_extra_term(ground(), builtin("kirkwood"));
    const std::size_t i = kQ.flat(kQ.nearest({1, 0, 0}));
    CHECK(std::abs(extra.components[0][i] - cplx(0.0, -kSpinValue)) < 1e-6);
}

TEST_CASE("closed form: Wigner gives the Schrodinger current") {
    const CurrentField jw = current_closed_form(moving(), builtin("wigner"));
    const CurrentField js = schrodinger_current_field(moving());
    CHECK(max_gap(jw.j, js.j) < 1e-14);
    const std::size_t origin = kQ.flat(kQ.nearest({0, 0, 0}));
    CHECK(js.at(origin)[0].real() == doctest::Approx(0.0634936).epsilon(1e-6));
}

TEST_CASE("property: closed form of every spin-type kernel equals the spin-like reference") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 3; ++trial) {
        const Vec3 b{n01(rng), n01(rng), n01(rng)};
        const auto [lambda, a] = split_spin_vector(b);
        const CurrentField ref = spin_like_current(moving(), lambda, a);
        KernelParams kp{b, 0.5, 0.7, 1.3};
        for (const char* name : {"spin_like", "spin_like_regularized", "gauss_tau", "cohen_phi_gaussian"}) {
            const CurrentField j = current_closed_form(moving(), builtin(name, kp));
            CHECK(max_gap(j.j, ref.j) < 1e-8);
            CHECK(j.max_imag() < 1e-12);
        }
        const ScalarField div = divergence(spin_term(moving(), lambda, a));
        CHECK(div.max_abs() < 1e-10);
    }
}

TEST_CASE("continuity holds for every lambda and direction") {
    const StateSpec spec = StateSpec::gaussian(1.0, {}, {1.0, 0.5, 0.0});
    const Grid3 g = Grid3::cubic(40, 20.0);
    const ContinuityProbe probe(spec, 0.0, 1e-4, g);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    for (double lambda : {0.0, 1.0, 2.5}) {
        for (int trial = 0; trial < 3; ++trial) {
            Vec3 a{n01(rng), n01(rng), n01(rng)};
            a = (1.0 / norm(a)) * a;
            CHECK(probe.residual(lambda, a) < 1e-6);
        }
    }
    CHECK(continuity_residual(spec, 1.0, {0, 0, 1}, 0.3, 1e-4, g) < 1e-6);
    // A real Gaussian at t = 0 has drho/dt = 0, so the relative residual is undefined.
    CHECK(code_of([&] { ContinuityProbe(StateSpec::gaussian(1.0), 0.0, 1e-4, g); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("mean momentum from the current") {
    const MeanMomentumCheck spin = mean_momentum_check(moving(), builtin("spin_like", {Vec3{0.3, 0, 1}}));
    CHECK(spin.equal);
    CHECK(std::abs(spin.from_current[0] - 1.0) < 1e-8);

    const MeanMomentumCheck kw = mean_momentum_check(moving(), builtin("kirkwood"));
    CHECK(kw.equal);

    // f = exp(i c . tau): D(0) = i c, so m Int j = <p> + c.
    const Vec3 c{0.2, 0.0, -0.1};
    const Kernel drift = custom_kernel("drift", [c](const Vec3&, const Vec3& tau) { return std::exp(cplx(0.0, dot(c, tau))); });
    const MeanMomentumCheck d = mean_momentum_check(moving(), drift);
    REQUIRE(d.correction.has_value());
    CHECK(std::abs((*d.correction)[0] - 0.2) < 1e-6);
    CHECK(d.gap < 1e-6);
    CHECK_FALSE(d.equal);
}

TEST_CASE("first moment of the Wigner function reproduces rho p0 / m") {
    // tau reaches pi n / L = 13.8, where the Gaussian autocorrelation is ~1e-10.
    const Grid3 pg = Grid3::cubic(44, 10.0);
    const PhaseSpaceSlice w = wigner_transform(moving(), pg, Selection::at_q(kQ, {0, 0, 0}));
    const CurrentField j = current_from_moment(w);
    CHECK(j.provenance == CurrentProvenance::Moment);
    CHECK(j.at(j.sites.at(0))[0].real() == doctest::Approx(0.0634936).epsilon(1e-6));
    CHECK(std::abs(j.at(j.sites.at(0))[1]) < 1e-10);

    MomentOptions half_mass;
    half_mass.mass = 0.5;
    CHECK(current_from_moment(w, half_mass).at(j.sites.at(0))[0].real() == doctest::Approx(2 * 0.0634936).epsilon(1e-6));

    Selection thin = Selection::at_q(kQ, {0, 0, 0});
    thin.p[1] = {22};
    CHECK(code_of([&] { current_from_moment(wigner_transform(moving(), pg, thin)); }) == ErrorCode::ThinSlice);
    const PhaseSpaceSlice narrow = wigner_transform(moving(), Grid3::cubic(12, 4.0), Selection::at_q(kQ, {0, 0, 0}));
    CHECK(code_of([&] { current_from_moment(narrow); }) == ErrorCode::MomentumBoundaryLeakage);
}

TEST_CASE("first moment of the regularized spin-like distribution approaches the closed form") {
    const Vec3 b{0, 0, 1};
    const PhaseSpaceSlice f =
        generalized_distribution(ground(), builtin("spin_like_regularized", {b}), Grid3::cubic(12, 12.0), Selection::at_q(kQ, {1, 0, 0}));
    MomentOptions opts;
    opts.p_leak_tol = 1e-4;
    const CurrentField j = current_from_moment(f, opts);
    CHECK(std::abs(j.at(j.sites.at(0))[1].real() - kSpinValue) < 3e-3);
}

TEST_CASE("first moment of the de Broglie-Bohm field equals the spin-like current") {
    for (const Vec3& b : {Vec3{0, 0, 1}, Vec3{0.6, -0.8, 0}}) {
        const CurrentField j = current_from_moment(dbb_field(moving(), b), moving().constants);
        const CurrentField ref = spin_like_current(moving(), 1.0, b);
        CHECK(max_gap(j.j, ref.j) < 1e-10);
    }
}
