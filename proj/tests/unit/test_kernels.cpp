#include <doctest.h>

#include <random>

#include "phasecur/kernels.hpp"

using namespace phasecur;

namespace {

const std::vector<Vec3> kThetas = default_theta_samples();
const std::vector<Vec3> kTaus = default_tau_samples();

AdmissibilityReport report(const Kernel& k) { return check_admissibility(k, kThetas, kTaus, 1e-6); }

CVec3 spin_gradient_exact(const Vec3& theta, const Vec3& b, double hbar = 1.0) {
    return to_complex((0.5 * hbar) * cross(theta, b));
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

}  // namespace

TEST_CASE("kernel values at reference points") {
    const Vec3 th{1.0, 0.0, 0.0}, tau{0.0, 0.3, 0.0};
    CHECK(builtin("wigner")(th, tau) == cplx(1.0, 0.0));
    const cplx kw = builtin("kirkwood")({0.4, 0, 0}, {0.5, 0, 0});
    CHECK(std::abs(kw - std::exp(cplx(0.0, 0.1))) < 1e-15);
    // (hbar/2) tau . (theta x b) with theta x b = (0, -1, 0) for b = e3.
    const cplx s = builtin("spin_like", {Vec3{0, 0, 1}})(th, tau);
    CHECK(s.real() == doctest::Approx(std::exp(-0.15)));
    const cplx r = builtin("spin_like_regularized", {Vec3{0, 0, 1}})(th, tau);
    CHECK(r.real() == doctest::Approx(std::exp(-0.15 - 0.045)));
}

TEST_CASE("admissibility verdicts for the built-in kernels") {
    for (const char* name : {"spin_like", "spin_like_regularized"}) {
        const AdmissibilityReport rep = report(builtin(name, {Vec3{0.2, -0.5, 1.0}}));
        CHECK(rep.cond_2_2a.pass);
        CHECK(rep.cond_2_2b.pass);
        CHECK(rep.reality.pass);
        CHECK(rep.divergence_free.pass);
        CHECK(rep.gradient_analytic);
        CHECK(rep.fitted_b[0] == doctest::Approx(0.2));
        CHECK(rep.fitted_b[1] == doctest::Approx(-0.5));
        CHECK(rep.fitted_b[2] == doctest::Approx(1.0));
        CHECK(rep.fit_residual < 1e-10);
    }

    const AdmissibilityReport w = report(builtin("wigner"));
    CHECK((w.cond_2_2a.pass && w.cond_2_2b.pass && w.reality.pass && w.divergence_free.pass));
    CHECK(norm(w.fitted_b) < 1e-14);

    const AdmissibilityReport kw = report(builtin("kirkwood"));
    CHECK(kw.cond_2_2a.pass);
    CHECK(kw.cond_2_2b.pass);
    CHECK_FALSE(kw.reality.pass);
    CHECK_FALSE(kw.divergence_free.pass);
    CHECK(max_abs(kw.mean_momentum_term) < 1e-14);

    KernelParams gp{Vec3{0, 1, 0}, 0.7};
    const AdmissibilityReport g = report(builtin("gauss_tau", gp));
    CHECK((g.cond_2_2a.pass && g.reality.pass && g.divergence_free.pass));
    CHECK_FALSE(g.cond_2_2b.pass);  // exp(-c hbar^2 tau^2 / 2) at theta = 0
    CHECK(g.fitted_b[1] == doctest::Approx(1.0));
}

TEST_CASE("a kernel that breaks f(0, tau) = 1 is caught") {
    const Kernel bad = custom_kernel("shifted", [](const Vec3&, const Vec3& tau) { return cplx(std::exp(-dot(tau, tau))); });
    const AdmissibilityReport rep = report(bad);
    CHECK(rep.cond_2_2a.pass);
    CHECK_FALSE(rep.cond_2_2b.pass);
    CHECK(rep.cond_2_2b.deviation > 0.1);
}

TEST_CASE("property: numerical tau gradient agrees with the analytic one") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec3 b{u(rng), u(rng), u(rng)};
        const Kernel analytic = builtin("spin_like_regularized", {b});
        const Kernel numeric = custom_kernel("numeric", analytic.eval);
        const Vec3 th{u(rng), u(rng), u(rng)};
        const TauGradient ga = tau_gradient0(analytic, th);
        const TauGradient gn = tau_gradient0(numeric, th);
        CHECK(ga.analytic);
        CHECK_FALSE(gn.analytic);
        const CVec3 exact = spin_gradient_exact(th, b);
        for (int a = 0; a < 3; ++a) {
            CHECK(std::abs(ga.value[a] - exact[a]) < 1e-14);
            CHECK(std::abs(gn.value[a] - exact[a]) < 1e-6);
        }
    }
}

TEST_CASE("tau gradient on the theta lattice") {
    const Grid3 g = Grid3::cubic(8, 4.0);
    const Vec3 b{0.0, 0.0, 2.0};
    const auto lattice = tau_gradient_lattice(builtin("spin_like", {b}), g);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::array<bool, 3> nyq{};
        const Vec3 th = spectral::theta_of(g, i, &nyq);
        const CVec3 exact = spectral::nyquist_average(th, nyq, [&](const Vec3& t) { return spin_gradient_exact(t, b); });
        for (int a = 0; a < 3; ++a) err = std::max(err, std::abs(lattice[a][i] - exact[a]));
    }
    CHECK(err < 1e-13);
}

TEST_CASE("property: fit_spin_vector recovers b from exact gradients") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        const Vec3 b{n01(rng), n01(rng), n01(rng)};
        std::vector<CVec3> grads;
        for (const auto& th : kThetas) grads.push_back(spin_gradient_exact(th, b, 0.5));
        const BFit fit = fit_spin_vector(kThetas, grads, 0.5);
        for (int a = 0; a < 3; ++a) CHECK(std::abs(fit.b[a] - b[a]) < 1e-10);
        CHECK(fit.residual < 1e-10);
    }
    const auto [lambda, a_prime] = split_spin_vector({0.0, 3.0, 4.0});
    CHECK(lambda == doctest::Approx(5.0));
    CHECK(a_prime[1] == doctest::Approx(0.6));
    CHECK(split_spin_vector({0, 0, 0}).second[2] == 1.0);
}

TEST_CASE("phi construction by quadrature matches the Gaussian closed form") {
    const Vec3 b{0.0, 0.0, 1.0};
    const double k = 0.5, s0 = 1.0;
    const Kernel closed = builtin("cohen_phi_gaussian", {b, std::nullopt, k, s0});
    const StateSpec phi = StateSpec::gaussian(s0, {}, (1.0 / (2.0 * k)) * b);
    const Kernel quad = cohen_phi_kernel(phi, k, Grid3::cubic(24, 18.0));
    for (const auto& [th, tau] : std::vector<std::pair<Vec3, Vec3>>{{{0.5, 0, 0}, {0, 0.3, 0}}, {{0.2, 0.4, 0}, {0.1, -0.3, 0.2}}}) {
        CHECK(std::abs(quad(th, tau) - closed(th, tau)) < 1e-8);
    }
    const TauGradient gq = tau_gradient0(quad, {0.3, 0.7, 0.0});
    const CVec3 exact = spin_gradient_exact({0.3, 0.7, 0.0}, b);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(gq.value[a] - exact[a]) < 1e-8);
    CHECK(quad.distribution_valued);
}

TEST_CASE("kernel construction errors") {
    CHECK(code_of([] { builtin("nope"); }) == ErrorCode::UnknownKernel);
    CHECK(code_of([] { builtin("spin_like"); }) == ErrorCode::MissingParameter);
    CHECK(code_of([] { builtin("gauss_tau", {Vec3{0, 0, 1}}); }) == ErrorCode::MissingParameter);
    CHECK(code_of([] { builtin("dbb", {Vec3{0, 0, 1}}); }) == ErrorCode::MissingParameter);
    CHECK(code_of([] { builtin("wigner", {}, PhysicalConstants{1.0, -1.0}); }) == ErrorCode::InvalidArgument);
}
