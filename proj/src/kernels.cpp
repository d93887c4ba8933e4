#include "phasecur/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace phasecur {

namespace {

constexpr cplx kI{0.0, 1.0};

Vec3 require_b(const KernelParams& p, const std::string& name) {
    if (!p.b) throw Error(ErrorCode::MissingParameter, name + " needs parameter b");
    for (double v : *p.b)
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, name + ": b must be finite");
    return *p.b;
}

double require_positive(const std::optional<double>& v, const std::string& name, const char* what) {
    if (!v) throw Error(ErrorCode::MissingParameter, name + " needs parameter " + what);
    if (!(*v > 0.0)) throw Error(ErrorCode::InvalidArgument, name + ": " + what + " must be positive");
    return *v;
}

// (hbar/2) theta x b, the gradient every admissible bilinear kernel shares.
std::function<CVec3(const Vec3&)> spin_gradient(double hbar, const Vec3& b) {
    return [hbar, b](const Vec3& theta) { return to_complex(0.5 * hbar * cross(theta, b)); };
}

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    for (;;) {
        Vec3 v{nd(rng), nd(rng), nd(rng)};
        const double n = norm(v);
        if (n > 1e-6) return (1.0 / n) * v;
    }
}

}  // namespace

Kernel builtin(const std::string& name, const KernelParams& params, const PhysicalConstants& constants) {
    constants.validate();
    const double hbar = constants.hbar;
    Kernel k;
    k.id = name;
    k.params = params;
    k.constants = constants;

    if (name == "wigner") {
        k.eval = [](const Vec3&, const Vec3&) { return cplx{1.0, 0.0}; };
        k.tau_grad0 = [](const Vec3&) { return CVec3{}; };
        k.trivial = true;
    } else if (name == "kirkwood") {
        k.eval = [hbar](const Vec3& th, const Vec3& tau) { return std::exp(kI * 0.5 * hbar * dot(tau, th)); };
        k.tau_grad0 = [hbar](const Vec3& th) {
            return CVec3{kI * 0.5 * hbar * th[0], kI * 0.5 * hbar * th[1], kI * 0.5 * hbar * th[2]};
        };
    } else if (name == "spin_like") {
        const Vec3 b = require_b(params, name);
        k.eval = [hbar, b](const Vec3& th, const Vec3& tau) { return cplx(std::exp(0.5 * hbar * dot(tau, cross(th, b)))); };
        k.tau_grad0 = spin_gradient(hbar, b);
        k.distribution_valued = true;
    } else if (name == "spin_like_regularized") {
        const Vec3 b = require_b(params, name);
        k.eval = [hbar, b](const Vec3& th, const Vec3& tau) {
            const double reg = -0.5 * hbar * hbar * dot(tau, tau) * dot(th, th);
            return cplx(std::exp(reg + 0.5 * hbar * dot(tau, cross(th, b))));
        };
        k.tau_grad0 = spin_gradient(hbar, b);
    } else if (name == "gauss_tau") {
        const Vec3 b = require_b(params, name);
        const double c = require_positive(params.c, name, "c");
        k.eval = [hbar, b, c](const Vec3& th, const Vec3& tau) {
            return cplx(std::exp(-0.5 * c * hbar * hbar * dot(tau, tau) + 0.5 * hbar * dot(tau, cross(th, b))));
        };
        k.tau_grad0 = spin_gradient(hbar, b);
    } else if (name == "cohen_phi_gaussian") {
        const Vec3 b = require_b(params, name);
        const double kk = require_positive(params.k, name, "k");
        const double s0 = require_positive(params.sigma0, name, "sigma0");
        // Closed form of the phi-construction for the Gaussian phi with mean
        // momentum hbar b / 2k: exp(|w|^2 / 2 sigma0^2) exp(b.w / k).
        k.eval = [hbar, b, kk, s0](const Vec3& th, const Vec3& tau) {
            const Vec3 w = (0.5 * kk * hbar) * cross(tau, th);
            return cplx(std::exp(dot(w, w) / (2.0 * s0 * s0) + dot(b, w) / kk));
        };
        k.tau_grad0 = spin_gradient(hbar, b);
        k.distribution_valued = true;
    } else if (name == "dbb") {
        throw Error(ErrorCode::MissingParameter, "the dbb kernel depends on the wavefunction; build it with dbb_kernel()");
    } else {
        throw Error(ErrorCode::UnknownKernel, "unknown kernel '" + name + "'");
    }
    return k;
}

std::vector<std::string> builtin_names() {
    return {"wigner", "kirkwood", "spin_like", "spin_like_regularized", "cohen_phi_gaussian", "gauss_tau", "dbb"};
}

Kernel cohen_phi_kernel(const StateSpec& phi, double k, const Grid3& quadrature_grid,
                        const PhysicalConstants& constants) {
    if (!(k > 0.0)) throw Error(ErrorCode::InvalidArgument, "cohen_phi: k must be positive");
    auto state = std::make_shared<const AnalyticState>(phi, constants);
    const double hbar = constants.hbar;
    const Grid3 g = quadrature_grid;

    // I_k = Int phi* d_k phi dq, spectrally.
    const Wavefunction wf = realize(phi, 0.0, g, constants);
    const VectorField grad = spectral_gradient(wf.psi);
    CVec3 overlap{};
    for (int a = 0; a < 3; ++a) {
        cplx s{};
        for (std::size_t i = 0; i < g.size(); ++i) s += std::conj(wf.psi[i]) * grad.components[a][i];
        overlap[a] = s * g.cell_volume();
    }

    Kernel out;
    out.id = "cohen_phi";
    out.constants = constants;
    out.params.k = k;
    out.eval = [state, g, k, hbar](const Vec3& th, const Vec3& tau) {
        const Vec3 w = (0.5 * k * hbar) * cross(tau, th);
        cplx s{};
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Vec3 q = g.point(i);
            const cplx v = (*state)(std::array<cplx, 3>{q[0] - kI * w[0], q[1] - kI * w[1], q[2] - kI * w[2]}, 0.0);
            s += std::norm(v);
        }
        return s * g.cell_volume();
    };
    // -i k hbar eps_ijk theta_j I_k = -i k hbar (theta x I)_i
    out.tau_grad0 = [overlap, k, hbar](const Vec3& th) {
        const CVec3 c = cross3(to_complex(th), overlap);
        return CVec3{-kI * k * hbar * c[0], -kI * k * hbar * c[1], -kI * k * hbar * c[2]};
    };
    out.distribution_valued = true;
    return out;
}

Kernel custom_kernel(std::string id, std::function<cplx(const Vec3&, const Vec3&)> eval,
                     const PhysicalConstants& constants) {
    Kernel k;
    k.id = std::move(id);
    k.eval = std::move(eval);
    k.constants = constants;
    return k;
}

TauGradient tau_gradient0(const Kernel& kernel, const Vec3& theta) {
    TauGradient out;
    if (kernel.tau_grad0) {
        out.value = kernel.tau_grad0(theta);
        out.analytic = true;
        return out;
    }
    const double h = 1e-3 / (1.0 + norm(theta));
    for (int a = 0; a < 3; ++a) {
        auto central = [&](double step) {
            Vec3 tp{}, tm{};
            tp[a] = step;
            tm[a] = -step;
            const cplx fp = kernel.eval(theta, tp);
            const cplx fm = kernel.eval(theta, tm);
            if (!std::isfinite(fp.real()) || !std::isfinite(fp.imag()) || !std::isfinite(fm.real()) ||
                !std::isfinite(fm.imag())) {
                throw Error(ErrorCode::NonFinite, "kernel " + kernel.id + " is not finite near tau = 0");
            }
            return (fp - fm) / (2.0 * step);
        };
        const cplx coarse = central(h);
        const cplx fine = central(0.5 * h);
        out.value[a] = (4.0 * fine - coarse) / 3.0;
        out.error_estimate = std::max(out.error_estimate, std::abs(out.value[a] - fine));
    }
    return out;
}

std::array<std::vector<cplx>, 3> tau_gradient_lattice(const Kernel& kernel, const Grid3& q_grid) {
    q_grid.require_spectral();
    const std::size_t n = q_grid.size();
    std::array<std::vector<cplx>, 3> d;
    for (auto& c : d) c.resize(n);

    if (!kernel.tau_grad0 && kernel.lattice_eval) {
        const Grid3 rg = q_grid.reciprocal();
        double theta_max = 0.0;
        for (int a = 0; a < 3; ++a) theta_max += 0.25 * rg.length(a) * rg.length(a);
        const double h = 1e-3 / (1.0 + std::sqrt(theta_max));
        for (int a = 0; a < 3; ++a) {
            auto central = [&](double step) {
                Vec3 tp{}, tm{};
                tp[a] = step;
                tm[a] = -step;
                const auto fp = kernel.lattice_eval(q_grid, tp).values;
                const auto fm = kernel.lattice_eval(q_grid, tm).values;
                std::vector<cplx> r(n);
                for (std::size_t i = 0; i < n; ++i) r[i] = (fp[i] - fm[i]) / (2.0 * step);
                return r;
            };
            const auto coarse = central(h);
            const auto fine = central(0.5 * h);
            for (std::size_t i = 0; i < n; ++i) d[a][i] = (4.0 * fine[i] - coarse[i]) / 3.0;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            std::array<bool, 3> nyq{};
            const Vec3 theta = spectral::theta_of(q_grid, i, &nyq);
            const CVec3 v = spectral::nyquist_average(theta, nyq, [&](const Vec3& t) { return tau_gradient0(kernel, t).value; });
            for (int a = 0; a < 3; ++a) d[a][i] = v[a];
        }
    }
    for (const auto& c : d)
        for (const auto& v : c)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                throw Error(ErrorCode::NonFinite, "tau gradient of " + kernel.id + " is not finite on the lattice");
            }
    return d;
}

std::vector<Vec3> default_theta_samples(std::uint64_t seed) {
    std::vector<Vec3> out;
    for (int a = 0; a < 3; ++a)
        for (double m : {0.5, 1.0, 2.0}) {
            Vec3 v{};
            v[a] = m;
            out.push_back(v);
        }
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 20; ++i) out.push_back(random_unit(rng));
    return out;
}

std::vector<Vec3> default_tau_samples(std::uint64_t seed) {
    std::vector<Vec3> out;
    for (int a = 0; a < 3; ++a)
        for (double m : {0.25, 0.5, 1.0}) {
            Vec3 v{};
            v[a] = m;
            out.push_back(v);
        }
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 5; ++i) out.push_back(0.5 * random_unit(rng));
    return out;
}

BFit fit_spin_vector(const std::vector<Vec3>& thetas, const std::vector<CVec3>& gradients, double hbar) {
    if (thetas.empty() || thetas.size() != gradients.size()) {
        throw Error(ErrorCode::IllPosedFit, "need matching, non-empty theta and gradient samples");
    }
    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3cd rhs = Eigen::Vector3cd::Zero();
    auto cross_matrix = [hbar](const Vec3& t) {
        Eigen::Matrix3d m;
        m << 0.0, -t[2], t[1], t[2], 0.0, -t[0], -t[1], t[0], 0.0;
        return Eigen::Matrix3d(0.5 * hbar * m);
    };
    for (std::size_t s = 0; s < thetas.size(); ++s) {
        const Eigen::Matrix3d a = cross_matrix(thetas[s]);
        normal += a.transpose() * a;
        const Eigen::Vector3cd d(gradients[s][0], gradients[s][1], gradients[s][2]);
        rhs += a.transpose().cast<cplx>() * d;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(normal);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo < 1e-10 * hi) {
        throw Error(ErrorCode::IllPosedFit, "theta samples are degenerate (collinear or zero)");
    }
    const Eigen::LDLT<Eigen::Matrix3d> solver(normal);
    const Eigen::Vector3d br = solver.solve(rhs.real());
    const Eigen::Vector3d bi = solver.solve(rhs.imag());

    BFit fit;
    double res2 = 0.0, norm2 = 0.0;
    for (int a = 0; a < 3; ++a) fit.b[a] = cplx(br[a], bi[a]);
    for (std::size_t s = 0; s < thetas.size(); ++s) {
        const Eigen::Vector3cd model = cross_matrix(thetas[s]).cast<cplx>() * Eigen::Vector3cd(fit.b[0], fit.b[1], fit.b[2]);
        for (int a = 0; a < 3; ++a) {
            res2 += std::norm(model[a] - gradients[s][a]);
            norm2 += std::norm(gradients[s][a]);
        }
    }
    fit.residual = norm2 > 0.0 ? std::sqrt(res2 / norm2) : 0.0;
    return fit;
}

std::pair<double, Vec3> split_spin_vector(const Vec3& b) {
    const double lambda = norm(b);
    if (lambda == 0.0) return {0.0, Vec3{0.0, 0.0, 1.0}};
    return {lambda, (1.0 / lambda) * b};
}

AdmissibilityReport check_admissibility(const Kernel& kernel, const std::vector<Vec3>& theta_samples,
                                        const std::vector<Vec3>& tau_samples, double tol) {
    if (theta_samples.empty() || tau_samples.empty()) {
        throw Error(ErrorCode::IllPosedFit, "theta and tau sample sets must be non-empty");
    }
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
    AdmissibilityReport r;
    r.kernel_id = kernel.id;
    r.tol = tol;

    const Vec3 zero{};
    for (const auto& th : theta_samples) r.cond_2_2a.deviation = std::max(r.cond_2_2a.deviation, std::abs(kernel(th, zero) - 1.0));
    for (const auto& tau : tau_samples) r.cond_2_2b.deviation = std::max(r.cond_2_2b.deviation, std::abs(kernel(zero, tau) - 1.0));
    for (const auto& th : theta_samples)
        for (const auto& tau : tau_samples) {
            const cplx f = kernel(th, tau);
            const cplx g = kernel(-th, -tau);
            r.reality.deviation = std::max(r.reality.deviation, std::abs(std::conj(f) - g) / std::max(1.0, std::abs(f)));
        }

    std::vector<CVec3> grads;
    double grad_max = 0.0, div_max = 0.0;
    for (const auto& th : theta_samples) {
        const TauGradient tg = tau_gradient0(kernel, th);
        r.gradient_analytic = tg.analytic;
        grads.push_back(tg.value);
        grad_max = std::max(grad_max, max_abs(tg.value));
        div_max = std::max(div_max, std::abs(th[0] * tg.value[0] + th[1] * tg.value[1] + th[2] * tg.value[2]));
    }
    r.divergence_free.deviation = div_max;
    r.divergence_free.pass = grad_max == 0.0 || div_max < tol * grad_max;

    const BFit fit = fit_spin_vector(theta_samples, grads, kernel.constants.hbar);
    double imag2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        r.fitted_b[a] = fit.b[a].real();
        imag2 += fit.b[a].imag() * fit.b[a].imag();
    }
    r.fitted_b_imag = std::sqrt(imag2);
    r.fit_residual = fit.residual;
    r.mean_momentum_term = tau_gradient0(kernel, zero).value;

    r.cond_2_2a.pass = r.cond_2_2a.deviation <= tol;
    r.cond_2_2b.pass = r.cond_2_2b.deviation <= tol;
    r.reality.pass = r.reality.deviation <= tol;
    return r;
}

}  // namespace phasecur
