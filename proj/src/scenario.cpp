#include "phasecur/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "phasecur/currents.hpp"
#include "phasecur/distributions.hpp"
#include "phasecur/io.hpp"
#include "phasecur/kinetic.hpp"

namespace phasecur {

namespace {

using nlohmann::json;

// Shared plumbing for one run.
struct Run {
    const ScenarioConfig& cfg;
    ScenarioResult result;

    double tol(double fallback) const { return cfg.numerics.tol.value_or(fallback); }

    void verdict(std::string name, bool pass, double value, double tol) {
        result.verdicts.push_back({std::move(name), pass, value, tol});
    }
    void below(std::string name, double value, double tol) { verdict(std::move(name), value < tol, value, tol); }

    std::filesystem::path artifact(const std::string& file) {
        const auto p = cfg.output_dir / file;
        result.artifacts.push_back(p);
        return p;
    }

    RealizeOptions realize_options() const { return {cfg.numerics.leak_tol, cfg.numerics.norm_tol}; }
    Wavefunction wavefunction(const Grid3& g) const { return realize(cfg.state, cfg.time, g, cfg.constants, realize_options()); }
    Wavefunction wavefunction() const { return wavefunction(cfg.grid); }

    std::uint64_t seed(std::uint64_t salt) const { return cfg.seed * 1000003ULL + salt; }
};

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

std::string fmt(double v) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << v;
    return s.str();
}

std::string fmt(const Vec3& v) { return "(" + fmt(v[0]) + "," + fmt(v[1]) + "," + fmt(v[2]) + ")"; }

Vec3 json_vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) config_error(where + " must be an array of 3 numbers");
    Vec3 out{};
    for (int a = 0; a < 3; ++a) {
        if (!v[a].is_number()) config_error(where + " must be an array of 3 numbers");
        out[a] = v[a].get<double>();
    }
    return out;
}

std::vector<double> json_numbers(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) config_error(where + " must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) config_error(where + " must be a non-empty array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<Vec3> json_vectors(const json& v, const std::string& where) {
    if (!v.is_array()) config_error(where + " must be an array of 3-vectors");
    std::vector<Vec3> out;
    for (const auto& x : v) out.push_back(json_vec3(x, where));
    return out;
}

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    for (;;) {
        const Vec3 v{nd(rng), nd(rng), nd(rng)};
        const double n = norm(v);
        if (n > 1e-6) return (1.0 / n) * v;
    }
}

Vec3 param_b(const Run& run, const char* key = "b") {
    if (run.cfg.params.contains(key)) return json_vec3(run.cfg.params[key], std::string("params.") + key);
    if (run.cfg.kernel_params.b) return *run.cfg.kernel_params.b;
    return {0.0, 0.0, 1.0};
}

const Grid3& p_grid(const Run& run) {
    if (!run.cfg.p_grid) config_error("scenario " + run.cfg.scenario + " needs p_grid");
    return *run.cfg.p_grid;
}

Kernel make_kernel(const Run& run, const Wavefunction& psi) {
    if (!run.cfg.kernel_name) config_error("scenario " + run.cfg.scenario + " needs a kernel");
    const std::string& name = *run.cfg.kernel_name;
    if (name == "dbb") {
        if (!run.cfg.kernel_params.b) config_error("kernel dbb needs b");
        return dbb_kernel(psi, *run.cfg.kernel_params.b, run.cfg.numerics.eps_den);
    }
    return builtin(name, run.cfg.kernel_params, run.cfg.constants);
}

std::vector<std::size_t> axis_indices(const AxisSelection& s, const Grid3& g, int axis) {
    if (s.all) return {};
    std::set<std::size_t> idx;
    for (double x : s.coords) idx.insert(g.nearest_index(axis, x));
    return {idx.begin(), idx.end()};
}

Selection selection(const Run& run, const Grid3& qg, const Grid3& pg) {
    Selection s;
    for (int a = 0; a < 3; ++a) {
        s.q[a] = axis_indices(run.cfg.q_selection[a], qg, a);
        s.p[a] = axis_indices(run.cfg.p_selection[a], pg, a);
    }
    return s;
}

/// The z plane nearest 0, unless full-grid output was requested.
std::vector<std::size_t> output_sites(const Run& run, const Grid3& g) {
    if (run.cfg.full_grid) return {};
    const std::size_t k = g.nearest_index(2, 0.0);
    std::vector<std::size_t> sites;
    for (std::size_t i = 0; i < g.n(0); ++i)
        for (std::size_t j = 0; j < g.n(1); ++j) sites.push_back(g.flat(i, j, k));
    return sites;
}

void write_current(Run& run, const std::string& file, CurrentField j, bool with_imag) {
    if (j.sites.empty()) j.sites = output_sites(run, j.grid());
    io::write_current_csv(run.artifact(file), j, with_imag);
}

Index3 exact_grid_point(const Grid3& g, const Vec3& q, const std::string& what) {
    const Index3 idx = g.nearest(q);
    const Vec3 p = g.point(idx);
    for (int a = 0; a < 3; ++a)
        if (std::abs(p[a] - q[a]) > 1e-9 * g.length(a)) config_error(what + " " + fmt(q) + " is not a grid point");
    return idx;
}

double max_gap(const VectorField& a, const VectorField& b) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.components[c][i] - b.components[c][i]));
    return m;
}

// ---------------------------------------------------------------- scenarios

void run_continuity(Run& run) {
    const json& p = run.cfg.params;
    const std::vector<double> times = p.contains("times") ? json_numbers(p["times"], "params.times") : std::vector<double>{run.cfg.time};
    const std::vector<double> lambdas =
        p.contains("lambdas") ? json_numbers(p["lambdas"], "params.lambdas") : std::vector<double>{0.0, 1.0, 2.5};
    std::vector<Vec3> dirs = p.contains("directions") ? json_vectors(p["directions"], "params.directions")
                                                      : std::vector<Vec3>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    long n_random = 5;
    if (p.contains("random_directions")) {
        if (!p["random_directions"].is_number_integer() || p["random_directions"].get<long>() < 0) {
            config_error("params.random_directions must be a non-negative integer");
        }
        n_random = p["random_directions"].get<long>();
    }
    std::mt19937_64 rng(run.seed(1));
    for (long i = 0; i < n_random; ++i) dirs.push_back(random_unit(rng));
    for (const auto& d : dirs)
        if (std::abs(norm(d) - 1.0) > 1e-12) config_error("params.directions must be unit vectors");

    const double tol = run.tol(1e-6);
    std::ofstream csv(run.artifact("continuity.csv"));
    if (!csv) throw Error(ErrorCode::Io, "cannot write continuity.csv");
    csv << "t,lambda,a1,a2,a3,residual\n";
    for (double t : times) {
        const ContinuityProbe probe(run.cfg.state, t, run.cfg.numerics.dt, run.cfg.grid, run.cfg.constants, run.realize_options());
        for (double lambda : lambdas)
            for (const auto& a : dirs) {
                const double r = probe.residual(lambda, a);
                csv << io::format_double(t) << ',' << io::format_double(lambda) << ',' << io::format_double(a[0]) << ','
                    << io::format_double(a[1]) << ',' << io::format_double(a[2]) << ',' << io::format_double(r) << '\n';
                run.below("2.9 continuity t=" + fmt(t) + " lambda=" + fmt(lambda) + " a'=" + fmt(a), r, tol);
            }
    }
    if (!csv) throw Error(ErrorCode::Io, "write to continuity.csv failed");
}

void run_current_compare(Run& run) {
    const Wavefunction wf = run.wavefunction();
    const Kernel kernel = make_kernel(run, wf);
    const AdmissibilityReport rep = check_admissibility(kernel, default_theta_samples(run.seed(7)),
                                                        default_tau_samples(run.seed(11)), run.cfg.numerics.admissibility_tol);
    const Vec3 b = rep.fitted_b;
    const auto [lambda, a_prime] = split_spin_vector(b);

    const CurrentField closed = current_closed_form(wf, kernel);
    const CurrentField ref = spin_like_current(wf, lambda, a_prime);
    const double tol = run.tol(1e-8);
    run.below("2.13 closed form minus spin-like reference", max_gap(closed.j, ref.j), tol);
    run.below("reality of the closed-form current", closed.max_imag(), 1e-8);

    const VectorField extra = kernel_extra_term(wf, kernel);
    run.below("2.9 divergence of the kernel term", divergence(extra).max_abs(), tol);
    const MeanMomentumCheck mm = mean_momentum_check(wf, kernel, tol);
    run.verdict("2.10 mean momentum", mm.equal, mm.gap, tol);
    run.below("2.12-fit residual", rep.fit_residual, run.cfg.numerics.admissibility_tol);

    run.result.extracted["b_fit"] = {b[0], b[1], b[2]};
    run.result.extracted["b_fit_imag_norm"] = rep.fitted_b_imag;
    write_current(run, "current_closed.csv", closed, true);
    write_current(run, "current_reference.csv", ref, false);
}

void run_admissibility(Run& run) {
    Kernel kernel;
    std::optional<Wavefunction> wf;
    if (run.cfg.kernel_name && *run.cfg.kernel_name == "dbb") {
        wf = run.wavefunction();
        kernel = make_kernel(run, *wf);
    } else {
        kernel = make_kernel(run, Wavefunction{});
    }
    const double tol = run.cfg.numerics.admissibility_tol;
    const AdmissibilityReport r =
        check_admissibility(kernel, default_theta_samples(run.seed(7)), default_tau_samples(run.seed(11)), tol);
    run.verdict("2.2a", r.cond_2_2a.pass, r.cond_2_2a.deviation, tol);
    run.verdict("2.2b", r.cond_2_2b.pass, r.cond_2_2b.deviation, tol);
    run.verdict("reality", r.reality.pass, r.reality.deviation, tol);
    run.verdict("2.9 divergence-free", r.divergence_free.pass, r.divergence_free.deviation, tol);
    run.verdict("2.12-fit", r.fit_residual < tol && r.fitted_b_imag < tol, r.fit_residual, tol);
    const double d0 = max_abs(r.mean_momentum_term);
    run.verdict("2.10 mean-momentum term", d0 <= tol, d0, tol);

    run.result.extracted["kernel"] = r.kernel_id;
    run.result.extracted["b_fit"] = {r.fitted_b[0], r.fitted_b[1], r.fitted_b[2]};
    run.result.extracted["b_fit_imag_norm"] = r.fitted_b_imag;
    run.result.extracted["gradient_analytic"] = r.gradient_analytic;
    const auto [lambda, a_prime] = split_spin_vector(r.fitted_b);
    run.result.extracted["lambda"] = lambda;
    run.result.extracted["a_prime"] = {a_prime[0], a_prime[1], a_prime[2]};

    std::ofstream csv(run.artifact("admissibility.csv"));
    if (!csv) throw Error(ErrorCode::Io, "cannot write admissibility.csv");
    csv << "condition,pass,deviation\n";
    for (const auto& v : run.result.verdicts) csv << v.name << ',' << (v.pass ? 1 : 0) << ',' << io::format_double(v.value) << '\n';
    if (!csv) throw Error(ErrorCode::Io, "write to admissibility.csv failed");
}

void marginal_verdicts(Run& run, const Wavefunction& wf, const PhaseSpaceSlice& f) {
    const double tol = run.tol(1e-6);
    bool p_full = true, q_full = true;
    for (int a = 0; a < 3; ++a) {
        p_full = p_full && f.p_axis_full(a);
        q_full = q_full && f.q_axis_full(a);
    }
    if (p_full) {
        const auto pos = position_marginal(f);
        double gap = 0.0;
        for (std::size_t iq = 0; iq < f.q_count(); ++iq) {
            const Index3 l = f.q_local(iq);
            const std::size_t flat = f.q_grid.flat(f.q_index[0][l[0]], f.q_index[1][l[1]], f.q_index[2][l[2]]);
            gap = std::max(gap, std::abs(pos[iq] - std::norm(wf.psi[flat])));
        }
        run.below("2.2a position marginal", gap, tol);
    }
    if (q_full) {
        const auto mom = momentum_marginal(f);
        double gap = 0.0;
        for (std::size_t ip = 0; ip < f.p_count(); ++ip) gap = std::max(gap, std::abs(mom[ip] - std::norm(momentum_amplitude(wf, f.p_point(ip)))));
        run.below("2.2b momentum marginal", gap, tol);
    }
    if (p_full && q_full) {
        cplx total{};
        for (const auto& v : f.values) total += v;
        total *= f.q_grid.cell_volume() * f.p_grid.cell_volume();
        run.below("normalization", std::abs(total - 1.0), tol);
    }
    double re = 0.0, im = 0.0;
    for (const auto& v : f.values) {
        re = std::max(re, std::abs(v.real()));
        im = std::max(im, std::abs(v.imag()));
    }
    run.below("reality of F", re > 0.0 ? im / re : im, 1e-8);
}

void write_slice(Run& run, const std::string& stem, const PhaseSpaceSlice& f) {
    io::write_slice_csv(run.artifact(stem + ".csv"), f);
    if (run.cfg.binary) io::write_slice_binary(run.artifact(stem + ".psf"), f);
}

DistributionOptions distribution_options(const Run& run) {
    DistributionOptions o;
    o.memory_cap = run.cfg.numerics.memory_cap;
    return o;
}

void run_wigner(Run& run) {
    const Wavefunction wf = run.wavefunction();
    const Grid3& pg = p_grid(run);
    const PhaseSpaceSlice f = wigner_transform(wf, pg, selection(run, wf.grid(), pg), distribution_options(run));
    marginal_verdicts(run, wf, f);
    write_slice(run, "wigner_slice", f);
}

void run_distribution(Run& run) {
    const Wavefunction wf = run.wavefunction();
    const Kernel kernel = make_kernel(run, wf);
    const Grid3& pg = p_grid(run);
    const PhaseSpaceSlice f = generalized_distribution(wf, kernel, pg, selection(run, wf.grid(), pg), distribution_options(run));
    marginal_verdicts(run, wf, f);
    run.result.extracted["masked_fraction"] = f.masked_fraction;
    if (kernel.lattice_eval) run.below("3.2 masked fraction", f.masked_fraction, 0.01);

    bool p_full = true;
    for (int a = 0; a < 3; ++a) p_full = p_full && f.p_axis_full(a);
    const bool moment = run.cfg.params.value("moment_check", true);
    if (moment && p_full) {
        MomentOptions mo;
        mo.p_leak_tol = run.cfg.numerics.p_leak_tol;
        mo.mass = run.cfg.constants.mass;
        const CurrentField jm = current_from_moment(f, mo);
        const CurrentField jc = current_closed_form(wf, kernel);
        double gap = 0.0;
        for (std::size_t s : jm.sites)
            for (int a = 0; a < 3; ++a) gap = std::max(gap, std::abs(jm.j.components[a][s] - jc.j.components[a][s]));
        run.below("2.7 moment current vs closed form", gap, run.tol(1e-3));
        io::write_current_csv(run.artifact("current_moment.csv"), jm, true);
    }
    write_slice(run, "distribution_slice", f);
}

void run_kinetic(Run& run) {
    const Wavefunction wf = run.wavefunction();
    const json& p = run.cfg.params;
    std::vector<Vec3> bs = p.contains("b_vectors") ? json_vectors(p["b_vectors"], "params.b_vectors")
                                                   : std::vector<Vec3>{{0, 0, 1}, {1, 0, 0}};
    long n_random = p.contains("b_vectors") ? 0 : 1;
    if (p.contains("random_b")) {
        if (!p["random_b"].is_number_integer() || p["random_b"].get<long>() < 0) config_error("params.random_b must be a non-negative integer");
        n_random = p["random_b"].get<long>();
    }
    std::mt19937_64 rng(run.seed(3));
    for (long i = 0; i < n_random; ++i) bs.push_back(random_unit(rng));
    if (bs.empty()) config_error("kinetic needs at least one b vector");

    const double tol = run.tol(1e-8);
    std::ofstream csv(run.artifact("kinetic_means.csv"));
    if (!csv) throw Error(ErrorCode::Io, "cannot write kinetic_means.csv");
    csv << "b1,b2,b3,integral,quantum,difference\n";
    for (std::size_t i = 0; i < bs.size(); ++i) {
        const Vec3& b = bs[i];
        const KineticField k = local_kinetic_energy(wf, b, 1.0);
        const double integral = integrate(k.K).real();
        const double quantum = mean_kinetic(wf);
        run.below("4.1 mean kinetic b=" + fmt(b), std::abs(integral - quantum), tol);
        run.below("4.1 reality b=" + fmt(b), k.max_imag, 1e-8);
        const KineticTerms t = kinetic_terms(wf, b);
        run.below("4.1 curl term integrates to zero b=" + fmt(b), std::abs(integrate(t.curl)), 1e-10);
        csv << io::format_double(b[0]) << ',' << io::format_double(b[1]) << ',' << io::format_double(b[2]) << ','
            << io::format_double(integral) << ',' << io::format_double(quantum) << ',' << io::format_double(integral - quantum) << '\n';
        if (i == 0) {
            run.result.extracted["mean_kinetic"] = quantum;
            if (run.cfg.full_grid) {
                io::write_kinetic_csv(run.artifact("kinetic.csv"), k);
            } else {
                const Grid3& g = k.grid();
                std::ofstream kcsv(run.artifact("kinetic.csv"));
                if (!kcsv) throw Error(ErrorCode::Io, "cannot write kinetic.csv");
                kcsv << "q1,q2,q3,K\n";
                for (std::size_t s : output_sites(run, g)) {
                    const Vec3 q = g.point(s);
                    kcsv << io::format_double(q[0]) << ',' << io::format_double(q[1]) << ',' << io::format_double(q[2]) << ','
                         << io::format_double(k.K[s].real()) << '\n';
                }
                if (!kcsv) throw Error(ErrorCode::Io, "write to kinetic.csv failed");
            }
        }
    }
    if (!csv) throw Error(ErrorCode::Io, "write to kinetic_means.csv failed");
}

// d/dq_axis of an analytic state by a 5-point stencil.
cplx analytic_derivative(const AnalyticState& s, const Vec3& q, int axis, double t) {
    const double h = 1e-3;
    auto at = [&](double d) {
        Vec3 x = q;
        x[axis] += d;
        return s(x, t);
    };
    return (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
}

void run_interdependence(Run& run) {
    const Wavefunction wf = run.wavefunction();
    const json& p = run.cfg.params;
    const Vec3 b = param_b(run);
    const Vec3 q = p.contains("q") ? json_vec3(p["q"], "params.q") : Vec3{0.0, 1.0, 0.0};
    const Grid3& g = wf.grid();
    const Index3 qi = exact_grid_point(g, q, "params.q");
    const auto [lambda, a_prime] = split_spin_vector(b);

    // Reference from the analytic wavefunction: j_S + (lambda hbar/2m)(grad rho x a').
    const AnalyticState& s = *wf.analytic;
    const cplx psi = s(q, wf.time);
    CVec3 dpsi{};
    Vec3 grho{}, js{};
    const double hbar = run.cfg.constants.hbar, m = run.cfg.constants.mass;
    for (int a = 0; a < 3; ++a) {
        dpsi[a] = analytic_derivative(s, q, a, wf.time);
        grho[a] = 2.0 * (std::conj(psi) * dpsi[a]).real();
        js[a] = hbar / m * (std::conj(psi) * dpsi[a]).imag();
    }
    const Vec3 spin = (lambda * hbar / (2.0 * m)) * cross(grho, a_prime);
    const double ref = js[0] + spin[0];

    const CurrentField j1 = spin_like_current(wf, lambda, a_prime);
    const CurrentField j0 = spin_like_current(wf, 0.0, a_prime);
    const double value = j1.j.components[0][g.flat(qi)].real();
    run.verdict("interdependence j1 at q=" + fmt(q) + " lambda=" + fmt(lambda), std::abs(value - ref) < run.tol(1e-8), value,
                run.tol(1e-8));
    run.result.extracted["j1_reference"] = ref;

    // j1 along the line (0, y, 0) for both lambdas.
    std::ofstream csv(run.artifact("interdependence_line.csv"));
    if (!csv) throw Error(ErrorCode::Io, "cannot write interdependence_line.csv");
    csv << "q2,j1_lambda,j1_zero\n";
    double zero_max = 0.0;
    for (std::size_t y = 0; y < g.n(1); ++y) {
        const std::size_t f = g.flat(qi[0], y, qi[2]);
        const double a = j1.j.components[0][f].real();
        const double z = j0.j.components[0][f].real();
        zero_max = std::max(zero_max, std::abs(z));
        csv << io::format_double(g.coord(1, y)) << ',' << io::format_double(a) << ',' << io::format_double(z) << '\n';
    }
    if (!csv) throw Error(ErrorCode::Io, "write to interdependence_line.csv failed");
    run.below("interdependence lambda=0 j1 along the line", zero_max, 1e-12);

    // Factorization across axes 1 and 2 on a coarser lattice.
    auto small_grid = [&](const char* key, const Grid3& fallback) {
        if (!p.contains(key)) return fallback;
        const json& gj = p[key];
        if (!gj.is_object() || !gj.contains("n") || !gj.contains("L") || !gj["n"].is_number_integer() || !gj["L"].is_number()) {
            config_error(std::string("params.") + key + " must be {\"n\": int, \"L\": number}");
        }
        const Grid3 out = Grid3::cubic(gj["n"].get<std::size_t>(), gj["L"].get<double>());
        out.require_spectral();
        return out;
    };
    const Grid3 fq = small_grid("factor_q_grid", Grid3::cubic(28, 14.0));
    const Grid3 fp = small_grid("factor_p_grid", Grid3::cubic(12, 12.0));
    const Wavefunction small = run.wavefunction(fq);
    Selection sel;
    sel.q[2] = {fq.nearest_index(2, 0.0)};
    sel.p[2] = {fp.nearest_index(2, 0.0)};
    const PhaseSpaceSlice w = wigner_transform(small, fp, sel, distribution_options(run));
    KernelParams kp;
    kp.b = b;
    const PhaseSpaceSlice r =
        generalized_distribution(small, builtin("spin_like_regularized", kp, run.cfg.constants), fp, sel, distribution_options(run));
    const double dw = factorization_defect(w, 0, 1);
    const double dr = factorization_defect(r, 0, 1);
    run.below("factorization defect wigner", dw, 1e-8);
    run.verdict("factorization defect spin_like_regularized", dr > 1e-3, dr, 1e-3);
    write_slice(run, "factor_regularized_slice", r);
}

void run_dbb(Run& run) {
    const Wavefunction wf = run.wavefunction();
    const json& p = run.cfg.params;
    const Vec3 b = param_b(run);
    const Vec3 tau = p.contains("tau") ? json_vec3(p["tau"], "params.tau") : Vec3{0.3, 0.0, 0.0};
    const std::vector<Vec3> thetas =
        p.contains("thetas") ? json_vectors(p["thetas"], "params.thetas")
                             : std::vector<Vec3>{{0, 0, 0}, {0.5, 0, 0}, {0, 1, 0}, {0, 0, 2}, {0.3, -0.4, 0.5}};

    const MomentumField field = dbb_field(wf, b, run.cfg.numerics.node_floor);
    const CurrentField jm = current_from_moment(field, run.cfg.constants);
    const auto [lambda, a_prime] = split_spin_vector(b);
    const CurrentField ref = spin_like_current(wf, lambda, a_prime);
    run.below("3.1 first moment equals spin-like current", max_gap(jm.j, ref.j), run.tol(1e-10));

    const Kernel k = dbb_kernel(wf, b, run.cfg.numerics.eps_den);
    double dev = 0.0;
    for (const auto& th : thetas) dev = std::max(dev, std::abs(k(th, Vec3{}) - 1.0));
    run.below("2.2a dbb f(theta,0)=1", dev, 1e-12);
    const cplx f0 = k(Vec3{}, tau);
    run.verdict("2.2b dbb f(0,tau)=1", std::abs(f0 - 1.0) < 1e-12, f0.real(), 1e-12);
    run.result.extracted["f_0_tau"] = {f0.real(), f0.imag()};
    run.result.extracted["tau"] = {tau[0], tau[1], tau[2]};
    write_current(run, "dbb_current.csv", jm, false);
}

const std::map<std::string, std::function<void(Run&)>>& runners() {
    static const std::map<std::string, std::function<void(Run&)>> table{
        {"continuity", run_continuity},     {"current-compare", run_current_compare},
        {"kernel-admissibility", run_admissibility}, {"wigner", run_wigner},
        {"distribution", run_distribution}, {"kinetic", run_kinetic},
        {"interdependence", run_interdependence}, {"dbb", run_dbb},
    };
    return table;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write to " + path.string() + " failed");
}

}  // namespace

bool ScenarioResult::all_pass() const {
    for (const auto& v : verdicts)
        if (!v.pass) return false;
    return true;
}

json summary_json(const ScenarioResult& result) {
    json verdicts = json::array();
    for (const auto& v : result.verdicts) {
        verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"value", v.value}, {"tol", v.tol}});
    }
    json out = {{"scenario", result.scenario}, {"verdicts", verdicts}};
    if (!result.extracted.empty()) out["extracted"] = result.extracted;
    return out;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const auto it = runners().find(config.scenario);
    if (it == runners().end()) config_error("unknown scenario '" + config.scenario + "'");

    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + config.output_dir.string() + ": " + ec.message());

    Run run{config, {}};
    run.result.scenario = config.scenario;
    it->second(run);

    // Expected outcomes turn a verdict into "observed matches expected".
    for (const auto& [name, expected] : config.expect) {
        bool found = false;
        for (auto& v : run.result.verdicts) {
            if (v.name != name) continue;
            v.pass = (v.pass == expected);
            found = true;
        }
        if (!found) config_error("expect names an unknown verdict '" + name + "'");
    }

    run.result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(config.output_dir / "summary.json", summary_json(run.result));
    write_json(config.output_dir / "timing.json", {{"scenario", config.scenario}, {"runtime_s", run.result.runtime_s}});
    run.result.artifacts.push_back(config.output_dir / "summary.json");
    return run.result;
}

}  // namespace phasecur
