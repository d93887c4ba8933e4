#include "phasecur/distributions.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>

namespace phasecur {

namespace {

constexpr cplx kI{0.0, 1.0};

std::array<std::vector<std::size_t>, 3> resolve(const std::array<std::vector<std::size_t>, 3>& sel, const Grid3& g) {
    std::array<std::vector<std::size_t>, 3> out;
    for (int a = 0; a < 3; ++a) {
        if (sel[a].empty()) {
            out[a].resize(g.n(a));
            std::iota(out[a].begin(), out[a].end(), std::size_t{0});
        } else {
            for (auto i : sel[a])
                if (i >= g.n(a)) throw Error(ErrorCode::InvalidArgument, "selection index outside the grid");
            out[a] = sel[a];
        }
    }
    return out;
}

Index3 local_index(const std::array<std::vector<std::size_t>, 3>& idx, std::size_t flat) {
    const std::size_t n1 = idx[1].size(), n2 = idx[2].size();
    return {flat / (n1 * n2), (flat / n2) % n1, flat % n2};
}

// tau lattice conjugate to one p axis, including both Nyquist end points at half weight.
struct TauAxis {
    std::vector<double> tau;
    std::vector<double> weight;
    double step = 0.0;
};

TauAxis tau_axis(const Grid3& p_grid, int a) {
    TauAxis t;
    const long n = static_cast<long>(p_grid.n(a));
    t.step = 2.0 * kPi / p_grid.length(a);
    for (long m = -n / 2; m <= n / 2; ++m) {
        t.tau.push_back(static_cast<double>(m) * t.step);
        t.weight.push_back((2 * std::abs(m) == n) ? 0.5 : 1.0);
    }
    return t;
}

// C_tau(q) = (2 pi)^-3 Int exp(-i theta.q) f(theta, tau) A(theta, tau) dtheta at the selected q.
class SmoothedCorrelation {
public:
    SmoothedCorrelation(const Wavefunction& psi, const Kernel& kernel, const std::array<std::vector<std::size_t>, 3>& q_index,
                        bool analytic_shift)
        : psi_(psi), kernel_(kernel), q_index_(q_index), analytic_shift_(analytic_shift && psi.analytic) {
        const Grid3& g = psi.grid();
        const std::size_t qc = q_index[0].size() * q_index[1].size() * q_index[2].size();
        for (std::size_t iq = 0; iq < qc; ++iq) {
            const Index3 l = local_index(q_index, iq);
            q_flat_.push_back(g.flat(q_index[0][l[0]], q_index[1][l[1]], q_index[2][l[2]]));
        }
        if (!kernel.trivial && !kernel.lattice_eval) {
            thetas_.resize(g.size());
            nyquist_.resize(g.size());
            for (std::size_t k = 0; k < g.size(); ++k) {
                std::array<bool, 3> nyq{};
                thetas_[k] = spectral::theta_of(g, k, &nyq);
                nyquist_[k] = nyq[0] || nyq[1] || nyq[2];
            }
        }
        direct_ = !kernel.trivial && qc <= 32;
        pointwise_ = kernel.trivial && analytic_shift_ && 16 * qc <= g.size();
        if (direct_) {
            for (int a = 0; a < 3; ++a) {
                const std::size_t n = g.n(a);
                tables_[a].resize(n * n);
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t j = 0; j < n; ++j)
                        tables_[a][k * n + j] = std::exp(cplx(0.0, -2.0 * kPi * static_cast<double>((k * j) % n) / static_cast<double>(n)));
            }
        }
    }

    std::vector<cplx> operator()(const Vec3& tau) {
        const Grid3& g = psi_.grid();
        const Vec3 s = (0.5 * psi_.constants.hbar) * tau;
        if (pointwise_) {
            // No smoothing and few points: evaluate only where needed.
            std::vector<cplx> out(q_flat_.size());
            for (std::size_t iq = 0; iq < out.size(); ++iq) {
                const Vec3 q = g.point(q_flat_[iq]);
                out[iq] = std::conj((*psi_.analytic)(q - s, psi_.time)) * (*psi_.analytic)(q + s, psi_.time);
            }
            return out;
        }
        const std::vector<cplx> plus = shifted(s);
        const std::vector<cplx> minus = shifted(-s);
        std::vector<cplx> b(g.size());
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::conj(minus[i]) * plus[i];

        std::vector<cplx> out(q_flat_.size());
        if (kernel_.trivial) {
            for (std::size_t iq = 0; iq < out.size(); ++iq) out[iq] = b[q_flat_[iq]];
            return out;
        }
        std::vector<cplx> y = spectral::to_theta(g, b);
        if (kernel_.lattice_eval) {
            const LatticeValues lv = kernel_.lattice_eval(g, tau);
            for (std::size_t k = 0; k < y.size(); ++k) y[k] *= lv.values[k];
            masked_ += lv.masked;
        } else {
            for (std::size_t k = 0; k < y.size(); ++k) {
                if (nyquist_[k]) {
                    std::array<bool, 3> nyq{};
                    const Vec3 theta = spectral::theta_of(g, k, &nyq);
                    y[k] *= spectral::nyquist_average(theta, nyq, [&](const Vec3& t) { return kernel_.eval(t, tau); });
                } else {
                    y[k] *= kernel_.eval(thetas_[k], tau);
                }
            }
        }
        evaluated_ += y.size();
        if (!direct_) {
            const std::vector<cplx> c = spectral::from_theta(g, std::move(y));
            for (std::size_t iq = 0; iq < out.size(); ++iq) out[iq] = c[q_flat_[iq]];
            return out;
        }
        const std::size_t n0 = g.n(0), n1 = g.n(1), n2 = g.n(2);
        const double inv = 1.0 / static_cast<double>(g.size());
        for (std::size_t iq = 0; iq < out.size(); ++iq) {
            const Index3 j = g.unflat(q_flat_[iq]);
            cplx sum{};
            std::size_t idx = 0;
            for (std::size_t k0 = 0; k0 < n0; ++k0) {
                const cplx a0 = tables_[0][k0 * n0 + j[0]];
                for (std::size_t k1 = 0; k1 < n1; ++k1) {
                    const cplx a01 = a0 * tables_[1][k1 * n1 + j[1]];
                    cplx inner{};
                    for (std::size_t k2 = 0; k2 < n2; ++k2) inner += tables_[2][k2 * n2 + j[2]] * y[idx++];
                    sum += a01 * inner;
                }
            }
            out[iq] = sum * inv;
        }
        return out;
    }

    double masked_fraction() const { return evaluated_ ? static_cast<double>(masked_) / static_cast<double>(evaluated_) : 0.0; }

private:
    std::vector<cplx> shifted(const Vec3& s) const {
        if (analytic_shift_) return psi_.analytic->sample(psi_.grid(), psi_.time, s);
        return spectral_shift(psi_.psi, s).values;
    }

    const Wavefunction& psi_;
    const Kernel& kernel_;
    std::array<std::vector<std::size_t>, 3> q_index_;
    std::vector<std::size_t> q_flat_;
    bool analytic_shift_;
    bool direct_ = false;
    bool pointwise_ = false;
    std::array<std::vector<cplx>, 3> tables_;
    std::vector<Vec3> thetas_;
    std::vector<bool> nyquist_;
    std::size_t masked_ = 0;
    std::size_t evaluated_ = 0;
};

}  // namespace

Selection Selection::at_q(const Grid3& q_grid, const Vec3& q) {
    const Index3 idx = q_grid.nearest(q);
    Selection s;
    for (int a = 0; a < 3; ++a) s.q[a] = {idx[a]};
    return s;
}

Index3 PhaseSpaceSlice::q_local(std::size_t iq) const { return local_index(q_index, iq); }
Index3 PhaseSpaceSlice::p_local(std::size_t ip) const { return local_index(p_index, ip); }

Vec3 PhaseSpaceSlice::q_point(std::size_t iq) const {
    const Index3 l = q_local(iq);
    return {q_grid.coord(0, q_index[0][l[0]]), q_grid.coord(1, q_index[1][l[1]]), q_grid.coord(2, q_index[2][l[2]])};
}

Vec3 PhaseSpaceSlice::p_point(std::size_t ip) const {
    const Index3 l = p_local(ip);
    return {p_grid.coord(0, p_index[0][l[0]]), p_grid.coord(1, p_index[1][l[1]]), p_grid.coord(2, p_index[2][l[2]])};
}

PhaseSpaceSlice wigner_transform(const Wavefunction& psi, const Grid3& p_grid, const Selection& selection,
                                 const DistributionOptions& options) {
    return generalized_distribution(psi, builtin("wigner", {}, psi.constants), p_grid, selection, options);
}

PhaseSpaceSlice generalized_distribution(const Wavefunction& psi, const Kernel& kernel, const Grid3& p_grid,
                                         const Selection& selection, const DistributionOptions& options) {
    if (kernel.distribution_valued) {
        throw Error(ErrorCode::DistributionValuedKernel,
                    "kernel '" + kernel.id + "' has no integrable smearing function; use spin_like_regularized or gauss_tau");
    }
    const Grid3& qg = psi.grid();
    qg.require_spectral();
    p_grid.require_spectral();

    PhaseSpaceSlice out;
    out.q_grid = qg;
    out.p_grid = p_grid;
    out.q_index = resolve(selection.q, qg);
    out.p_index = resolve(selection.p, p_grid);
    out.kernel_id = kernel.id;

    const std::size_t qc = out.q_count();
    const std::size_t pc = out.p_count();
    if (qc * pc > options.memory_cap) {
        throw Error(ErrorCode::MemoryCap, "slice of " + std::to_string(qc * pc) + " points exceeds the cap of " +
                                              std::to_string(options.memory_cap));
    }

    std::array<TauAxis, 3> axes{tau_axis(p_grid, 0), tau_axis(p_grid, 1), tau_axis(p_grid, 2)};
    // exp(-i tau_m p) for the selected p of each axis.
    std::array<std::vector<cplx>, 3> phase;
    std::array<std::size_t, 3> np{};
    for (int a = 0; a < 3; ++a) {
        np[a] = out.p_index[a].size();
        phase[a].resize(axes[a].tau.size() * np[a]);
        for (std::size_t m = 0; m < axes[a].tau.size(); ++m)
            for (std::size_t ip = 0; ip < np[a]; ++ip)
                phase[a][m * np[a] + ip] = std::exp(-kI * axes[a].tau[m] * p_grid.coord(a, out.p_index[a][ip]));
    }

    SmoothedCorrelation corr(psi, kernel, out.q_index, options.analytic_shift);

    // Separable accumulation: innermost tau axis first.
    const std::size_t p23 = np[1] * np[2];
    std::vector<cplx> g3(qc * np[2]);
    std::vector<cplx> g2(qc * p23);
    out.values.assign(qc * pc, cplx{});
    for (std::size_t m1 = 0; m1 < axes[0].tau.size(); ++m1) {
        std::fill(g2.begin(), g2.end(), cplx{});
        for (std::size_t m2 = 0; m2 < axes[1].tau.size(); ++m2) {
            std::fill(g3.begin(), g3.end(), cplx{});
            for (std::size_t m3 = 0; m3 < axes[2].tau.size(); ++m3) {
                const std::vector<cplx> c = corr({axes[0].tau[m1], axes[1].tau[m2], axes[2].tau[m3]});
                const double w = axes[2].weight[m3];
                const cplx* e3 = &phase[2][m3 * np[2]];
                for (std::size_t iq = 0; iq < qc; ++iq) {
                    const cplx cw = w * c[iq];
                    for (std::size_t i3 = 0; i3 < np[2]; ++i3) g3[iq * np[2] + i3] += cw * e3[i3];
                }
            }
            const double w = axes[1].weight[m2];
            const cplx* e2 = &phase[1][m2 * np[1]];
            for (std::size_t iq = 0; iq < qc; ++iq)
                for (std::size_t i2 = 0; i2 < np[1]; ++i2) {
                    const cplx f = w * e2[i2];
                    for (std::size_t i3 = 0; i3 < np[2]; ++i3) g2[iq * p23 + i2 * np[2] + i3] += f * g3[iq * np[2] + i3];
                }
        }
        const double w = axes[0].weight[m1];
        const cplx* e1 = &phase[0][m1 * np[0]];
        for (std::size_t iq = 0; iq < qc; ++iq)
            for (std::size_t i1 = 0; i1 < np[0]; ++i1) {
                const cplx f = w * e1[i1];
                cplx* dst = &out.values[iq * pc + i1 * p23];
                const cplx* src = &g2[iq * p23];
                for (std::size_t r = 0; r < p23; ++r) dst[r] += f * src[r];
            }
    }
    const double scale = axes[0].step * axes[1].step * axes[2].step / std::pow(2.0 * kPi, 3);
    for (auto& v : out.values) v *= scale;

    out.masked_fraction = corr.masked_fraction();
    out.reliable = out.masked_fraction <= 0.01;
    return out;
}

std::vector<cplx> position_marginal(const PhaseSpaceSlice& f) {
    for (int a = 0; a < 3; ++a)
        if (!f.p_axis_full(a)) throw Error(ErrorCode::ThinSlice, "position marginal needs the full p grid");
    const std::size_t pc = f.p_count();
    std::vector<cplx> out(f.q_count());
    for (std::size_t iq = 0; iq < out.size(); ++iq) {
        cplx s{};
        for (std::size_t ip = 0; ip < pc; ++ip) s += f.values[iq * pc + ip];
        out[iq] = s * f.p_grid.cell_volume();
    }
    return out;
}

std::vector<cplx> momentum_marginal(const PhaseSpaceSlice& f) {
    for (int a = 0; a < 3; ++a)
        if (!f.q_axis_full(a)) throw Error(ErrorCode::ThinSlice, "momentum marginal needs the full q grid");
    const std::size_t pc = f.p_count();
    std::vector<cplx> out(pc);
    for (std::size_t iq = 0; iq < f.q_count(); ++iq)
        for (std::size_t ip = 0; ip < pc; ++ip) out[ip] += f.values[iq * pc + ip];
    for (auto& v : out) v *= f.q_grid.cell_volume();
    return out;
}

Marginals marginals(const PhaseSpaceSlice& f) { return {position_marginal(f), momentum_marginal(f)}; }

MomentumField dbb_field(const Wavefunction& psi, const Vec3& b, double node_floor) {
    const Grid3& g = psi.grid();
    const double hbar = psi.constants.hbar;
    MomentumField mf;
    mf.grid = g;
    mf.b = b;
    mf.weight.resize(g.size());
    mf.defined.assign(g.size(), true);
    for (auto& c : mf.momentum) c.assign(g.size(), 0.0);

    const ScalarField rho = density(psi);
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        mf.weight[i] = rho[i].real();
        total += mf.weight[i];
    }
    total *= g.cell_volume();
    if (std::abs(total - 1.0) > 1e-8) throw Error(ErrorCode::Resolution, "density does not integrate to 1");

    // A point below the floor whose neighbour is far above it is an interior
    // node, not the decaying tail of the packet.
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (mf.weight[i] >= node_floor) continue;
        mf.defined[i] = false;
        const Index3 idx = g.unflat(i);
        for (int a = 0; a < 3; ++a)
            for (int d : {-1, 1}) {
                Index3 nb = idx;
                nb[a] = (idx[a] + g.n(a) + static_cast<std::size_t>(d + 0)) % g.n(a);
                if (mf.weight[g.flat(nb)] > node_floor * 1e6) {
                    const Vec3 q = g.point(i);
                    throw Error(ErrorCode::Node, "density node near q = (" + std::to_string(q[0]) + ", " +
                                                     std::to_string(q[1]) + ", " + std::to_string(q[2]) + ")");
                }
            }
    }

    const VectorField grad = spectral_gradient(psi.psi);
    const VectorField grad_rho = spectral_gradient(rho);
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 flux{}, grho{};
        for (int a = 0; a < 3; ++a) {
            flux[a] = hbar * (std::conj(psi.psi[i]) * grad.components[a][i]).imag();
            grho[a] = grad_rho.components[a][i].real();
        }
        const Vec3 spin = (0.5 * hbar) * cross(grho, b);
        const double r = mf.weight[i];
        if (r > 1e-300) {
            for (int a = 0; a < 3; ++a) mf.momentum[a][i] = (flux[a] + spin[a]) / r;
        }
    }
    return mf;
}

namespace {

struct DbbData {
    Wavefunction psi;
    MomentumField field;
    double eps_den;
};

cplx dbb_numerator(const DbbData& d, const Vec3& theta, const Vec3& tau) {
    const Grid3& g = d.psi.grid();
    cplx s{};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec3 q = g.point(i);
        const Vec3 p{d.field.momentum[0][i], d.field.momentum[1][i], d.field.momentum[2][i]};
        s += d.field.weight[i] * std::exp(kI * (dot(tau, p) + dot(theta, q)));
    }
    return s * g.cell_volume();
}

cplx dbb_denominator(const DbbData& d, const Vec3& theta, const Vec3& tau) {
    const Grid3& g = d.psi.grid();
    const Vec3 s = (0.5 * d.psi.constants.hbar) * tau;
    const auto plus = d.psi.shifted(s);
    const auto minus = d.psi.shifted(-s);
    cplx acc{};
    for (std::size_t i = 0; i < g.size(); ++i) acc += std::exp(kI * dot(theta, g.point(i))) * std::conj(minus[i]) * plus[i];
    return acc * g.cell_volume();
}

cplx dbb_ratio(const DbbData& d, const Vec3& theta, const Vec3& tau) {
    const cplx den = dbb_denominator(d, theta, tau);
    if (std::abs(den) < d.eps_den) {
        throw Error(ErrorCode::SmallDenominator,
                    "|denominator| = " + std::to_string(std::abs(den)) + " at theta = (" + std::to_string(theta[0]) + ", " +
                        std::to_string(theta[1]) + ", " + std::to_string(theta[2]) + "), tau = (" + std::to_string(tau[0]) +
                        ", " + std::to_string(tau[1]) + ", " + std::to_string(tau[2]) + ")");
    }
    return dbb_numerator(d, theta, tau) / den;
}

}  // namespace

cplx dbb_kernel_eval(const Wavefunction& psi, const Vec3& b, const Vec3& theta, const Vec3& tau, double eps_den) {
    const DbbData d{psi, dbb_field(psi, b), eps_den};
    return dbb_ratio(d, theta, tau);
}

Kernel dbb_kernel(const Wavefunction& psi, const Vec3& b, double eps_den) {
    auto data = std::make_shared<const DbbData>(DbbData{psi, dbb_field(psi, b), eps_den});
    Kernel k;
    k.id = "dbb";
    k.params.b = b;
    k.constants = psi.constants;
    k.psi_dependent = true;
    k.eval = [data](const Vec3& theta, const Vec3& tau) { return dbb_ratio(*data, theta, tau); };
    k.lattice_eval = [data](const Grid3& q_grid, const Vec3& tau) {
        const Grid3& g = data->psi.grid();
        if (!(q_grid == g)) throw Error(ErrorCode::InvalidGrid, "dbb kernel lattice must match the wavefunction grid");
        std::vector<cplx> num(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Vec3 p{data->field.momentum[0][i], data->field.momentum[1][i], data->field.momentum[2][i]};
            num[i] = data->field.weight[i] * std::exp(kI * dot(tau, p));
        }
        const Vec3 s = (0.5 * data->psi.constants.hbar) * tau;
        const auto plus = data->psi.shifted(s);
        const auto minus = data->psi.shifted(-s);
        std::vector<cplx> den(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) den[i] = std::conj(minus[i]) * plus[i];
        num = spectral::to_theta(g, num);
        den = spectral::to_theta(g, den);
        LatticeValues lv;
        lv.values.resize(g.size());
        const double dv = g.cell_volume();
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (std::abs(den[k]) * dv < data->eps_den) {
                lv.values[k] = 1.0;
                ++lv.masked;
            } else {
                lv.values[k] = num[k] / den[k];
            }
        }
        return lv;
    };
    return k;
}

double factorization_defect(const PhaseSpaceSlice& f, int axis_a, int axis_b) {
    if (axis_a == axis_b || axis_a < 0 || axis_a > 2 || axis_b < 0 || axis_b > 2) {
        throw Error(ErrorCode::InvalidArgument, "axis pair must be two distinct axes in 0..2");
    }
    const int axis_c = 3 - axis_a - axis_b;
    auto nearest_zero = [](const std::vector<std::size_t>& idx, const Grid3& g, int a) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < idx.size(); ++i)
            if (std::abs(g.coord(a, idx[i])) < std::abs(g.coord(a, idx[best]))) best = i;
        return best;
    };
    const std::size_t qc_fix = nearest_zero(f.q_index[axis_c], f.q_grid, axis_c);
    const std::size_t pc_fix = nearest_zero(f.p_index[axis_c], f.p_grid, axis_c);

    const std::size_t nqa = f.q_index[axis_a].size(), npa = f.p_index[axis_a].size();
    const std::size_t nqb = f.q_index[axis_b].size(), npb = f.p_index[axis_b].size();
    Eigen::MatrixXd m(nqa * npa, nqb * npb);
    Index3 ql{}, pl{};
    ql[axis_c] = qc_fix;
    pl[axis_c] = pc_fix;
    auto flat_local = [](const std::array<std::vector<std::size_t>, 3>& idx, const Index3& l) {
        return (l[0] * idx[1].size() + l[1]) * idx[2].size() + l[2];
    };
    for (std::size_t qa = 0; qa < nqa; ++qa)
        for (std::size_t pa = 0; pa < npa; ++pa)
            for (std::size_t qb = 0; qb < nqb; ++qb)
                for (std::size_t pb = 0; pb < npb; ++pb) {
                    ql[axis_a] = qa;
                    ql[axis_b] = qb;
                    pl[axis_a] = pa;
                    pl[axis_b] = pb;
                    m(qa * npa + pa, qb * npb + pb) = f.at(flat_local(f.q_index, ql), flat_local(f.p_index, pl)).real();
                }
    const double total = m.squaredNorm();
    if (total == 0.0) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    // Sum the tail directly; total - s0^2 cancels to ~1e-8 relative.
    const double tail = s.size() > 1 ? s.tail(s.size() - 1).squaredNorm() : 0.0;
    return std::sqrt(tail / total);
}

}  // namespace phasecur
