#include "phasecur/numerics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace phasecur {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidGrid: return "invalid-grid";
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::BoundaryLeakage: return "boundary-leakage";
        case ErrorCode::Resolution: return "resolution";
        case ErrorCode::RealityViolation: return "reality-violation";
        case ErrorCode::UnknownKernel: return "unknown-kernel";
        case ErrorCode::MissingParameter: return "missing-parameter";
        case ErrorCode::NonFinite: return "non-finite";
        case ErrorCode::IllPosedFit: return "ill-posed-fit";
        case ErrorCode::MemoryCap: return "memory-cap";
        case ErrorCode::DistributionValuedKernel: return "distribution-valued-kernel";
        case ErrorCode::ThinSlice: return "thin-slice";
        case ErrorCode::MomentumBoundaryLeakage: return "p-boundary-leakage";
        case ErrorCode::Node: return "node";
        case ErrorCode::SmallDenominator: return "small-denominator";
        case ErrorCode::NonUnitVector: return "non-unit-vector";
        case ErrorCode::Config: return "config";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

void PhysicalConstants::validate() const {
    if (!(hbar > 0.0) || !(mass > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "hbar and mass must be strictly positive");
    }
}

Grid3::Grid3(Index3 n, Vec3 length) : n_(n), length_(length) {
    for (int a = 0; a < 3; ++a) {
        if (n_[a] == 0) throw Error(ErrorCode::InvalidGrid, "grid size zero along an axis");
        if (!(length_[a] > 0.0) || !std::isfinite(length_[a])) {
            throw Error(ErrorCode::InvalidGrid, "box length must be positive and finite");
        }
    }
}

Vec3 Grid3::point(std::size_t flat) const { return point(unflat(flat)); }

Index3 Grid3::unflat(std::size_t flat) const {
    const std::size_t k = flat % n_[2];
    const std::size_t rest = flat / n_[2];
    return {rest / n_[1], rest % n_[1], k};
}

std::size_t Grid3::nearest_index(int axis, double x) const {
    const double pos = (x + 0.5 * length_[axis]) / spacing(axis);
    const double r = std::round(pos);
    if (r <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(r), n_[axis] - 1);
}

Index3 Grid3::nearest(const Vec3& q) const {
    return {nearest_index(0, q[0]), nearest_index(1, q[1]), nearest_index(2, q[2])};
}

Grid3 Grid3::reciprocal() const {
    Vec3 lr{};
    for (int a = 0; a < 3; ++a) lr[a] = 2.0 * kPi * static_cast<double>(n_[a]) / length_[a];
    return Grid3(n_, lr);
}

void Grid3::require_spectral() const {
    for (int a = 0; a < 3; ++a) {
        if (n_[a] < 2 || n_[a] % 2 != 0) {
            throw Error(ErrorCode::InvalidGrid, "spectral operations need an even point count >= 2 per axis");
        }
    }
}

ScalarField::ScalarField(const Grid3& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw Error(ErrorCode::InvalidGrid, "value count does not match grid");
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
}

double ScalarField::max_abs_imag() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v.imag()));
    return m;
}

VectorField::VectorField(const Grid3& g) : grid(g) {
    for (auto& c : components) c.assign(g.size(), cplx{});
}

double VectorField::max_abs() const {
    double m = 0.0;
    for (const auto& c : components)
        for (const auto& v : c) m = std::max(m, std::abs(v));
    return m;
}

double VectorField::max_abs_imag() const {
    double m = 0.0;
    for (const auto& c : components)
        for (const auto& v : c) m = std::max(m, std::abs(v.imag()));
    return m;
}

namespace spectral {

namespace {

struct PlanCache {
    std::mutex mutex;
    std::map<std::tuple<std::size_t, std::size_t, std::size_t, int>, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }

    fftw_plan get(const Index3& dims, int sign) {
        std::lock_guard lock(mutex);
        const auto key = std::make_tuple(dims[0], dims[1], dims[2], sign);
        if (auto it = plans.find(key); it != plans.end()) return it->second;
        const std::size_t total = dims[0] * dims[1] * dims[2];
        auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
        fftw_plan plan = fftw_plan_dft_3d(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                                          static_cast<int>(dims[2]), scratch, scratch,
                                          sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        plans.emplace(key, plan);
        return plan;
    }
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

}  // namespace

void fft3(std::span<cplx> data, const Index3& dims, int sign) {
    if (data.size() != dims[0] * dims[1] * dims[2]) {
        throw Error(ErrorCode::InvalidGrid, "fft buffer size does not match dimensions");
    }
    fftw_plan plan = cache().get(dims, sign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

std::vector<cplx> to_theta(const Grid3& grid, std::span<const cplx> values) {
    grid.require_spectral();
    std::vector<cplx> out(values.begin(), values.end());
    fft3(out, grid.dims(), +1);
    return out;
}

std::vector<cplx> from_theta(const Grid3& grid, std::vector<cplx> coefficients) {
    grid.require_spectral();
    fft3(coefficients, grid.dims(), -1);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (auto& c : coefficients) c *= scale;
    return coefficients;
}

Vec3 theta_of(const Grid3& grid, std::size_t flat, std::array<bool, 3>* nyquist) {
    const Index3 idx = grid.unflat(flat);
    Vec3 theta{};
    for (int a = 0; a < 3; ++a) {
        const auto n = static_cast<long>(grid.n(a));
        const auto k = static_cast<long>(idx[a]);
        const long m = k < n / 2 ? k : k - n;
        theta[a] = 2.0 * kPi * static_cast<double>(m) / grid.length(a);
        if (nyquist) (*nyquist)[a] = (2 * k == n);
    }
    return theta;
}

}  // namespace spectral

namespace {

// (-1)^m for the signed mode numbers of a centered index triple.
double centered_sign(const Grid3& g, const Index3& idx) {
    long s = 0;
    for (int a = 0; a < 3; ++a) s += static_cast<long>(idx[a]) - static_cast<long>(g.n(a) / 2);
    return (s % 2 == 0) ? 1.0 : -1.0;
}

std::size_t centered_to_fft(const Grid3& g, const Index3& idx) {
    Index3 k{};
    for (int a = 0; a < 3; ++a) k[a] = (idx[a] + g.n(a) / 2) % g.n(a);
    return g.flat(k);
}

}  // namespace

ScalarField fourier_pair(const ScalarField& field, Direction direction) {
    const Grid3& g = field.grid;
    g.require_spectral();
    const Grid3 out_grid = g.reciprocal();
    ScalarField out(out_grid);
    if (direction == Direction::Forward) {
        auto y = spectral::to_theta(g, field.values);
        const double dv = g.cell_volume();
        for (std::size_t i = 0; i < out.size(); ++i) {
            const Index3 idx = out_grid.unflat(i);
            out[i] = dv * centered_sign(out_grid, idx) * y[centered_to_fft(out_grid, idx)];
        }
    } else {
        std::vector<cplx> z(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Index3 idx = g.unflat(i);
            z[centered_to_fft(g, idx)] = centered_sign(g, idx) * field[i];
        }
        spectral::fft3(z, g.dims(), -1);
        const double scale = 1.0 / (out_grid.length(0) * out_grid.length(1) * out_grid.length(2));
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] * scale;
    }
    return out;
}

ScalarField apply_theta_multiplier(const ScalarField& field, const ThetaMultiplier& multiplier) {
    const Grid3& g = field.grid;
    auto y = spectral::to_theta(g, field.values);
    for (std::size_t k = 0; k < y.size(); ++k) {
        std::array<bool, 3> nyq{};
        const Vec3 theta = spectral::theta_of(g, k, &nyq);
        y[k] *= spectral::nyquist_average(theta, nyq, multiplier);
    }
    return ScalarField(g, spectral::from_theta(g, std::move(y)));
}

VectorField spectral_gradient(const ScalarField& field) {
    const Grid3& g = field.grid;
    const auto y = spectral::to_theta(g, field.values);
    VectorField out(g);
    for (int a = 0; a < 3; ++a) {
        std::vector<cplx> d(y.size());
        for (std::size_t k = 0; k < y.size(); ++k) {
            std::array<bool, 3> nyq{};
            const Vec3 theta = spectral::theta_of(g, k, &nyq);
            d[k] = nyq[a] ? cplx{} : cplx(0.0, -theta[a]) * y[k];
        }
        out.components[a] = spectral::from_theta(g, std::move(d));
    }
    return out;
}

ScalarField spectral_derivative(const ScalarField& field, int axis) {
    return apply_theta_multiplier(field, [axis](const Vec3& t) { return cplx(0.0, -t[axis]); });
}

ScalarField laplacian(const ScalarField& field) {
    return apply_theta_multiplier(field, [](const Vec3& t) { return cplx(-dot(t, t), 0.0); });
}

ScalarField divergence(const VectorField& field) {
    const Grid3& g = field.grid;
    std::vector<cplx> acc(g.size());
    for (int a = 0; a < 3; ++a) {
        auto y = spectral::to_theta(g, field.components[a]);
        for (std::size_t k = 0; k < y.size(); ++k) {
            std::array<bool, 3> nyq{};
            const Vec3 theta = spectral::theta_of(g, k, &nyq);
            acc[k] += nyq[a] ? cplx{} : cplx(0.0, -theta[a]) * y[k];
        }
    }
    return ScalarField(g, spectral::from_theta(g, std::move(acc)));
}

ScalarField spectral_shift(const ScalarField& field, const Vec3& shift) {
    return apply_theta_multiplier(field, [&shift](const Vec3& t) { return std::exp(cplx(0.0, -dot(t, shift))); });
}

cplx integrate(const Grid3& grid, std::span<const cplx> values) {
    cplx s{};
    for (const auto& v : values) s += v;
    return s * grid.cell_volume();
}

cplx integrate(const ScalarField& field) { return integrate(field.grid, field.values); }

}  // namespace phasecur
