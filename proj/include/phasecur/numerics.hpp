#pragma once

// Periodic uniform 3-D grids, complex fields on them, and the spectral
// machinery (FFT-based differentiation, shifts, continuum-normalized
// transforms) every other module builds on.
//
// Transform convention:
//   forward   f^(theta) = Int exp(+i theta.u) f(u) du
//   inverse   f(q)      = (2 pi)^-3 Int exp(-i theta.q) f^(theta) dtheta
// so that d/dq_a corresponds to multiplication by -i theta_a.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <type_traits>
#include <vector>

#include "phasecur/error.hpp"
#include "phasecur/vec3.hpp"

namespace phasecur {

struct PhysicalConstants {
    double hbar = 1.0;
    double mass = 1.0;

    void validate() const;
};

using Index3 = std::array<std::size_t, 3>;

class Grid3 {
public:
    Grid3() = default;
    Grid3(Index3 n, Vec3 length);

    static Grid3 cubic(std::size_t n, double length) { return Grid3({n, n, n}, {length, length, length}); }

    std::size_t n(int axis) const { return n_[axis]; }
    const Index3& dims() const { return n_; }
    double length(int axis) const { return length_[axis]; }
    const Vec3& lengths() const { return length_; }
    double spacing(int axis) const { return length_[axis] / static_cast<double>(n_[axis]); }
    double cell_volume() const { return spacing(0) * spacing(1) * spacing(2); }
    std::size_t size() const { return n_[0] * n_[1] * n_[2]; }

    /// Coordinate of index i along an axis; index 0 sits at -L/2.
    double coord(int axis, std::size_t i) const {
        return -0.5 * length_[axis] + static_cast<double>(i) * spacing(axis);
    }
    Vec3 point(std::size_t flat) const;
    Vec3 point(const Index3& idx) const { return {coord(0, idx[0]), coord(1, idx[1]), coord(2, idx[2])}; }

    std::size_t flat(std::size_t i, std::size_t j, std::size_t k) const { return (i * n_[1] + j) * n_[2] + k; }
    std::size_t flat(const Index3& idx) const { return flat(idx[0], idx[1], idx[2]); }
    Index3 unflat(std::size_t flat) const;

    /// Index whose coordinate is closest to x (clamped into range).
    std::size_t nearest_index(int axis, double x) const;
    Index3 nearest(const Vec3& q) const;

    /// The conjugate grid: same counts, length 2 pi n / L, so its coordinates
    /// are the wavenumbers 2 pi m / L for m = -n/2 .. n/2-1.
    Grid3 reciprocal() const;

    /// Throws InvalidGrid unless every axis has an even count >= 2.
    void require_spectral() const;

    bool operator==(const Grid3& o) const { return n_ == o.n_ && length_ == o.length_; }

private:
    Index3 n_{0, 0, 0};
    Vec3 length_{0.0, 0.0, 0.0};
};

struct ScalarField {
    Grid3 grid;
    std::vector<cplx> values;

    ScalarField() = default;
    explicit ScalarField(const Grid3& g) : grid(g), values(g.size()) {}
    ScalarField(const Grid3& g, std::vector<cplx> v);

    std::size_t size() const { return values.size(); }
    cplx& operator[](std::size_t i) { return values[i]; }
    const cplx& operator[](std::size_t i) const { return values[i]; }

    double max_abs() const;
    double max_abs_imag() const;
};

struct VectorField {
    Grid3 grid;
    std::array<std::vector<cplx>, 3> components;

    VectorField() = default;
    explicit VectorField(const Grid3& g);

    std::size_t size() const { return grid.size(); }
    CVec3 at(std::size_t i) const { return {components[0][i], components[1][i], components[2][i]}; }
    void set(std::size_t i, const CVec3& v) {
        for (int a = 0; a < 3; ++a) components[a][i] = v[a];
    }
    ScalarField component(int axis) const { return ScalarField(grid, components[axis]); }

    double max_abs() const;
    double max_abs_imag() const;
};

enum class Direction { Forward, Inverse };

/// Continuum-normalized transform; the output lives on grid.reciprocal() with
/// origin-centered ordering, so the pair round-trips exactly.
ScalarField fourier_pair(const ScalarField& field, Direction direction);

VectorField spectral_gradient(const ScalarField& field);
ScalarField spectral_derivative(const ScalarField& field, int axis);
ScalarField laplacian(const ScalarField& field);
ScalarField divergence(const VectorField& field);

/// f(q + s) by spectral interpolation (periodic).
ScalarField spectral_shift(const ScalarField& field, const Vec3& shift);

/// Sum of values times the cell volume.
cplx integrate(const ScalarField& field);
cplx integrate(const Grid3& grid, std::span<const cplx> values);

/// Multiplier acting in transform space: inverse[ M(theta) * forward[f] ].
/// Nyquist components are ambiguous in sign; M is averaged over both signs there.
using ThetaMultiplier = std::function<cplx(const Vec3& theta)>;
ScalarField apply_theta_multiplier(const ScalarField& field, const ThetaMultiplier& multiplier);

namespace spectral {

/// Unnormalized transform with kernel exp(+i theta_k . u_j) on the FFT-ordered
/// wavenumber lattice (phase relative to the -L/2 origin not applied).
std::vector<cplx> to_theta(const Grid3& grid, std::span<const cplx> values);
/// Exact inverse of to_theta.
std::vector<cplx> from_theta(const Grid3& grid, std::vector<cplx> coefficients);

/// Wavenumber vector of an FFT-ordered flat index and the mask of axes that
/// sit on the Nyquist plane.
Vec3 theta_of(const Grid3& grid, std::size_t flat, std::array<bool, 3>* nyquist = nullptr);

/// Evaluates fn at theta, averaging over the sign flips of Nyquist components.
template <class Fn>
auto nyquist_average(const Vec3& theta, const std::array<bool, 3>& nyquist, Fn&& fn) -> decltype(fn(theta)) {
    if (!nyquist[0] && !nyquist[1] && !nyquist[2]) return fn(theta);
    using R = decltype(fn(theta));
    R acc{};
    int count = 0;
    for (int mask = 0; mask < 8; ++mask) {
        bool skip = false;
        Vec3 t = theta;
        for (int a = 0; a < 3; ++a) {
            if (mask & (1 << a)) {
                if (!nyquist[a]) { skip = true; break; }
                t[a] = -t[a];
            }
        }
        if (skip) continue;
        R v = fn(t);
        if constexpr (std::is_same_v<R, CVec3>) {
            for (int a = 0; a < 3; ++a) acc[a] += v[a];
        } else {
            acc += v;
        }
        ++count;
    }
    if constexpr (std::is_same_v<R, CVec3>) {
        for (int a = 0; a < 3; ++a) acc[a] /= static_cast<double>(count);
    } else {
        acc /= static_cast<double>(count);
    }
    return acc;
}

/// In-place 3-D FFT (sign -1 or +1), unnormalized. Safe to call concurrently.
void fft3(std::span<cplx> data, const Index3& dims, int sign);

}  // namespace spectral

}  // namespace phasecur
