#pragma once

// Artifact writers: CSV for slices, currents and kinetic densities, and the
// PSF1 binary dump of a phase-space slice.
//
// PSF1 layout (all little-endian):
//   char[4]   "PSF1"
//   uint32[6] counts of the q1 q2 q3 p1 p2 p3 axes in the slice
//   double[]  coordinates of each axis, in the order above
//   double[]  (re, im) pairs, q-major, each block row-major

#include <filesystem>
#include <string>

#include "phasecur/currents.hpp"
#include "phasecur/distributions.hpp"
#include "phasecur/kinetic.hpp"

namespace phasecur::io {

/// "%.17g" with '.' decimal regardless of locale.
std::string format_double(double v);

void write_slice_csv(const std::filesystem::path& path, const PhaseSpaceSlice& f);
/// Imaginary columns are written when `with_imag` is set or any component has a nonzero imaginary part.
void write_current_csv(const std::filesystem::path& path, const CurrentField& j, bool with_imag = false);
void write_kinetic_csv(const std::filesystem::path& path, const KineticField& k);

void write_slice_binary(const std::filesystem::path& path, const PhaseSpaceSlice& f);

struct SliceDump {
    std::array<std::vector<double>, 3> q_axes;
    std::array<std::vector<double>, 3> p_axes;
    std::vector<cplx> values;
};
SliceDump read_slice_binary(const std::filesystem::path& path);

}  // namespace phasecur::io
