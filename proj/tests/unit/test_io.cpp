#include <doctest.h>

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "phasecur/currents.hpp"
#include "phasecur/io.hpp"
#include "phasecur/kinetic.hpp"

using namespace phasecur;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "phasecur_test_io";
    fs::create_directories(dir);
    return dir / name;
}

std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

const Grid3 kQ = Grid3::cubic(28, 14.0);

}  // namespace

TEST_CASE("property: format_double round-trips exactly") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        const double v = std::ldexp(u(rng), static_cast<int>(u(rng) * 10));
        const std::string s = io::format_double(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("slice CSV and PSF1 round trip") {
    const Wavefunction w = realize(StateSpec::gaussian(1.0, {}, {0.5, 0, 0}), 0.0, kQ);
    Selection sel = Selection::at_q(kQ, {1, 0, 0});
    sel.p = {std::vector<std::size_t>{3, 4}, {4}, {2, 4, 5}};
    const PhaseSpaceSlice f = generalized_distribution(w, builtin("kirkwood"), Grid3::cubic(8, 8.0), sel);

    const fs::path csv = scratch("slice.csv");
    io::write_slice_csv(csv, f);
    const auto rows = lines(csv);
    REQUIRE(rows.size() == 1 + f.q_count() * f.p_count());
    CHECK(rows[0] == "q1,q2,q3,p1,p2,p3,re,im");

    const fs::path bin = scratch("slice.psf");
    io::write_slice_binary(bin, f);
    const io::SliceDump d = io::read_slice_binary(bin);
    CHECK(d.values == f.values);
    CHECK(d.p_axes[2].size() == 3);
    CHECK(d.p_axes[2][0] == f.p_grid.coord(2, 2));
    CHECK(d.q_axes[0][0] == f.q_grid.coord(0, f.q_index[0][0]));
    // 4 magic + 6 counts + 9 coordinates + 6 complex values
    CHECK(fs::file_size(bin) == 4 + 6 * 4 + 9 * 8 + 6 * 16);
}

TEST_CASE("current and kinetic CSV layout") {
    const Wavefunction w = realize(StateSpec::gaussian(1.0), 0.0, kQ);
    CurrentField j = spin_like_current(w, 1.0, {0, 0, 1});
    j.sites = {kQ.flat(kQ.nearest({1, 0, 0})), kQ.flat(kQ.nearest({0, 0, 0}))};
    const fs::path p = scratch("current.csv");
    io::write_current_csv(p, j);
    auto rows = lines(p);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "q1,q2,q3,j1,j2,j3");
    CHECK(rows[1].rfind("1,0,0,", 0) == 0);

    io::write_current_csv(p, j, true);
    CHECK(lines(p)[0] == "q1,q2,q3,j1,j2,j3,im_j1,im_j2,im_j3");

    io::write_kinetic_csv(scratch("kinetic.csv"), local_kinetic_energy(w, {0, 0, 1}));
    rows = lines(scratch("kinetic.csv"));
    CHECK(rows[0] == "q1,q2,q3,K");
    CHECK(rows.size() == 1 + kQ.size());
}

TEST_CASE("I/O failures carry the Io code") {
    const Wavefunction w = realize(StateSpec::gaussian(1.0), 0.0, kQ);
    try {
        io::write_current_csv("/nonexistent_dir/x.csv", schrodinger_current_field(w));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Io);
    }
    const fs::path junk = scratch("junk.psf");
    std::ofstream(junk) << "NOPE";
    try {
        io::read_slice_binary(junk);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Io);
    }
}
