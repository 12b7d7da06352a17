#include <doctest.h>

#include <cmath>
#include <random>

#include "milldyn/cutting.hpp"

using namespace milldyn;

TEST_CASE("tooth_angle basics") {
    CHECK(tooth_angle(0.0, 6000, 0, 4) == doctest::Approx(0.0));
    CHECK(tooth_angle(0.0, 6000, 1, 4) == doctest::Approx(M_PI / 2));
    // half a revolution at 100 rev/s
    CHECK(tooth_angle(0.005, 6000, 0, 4) == doctest::Approx(M_PI));
    CHECK_THROWS_AS(tooth_angle(0.0, 6000, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(tooth_angle(0.0, -10, 0, 4), std::invalid_argument);
}

TEST_CASE("tooth_angle periodicity") {
    const double omega = 7350.0;
    const double rev_period = 60.0 / omega;
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> time(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double t = time(gen);
        CHECK(tooth_angle(t + rev_period, omega, 2, 4) ==
              doctest::Approx(tooth_angle(t, omega, 2, 4)).epsilon(1e-9));
        // the next tooth leads by one pitch
        const double lead = std::fmod(tooth_angle(t, omega, 3, 4) - tooth_angle(t, omega, 2, 4)
                                          + 2 * M_PI, 2 * M_PI);
        CHECK(lead == doctest::Approx(M_PI / 2).epsilon(1e-9));
    }
}

TEST_CASE("engagement_window") {
    ToolGeometry g{0.02, 4, 0.25, MillingDirection::up};
    auto [s, e] = engagement_window(g);
    CHECK(s == doctest::Approx(0.0));
    CHECK(e == doctest::Approx(M_PI / 3));

    g.radial_immersion = 0.5;
    CHECK(engagement_window(g).second == doctest::Approx(M_PI / 2));
    g.radial_immersion = 1.0;
    CHECK(engagement_window(g).second == doctest::Approx(M_PI));

    g.milling_direction = MillingDirection::down;
    g.radial_immersion = 0.25;
    auto [ds, de] = engagement_window(g);
    CHECK(ds == doctest::Approx(M_PI - M_PI / 3));
    CHECK(de == doctest::Approx(M_PI));
}

TEST_CASE("normal_projection") {
    CHECK(normal_projection(1, 0, M_PI / 2) == doctest::Approx(1.0));
    CHECK(normal_projection(0, 1, 0) == doctest::Approx(1.0));
    CHECK(normal_projection(1, 1, M_PI / 3) == doctest::Approx(1.3660).epsilon(1e-4));
}

TEST_CASE("chip_thickness") {
    CHECK(chip_thickness(1e-4, M_PI / 2, 0, 0) == doctest::Approx(1e-4));
    CHECK(chip_thickness(1e-4, M_PI / 2, 2e-5, 5e-5) == doctest::Approx(7e-5));
    CHECK(chip_thickness(1e-4, M_PI / 6, 0, 1e-4) == doctest::Approx(-5e-5));
    // static case is exact for any angle
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> angle(0.0, M_PI);
    for (int i = 0; i < 100; ++i) {
        const double phi = angle(gen);
        CHECK(chip_thickness(1e-4, phi, 3e-5, 3e-5) == 1e-4 * std::sin(phi));
    }
}

TEST_CASE("tooth_forces") {
    ForceModelSpec case1{695387669.36, 280954790.02, 0, 0, 0, 0};
    auto [Ft, Fn] = tooth_forces(1e-4, 0.0, 0.002, 6.2832, case1);
    CHECK(Ft == doctest::Approx(139.0775).epsilon(1e-6));
    CHECK(Fn == doctest::Approx(0.002 * 1e-4 * 280954790.02).epsilon(1e-9));

    ForceModelSpec case2{695387669.36, 280954790.02, 25000, 25000, 1400, 1400};
    auto [Fte, _] = tooth_forces(1e-12, 0.0, 0.002, 6.2832, case2);
    CHECK(Fte == doctest::Approx(50.0).epsilon(1e-6));  // pure edge force as h -> 0

    const double V = M_PI * 0.02 * 100.0;  // 6000 rpm, 20 mm tool
    auto [Ftd, Fnd] = tooth_forces(1e-4, 1.0, 1.0, V, case2);
    const double damping_part = 1400.0 / V;
    CHECK(damping_part == doctest::Approx(222.817).epsilon(1e-4));
    CHECK(Ftd == doctest::Approx(695387669.36 * 1e-4 + 25000.0 - damping_part).epsilon(1e-12));
    CHECK(Fnd == doctest::Approx(280954790.02 * 1e-4 + 25000.0 - damping_part).epsilon(1e-12));

    CHECK_THROWS_AS(tooth_forces(0.0, 0, 0.002, 1.0, case1), std::invalid_argument);
    CHECK_THROWS_AS(tooth_forces(-1e-5, 0, 0.002, 1.0, case1), std::invalid_argument);
}

TEST_CASE("tooth_forces linearity and even damping") {
    ForceModelSpec fm{7e8, 3e8, 0, 0, 1400, 900};
    const double V = 5.0;
    auto [Ft1, Fn1] = tooth_forces(1e-4, 0.3, 0.002, V, fm);
    auto [Ft2, Fn2] = tooth_forces(1e-4, -0.3, 0.002, V, fm);
    CHECK(Ft1 == doctest::Approx(Ft2).epsilon(1e-14));  // damping even in n_dot
    CHECK(Fn1 == doctest::Approx(Fn2).epsilon(1e-14));

    ForceModelSpec lin{7e8, 3e8, 0, 0, 0, 0};
    auto [Fa, _a] = tooth_forces(1e-4, 0, 0.002, V, lin);
    auto [Fb, _b] = tooth_forces(2e-4, 0, 0.002, V, lin);
    auto [Fc, _c] = tooth_forces(1e-4, 0, 0.004, V, lin);
    CHECK(Fb == doctest::Approx(2 * Fa).epsilon(1e-14));  // linear in h
    CHECK(Fc == doctest::Approx(2 * Fa).epsilon(1e-14));  // linear in b
}

TEST_CASE("project_forces") {
    auto [fx1, fy1] = project_forces(1, 0, 0);
    CHECK(fx1 == doctest::Approx(-1.0));
    CHECK(fy1 == doctest::Approx(0.0));
    auto [fx2, fy2] = project_forces(0, 1, M_PI / 2);
    CHECK(fx2 == doctest::Approx(1.0));
    CHECK(fy2 == doctest::Approx(0.0).epsilon(1e-12));
    auto [fx3, fy3] = project_forces(2, 1, M_PI / 3);
    CHECK(fx3 == doctest::Approx(-0.1340).epsilon(1e-3));
    CHECK(fy3 == doctest::Approx(2.2321).epsilon(1e-4));
}

TEST_CASE("projection is an isometry") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
    for (int i = 0; i < 500; ++i) {
        const double Ft = u(gen), Fn = u(gen), phi = angle(gen);
        auto [Fx, Fy] = project_forces(Ft, Fn, phi);
        CHECK(Fx * Fx + Fy * Fy ==
              doctest::Approx(Ft * Ft + Fn * Fn).epsilon(1e-12));
    }
}

TEST_CASE("displacement rotation is the transpose of the force rotation") {
    // n = x sin(phi) + y cos(phi) must be the force rotation transposed, so
    // projecting the unit force directions back recovers the same convention.
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double phi = angle(gen);
        const double x = u(gen), y = u(gen);
        // machine-frame image of a unit normal-direction force
        auto [ex, ey] = project_forces(0.0, 1.0, phi);
        CHECK(normal_projection(x, y, phi) == doctest::Approx(x * ex + y * ey).epsilon(1e-12));
    }
}
