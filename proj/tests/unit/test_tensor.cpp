#include "geods/tensor.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

using namespace geods;

namespace {

// Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric solution of the cubic).
std::array<double, 3> cubic_eigenvalues(const SymTensor& a) {
    const double p1 = a.xy * a.xy + a.xz * a.xz + a.yz * a.yz;
    const double q = a.trace() / 3.0;
    const double p2 = (a.xx - q) * (a.xx - q) + (a.yy - q) * (a.yy - q) +
                      (a.zz - q) * (a.zz - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    if (p == 0.0) return {q, q, q};
    const double b[3][3] = {{(a.xx - q) / p, a.xy / p, a.xz / p},
                            {a.xy / p, (a.yy - q) / p, a.yz / p},
                            {a.xz / p, a.yz / p, (a.zz - q) / p}};
    const double det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                         b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                         b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    const double r = std::clamp(det_b / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    std::array<double, 3> out{e1, e2, e3};
    std::sort(out.begin(), out.end());
    return out;
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

} // namespace

TEST_CASE("voigt accessor is symmetric") {
    const SymTensor t{1, 2, 3, 4, 5, 6};
    CHECK(t(0, 0) == 1);
    CHECK(t(1, 1) == 2);
    CHECK(t(2, 2) == 3);
    CHECK(t(1, 2) == 4);
    CHECK(t(2, 1) == 4);
    CHECK(t(0, 2) == 5);
    CHECK(t(2, 0) == 5);
    CHECK(t(0, 1) == 6);
    CHECK(t(1, 0) == 6);
    CHECK(t.trace() == 6);
}

TEST_CASE("diagonal tensor principal values are its sorted diagonal") {
    const Principal p = principal_stresses({30.0, 10.0, 20.0, 0, 0, 0});
    CHECK(p.values[0] == doctest::Approx(10.0));
    CHECK(p.values[1] == doctest::Approx(20.0));
    CHECK(p.values[2] == doctest::Approx(30.0));
    CHECK(std::abs(p.directions[0][1]) == doctest::Approx(1.0));
    CHECK(std::abs(p.directions[2][0]) == doctest::Approx(1.0));
}

TEST_CASE("principal values match the cubic closed form on random tensors") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int trial = 0; trial < 500; ++trial) {
        const SymTensor t{u(gen), u(gen), u(gen), u(gen), u(gen), u(gen)};
        const Principal p = principal_stresses(t);
        const auto ref = cubic_eigenvalues(t);
        const double scale = t.frobenius_norm();
        for (int a = 0; a < 3; ++a) {
            CHECK(std::abs(p.values[a] - ref[a]) <= 1e-10 * scale);
        }
        CHECK(p.values[0] <= p.values[1]);
        CHECK(p.values[1] <= p.values[2]);
        // Orthonormal, right-handed, and each direction is an eigenvector.
        for (int a = 0; a < 3; ++a) {
            const Vec3& v = p.directions[a];
            CHECK(dot(v, v) == doctest::Approx(1.0).epsilon(1e-12));
            for (int r = 0; r < 3; ++r) {
                const double tv = t(r, 0) * v[0] + t(r, 1) * v[1] + t(r, 2) * v[2];
                CHECK(std::abs(tv - p.values[a] * v[r]) <= 1e-9 * scale);
            }
        }
        CHECK(std::abs(dot(p.directions[0], p.directions[1])) < 1e-10);
        const Vec3& a = p.directions[0];
        const Vec3& b = p.directions[1];
        const Vec3 cross{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                         a[0] * b[1] - a[1] * b[0]};
        CHECK(dot(cross, p.directions[2]) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("repeated eigenvalues are resolved") {
    const Principal p = principal_stresses({5.0, 5.0, 5.0, 0, 0, 0});
    for (double v : p.values) CHECK(v == doctest::Approx(5.0));
    const Principal q = principal_stresses({2.0, 2.0, 7.0, 0, 0, 1e-14});
    CHECK(q.values[0] == doctest::Approx(2.0));
    CHECK(q.values[1] == doctest::Approx(2.0));
    CHECK(q.values[2] == doctest::Approx(7.0));
}

TEST_CASE("lame parameters from E and nu") {
    const Lame l = lame_from(20000.0, 0.25);
    CHECK(l.lambda == doctest::Approx(8000.0));
    CHECK(l.mu == doctest::Approx(8000.0));
}

TEST_CASE("hooke law on a uniaxial strain by hand") {
    // eps = diag(1e-4, 0, 0), E = 20 GPa, nu = 0.25 -> lambda = mu = 8000 MPa.
    const SymTensor s = hooke(lame_from(20000.0, 0.25), {1e-4, 0, 0, 0, 0, 0});
    CHECK(s.xx == doctest::Approx(2.4).epsilon(1e-12));
    CHECK(s.yy == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(s.zz == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(s.yz == 0.0);
    const SymTensor shear = hooke(lame_from(20000.0, 0.25), {0, 0, 0, 0, 0, 5e-5});
    CHECK(shear.xy == doctest::Approx(2.0 * 8000.0 * 5e-5));
    CHECK(shear.xx == 0.0);
}
