#include "geods/downscale.hpp"
#include "geods/error.hpp"
#include "geods/upscale.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace geods;

namespace {

struct Setup {
    ScaleMap map = build_scale_map(StructuredGrid({8, 8, 32}, {50.0, 50.0, 5.0}), {2, 2, 8});
    MaterialField fine{map.fine(), 20.0, 0.25, 2.3, 10.0};
    MaterialField coarse{map.coarse(), 20.0, 0.25, 2.3, 10.0};
    StressField coarse_stress{map.coarse()};
};

} // namespace

TEST_CASE("constant strain baseline applies the fine Hooke law") {
    Setup s;
    for (auto& e : s.coarse_stress.eps) e = {-1e-4, -2e-4, -3e-4, 0, 0, 0};
    const DownscaledStress d = constant_strain_downscale(s.map, s.coarse_stress, s.fine);
    // lambda = mu = 8000 MPa; sigma = lambda tr(eps) I + 2 mu eps, sign flipped.
    for (std::size_t c = 0; c < d.grid.cell_count(); ++c) {
        CHECK(d.s1[c] == doctest::Approx(6.4).epsilon(1e-12));
        CHECK(d.s2[c] == doctest::Approx(8.0).epsilon(1e-12));
    }
    CHECK(d.covered() == d.grid.cell_count());
    CHECK(d.method == DownscaleMethod::constant_strain);
    CHECK(to_string(d.method) == "constant_strain");
}

TEST_CASE("baseline stress scales with fine stiffness under shared strain") {
    Setup s;
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(5.0, 60.0);
    for (double& e : s.fine.E) e = u(gen);
    for (auto& e : s.coarse_stress.eps) e = {-1e-4, -1.5e-4, -2e-4, 1e-5, 0, 0};
    const DownscaledStress base = constant_strain_downscale(s.map, s.coarse_stress, s.fine);
    MaterialField ref = s.fine;
    for (double& e : ref.E) e = 20.0;
    const DownscaledStress unit = constant_strain_downscale(s.map, s.coarse_stress, ref);
    for (std::size_t c = 0; c < base.grid.cell_count(); ++c) {
        CHECK(base.s1[c] == doctest::Approx(unit.s1[c] * s.fine.E[c] / 20.0).epsilon(1e-12));
        CHECK(base.s2[c] == doctest::Approx(unit.s2[c] * s.fine.E[c] / 20.0).epsilon(1e-12));
    }
}

TEST_CASE("homogeneous model: baseline reproduces the coarse solution in every child") {
    const StructuredGrid fg({4, 4, 16}, {100.0, 100.0, 10.0}, {0, 0, 0}, 500.0);
    const ScaleMap map = build_scale_map(fg, {2, 2, 8});
    const MaterialField fine(fg, 15.0, 0.28, 2.3, 5.0);
    const MaterialField coarse = upscale_material(map, fine, 10.0);
    const auto sol = fem::solve(fem::ElasticityProblem{coarse, {1e-5, 1.5e-4, 10.0}, 9.81},
                                fem::SolverSettings{});
    const DownscaledStress d = constant_strain_downscale(map, sol.stress, fine, 2);
    for (std::size_t c = 0; c < fg.cell_count(); ++c) {
        const std::size_t C = map.enclosing_coarse_cell(c);
        CHECK(d.s1[c] == doctest::Approx(sol.stress.principal[C][0]).epsilon(1e-9));
        CHECK(d.s2[c] == doctest::Approx(sol.stress.principal[C][1]).epsilon(1e-9));
    }
}

TEST_CASE("baseline needs the coarse strain and matching grids") {
    Setup s;
    StressField no_strain = s.coarse_stress;
    no_strain.eps.clear();
    CHECK_THROWS_AS(constant_strain_downscale(s.map, no_strain, s.fine), DependencyError);
    const MaterialField wrong(s.map.coarse(), 1, 0.2, 2, 0);
    CHECK_THROWS_AS(constant_strain_downscale(s.map, s.coarse_stress, wrong), ShapeError);
}

TEST_CASE("network prediction covers exactly the full-neighbourhood cells") {
    Setup s;
    nn::NetworkModel zero;
    NormalizationStats stats;
    stats.target_mean = {5.0, 6.0};
    stats.target_std = {2.0, 3.0};
    zero.norm = stats;
    const DownscaledStress d = predict_volume(zero, s.map, s.fine, s.coarse, s.coarse_stress);
    std::size_t expected = 0;
    for (std::size_t c = 0; c < d.grid.cell_count(); ++c) {
        const bool full = has_full_neighborhood(s.map, d.grid.unflatten(c));
        expected += full;
        CHECK(d.mask[c] == (full ? 1 : 0));
        if (full) {
            CHECK(d.s1[c] == 5.0);
            CHECK(d.s2[c] == 6.0);
        } else {
            CHECK(std::isnan(d.s1[c]));
        }
    }
    CHECK(d.covered() == expected);
    CHECK(expected == 4 * 4 * 16);
}

TEST_CASE("network outputs are stored in principal order") {
    Setup s;
    nn::NetworkModel zero;
    NormalizationStats stats;
    stats.target_mean = {9.0, 4.0};
    zero.norm = stats;
    const DownscaledStress d = predict_volume(zero, s.map, s.fine, s.coarse, s.coarse_stress);
    for (std::size_t c = 0; c < d.grid.cell_count(); ++c) {
        if (!d.mask[c]) continue;
        CHECK(d.s1[c] == 4.0);
        CHECK(d.s2[c] == 9.0);
    }
}

TEST_CASE("network prediction is thread-count independent") {
    Setup s;
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t c = 0; c < s.fine.E.size(); ++c) s.fine.E[c] = 10.0 + 30.0 * u(gen);
    for (std::size_t C = 0; C < s.coarse_stress.principal.size(); ++C)
        s.coarse_stress.principal[C] = {20.0 + u(gen), 25.0 + u(gen), 30.0 + u(gen)};
    nn::NetworkModel m = nn::NetworkModel::initialize(3);
    m.norm = NormalizationStats{};
    const DownscaledStress a = predict_volume(m, s.map, s.fine, s.coarse, s.coarse_stress, 1);
    const DownscaledStress b = predict_volume(m, s.map, s.fine, s.coarse, s.coarse_stress, 4);
    for (std::size_t c = 0; c < a.grid.cell_count(); ++c) {
        if (!a.mask[c]) continue;
        CHECK(a.s1[c] == b.s1[c]);
        CHECK(a.s2[c] == b.s2[c]);
    }
}

TEST_CASE("prediction rejects foreign or incomplete models") {
    Setup s;
    nn::NetworkModel m;
    CHECK_THROWS_AS(predict_volume(m, s.map, s.fine, s.coarse, s.coarse_stress), IntegrityError);
    m.norm = NormalizationStats{};
    m.layout_hash = "0000000000000000";
    CHECK_THROWS_AS(predict_volume(m, s.map, s.fine, s.coarse, s.coarse_stress), IntegrityError);
    m.layout_hash = channel_layout_hash();
    const MaterialField wrong(s.map.coarse(), 1, 0.2, 2, 0);
    CHECK_THROWS_AS(predict_volume(m, s.map, wrong, s.coarse, s.coarse_stress), ShapeError);
}
