#include "geods/error.hpp"
#include "geods/features.hpp"
#include "geods/upscale.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace geods;

namespace {

struct Fixture {
    ScaleMap map = build_scale_map(StructuredGrid({8, 8, 32}, {10.0, 10.0, 2.0}), {2, 2, 8});
    MaterialField fine{map.fine()};
    MaterialField coarse{map.coarse()};
    StressField fine_stress{map.fine()};
    StressField coarse_stress{map.coarse()};

    Fixture() {
        std::mt19937 gen(7);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t c = 0; c < fine.grid.cell_count(); ++c) {
            fine.E[c] = 10.0 + 40.0 * u(gen);
            fine.nu[c] = 0.2 + 0.1 * u(gen);
            fine.rho[c] = 2.3;
            fine.pp[c] = 10.0 + 0.01 * c;
            fine_stress.principal[c] = {1.0 + c, 2.0 + c, 3.0 + c};
        }
        coarse = upscale_material(map, fine, 10.0);
        for (std::size_t C = 0; C < coarse.grid.cell_count(); ++C) {
            coarse_stress.principal[C] = {100.0 + C, 200.0 + C, 300.0 + C};
        }
    }
};

} // namespace

TEST_CASE("block index orders offsets x fastest") {
    CHECK(block_index(-1, -1, -1) == 0);
    CHECK(block_index(0, 0, 0) == 13);
    CHECK(block_index(1, 1, 1) == 26);
    CHECK(block_index(1, 0, 0) == 14);
    CHECK(block_index(0, 1, 0) == 16);
    CHECK(block_index(0, 0, 1) == 22);
}

TEST_CASE("layout hash is a stable 16-digit hex string") {
    const std::string h = channel_layout_hash();
    CHECK(h.size() == 16);
    CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(h == channel_layout_hash());
}

TEST_CASE("full neighbourhood requires interior fine and coarse cells") {
    Fixture fx;
    const StructuredGrid& f = fx.map.fine();
    std::size_t count = 0;
    for (std::size_t c = 0; c < f.cell_count(); ++c) {
        const Index3 i = f.unflatten(c);
        // Coarse interior is index 1..2 of 4 on every axis: fine 2..5 laterally, 8..23 vertically.
        const bool expected = i.i >= 2 && i.i <= 5 && i.j >= 2 && i.j <= 5 && i.k >= 8 && i.k <= 23;
        CHECK(has_full_neighborhood(fx.map, i) == expected);
        count += expected;
    }
    CHECK(count == 4 * 4 * 16);
}

TEST_CASE("predictors gather coarse stress and fine contrasts by offset") {
    Fixture fx;
    const StructuredGrid& f = fx.map.fine();
    const StructuredGrid& g = fx.map.coarse();
    // i = 2 is the first fine cell of coarse column 1, so its west neighbour has another parent.
    const Index3 c{2, 3, 8};
    const auto ex = build_predictors(fx.map, fx.fine, fx.coarse, fx.coarse_stress, f.linear(c));
    REQUIRE(ex.has_value());
    const Index3 C{1, 1, 1};
    for (int dk = -1; dk <= 1; ++dk)
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                const int b = block_index(di, dj, dk);
                const std::size_t cn = g.linear({C.i + di, C.j + dj, C.k + dk});
                CHECK(ex->s1_star[b] == 100.0 + cn);
                CHECK(ex->s2_star[b] == 200.0 + cn);
                const Index3 n{c.i + di, c.j + dj, c.k + dk};
                const Index3 parent{n.i / 2, n.j / 2, n.k / 8};
                CHECK(ex->dE[b] == fx.fine.E[f.linear(n)] - fx.coarse.E[g.linear(parent)]);
                CHECK(ex->dnu[b] == fx.fine.nu[f.linear(n)] - fx.coarse.nu[g.linear(parent)]);
            }
    CHECK(ex->p_fine == fx.fine.pp[f.linear(c)]);
    CHECK(ex->p_star == fx.coarse.pp[g.linear(C)]);
    CHECK(ex->s3_star == 300.0 + g.linear(C));
    CHECK(ex->cell_id == f.linear(c));
    CHECK_FALSE(build_predictors(fx.map, fx.fine, fx.coarse, fx.coarse_stress, 0).has_value());
}

TEST_CASE("extraction sorts, deduplicates and counts skipped cells") {
    Fixture fx;
    const StructuredGrid& f = fx.map.fine();
    const std::size_t a = f.linear({3, 3, 9}), b = f.linear({2, 2, 8}), edge = f.linear({0, 0, 0});
    const std::vector<std::size_t> cells{a, b, a, edge};
    const auto r = extract_examples(fx.map, fx.fine, fx.coarse, &fx.fine_stress, &fx.coarse_stress,
                                    cells);
    REQUIRE(r.examples.size() == 2);
    CHECK(r.skipped == 1);
    CHECK(r.examples[0].cell_id == b);
    CHECK(r.examples[1].cell_id == a);
    CHECK(r.examples[1].target[0] == 1.0 + a);
    CHECK(r.examples[1].target[1] == 2.0 + a);
    CHECK_THROWS_AS(extract_examples(fx.map, fx.fine, fx.coarse, nullptr, &fx.coarse_stress, cells),
                    DependencyError);
    CHECK_THROWS_AS(extract_examples(fx.map, fx.fine, fx.coarse, &fx.fine_stress, nullptr, cells),
                    DependencyError);
}

TEST_CASE("normalization pools block entries and uses population std") {
    std::vector<TrainingExample> xs(3);
    for (int n = 0; n < 3; ++n) {
        for (int e = 0; e < 27; ++e) {
            xs[n].s1_star[e] = n * 27 + e;
            xs[n].dE[e] = 5.0;
        }
        xs[n].p_fine = n;
        xs[n].target = {10.0 * n, 1.0};
    }
    const NormalizationStats s = fit_normalization(xs);
    // 0..80 uniformly: mean 40, population variance (81^2 - 1) / 12.
    CHECK(s.input_mean[Channel::s1_star] == doctest::Approx(40.0));
    CHECK(s.input_std[Channel::s1_star] == doctest::Approx(std::sqrt((81.0 * 81.0 - 1) / 12.0)));
    CHECK(s.input_mean[Channel::delta_E] == doctest::Approx(5.0));
    CHECK(s.input_std[Channel::delta_E] == 1.0);
    CHECK(s.input_mean[Channel::p_fine] == doctest::Approx(1.0));
    CHECK(s.input_std[Channel::p_fine] == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(s.target_mean[0] == doctest::Approx(10.0));
    CHECK(s.target_std[1] == 1.0);
    CHECK_THROWS_AS(fit_normalization(std::vector<TrainingExample>{}), ConfigError);
}

TEST_CASE("normalize and denormalize are inverse") {
    Fixture fx;
    std::vector<std::size_t> cells;
    for (std::size_t c = 0; c < fx.map.fine().cell_count(); ++c) cells.push_back(c);
    const auto r = extract_examples(fx.map, fx.fine, fx.coarse, &fx.fine_stress, &fx.coarse_stress,
                                    cells);
    const NormalizationStats s = fit_normalization(r.examples);
    for (const auto& x : r.examples) {
        const TrainingExample back = denormalize(normalize(x, s), s);
        for (int e = 0; e < 27; ++e) {
            CHECK(back.s1_star[e] == doctest::Approx(x.s1_star[e]).epsilon(1e-12));
            CHECK(back.dE[e] == doctest::Approx(x.dE[e]).epsilon(1e-12));
        }
        CHECK(back.s3_star == doctest::Approx(x.s3_star).epsilon(1e-12));
        const auto t = denormalize_target(normalize_target(x.target, s), s);
        CHECK(t[0] == doctest::Approx(x.target[0]).epsilon(1e-12));
    }
}

TEST_CASE("column split assigns by column and rejects bad ids") {
    const StructuredGrid g({8, 8, 4}, {1.0, 1.0, 1.0});
    const ColumnPartition p = partition_columns(g, 2, 2, 1, 1);
    std::vector<TrainingExample> xs;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        TrainingExample x;
        x.cell_id = c;
        xs.push_back(x);
    }
    const auto [tr, va] = split_by_columns(p, {{0, 3}, {1}}, xs);
    CHECK(tr.size() == 2 * 16 * 2);
    CHECK(va.size() == 16 * 2);
    for (const auto& x : va) {
        const Index3 c = g.unflatten(x.cell_id);
        CHECK(c.i >= 4);
        CHECK(c.j < 4);
        CHECK(c.k >= 1);
        CHECK(c.k <= 2);
    }
    CHECK_THROWS_AS(split_by_columns(p, {{0, 1}, {1}}, xs), ConfigError);
    CHECK_THROWS_AS(split_by_columns(p, {{4}, {1}}, xs), ConfigError);
}
