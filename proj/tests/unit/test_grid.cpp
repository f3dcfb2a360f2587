#include "geods/error.hpp"
#include "geods/grid.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace geods;

namespace {

StructuredGrid grid(int nx, int ny, int nz, double dx = 1.0, double dy = 1.0, double dz = 1.0) {
    return StructuredGrid({nx, ny, nz}, {dx, dy, dz});
}

} // namespace

TEST_CASE("linear index is a bijection") {
    const StructuredGrid g = grid(3, 4, 5);
    std::set<std::size_t> seen;
    for (int k = 0; k < 5; ++k)
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 3; ++i) {
                const std::size_t id = g.linear({i, j, k});
                CHECK(id == static_cast<std::size_t>(i + 3 * (j + 4 * k)));
                const Index3 back = g.unflatten(id);
                CHECK(back.i == i);
                CHECK(back.j == j);
                CHECK(back.k == k);
                seen.insert(id);
            }
    CHECK(seen.size() == g.cell_count());
    CHECK(*seen.rbegin() == g.cell_count() - 1);
    CHECK_THROWS_AS(g.linear({3, 0, 0}), IndexError);
    CHECK_THROWS_AS(g.linear({0, -1, 0}), IndexError);
    CHECK_THROWS_AS(g.unflatten(g.cell_count()), IndexError);
}

TEST_CASE("invalid grid dimensions are rejected") {
    CHECK_THROWS_AS(grid(0, 1, 1), ConfigError);
    CHECK_THROWS_AS(grid(1, 1, 1, 0.0), ConfigError);
    CHECK_THROWS_AS(grid(1, 1, 1, 1.0, 1.0, -2.0), ConfigError);
}

TEST_CASE("scale map with paper ratios puts 32 fine cells in each coarse cell") {
    const ScaleMap m = build_scale_map(grid(4, 4, 8, 36.6, 36.6, 4.5), {2, 2, 8});
    CHECK(m.coarse().nx() == 2);
    CHECK(m.coarse().ny() == 2);
    CHECK(m.coarse().nz() == 1);
    CHECK(m.coarse().dx() == doctest::Approx(73.2));
    CHECK(m.coarse().dz() == doctest::Approx(36.0));
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) CHECK(m.children({i, j, 0}).size() == 32);
}

TEST_CASE("unit ratios give the identity map") {
    const ScaleMap m = build_scale_map(grid(3, 3, 3), {1, 1, 1});
    CHECK(m.coarse() == m.fine());
    for (std::size_t c = 0; c < m.fine().cell_count(); ++c) {
        CHECK(m.enclosing_coarse_cell(c) == c);
        CHECK(m.children(m.coarse().unflatten(c)) == std::vector<std::size_t>{c});
    }
}

TEST_CASE("children of a coarse cell match brute-force enumeration") {
    const ScaleMap m = build_scale_map(grid(6, 4, 16), {2, 2, 8});
    CHECK(m.coarse().dims() == Dims3{3, 2, 2});
    std::vector<std::size_t> brute;
    for (std::size_t f = 0; f < m.fine().cell_count(); ++f) {
        const Index3 c = m.fine().unflatten(f);
        if (c.i / 2 == 1 && c.j / 2 == 0 && c.k / 8 == 1) brute.push_back(f);
    }
    const auto kids = m.children({1, 0, 1});
    CHECK(kids.size() == 32);
    CHECK(kids == brute);
    for (std::size_t f : kids) {
        const Index3 c = m.enclosing_coarse_cell(m.fine().unflatten(f));
        CHECK(c.i == 1);
        CHECK(c.j == 0);
        CHECK(c.k == 1);
    }
}

TEST_CASE("non-divisible refinement names the axis") {
    try {
        build_scale_map(grid(4, 5, 8), {2, 2, 8});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("along y") != std::string::npos);
    }
    CHECK_THROWS_AS(build_scale_map(grid(4, 4, 7), {2, 2, 8}), ConfigError);
}

TEST_CASE("enclosing coarse cell examples") {
    const ScaleMap m = build_scale_map(grid(4, 2, 16), {2, 2, 8});
    const Index3 a = m.enclosing_coarse_cell(Index3{0, 0, 0});
    CHECK((a.i == 0 && a.j == 0 && a.k == 0));
    const Index3 b = m.enclosing_coarse_cell(Index3{3, 1, 9});
    CHECK((b.i == 1 && b.j == 0 && b.k == 1));
    CHECK_THROWS_AS(m.enclosing_coarse_cell(Index3{4, 0, 0}), IndexError);
    CHECK_THROWS_AS(m.enclosing_coarse_cell(m.fine().cell_count()), IndexError);
}

TEST_CASE("containment agrees with a geometric point-in-box test") {
    const StructuredGrid fine({8, 8, 16}, {10.0, 20.0, 5.0}, {100.0, -50.0, 0.0}, 1000.0);
    const ScaleMap m = build_scale_map(fine, {2, 2, 8});
    const StructuredGrid& coarse = m.coarse();
    std::mt19937 gen(7);
    std::uniform_int_distribution<std::size_t> pick(0, fine.cell_count() - 1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t f = pick(gen);
        const Vec3 p = fine.centroid(fine.unflatten(f));
        std::size_t hits = 0, found = 0;
        for (std::size_t c = 0; c < coarse.cell_count(); ++c) {
            const Vec3 q = coarse.centroid(coarse.unflatten(c));
            bool inside = true;
            for (int a = 0; a < 3; ++a) {
                inside = inside && std::abs(p[a] - q[a]) < 0.5 * coarse.spacing()[a];
            }
            if (inside) {
                ++hits;
                found = c;
            }
        }
        CHECK(hits == 1);
        CHECK(m.enclosing_coarse_cell(f) == found);
    }
}

TEST_CASE("round trip through children holds on every fine cell") {
    const ScaleMap m = build_scale_map(grid(6, 4, 16), {2, 2, 8});
    for (std::size_t f = 0; f < m.fine().cell_count(); ++f) {
        const auto kids = m.children(m.coarse().unflatten(m.enclosing_coarse_cell(f)));
        CHECK(std::find(kids.begin(), kids.end(), f) != kids.end());
    }
}

TEST_CASE("column partition of a 12x12 grid into 4x3 columns") {
    const StructuredGrid g = grid(12, 12, 4);
    const ColumnPartition p = partition_columns(g, 4, 3, 0, 0);
    REQUIRE(p.columns().size() == 12);
    for (const auto& c : p.columns()) {
        CHECK(c.i_end - c.i_begin == 3);
        CHECK(c.j_end - c.j_begin == 4);
        CHECK(p.cells(c.id).size() == 3 * 4 * 4);
    }
    CHECK(p.column(5).i_begin == 3);
    CHECK(p.column(5).j_begin == 4);
}

TEST_CASE("a single column holds every cell") {
    const StructuredGrid g = grid(5, 3, 4);
    const ColumnPartition p = partition_columns(g, 1, 1, 0, 0);
    const auto cells = p.cells(0);
    CHECK(cells.size() == g.cell_count());
    CHECK(std::is_sorted(cells.begin(), cells.end()));
}

TEST_CASE("column partition covers every kept cell exactly once") {
    const StructuredGrid g = grid(8, 6, 10);
    const ColumnPartition p = partition_columns(g, 2, 3, 2, 1);
    std::vector<int> hits(g.cell_count(), 0);
    std::size_t total = 0;
    for (const auto& c : p.columns()) {
        for (std::size_t cell : p.cells(c.id)) {
            ++hits[cell];
            CHECK(p.column_of(g.unflatten(cell)) == c.id);
        }
        total += p.cells(c.id).size();
    }
    CHECK(total == static_cast<std::size_t>(8 * 6 * (10 - 3)));
    for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
        const int k = g.unflatten(cell).k;
        const bool kept = k >= 2 && k < 9;
        CHECK(hits[cell] == (kept ? 1 : 0));
        CHECK(p.column_of(g.unflatten(cell)).has_value() == kept);
    }
}

TEST_CASE("column partition rejects bad counts") {
    const StructuredGrid g = grid(12, 12, 4);
    CHECK_THROWS_AS(partition_columns(g, 5, 3, 0, 0), ConfigError);
    CHECK_THROWS_AS(partition_columns(g, 4, 3, 2, 2), ConfigError);
    CHECK_THROWS_AS(partition_columns(g, 0, 3, 0, 0), ConfigError);
    CHECK_THROWS_AS(partition_columns(g, 4, 3, 0, 0).column(12), IndexError);
}
