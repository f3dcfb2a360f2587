#include "geods/error.hpp"
#include "geods/metrics.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace geods;

namespace {

StressField truth_field(const StructuredGrid& g, double s1, double s2) {
    StressField t(g);
    for (auto& p : t.principal) p = {s1, s2, s2 + 5.0};
    return t;
}

DownscaledStress prediction(const StructuredGrid& g, double s1, double s2) {
    DownscaledStress d(g, DownscaleMethod::ml);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        d.s1[c] = s1;
        d.s2[c] = s2;
        d.mask[c] = 1;
    }
    return d;
}

std::size_t lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("hand-computed percent and squared errors") {
    const StructuredGrid g({2, 2, 4}, {1.0, 1.0, 1.0});
    const ColumnPartition p = partition_columns(g, 1, 1, 0, 0);
    const ErrorReport r = compare(prediction(g, 11.0, 19.0), truth_field(g, 10.0, 20.0), p);
    CHECK(r.cells == 16);
    CHECK(r.s1.mean == doctest::Approx(10.0));
    CHECK(r.s2.mean == doctest::Approx(5.0));
    CHECK(0.5 * (r.s1.mean + r.s2.mean) == doctest::Approx(7.5));
    CHECK(r.s1.std == doctest::Approx(0.0));
    CHECK(r.rmse_s1 == doctest::Approx(1.0));
    CHECK(r.rmse_s2 == doctest::Approx(1.0));
    CHECK(r.mse_s1 == doctest::Approx(1.0));
    CHECK(r.r12.mean == doctest::Approx(100.0 * std::abs(19.0 / 11.0 - 2.0) / 2.0));
    CHECK(r.d_s1[0] == doctest::Approx(1.0));
    CHECK(r.pe_s2[0] == doctest::Approx(-5.0));
    CHECK(r.excluded_zero == 0);
}

TEST_CASE("zero truths are excluded from percent errors and counted") {
    const StructuredGrid g({1, 1, 2}, {1.0, 1.0, 1.0});
    const ColumnPartition p = partition_columns(g, 1, 1, 0, 0);
    StressField t = truth_field(g, 10.0, 20.0);
    t.principal[1] = {0.0, 20.0, 25.0};
    const ErrorReport r = compare(prediction(g, 11.0, 19.0), t, p);
    CHECK(r.s1.count == 1);
    CHECK(r.r12.count == 1);
    CHECK(r.s2.count == 2);
    CHECK(r.excluded_zero == 2);
    CHECK(std::isnan(r.pe_s1[1]));
    CHECK(r.rmse_s1 == doctest::Approx(std::sqrt((1.0 + 121.0) / 2.0)));
}

TEST_CASE("uncovered cells and discarded layers are not compared") {
    const StructuredGrid g({2, 2, 6}, {1.0, 1.0, 1.0});
    const ColumnPartition p = partition_columns(g, 2, 2, 1, 2);
    DownscaledStress d = prediction(g, 11.0, 19.0);
    d.mask[g.linear({0, 0, 2})] = 0;
    d.s1[g.linear({0, 0, 2})] = 1e9;
    const ErrorReport r = compare(d, truth_field(g, 10.0, 20.0), p);
    CHECK(r.cells == 4 * 3 - 1);
    CHECK(std::isnan(r.d_s1[g.linear({1, 1, 0})]));
    CHECK(r.s1.mean == doctest::Approx(10.0));
    CHECK(r.depth.size() == 3);
    CHECK(r.depth.front().k == 1);
    CHECK(r.depth.front().cells == 4);
    CHECK(r.depth[1].cells == 3);
}

TEST_CASE("overall statistics are the cell-weighted combination of columns") {
    const StructuredGrid g({6, 4, 5}, {1.0, 1.0, 1.0});
    const ColumnPartition p = partition_columns(g, 3, 2, 1, 0);
    std::mt19937 gen(8);
    std::uniform_real_distribution<double> u(5.0, 30.0);
    StressField t(g);
    DownscaledStress d(g, DownscaleMethod::constant_strain);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const double a = u(gen), b = u(gen);
        t.principal[c] = {std::min(a, b), std::max(a, b), 40.0};
        d.s1[c] = u(gen);
        d.s2[c] = u(gen);
        d.mask[c] = c % 7 != 0;
    }
    const ErrorReport r = compare(d, t, p);
    REQUIRE(r.columns.size() == 6);
    double weighted = 0.0, second = 0.0;
    std::size_t n = 0;
    for (const auto& col : r.columns) {
        weighted += col.s1.mean * col.s1.count;
        second += (col.s1.std * col.s1.std + col.s1.mean * col.s1.mean) * col.s1.count;
        n += col.s1.count;
    }
    CHECK(n == r.s1.count);
    CHECK(r.s1.mean == doctest::Approx(weighted / n).epsilon(1e-12));
    CHECK(r.s1.std * r.s1.std ==
          doctest::Approx(second / n - r.s1.mean * r.s1.mean).epsilon(1e-10));

    const std::vector<int> only{4};
    const ErrorReport r4 = compare(d, t, p, only);
    CHECK(r4.s1.mean == doctest::Approx(r.columns[4].s1.mean).epsilon(1e-12));
    CHECK(r4.cells == r.columns[4].cells);
    CHECK(r4.method == "constant_strain");
}

TEST_CASE("statistics do not depend on cell order") {
    const StructuredGrid g({4, 4, 4}, {1.0, 1.0, 1.0});
    const ColumnPartition p = partition_columns(g, 1, 1, 0, 0);
    std::mt19937 gen(2);
    std::uniform_real_distribution<double> u(5.0, 30.0);
    StressField t(g), t2(g);
    DownscaledStress d(g, DownscaleMethod::ml), d2(g, DownscaleMethod::ml);
    std::vector<std::size_t> perm(g.cell_count());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        t.principal[c] = {u(gen), u(gen), 0.0};
        d.s1[c] = u(gen);
        d.s2[c] = u(gen);
        d.mask[c] = 1;
    }
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        t2.principal[perm[c]] = t.principal[c];
        d2.s1[perm[c]] = d.s1[c];
        d2.s2[perm[c]] = d.s2[c];
        d2.mask[perm[c]] = 1;
    }
    const ErrorReport a = compare(d, t, p), b = compare(d2, t2, p);
    CHECK(a.s1.mean == doctest::Approx(b.s1.mean).epsilon(1e-12));
    CHECK(a.r12.std == doctest::Approx(b.r12.std).epsilon(1e-12));
    CHECK(a.rmse_s2 == doctest::Approx(b.rmse_s2).epsilon(1e-12));
}

TEST_CASE("compare rejects mismatched grids") {
    const StructuredGrid g({2, 2, 4}, {1.0, 1.0, 1.0}), h({2, 2, 5}, {1.0, 1.0, 1.0});
    const ColumnPartition p = partition_columns(g, 1, 1, 0, 0);
    CHECK_THROWS_AS(compare(prediction(g, 1, 2), truth_field(h, 1, 2), p), ShapeError);
}

TEST_CASE("pearson correlation") {
    const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 6, 8, 10}, z{5, 4, 3, 2, 1},
        c{3, 3, 3, 3, 3}, w{1, 3, 2, 5, 4};
    CHECK(pearson(x, y) == doctest::Approx(1.0));
    CHECK(pearson(x, z) == doctest::Approx(-1.0));
    CHECK(pearson(x, w) == doctest::Approx(0.8));
    CHECK(std::isnan(pearson(x, c)));
    CHECK(std::isnan(pearson(x, std::vector<double>{1, 2})));
}

TEST_CASE("depth profile follows one vertical line") {
    const StructuredGrid g({3, 2, 5}, {10.0, 10.0, 4.0}, {0, 0, 0}, 100.0);
    std::vector<double> f(g.cell_count());
    for (std::size_t c = 0; c < f.size(); ++c) f[c] = static_cast<double>(c);
    const auto prof = depth_profile(g, f, 2, 1, 1, 4);
    REQUIRE(prof.size() == 3);
    CHECK(prof[0].k == 1);
    CHECK(prof[0].depth == doctest::Approx(106.0));
    CHECK(prof[2].value == static_cast<double>(g.linear({2, 1, 3})));
    CHECK_THROWS_AS(depth_profile(g, f, 3, 0, 0, 5), IndexError);
    CHECK_THROWS_AS(depth_profile(g, f, 0, 0, 0, 6), IndexError);
}

TEST_CASE("csv and json exports have one row per entry") {
    const StructuredGrid g({4, 4, 6}, {1.0, 1.0, 1.0});
    const ColumnPartition p = partition_columns(g, 2, 2, 1, 1);
    ErrorReport a = compare(prediction(g, 11.0, 19.0), truth_field(g, 10.0, 20.0), p);
    DownscaledStress d = prediction(g, 9.0, 22.0);
    d.method = DownscaleMethod::constant_strain;
    ErrorReport b = compare(d, truth_field(g, 10.0, 20.0), p);
    CHECK(lines(columns_csv(a)) == 1 + 4);
    CHECK(lines(depth_csv(a)) == 1 + 4);
    const std::vector<ErrorReport> both{a, b};
    const auto j = nlohmann::json::parse(summary_json(both));
    CHECK(j.contains("ml"));
    CHECK(j.contains("constant_strain"));

    const std::vector<NamedProfile> series{
        {"x", depth_profile(g, std::vector<double>(g.cell_count(), 1.0), 0, 0, 1, 5)},
        {"y", depth_profile(g, std::vector<double>(g.cell_count(), 2.0), 0, 0, 1, 5)}};
    const std::string csv = profiles_csv(series);
    CHECK(lines(csv) == 5);
    CHECK(csv.substr(0, csv.find('\n')).find("x") != std::string::npos);
}
