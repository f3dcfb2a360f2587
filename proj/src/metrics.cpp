#include "geods/metrics.hpp"

#include "geods/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace geods {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Running sums for mean and population std of absolute percent errors.
struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;

    void add(double ape) {
        sum += ape;
        sum_sq += ape * ape;
        ++n;
    }
    PercentStats stats() const {
        if (n == 0) return {kNaN, kNaN, 0};
        const double mean = sum / static_cast<double>(n);
        const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
        return {mean, std::sqrt(var), n};
    }
};

struct Group {
    Accumulator s1, s2, r12;
    std::size_t cells = 0;
};

std::string fmt(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

ErrorReport compare(const DownscaledStress& pred, const StressField& truth,
                    const ColumnPartition& partition, std::span<const int> column_ids) {
    const StructuredGrid& g = pred.grid;
    if (!(g == truth.grid)) {
        throw ShapeError("prediction and truth grids differ");
    }
    if (!(partition.dims() == g.dims())) {
        throw ShapeError("column partition does not match the grid");
    }
    const std::set<int> wanted(column_ids.begin(), column_ids.end());
    const std::size_t n = g.cell_count();

    ErrorReport r;
    r.method = to_string(pred.method);
    r.d_s1.assign(n, kNaN);
    r.d_s2.assign(n, kNaN);
    r.pe_s1.assign(n, kNaN);
    r.pe_s2.assign(n, kNaN);
    r.r12_pred.assign(n, kNaN);
    r.r12_true.assign(n, kNaN);

    std::map<int, Group> by_column;
    std::map<int, Group> by_layer;
    Group total;
    double sq1 = 0.0, sq2 = 0.0;

    for (std::size_t c = 0; c < n; ++c) {
        if (!pred.mask[c]) continue;
        const Index3 idx = g.unflatten_unchecked(c);
        const auto col = partition.column_of(idx);
        if (!col || (!wanted.empty() && !wanted.contains(*col))) continue;

        const double p1 = pred.s1[c], p2 = pred.s2[c];
        const double t1 = truth.principal[c][0], t2 = truth.principal[c][1];
        r.d_s1[c] = p1 - t1;
        r.d_s2[c] = p2 - t2;
        sq1 += r.d_s1[c] * r.d_s1[c];
        sq2 += r.d_s2[c] * r.d_s2[c];

        Group& gc = by_column[*col];
        Group& gl = by_layer[idx.k];
        ++gc.cells;
        ++gl.cells;
        ++total.cells;

        auto add = [&](Accumulator Group::*field, double ape) {
            (gc.*field).add(ape);
            (gl.*field).add(ape);
            (total.*field).add(ape);
        };
        if (t1 != 0.0) {
            r.pe_s1[c] = 100.0 * (p1 - t1) / std::abs(t1);
            add(&Group::s1, std::abs(r.pe_s1[c]));
        } else {
            ++r.excluded_zero;
        }
        if (t2 != 0.0) {
            r.pe_s2[c] = 100.0 * (p2 - t2) / std::abs(t2);
            add(&Group::s2, std::abs(r.pe_s2[c]));
        } else {
            ++r.excluded_zero;
        }
        if (t1 != 0.0 && p1 != 0.0) {
            r.r12_pred[c] = p2 / p1;
            r.r12_true[c] = t2 / t1;
            if (r.r12_true[c] != 0.0) {
                add(&Group::r12, 100.0 * std::abs(r.r12_pred[c] - r.r12_true[c]) /
                                     std::abs(r.r12_true[c]));
            } else {
                ++r.excluded_zero;
            }
        } else {
            ++r.excluded_zero;
        }
    }

    r.cells = total.cells;
    if (r.cells > 0) {
        r.mse_s1 = sq1 / static_cast<double>(r.cells);
        r.mse_s2 = sq2 / static_cast<double>(r.cells);
    } else {
        r.mse_s1 = r.mse_s2 = kNaN;
    }
    r.rmse_s1 = std::sqrt(r.mse_s1);
    r.rmse_s2 = std::sqrt(r.mse_s2);
    r.s1 = total.s1.stats();
    r.s2 = total.s2.stats();
    r.r12 = total.r12.stats();
    for (const auto& [id, grp] : by_column) {
        r.columns.push_back({id, grp.cells, grp.s1.stats(), grp.s2.stats(), grp.r12.stats()});
    }
    for (const auto& [k, grp] : by_layer) {
        r.depth.push_back({k, g.centroid_depth(k), grp.cells, grp.s1.stats().mean,
                           grp.s2.stats().mean, grp.r12.stats().mean});
    }
    return r;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) return kNaN;
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return kNaN;
    return sab / std::sqrt(saa * sbb);
}

std::vector<ProfilePoint> depth_profile(const StructuredGrid& grid, std::span<const double> field,
                                        int i, int j, int k_begin, int k_end) {
    if (field.size() != grid.cell_count()) {
        throw ShapeError("field does not match grid");
    }
    if (i < 0 || j < 0 || i >= grid.nx() || j >= grid.ny()) {
        throw IndexError("vertical line (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") is outside the grid");
    }
    if (k_begin < 0 || k_end > grid.nz() || k_begin > k_end) {
        throw IndexError("layer range is outside the grid");
    }
    std::vector<ProfilePoint> out;
    out.reserve(static_cast<std::size_t>(k_end - k_begin));
    for (int k = k_begin; k < k_end; ++k) {
        out.push_back({k, grid.centroid_depth(k), field[grid.linear_unchecked({i, j, k})]});
    }
    return out;
}

std::string columns_csv(const ErrorReport& r) {
    std::ostringstream os;
    os << "method,column,cells,mape_s1,std_s1,mape_s2,std_s2,mape_r12,std_r12\n";
    for (const auto& c : r.columns) {
        os << r.method << ',' << c.column << ',' << c.cells << ',' << fmt(c.s1.mean) << ','
           << fmt(c.s1.std) << ',' << fmt(c.s2.mean) << ',' << fmt(c.s2.std) << ','
           << fmt(c.r12.mean) << ',' << fmt(c.r12.std) << '\n';
    }
    return os.str();
}

std::string depth_csv(const ErrorReport& r) {
    std::ostringstream os;
    os << "method,k,depth_m,cells,mape_s1,mape_s2,mape_r12\n";
    for (const auto& d : r.depth) {
        os << r.method << ',' << d.k << ',' << fmt(d.depth) << ',' << d.cells << ','
           << fmt(d.mape_s1) << ',' << fmt(d.mape_s2) << ',' << fmt(d.mape_r12) << '\n';
    }
    return os.str();
}

std::string profiles_csv(std::span<const NamedProfile> series) {
    std::ostringstream os;
    os << "k,depth_m";
    for (const auto& s : series) os << ',' << s.name;
    os << '\n';
    if (series.empty()) return os.str();
    const auto& first = series.front().points;
    for (const auto& s : series) {
        if (s.points.size() != first.size()) {
            throw ShapeError("profile series '" + s.name + "' has a different length");
        }
    }
    for (std::size_t r = 0; r < first.size(); ++r) {
        os << first[r].k << ',' << fmt(first[r].depth);
        for (const auto& s : series) os << ',' << fmt(s.points[r].value);
        os << '\n';
    }
    return os.str();
}

std::string summary_json(std::span<const ErrorReport> reports) {
    using nlohmann::ordered_json;
    auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); };
    auto stats = [&](const PercentStats& s) {
        return ordered_json{{"mape", num(s.mean)}, {"std", num(s.std)}, {"count", s.count}};
    };
    ordered_json out = ordered_json::object();
    for (const auto& r : reports) {
        ordered_json cols = ordered_json::array();
        for (const auto& c : r.columns) {
            cols.push_back({{"column", c.column},
                            {"cells", c.cells},
                            {"s1", stats(c.s1)},
                            {"s2", stats(c.s2)},
                            {"r12", stats(c.r12)}});
        }
        out[r.method] = {{"cells", r.cells},
                         {"excluded_zero_denominator", r.excluded_zero},
                         {"mse_s1", num(r.mse_s1)},
                         {"rmse_s1", num(r.rmse_s1)},
                         {"mse_s2", num(r.mse_s2)},
                         {"rmse_s2", num(r.rmse_s2)},
                         {"s1", stats(r.s1)},
                         {"s2", stats(r.s2)},
                         {"r12", stats(r.r12)},
                         {"columns", cols}};
    }
    return out.dump(2) + "\n";
}

} // namespace geods
