#include "geods/grid.hpp"

#include "geods/error.hpp"

#include <string>
#include <utility>

namespace geods {

StructuredGrid::StructuredGrid(Dims3 dims, Vec3 spacing, Vec3 origin, double depth_of_top)
    : dims_(dims), spacing_(spacing), origin_(origin), depth_of_top_(depth_of_top) {
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) {
        throw ConfigError("grid cell counts must be >= 1");
    }
    if (!(spacing[0] > 0.0 && spacing[1] > 0.0 && spacing[2] > 0.0)) {
        throw ConfigError("grid spacing must be positive");
    }
}

std::size_t StructuredGrid::linear(Index3 c) const {
    if (!contains(c)) {
        throw IndexError("cell (" + std::to_string(c.i) + "," + std::to_string(c.j) + "," +
                         std::to_string(c.k) + ") outside grid");
    }
    return linear_unchecked(c);
}

Index3 StructuredGrid::unflatten(std::size_t id) const {
    if (id >= cell_count()) {
        throw IndexError("cell index " + std::to_string(id) + " outside grid of " +
                         std::to_string(cell_count()) + " cells");
    }
    return unflatten_unchecked(id);
}

ScaleMap::ScaleMap(StructuredGrid fine, StructuredGrid coarse, Ratio3 ratio)
    : fine_(std::move(fine)), coarse_(std::move(coarse)), ratio_(ratio) {
    if (fine_.nx() != coarse_.nx() * ratio.rx || fine_.ny() != coarse_.ny() * ratio.ry ||
        fine_.nz() != coarse_.nz() * ratio.rz) {
        throw ConfigError("fine and coarse grid dimensions inconsistent with ratio");
    }
}

Index3 ScaleMap::enclosing_coarse_cell(Index3 fine_cell) const {
    if (!fine_.contains(fine_cell)) {
        throw IndexError("fine cell outside fine grid");
    }
    return enclosing_unchecked(fine_cell);
}

std::size_t ScaleMap::enclosing_coarse_cell(std::size_t fine_index) const {
    const Index3 c = enclosing_coarse_cell(fine_.unflatten(fine_index));
    return coarse_.linear_unchecked(c);
}

std::vector<std::size_t> ScaleMap::children(Index3 coarse_cell) const {
    if (!coarse_.contains(coarse_cell)) {
        throw IndexError("coarse cell outside coarse grid");
    }
    std::vector<std::size_t> out;
    out.reserve(static_cast<std::size_t>(ratio_.volume()));
    for (int dk = 0; dk < ratio_.rz; ++dk) {
        for (int dj = 0; dj < ratio_.ry; ++dj) {
            for (int di = 0; di < ratio_.rx; ++di) {
                out.push_back(fine_.linear_unchecked({coarse_cell.i * ratio_.rx + di,
                                                      coarse_cell.j * ratio_.ry + dj,
                                                      coarse_cell.k * ratio_.rz + dk}));
            }
        }
    }
    return out;
}

ScaleMap build_scale_map(const StructuredGrid& fine, Ratio3 ratio) {
    const int n[3] = {fine.nx(), fine.ny(), fine.nz()};
    const int r[3] = {ratio.rx, ratio.ry, ratio.rz};
    const char* axis[3] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) {
        if (r[a] < 1) {
            throw ConfigError(std::string("refinement ratio along ") + axis[a] + " must be >= 1");
        }
        if (n[a] % r[a] != 0) {
            throw ConfigError(std::string("fine cell count along ") + axis[a] + " (" +
                              std::to_string(n[a]) + ") is not divisible by ratio " +
                              std::to_string(r[a]));
        }
    }
    StructuredGrid coarse({n[0] / r[0], n[1] / r[1], n[2] / r[2]},
                          {fine.dx() * r[0], fine.dy() * r[1], fine.dz() * r[2]}, fine.origin(),
                          fine.depth_of_top());
    return ScaleMap(fine, coarse, ratio);
}

ColumnPartition::ColumnPartition(Dims3 dims, int n_columns_x, int n_columns_y, int discard_top,
                                 int discard_bottom)
    : dims_(dims), ncx_(n_columns_x), ncy_(n_columns_y), discard_top_(discard_top),
      discard_bottom_(discard_bottom) {
    if (n_columns_x < 1 || n_columns_y < 1) {
        throw ConfigError("column counts must be >= 1");
    }
    if (dims.nx % n_columns_x != 0) {
        throw ConfigError("nx=" + std::to_string(dims.nx) + " not divisible by " +
                          std::to_string(n_columns_x) + " columns along x");
    }
    if (dims.ny % n_columns_y != 0) {
        throw ConfigError("ny=" + std::to_string(dims.ny) + " not divisible by " +
                          std::to_string(n_columns_y) + " columns along y");
    }
    if (discard_top < 0 || discard_bottom < 0 || discard_top + discard_bottom >= dims.nz) {
        throw ConfigError("discarded layers must be non-negative and leave at least one layer");
    }
    width_x_ = dims.nx / n_columns_x;
    width_y_ = dims.ny / n_columns_y;
    for (int cy = 0; cy < n_columns_y; ++cy) {
        for (int cx = 0; cx < n_columns_x; ++cx) {
            columns_.push_back({cx + n_columns_x * cy, cx * width_x_, (cx + 1) * width_x_,
                                cy * width_y_, (cy + 1) * width_y_});
        }
    }
}

std::optional<int> ColumnPartition::column_of(Index3 cell) const {
    if (cell.i < 0 || cell.i >= dims_.nx || cell.j < 0 || cell.j >= dims_.ny || cell.k < 0 ||
        cell.k >= dims_.nz) {
        throw IndexError("cell outside partitioned grid");
    }
    if (cell.k < k_begin() || cell.k >= k_end()) {
        return std::nullopt;
    }
    return cell.i / width_x_ + ncx_ * (cell.j / width_y_);
}

const Column& ColumnPartition::column(int id) const {
    if (id < 0 || id >= static_cast<int>(columns_.size())) {
        throw IndexError("column id " + std::to_string(id) + " out of range");
    }
    return columns_[static_cast<std::size_t>(id)];
}

std::vector<std::size_t> ColumnPartition::cells(int id) const {
    const Column& c = column(id);
    std::vector<std::size_t> out;
    out.reserve(cells_per_column());
    const auto nx = static_cast<std::size_t>(dims_.nx);
    const auto ny = static_cast<std::size_t>(dims_.ny);
    for (int k = k_begin(); k < k_end(); ++k) {
        for (int j = c.j_begin; j < c.j_end; ++j) {
            for (int i = c.i_begin; i < c.i_end; ++i) {
                out.push_back(static_cast<std::size_t>(i) +
                              nx * (static_cast<std::size_t>(j) + ny * static_cast<std::size_t>(k)));
            }
        }
    }
    return out;
}

std::size_t ColumnPartition::cells_per_column() const {
    return static_cast<std::size_t>(width_x_) * width_y_ * (k_end() - k_begin());
}

ColumnPartition partition_columns(const StructuredGrid& grid, int n_columns_x, int n_columns_y,
                                  int discard_top, int discard_bottom) {
    return ColumnPartition(grid.dims(), n_columns_x, n_columns_y, discard_top, discard_bottom);
}

} // namespace geods
