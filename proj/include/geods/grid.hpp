#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace geods {

using Vec3 = std::array<double, 3>;

struct Index3 {
    int i = 0;
    int j = 0;
    int k = 0;

    friend bool operator==(const Index3&, const Index3&) = default;
};

struct Dims3 {
    int nx = 1;
    int ny = 1;
    int nz = 1;

    friend bool operator==(const Dims3&, const Dims3&) = default;
};

/**
 * Axis-aligned regular hexahedral grid.
 *
 * x points East, y points North and z points down: k = 0 is the top layer.
 * Cell (i,j,k) has linear index i + nx*(j + ny*k).
 */
class StructuredGrid {
public:
    StructuredGrid() = default;
    StructuredGrid(Dims3 dims, Vec3 spacing, Vec3 origin = {0.0, 0.0, 0.0},
                   double depth_of_top = 0.0);

    int nx() const { return dims_.nx; }
    int ny() const { return dims_.ny; }
    int nz() const { return dims_.nz; }
    Dims3 dims() const { return dims_; }
    double dx() const { return spacing_[0]; }
    double dy() const { return spacing_[1]; }
    double dz() const { return spacing_[2]; }
    const Vec3& spacing() const { return spacing_; }
    const Vec3& origin() const { return origin_; }
    double depth_of_top() const { return depth_of_top_; }

    std::size_t cell_count() const {
        return static_cast<std::size_t>(dims_.nx) * dims_.ny * dims_.nz;
    }
    std::size_t node_count() const {
        return static_cast<std::size_t>(dims_.nx + 1) * (dims_.ny + 1) * (dims_.nz + 1);
    }
    double cell_volume() const { return spacing_[0] * spacing_[1] * spacing_[2]; }
    Vec3 extent() const {
        return {dims_.nx * spacing_[0], dims_.ny * spacing_[1], dims_.nz * spacing_[2]};
    }

    bool contains(Index3 c) const {
        return c.i >= 0 && c.i < dims_.nx && c.j >= 0 && c.j < dims_.ny && c.k >= 0 &&
               c.k < dims_.nz;
    }

    // Unchecked fast paths used in inner loops.
    std::size_t linear_unchecked(Index3 c) const {
        return static_cast<std::size_t>(c.i) +
               static_cast<std::size_t>(dims_.nx) *
                   (static_cast<std::size_t>(c.j) + static_cast<std::size_t>(dims_.ny) * c.k);
    }
    Index3 unflatten_unchecked(std::size_t id) const {
        const auto nx = static_cast<std::size_t>(dims_.nx);
        const auto ny = static_cast<std::size_t>(dims_.ny);
        return {static_cast<int>(id % nx), static_cast<int>((id / nx) % ny),
                static_cast<int>(id / (nx * ny))};
    }

    /// Throws IndexError when the index is outside the grid.
    std::size_t linear(Index3 c) const;
    Index3 unflatten(std::size_t id) const;

    std::size_t node_linear(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims_.nx + 1) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_.ny + 1) * k);
    }

    Vec3 centroid(Index3 c) const {
        return {origin_[0] + (c.i + 0.5) * spacing_[0], origin_[1] + (c.j + 0.5) * spacing_[1],
                origin_[2] + (c.k + 0.5) * spacing_[2]};
    }

    /// Depth below surface of the centroid of layer k (m).
    double centroid_depth(int k) const { return depth_of_top_ + (k + 0.5) * spacing_[2]; }

    friend bool operator==(const StructuredGrid&, const StructuredGrid&) = default;

private:
    Dims3 dims_{};
    Vec3 spacing_{1.0, 1.0, 1.0};
    Vec3 origin_{0.0, 0.0, 0.0};
    double depth_of_top_ = 0.0;
};

struct Ratio3 {
    int rx = 1;
    int ry = 1;
    int rz = 1;

    int volume() const { return rx * ry * rz; }
    friend bool operator==(const Ratio3&, const Ratio3&) = default;
};

/// Fine/coarse grid pair where every fine cell sits inside exactly one coarse cell.
class ScaleMap {
public:
    ScaleMap(StructuredGrid fine, StructuredGrid coarse, Ratio3 ratio);

    const StructuredGrid& fine() const { return fine_; }
    const StructuredGrid& coarse() const { return coarse_; }
    Ratio3 ratio() const { return ratio_; }

    Index3 enclosing_unchecked(Index3 f) const {
        return {f.i / ratio_.rx, f.j / ratio_.ry, f.k / ratio_.rz};
    }

    Index3 enclosing_coarse_cell(Index3 fine_cell) const;
    std::size_t enclosing_coarse_cell(std::size_t fine_index) const;

    /// Fine linear indices contained in a coarse cell, in linear order.
    std::vector<std::size_t> children(Index3 coarse_cell) const;

private:
    StructuredGrid fine_;
    StructuredGrid coarse_;
    Ratio3 ratio_;
};

/// Coarse grid shares origin and depth of top; spacing grows by the ratio.
ScaleMap build_scale_map(const StructuredGrid& fine, Ratio3 ratio);

struct Column {
    int id = 0;
    int i_begin = 0, i_end = 0; // half-open
    int j_begin = 0, j_end = 0;
};

/**
 * Vertical columns tiling the horizontal extent of a grid. Column ids run
 * x-fastest: id = cx + n_columns_x * cy.
 */
class ColumnPartition {
public:
    ColumnPartition(Dims3 dims, int n_columns_x, int n_columns_y, int discard_top,
                    int discard_bottom);

    const std::vector<Column>& columns() const { return columns_; }
    int discard_top() const { return discard_top_; }
    int discard_bottom() const { return discard_bottom_; }
    int k_begin() const { return discard_top_; }
    int k_end() const { return dims_.nz - discard_bottom_; }
    int n_columns_x() const { return ncx_; }
    int n_columns_y() const { return ncy_; }
    Dims3 dims() const { return dims_; }

    /// Column containing the cell, or nullopt inside a discarded layer.
    std::optional<int> column_of(Index3 cell) const;

    const Column& column(int id) const;

    /// Linear cell indices of one column in ascending order.
    std::vector<std::size_t> cells(int id) const;

    std::size_t cells_per_column() const;

private:
    Dims3 dims_;
    int ncx_, ncy_;
    int discard_top_, discard_bottom_;
    int width_x_, width_y_;
    std::vector<Column> columns_;
};

ColumnPartition partition_columns(const StructuredGrid& grid, int n_columns_x, int n_columns_y,
                                  int discard_top, int discard_bottom);

} // namespace geods
