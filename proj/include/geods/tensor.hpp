#pragma once

#include "geods/grid.hpp"

#include <array>

namespace geods {

/// Symmetric 3x3 tensor in Voigt order (xx, yy, zz, yz, xz, xy).
struct SymTensor {
    double xx = 0.0, yy = 0.0, zz = 0.0, yz = 0.0, xz = 0.0, xy = 0.0;

    double operator()(int r, int c) const;
    double trace() const { return xx + yy + zz; }
    double frobenius_norm() const;

    friend bool operator==(const SymTensor&, const SymTensor&) = default;
};

struct Principal {
    std::array<double, 3> values{};     // ascending
    std::array<Vec3, 3> directions{};   // unit eigenvector per value, right-handed
};

/// Eigenvalues in ascending order with an orthonormal eigenvector triple.
Principal principal_stresses(const SymTensor& t);

/// Lame parameters from Young's modulus and Poisson's ratio (same units as E).
struct Lame {
    double lambda = 0.0;
    double mu = 0.0;
};
Lame lame_from(double E, double nu);

/// Isotropic Hooke law on tensor (not engineering) shear strains.
SymTensor hooke(const Lame& lame, const SymTensor& strain);

} // namespace geods
