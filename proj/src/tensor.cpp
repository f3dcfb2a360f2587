#include "geods/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace geods {

double SymTensor::operator()(int r, int c) const {
    if (r == c) {
        return r == 0 ? xx : (r == 1 ? yy : zz);
    }
    const int s = r + c; // 1 -> xy, 2 -> xz, 3 -> yz
    return s == 1 ? xy : (s == 2 ? xz : yz);
}

double SymTensor::frobenius_norm() const {
    return std::sqrt(xx * xx + yy * yy + zz * zz + 2.0 * (yz * yz + xz * xz + xy * xy));
}

Principal principal_stresses(const SymTensor& t) {
    Eigen::Matrix3d m;
    m << t.xx, t.xy, t.xz, t.xy, t.yy, t.yz, t.xz, t.yz, t.zz;
    // The iterative QL solver is accurate for clustered eigenvalues, unlike computeDirect.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
    const Eigen::Vector3d& w = es.eigenvalues(); // ascending
    Eigen::Matrix3d v = es.eigenvectors();
    if (v.determinant() < 0.0) {
        v.col(2) = -v.col(2);
    }
    Principal p;
    for (int a = 0; a < 3; ++a) {
        p.values[a] = w[a];
        p.directions[a] = {v(0, a), v(1, a), v(2, a)};
    }
    return p;
}

Lame lame_from(double E, double nu) {
    return {E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), E / (2.0 * (1.0 + nu))};
}

SymTensor hooke(const Lame& lame, const SymTensor& e) {
    const double l_tr = lame.lambda * e.trace();
    const double two_mu = 2.0 * lame.mu;
    return {l_tr + two_mu * e.xx, l_tr + two_mu * e.yy, l_tr + two_mu * e.zz,
            two_mu * e.yz,        two_mu * e.xz,        two_mu * e.xy};
}

} // namespace geods
