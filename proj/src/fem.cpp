#include "geods/fem.hpp"

#include "geods/error.hpp"
#include "geods/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace geods {

StressField::StressField(StructuredGrid g)
    : grid(std::move(g)), sigma(grid.cell_count()), eps(grid.cell_count()),
      principal(grid.cell_count()), principal_dirs(grid.cell_count()) {}

} // namespace geods

namespace geods::fem {

namespace {

constexpr double kGaussPoint = 0.57735026918962576451; // 1/sqrt(3)

struct NodeOffset {
    int ax, ay, az;
};

constexpr NodeOffset local_node(int a) { return {a & 1, (a >> 1) & 1, (a >> 2) & 1}; }

// Strain-displacement matrices at the 8 Gauss points, engineering shear (Voigt
// xx, yy, zz, yz, xz, xy), for a box element of size dx*dy*dz.
struct GaussB {
    std::array<std::array<double, 6 * 24>, 8> B{};
    double weight = 0.0; // det(J) times the unit Gauss weight
};

GaussB gauss_b(double dx, double dy, double dz) {
    GaussB g;
    g.weight = dx * dy * dz / 8.0;
    for (int q = 0; q < 8; ++q) {
        const NodeOffset qp = local_node(q);
        const double xi = (2 * qp.ax - 1) * kGaussPoint;
        const double eta = (2 * qp.ay - 1) * kGaussPoint;
        const double zeta = (2 * qp.az - 1) * kGaussPoint;
        auto& B = g.B[static_cast<std::size_t>(q)];
        B.fill(0.0);
        for (int a = 0; a < 8; ++a) {
            const NodeOffset n = local_node(a);
            const double sx = 2 * n.ax - 1, sy = 2 * n.ay - 1, sz = 2 * n.az - 1;
            const double dNx = sx * (1 + sy * eta) * (1 + sz * zeta) / 8.0 * (2.0 / dx);
            const double dNy = sy * (1 + sx * xi) * (1 + sz * zeta) / 8.0 * (2.0 / dy);
            const double dNz = sz * (1 + sx * xi) * (1 + sy * eta) / 8.0 * (2.0 / dz);
            const int c = 3 * a;
            B[0 * 24 + c + 0] = dNx;
            B[1 * 24 + c + 1] = dNy;
            B[2 * 24 + c + 2] = dNz;
            B[3 * 24 + c + 1] = dNz;
            B[3 * 24 + c + 2] = dNy;
            B[4 * 24 + c + 0] = dNz;
            B[4 * 24 + c + 2] = dNx;
            B[5 * 24 + c + 0] = dNy;
            B[5 * 24 + c + 1] = dNx;
        }
    }
    return g;
}

template <typename F>
void for_each_element_node(const StructuredGrid& g, int i, int j, int k, F&& f) {
    for (int a = 0; a < 8; ++a) {
        const NodeOffset n = local_node(a);
        f(a, g.node_linear(i + n.ax, j + n.ay, k + n.az));
    }
}

} // namespace

void lame_fields(const MaterialField& material, std::vector<double>& lambda,
                 std::vector<double>& mu) {
    const std::size_t n = material.grid.cell_count();
    lambda.resize(n);
    mu.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        const Lame l = lame_from(material.E[c] * 1e3, material.nu[c]);
        lambda[c] = l.lambda;
        mu[c] = l.mu;
    }
}

ElementMatrices element_matrices(double dx, double dy, double dz) {
    const GaussB g = gauss_b(dx, dy, dz);
    ElementMatrices em;
    for (const auto& B : g.B) {
        for (int r = 0; r < 24; ++r) {
            for (int c = 0; c < 24; ++c) {
                // lambda part: divergence outer product; mu part: diag(2,2,2,1,1,1).
                const double div_r = B[0 * 24 + r] + B[1 * 24 + r] + B[2 * 24 + r];
                const double div_c = B[0 * 24 + c] + B[1 * 24 + c] + B[2 * 24 + c];
                double mu_term = 0.0;
                for (int s = 0; s < 6; ++s) {
                    mu_term += (s < 3 ? 2.0 : 1.0) * B[s * 24 + r] * B[s * 24 + c];
                }
                em.k_lambda[r * 24 + c] += g.weight * div_r * div_c;
                em.k_mu[r * 24 + c] += g.weight * mu_term;
            }
        }
    }
    return em;
}

ElementMatrix element_stiffness(double dx, double dy, double dz, double E, double nu) {
    const ElementMatrices em = element_matrices(dx, dy, dz);
    const Lame l = lame_from(E, nu);
    ElementMatrix k;
    for (std::size_t i = 0; i < k.size(); ++i) {
        k[i] = l.lambda * em.k_lambda[i] + l.mu * em.k_mu[i];
    }
    return k;
}

StiffnessOperator::StiffnessOperator(const StructuredGrid& grid, std::vector<double> lambda,
                                     std::vector<double> mu, int threads)
    : grid_(grid), lambda_(std::move(lambda)), mu_(std::move(mu)),
      em_(element_matrices(grid.dx(), grid.dy(), grid.dz())), threads_(std::max(1, threads)) {
    if (lambda_.size() != grid.cell_count() || mu_.size() != grid.cell_count()) {
        throw ShapeError("Lame fields do not match grid");
    }
}

void StiffnessOperator::apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != dof_count() || y.size() != dof_count()) {
        throw ShapeError("operator vector size mismatch");
    }
    std::fill(y.begin(), y.end(), 0.0);
    const StructuredGrid& g = grid_;
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    // Eight parity colours: elements of one colour share no nodes, so their
    // scatters never collide and each node accumulates in a fixed order.
    for (int color = 0; color < 8; ++color) {
        const int ci = color & 1, cj = (color >> 1) & 1, ck = (color >> 2) & 1;
        const int n_planes = (nz - ck + 1) / 2;
        parallel_for(0, n_planes, threads_, [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
            std::array<double, 24> xe;
            std::array<std::size_t, 8> nodes;
            for (std::ptrdiff_t p = lo; p < hi; ++p) {
                const int k = ck + 2 * static_cast<int>(p);
                for (int j = cj; j < ny; j += 2) {
                    for (int i = ci; i < nx; i += 2) {
                        const std::size_t e = g.linear_unchecked({i, j, k});
                        for_each_element_node(g, i, j, k, [&](int a, std::size_t n) {
                            nodes[static_cast<std::size_t>(a)] = n;
                            xe[3 * a + 0] = x[3 * n + 0];
                            xe[3 * a + 1] = x[3 * n + 1];
                            xe[3 * a + 2] = x[3 * n + 2];
                        });
                        const double lam = lambda_[e], mu = mu_[e];
                        for (int r = 0; r < 24; ++r) {
                            const double* kl = &em_.k_lambda[static_cast<std::size_t>(r) * 24];
                            const double* km = &em_.k_mu[static_cast<std::size_t>(r) * 24];
                            double sl = 0.0, sm = 0.0;
                            for (int c = 0; c < 24; ++c) {
                                sl += kl[c] * xe[c];
                                sm += km[c] * xe[c];
                            }
                            y[3 * nodes[static_cast<std::size_t>(r / 3)] + r % 3] +=
                                lam * sl + mu * sm;
                        }
                    }
                }
            }
        });
    }
}

std::vector<double> StiffnessOperator::diagonal() const {
    std::vector<double> d(dof_count(), 0.0);
    const StructuredGrid& g = grid_;
    for (int k = 0; k < g.nz(); ++k) {
        for (int j = 0; j < g.ny(); ++j) {
            for (int i = 0; i < g.nx(); ++i) {
                const std::size_t e = g.linear_unchecked({i, j, k});
                for_each_element_node(g, i, j, k, [&](int a, std::size_t n) {
                    for (int c = 0; c < 3; ++c) {
                        const int r = 3 * a + c;
                        d[3 * n + c] += lambda_[e] * em_.k_lambda[r * 24 + r] +
                                        mu_[e] * em_.k_mu[r * 24 + r];
                    }
                });
            }
        }
    }
    return d;
}

double StiffnessOperator::energy(std::span<const double> u) const {
    std::vector<double> ku(dof_count());
    apply(u, ku);
    return deterministic_dot(u, ku);
}

void LinearSystem::apply_free(std::span<const double> x, std::span<double> y) const {
    op.apply(x, y);
    for (std::size_t d = 0; d < y.size(); ++d) {
        if (constraints.fixed[d]) {
            y[d] = 0.0;
        }
    }
}

Constraints make_constraints(const StructuredGrid& grid, const BoundaryConditions& bc) {
    Constraints cs(3 * grid.node_count());
    const Vec3 L = grid.extent();
    const double ux0 = 0.5 * bc.strain_ew * L[0];
    const double uy0 = 0.5 * bc.strain_ns * L[1];
    for (int k = 0; k <= grid.nz(); ++k) {
        for (int j = 0; j <= grid.ny(); ++j) {
            for (int i = 0; i <= grid.nx(); ++i) {
                const std::size_t n = grid.node_linear(i, j, k);
                if (i == 0) cs.set(3 * n + 0, ux0);
                if (i == grid.nx()) cs.set(3 * n + 0, -ux0);
                if (j == 0) cs.set(3 * n + 1, uy0);
                if (j == grid.ny()) cs.set(3 * n + 1, -uy0);
                if (k == grid.nz()) cs.set(3 * n + 2, 0.0);
            }
        }
    }
    return cs;
}

std::vector<double> assemble_load(const ElasticityProblem& problem) {
    const MaterialField& m = problem.material;
    const StructuredGrid& g = m.grid;
    std::vector<double> F(3 * g.node_count(), 0.0);
    const double volume = g.cell_volume();

    // G[a][c] = integral of dN_a/dx_c over the element.
    const GaussB gb = gauss_b(g.dx(), g.dy(), g.dz());
    std::array<std::array<double, 3>, 8> G{};
    for (const auto& B : gb.B) {
        for (int a = 0; a < 8; ++a) {
            G[a][0] += gb.weight * B[0 * 24 + 3 * a + 0];
            G[a][1] += gb.weight * B[1 * 24 + 3 * a + 1];
            G[a][2] += gb.weight * B[2 * 24 + 3 * a + 2];
        }
    }

    for (int k = 0; k < g.nz(); ++k) {
        for (int j = 0; j < g.ny(); ++j) {
            for (int i = 0; i < g.nx(); ++i) {
                const std::size_t e = g.linear_unchecked({i, j, k});
                // rho [g/cm3] * g [m/s2] -> MN/m3 is rho * g * 1e-3.
                const double body = m.rho[e] * problem.gravity * 1e-3 * volume / 8.0;
                const double p = m.pp[e];
                for_each_element_node(g, i, j, k, [&](int a, std::size_t n) {
                    F[3 * n + 2] += body;
                    for (int c = 0; c < 3; ++c) {
                        F[3 * n + c] += p * G[a][c];
                    }
                });
            }
        }
    }
    if (problem.bc.top_load != 0.0) {
        const double nodal = problem.bc.top_load * g.dx() * g.dy() / 4.0;
        for (int j = 0; j < g.ny(); ++j) {
            for (int i = 0; i < g.nx(); ++i) {
                for (int a = 0; a < 4; ++a) {
                    F[3 * g.node_linear(i + (a & 1), j + (a >> 1), 0) + 2] += nodal;
                }
            }
        }
    }
    return F;
}

namespace {

void check_rigid_modes(const StructuredGrid& g, const Constraints& cs) {
    // Rows of R are rigid-mode values at fixed DOFs; a null vector of R^T R is
    // a rigid motion the constraints do not resist.
    const Vec3 L = g.extent();
    const double scale = std::max({L[0], L[1], L[2]});
    Eigen::Matrix<double, 6, 6> RtR = Eigen::Matrix<double, 6, 6>::Zero();
    for (int k = 0; k <= g.nz(); ++k) {
        for (int j = 0; j <= g.ny(); ++j) {
            for (int i = 0; i <= g.nx(); ++i) {
                const std::size_t n = g.node_linear(i, j, k);
                const double x = (i * g.dx() - 0.5 * L[0]) / scale;
                const double y = (j * g.dy() - 0.5 * L[1]) / scale;
                const double z = (k * g.dz() - 0.5 * L[2]) / scale;
                // Modes: tx, ty, tz, rx, ry, rz (rotation r about axis a: r x p).
                const double modes[3][6] = {{1, 0, 0, 0, z, -y},
                                            {0, 1, 0, -z, 0, x},
                                            {0, 0, 1, y, -x, 0}};
                for (int c = 0; c < 3; ++c) {
                    if (!cs.fixed[3 * n + c]) continue;
                    Eigen::Matrix<double, 6, 1> row;
                    for (int m = 0; m < 6; ++m) row[m] = modes[c][m];
                    RtR += row * row.transpose();
                }
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(RtR);
    const double top = std::max(es.eigenvalues()[5], 1.0);
    if (es.eigenvalues()[0] > 1e-10 * top) {
        return;
    }
    static const char* names[6] = {"translation x", "translation y", "translation z",
                                   "rotation about x", "rotation about y", "rotation about z"};
    const auto v = es.eigenvectors().col(0);
    int dominant = 0;
    for (int m = 1; m < 6; ++m) {
        if (std::abs(v[m]) > std::abs(v[dominant])) dominant = m;
    }
    throw SolverError(std::string("singular system: rigid-body mode '") + names[dominant] +
                      "' is not constrained");
}

} // namespace

LinearSystem assemble(const ElasticityProblem& problem, Constraints constraints, int threads) {
    const MaterialField& m = problem.material;
    const StructuredGrid& g = m.grid;
    const std::size_t n = g.cell_count();
    if (m.E.size() != n || m.nu.size() != n || m.rho.size() != n || m.pp.size() != n) {
        throw ShapeError("material field does not match its grid");
    }
    for (std::size_t c = 0; c < n; ++c) {
        if (!(m.E[c] > 0.0) || !(m.nu[c] > -1.0 && m.nu[c] < 0.5)) {
            throw ConfigError("cell " + std::to_string(c) + " has non-physical E or nu");
        }
    }
    if (constraints.fixed.size() != 3 * g.node_count()) {
        throw ShapeError("constraint vector does not match grid DOFs");
    }
    check_rigid_modes(g, constraints);

    std::vector<double> lambda, mu;
    lame_fields(m, lambda, mu);
    LinearSystem sys{StiffnessOperator(g, std::move(lambda), std::move(mu), threads),
                     std::move(constraints), assemble_load(problem), {}};

    // rhs = F - K u_d on free rows.
    const std::size_t ndof = sys.op.dof_count();
    std::vector<double> ud(ndof, 0.0);
    for (std::size_t d = 0; d < ndof; ++d) {
        if (sys.constraints.fixed[d]) ud[d] = sys.constraints.value[d];
    }
    std::vector<double> kud(ndof);
    sys.op.apply(ud, kud);
    sys.rhs.assign(ndof, 0.0);
    for (std::size_t d = 0; d < ndof; ++d) {
        if (!sys.constraints.fixed[d]) sys.rhs[d] = sys.load[d] - kud[d];
    }
    return sys;
}

LinearSystem assemble(const ElasticityProblem& problem, int threads) {
    return assemble(problem, make_constraints(problem.material.grid, problem.bc), threads);
}

void validate(const SolverSettings& s) {
    if (!(s.rel_tolerance > 0.0 && s.rel_tolerance < 1.0)) {
        throw ConfigError("solver rel_tolerance must lie in (0, 1)");
    }
    if (s.max_iterations <= 0) {
        throw ConfigError("solver max_iterations must be > 0");
    }
}

double equilibrium_residual(const LinearSystem& sys, std::span<const double> u) {
    const std::size_t ndof = sys.op.dof_count();
    std::vector<double> uf(u.begin(), u.end());
    for (std::size_t d = 0; d < ndof; ++d) {
        if (sys.constraints.fixed[d]) uf[d] = 0.0;
    }
    std::vector<double> r(ndof);
    sys.apply_free(uf, r);
    for (std::size_t d = 0; d < ndof; ++d) r[d] = sys.rhs[d] - r[d];
    const double bnorm = std::sqrt(deterministic_dot(sys.rhs, sys.rhs));
    const double rnorm = std::sqrt(deterministic_dot(r, r));
    return bnorm > 0.0 ? rnorm / bnorm : rnorm;
}

CgResult conjugate_gradient(const LinearSystem& sys, std::span<double> u,
                            const SolverSettings& settings) {
    validate(settings);
    const std::size_t ndof = sys.op.dof_count();
    if (u.size() != ndof) {
        throw ShapeError("solution vector size mismatch");
    }
    const auto& fixed = sys.constraints.fixed;
    std::vector<double> inv_diag = sys.op.diagonal();
    for (std::size_t d = 0; d < ndof; ++d) {
        inv_diag[d] = fixed[d] ? 0.0 : 1.0 / inv_diag[d];
        if (fixed[d]) u[d] = 0.0;
    }

    const double bnorm = std::sqrt(deterministic_dot(sys.rhs, sys.rhs));
    if (bnorm == 0.0) {
        std::fill(u.begin(), u.end(), 0.0);
        return {0, 0.0};
    }
    const double target = settings.rel_tolerance * bnorm;

    std::vector<double> r(ndof), z(ndof), p(ndof), q(ndof);
    auto true_residual = [&] {
        sys.apply_free(u, q);
        for (std::size_t d = 0; d < ndof; ++d) r[d] = sys.rhs[d] - q[d];
    };
    true_residual();
    for (std::size_t d = 0; d < ndof; ++d) z[d] = inv_diag[d] * r[d];
    p = z;
    double rz = deterministic_dot(r, z);
    double rnorm = std::sqrt(deterministic_dot(r, r));

    int it = 0;
    while (it < settings.max_iterations) {
        if (rnorm <= target) {
            // Confirm against the true residual; the recurrence can drift.
            true_residual();
            rnorm = std::sqrt(deterministic_dot(r, r));
            if (rnorm <= target) break;
            for (std::size_t d = 0; d < ndof; ++d) z[d] = inv_diag[d] * r[d];
            p = z;
            rz = deterministic_dot(r, z);
        }
        sys.apply_free(p, q);
        const double pq = deterministic_dot(p, q);
        if (!(pq > 0.0)) {
            throw SolverError("conjugate gradient breakdown: operator not positive definite");
        }
        const double alpha = rz / pq;
        for (std::size_t d = 0; d < ndof; ++d) {
            u[d] += alpha * p[d];
            r[d] -= alpha * q[d];
        }
        for (std::size_t d = 0; d < ndof; ++d) z[d] = inv_diag[d] * r[d];
        const double rz_new = deterministic_dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t d = 0; d < ndof; ++d) p[d] = z[d] + beta * p[d];
        rnorm = std::sqrt(deterministic_dot(r, r));
        ++it;
    }
    if (rnorm > target) {
        true_residual();
        const double rel = std::sqrt(deterministic_dot(r, r)) / bnorm;
        throw NonConvergenceError("conjugate gradient did not converge in " +
                                      std::to_string(it) + " iterations (relative residual " +
                                      std::to_string(rel) + ")",
                                  it, rel);
    }
    return {it, rnorm / bnorm};
}

StressField recover_stress(const MaterialField& m, std::span<const double> u) {
    const StructuredGrid& g = m.grid;
    if (u.size() != 3 * g.node_count()) {
        throw ShapeError("displacement vector does not match grid");
    }
    const GaussB gb = gauss_b(g.dx(), g.dy(), g.dz());
    StressField out(g);
    std::array<double, 24> ue;
    for (int k = 0; k < g.nz(); ++k) {
        for (int j = 0; j < g.ny(); ++j) {
            for (int i = 0; i < g.nx(); ++i) {
                const std::size_t e = g.linear_unchecked({i, j, k});
                for_each_element_node(g, i, j, k, [&](int a, std::size_t n) {
                    for (int c = 0; c < 3; ++c) ue[3 * a + c] = u[3 * n + c];
                });
                const Lame lame = lame_from(m.E[e] * 1e3, m.nu[e]);
                SymTensor eps_mean, sig_mean;
                for (const auto& B : gb.B) {
                    double v[6] = {0, 0, 0, 0, 0, 0};
                    for (int s = 0; s < 6; ++s) {
                        for (int c = 0; c < 24; ++c) v[s] += B[s * 24 + c] * ue[c];
                    }
                    const SymTensor eps{v[0], v[1], v[2], 0.5 * v[3], 0.5 * v[4], 0.5 * v[5]};
                    const SymTensor sig = hooke(lame, eps);
                    eps_mean.xx += eps.xx / 8; eps_mean.yy += eps.yy / 8; eps_mean.zz += eps.zz / 8;
                    eps_mean.yz += eps.yz / 8; eps_mean.xz += eps.xz / 8; eps_mean.xy += eps.xy / 8;
                    sig_mean.xx += sig.xx / 8; sig_mean.yy += sig.yy / 8; sig_mean.zz += sig.zz / 8;
                    sig_mean.yz += sig.yz / 8; sig_mean.xz += sig.xz / 8; sig_mean.xy += sig.xy / 8;
                }
                // Extension-positive Hooke stress is the effective stress; flip to compression positive.
                const SymTensor eff{-sig_mean.xx, -sig_mean.yy, -sig_mean.zz,
                                    -sig_mean.yz, -sig_mean.xz, -sig_mean.xy};
                out.eps[e] = eps_mean;
                out.sigma[e] = eff;
                const Principal p = principal_stresses(eff);
                out.principal[e] = p.values;
                out.principal_dirs[e] = p.directions;
            }
        }
    }
    return out;
}

Solution solve(const ElasticityProblem& problem, const Constraints& constraints,
               const SolverSettings& settings) {
    validate(settings);
    const LinearSystem sys = assemble(problem, constraints, settings.threads);
    std::vector<double> u(sys.op.dof_count(), 0.0);
    const CgResult cg = conjugate_gradient(sys, u, settings);
    for (std::size_t d = 0; d < u.size(); ++d) {
        if (sys.constraints.fixed[d]) u[d] = sys.constraints.value[d];
    }
    StressField stress = recover_stress(problem.material, u);
    return {std::move(u), std::move(stress), cg.iterations, cg.relative_residual};
}

Solution solve(const ElasticityProblem& problem, const SolverSettings& settings) {
    return solve(problem, make_constraints(problem.material.grid, problem.bc), settings);
}

} // namespace geods::fem
