#pragma once

#include "geods/geomodel.hpp"
#include "geods/grid.hpp"
#include "geods/tensor.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace geods {

/**
 * Solved stress state per cell.
 *
 * `sigma` is the effective stress, compression positive, in MPa. `eps` is the
 * strain tensor, extension positive. Principal values are sorted ascending so
 * principal[c][0] is the minimum compressive (fracture-gradient) component.
 */
struct StressField {
    StructuredGrid grid;
    std::vector<SymTensor> sigma;
    std::vector<SymTensor> eps;
    std::vector<std::array<double, 3>> principal;
    std::vector<std::array<Vec3, 3>> principal_dirs;

    explicit StressField(StructuredGrid g);
};

} // namespace geods

namespace geods::fem {

inline constexpr double kDefaultGravity = 9.81;

/**
 * Tectonic loading through normal displacements on the lateral faces
 * (u = +/- strain * L / 2, shortening positive), a vertical roller base and a
 * top face carrying an optional uniform compressive load (zero = traction free).
 */
struct BoundaryConditions {
    double strain_ew = 1.0e-5;
    double strain_ns = 1.5e-4;
    double top_load = 0.0; // MPa, total vertical compression on the top face
};

struct ElasticityProblem {
    const MaterialField& material;
    BoundaryConditions bc{};
    double gravity = kDefaultGravity;
};

/// Per-DOF Dirichlet data; DOF index = 3 * node + component.
struct Constraints {
    std::vector<std::uint8_t> fixed;
    std::vector<double> value;

    explicit Constraints(std::size_t ndof = 0) : fixed(ndof, 0), value(ndof, 0.0) {}
    void set(std::size_t dof, double v) {
        fixed[dof] = 1;
        value[dof] = v;
    }
};

Constraints make_constraints(const StructuredGrid& grid, const BoundaryConditions& bc);

using ElementMatrix = std::array<double, 24 * 24>; // row-major

/// Element stiffness split K_e = lambda * k_lambda + mu * k_mu for a box element.
struct ElementMatrices {
    ElementMatrix k_lambda{};
    ElementMatrix k_mu{};
};

/// 8-node trilinear box element, 2x2x2 Gauss rule. Local node a = ax + 2 ay + 4 az.
ElementMatrices element_matrices(double dx, double dy, double dz);

/// Element stiffness for E (MPa) and nu.
ElementMatrix element_stiffness(double dx, double dy, double dz, double E, double nu);

/// Matrix-free stiffness operator on a structured grid.
class StiffnessOperator {
public:
    StiffnessOperator(const StructuredGrid& grid, std::vector<double> lambda,
                      std::vector<double> mu, int threads = 1);

    std::size_t dof_count() const { return 3 * grid_.node_count(); }
    const StructuredGrid& grid() const { return grid_; }

    /// y = K x over all DOFs. Deterministic for any thread count.
    void apply(std::span<const double> x, std::span<double> y) const;

    /// Diagonal of K.
    std::vector<double> diagonal() const;

    /// Strain energy u^T K u.
    double energy(std::span<const double> u) const;

private:
    StructuredGrid grid_;
    std::vector<double> lambda_;
    std::vector<double> mu_;
    ElementMatrices em_;
    int threads_;
};

/**
 * Linear system with Dirichlet rows and columns eliminated: the operator is
 * applied to vectors that vanish on fixed DOFs, and `rhs` holds F - K u_d on
 * free DOFs (zero on fixed ones).
 */
struct LinearSystem {
    StiffnessOperator op;
    Constraints constraints;
    std::vector<double> load; // full nodal load F (MN)
    std::vector<double> rhs;

    /// K_ff u_f for u vanishing on fixed DOFs.
    void apply_free(std::span<const double> x, std::span<double> y) const;
};

/// Builds the load vector: gravity, pore pressure (Biot coefficient 1) and top load.
std::vector<double> assemble_load(const ElasticityProblem& problem);

/// Throws SolverError naming the unconstrained rigid-body mode when constraints are insufficient.
LinearSystem assemble(const ElasticityProblem& problem, Constraints constraints, int threads = 1);
LinearSystem assemble(const ElasticityProblem& problem, int threads = 1);

enum class Preconditioner { jacobi };

struct SolverSettings {
    double rel_tolerance = 1e-8;
    int max_iterations = 50000;
    Preconditioner preconditioner = Preconditioner::jacobi;
    int threads = 1;
};

void validate(const SolverSettings& settings);

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0; // true residual ||b - K u|| / ||b||
};

/// Jacobi-preconditioned conjugate gradient on the free DOFs; u enters as the initial guess.
CgResult conjugate_gradient(const LinearSystem& system, std::span<double> u,
                            const SolverSettings& settings);

/// ||rhs - K_ff u_f|| / ||rhs|| (0 when rhs vanishes).
double equilibrium_residual(const LinearSystem& system, std::span<const double> u);

struct Solution {
    std::vector<double> displacement; // full DOF vector including prescribed values (m)
    StressField stress;
    int iterations = 0;
    double relative_residual = 0.0;
};

Solution solve(const ElasticityProblem& problem, const SolverSettings& settings);
Solution solve(const ElasticityProblem& problem, const Constraints& constraints,
               const SolverSettings& settings);

/// Centroid stress as the mean of the 2x2x2 Gauss-point stresses.
StressField recover_stress(const MaterialField& material, std::span<const double> displacement);

/// Lame parameters in MPa for every cell (E is stored in GPa).
void lame_fields(const MaterialField& material, std::vector<double>& lambda,
                 std::vector<double>& mu);

} // namespace geods::fem
