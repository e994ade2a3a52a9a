#ifndef FCS_WORKBENCH_HPP
#define FCS_WORKBENCH_HPP

#include <optional>
#include <string>
#include <vector>

#include "fcs/runtime.hpp"

namespace fcs::wb {

// ---------------------------------------------------------------------------
// initial conditions

enum class ShockDensity { paper, rankine_hugoniot };

/** Mach-M normal shock initial state: (rho_L, u_L, 0, zeta) left of x_s and
 *  the quiescent (1.4, 0, 0, 1) state right of it. The left density follows
 *  either the published table value or the jump-consistent one. */
run::InitialCondition make_shock_ic(double M, double x_s,
                                    ShockDensity convention = ShockDensity::paper);

/** Uniform Mach-M flow (1.4, M, 0, 1); the sound speed is 1. */
run::InitialCondition make_flow_ic(double M);

/** The primitive left state of make_shock_ic (rho, u, v, p). */
std::array<double, 4> shock_left_state(double M, ShockDensity convention);

/** Residuals of the normal-shock relations for pressure and velocity:
 *  {p_L - p(M), u_L - u(M)} against an independent jump evaluation. */
std::array<double, 2> rankine_hugoniot_residual(double M);

// ---------------------------------------------------------------------------
// oracles

struct RiemannState {
    double rho, u, p;
};

struct RiemannSolution {
    double p_star, u_star;
    RiemannState left, right;
    /** Sample at similarity coordinate xi = (x - x0)/t. */
    std::array<double, 3> sample(double xi) const;  // rho, u, p
};

/** Exact solver for the 1D Riemann problem, gamma = 1.4, iterated to 1e-12. */
RiemannSolution exact_riemann_1d(RiemannState left, RiemannState right);

/** Weak-branch oblique shock angle (degrees) for wedge full-angle alpha_t
 *  (degrees) at Mach M; throws DomainError in the detached regime. */
double oblique_shock_angle(double M, double alpha_t_deg);

// ---------------------------------------------------------------------------
// problems

struct ProblemSpec {
    std::string name;
    geom::DomainDecomposition dec;
    BcTable bcs;
    run::InitialCondition ic;
    double T = 1.0;
    double cfl = 0.5;
    double height = 1.0;  // for per-unit-height energy reporting
};

ProblemSpec sod_channel(int r = 4, int n0 = 47, int nv = 9);
ProblemSpec riemann4(int r = 3, int s = 3, int n0 = 37, int nv = 9, double T = 0.25);
/** Supersonic flow past the 40-degree wedge; target_h picks the resolution. */
ProblemSpec wedge_flow(double mach, double target_h, int n0 = 83, int n1 = 43, int nv = 9);
/** Mach-10 flow past a cylinder in a channel (scaling test problem). */
ProblemSpec cylinder_flow(double target_h, int n0 = 43, int nv = 9);
/** Mach-M shock into an n_row x n_col cylinder array with front/wake zones. */
ProblemSpec cylinder_matrix(double mach, int n_row, int n_col, double target_h, int n0 = 43,
                            int nv = 9);
/** Shock or flow past a triangular prism (front angle in degrees). */
ProblemSpec prism_flow(double mach, double front_angle_deg, double target_h, int n0 = 43,
                       int n1 = 23, int nv = 9);

ProblemSpec get_problem(const std::string& name, double target_h = 0.0);

// ---------------------------------------------------------------------------
// measurements and writers

/** Window-weighted tensor-trapezoid integral of E over the domain. */
double energy_integral(const run::Engine& eng);
/** Same quadrature applied to the constant 1 (area check). */
double area_integral(const run::Engine& eng);

struct Raster {
    int nx = 0, ny = 0;
    double x0 = 0, y0 = 0, dx = 0, dy = 0;
    std::vector<double> v;
    double at(int i, int j) const { return v[static_cast<size_t>(j) * nx + i]; }
};

/** |grad rho| resampled on a uniform raster (FC derivatives per subpatch,
 *  bilinear resampling in parameter space). Cells outside the domain get 0. */
Raster density_gradient_raster(run::Engine& eng, int nx, int ny);

/** Schlieren shading sigma = exp(-beta (g - min)/(max - min)); sigma = 1 on a
 *  uniform field. */
Raster schlieren(const Raster& grad, double beta = 10.0);
void write_pgm(const Raster& r, const std::string& path);

/** Straight-line fit to the per-column argmax of |grad rho| in the window;
 *  returns the angle in degrees. */
double fit_shock_angle(const Raster& grad, double x_lo, double x_hi, double y_lo, double y_hi);

void write_subpatch_csv(const run::Engine& eng, const std::string& dir);
void write_manifest(const run::Engine& eng, const run::Engine::RunStats& rs,
                    const std::string& problem, const std::string& dir,
                    const std::vector<std::pair<double, double>>& energy_series);

// ---------------------------------------------------------------------------
// scaling metrics

struct ScalingRecord {
    long n_points = 0;   // N
    int n_workers = 0;   // N_C
    double seconds = 0;  // total wall time of the measured window
    long steps = 0;
};

struct ScalingRow {
    ScalingRecord rec;
    double S = 0.0;        // CPU-seconds per step per 1e6 unknowns
    double Ew_T = -1.0;    // weak efficiency via times (when applicable)
    double Ew_S = -1.0;    // weak efficiency via S
    double Es_T = -1.0;    // strong efficiency via times
    double Es_S = -1.0;    // strong efficiency via S
};

/** S = N_C * time * 1e6 / (4 N steps); strong rows pair against the first
 *  record with equal N, weak rows against the first record with equal N/N_C. */
std::vector<ScalingRow> scaling_metrics(const std::vector<ScalingRecord>& recs);
std::string scaling_csv(const std::vector<ScalingRow>& rows);

}  // namespace fcs::wb

#endif
