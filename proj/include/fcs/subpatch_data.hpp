#ifndef FCS_SUBPATCH_DATA_HPP
#define FCS_SUBPATCH_DATA_HPP

#include <array>
#include <memory>
#include <vector>

#include "fcs/bc.hpp"
#include "fcs/fc_core.hpp"
#include "fcs/field.hpp"
#include "fcs/geometry.hpp"

namespace fcs {

using State = std::array<Field, 4>;  // rho, rho*u, rho*v, E

/** Everything one subpatch owns at run time: geometry arrays, FC line
 *  structure, solution and work fields. Allocated once at initialization. */
struct SubpatchData {
    const geom::Patch* patch = nullptr;
    const geom::Subpatch* sp = nullptr;
    int id = -1;
    int ni = 0, nj = 0;

    std::vector<uint8_t> mask;  // 0 outside, 1 interior, 2 fringe

    Field x, y;
    Field iq1x, iq2x, iq1y, iq2y;  // dq/dx = (dM/dq)^{-1} entries
    Field det;                     // |det dM/dq|
    Field h_min;                   // local spacing, finer direction (time step)
    Field h_max;                   // local spacing, coarser direction (viscosity)
    Field w_norm;                  // normalized own window

    struct LineInfo {
        int begin = 0;             // local start index along the line
        int n = 0;
        double inv_len = 0.0;      // 1 / ((n-1) * h) : unit-span -> parameter
        std::shared_ptr<const fc::FcOperator> op;
        geom::EndInfo lo, hi;
        const BcSpec* bc_lo = nullptr;  // resolved boundary conditions
        const BcSpec* bc_hi = nullptr;
    };
    std::vector<LineInfo> rows, cols;  // rows[j-local], cols[i-local]

    State e;                    // current stage state
    State e0, e2, e3;           // SSPRK registers
    State rhs, rhs3;
    Field mu_hat, mu, tau, speed;
    Field s1, s2, s3, s4, s5, s6;  // scratch

    bool valid(int il, int jl) const {
        return mask[static_cast<size_t>(jl) * ni + il] != 0;
    }
    bool interior(int il, int jl) const {
        return mask[static_cast<size_t>(jl) * ni + il] == 1;
    }

    /** d(field)/dq1 and /dq2 by FC line sweeps (parameter-space derivative). */
    void deriv_q1(const Field& f, Field& out) const;
    void deriv_q2(const Field& f, Field& out) const;
    void filter_field(Field& f) const;
    void smear_field(Field& f, const Field& mask01) const;
};

/** Fill geometry arrays, masks and line structure for one subpatch. */
void init_subpatch_data(SubpatchData& d, const geom::Patch& p, const geom::Subpatch& sp,
                        int nf, int n_cont, fc::FilterSpec filter, const BcTable& bcs);

}  // namespace fcs

#endif
