#include "fcs/euler.hpp"

#include <cmath>
#include <limits>

#include "fcs/errors.hpp"

namespace fcs::euler {

std::array<double, 4> conservative(double rho, double u, double v, double p) {
    return {rho, rho * u, rho * v, p / (kGamma - 1.0) + 0.5 * rho * (u * u + v * v)};
}

namespace {

inline void axpy_metric(const Field& m1, const Field& g1, const Field& m2, const Field& g2,
                        Field& acc, double sign, const std::vector<uint8_t>& mask) {
    const size_t n = acc.v.size();
    for (size_t k = 0; k < n; ++k)
        if (mask[k]) acc.v[k] += sign * (m1.v[k] * g1.v[k] + m2.v[k] * g2.v[k]);
}

}  // namespace

void euler_rhs(SubpatchData& d, const State& e, const Field& mu, State& out, double t) {
    const int ni = d.ni, nj = d.nj;
    for (auto& f : out) f.fill(0.0);

    // theta = p / rho with the interior positivity diagnostic
    Field& theta = d.s6;
    for (int jl = 0; jl < nj; ++jl)
        for (int il = 0; il < ni; ++il) {
            if (!d.valid(il, jl)) continue;
            const double rho = e[0](il, jl);
            const double mx = e[1](il, jl), my = e[2](il, jl), E = e[3](il, jl);
            const double p = (kGamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / (rho != 0.0 ? rho : 1e-300));
            if (d.interior(il, jl) && (!(rho > 0.0) || !(p > 0.0) || !std::isfinite(p)))
                throw InvalidStateError("nonpositive density or pressure",
                                        d.patch->index, d.id, d.sp->i0 + il, d.sp->j0 + jl, t);
            theta(il, jl) = p / (rho != 0.0 ? rho : 1e-300);
        }

    // inviscid flux divergence via the chain rule
    for (int c = 0; c < 4; ++c) {
        Field& fx = d.s1;
        for (int jl = 0; jl < nj; ++jl)
            for (int il = 0; il < ni; ++il) {
                if (!d.valid(il, jl)) continue;
                const double rho = e[0](il, jl), mx = e[1](il, jl), my = e[2](il, jl),
                             E = e[3](il, jl);
                const double u = mx / rho, p = rho * theta(il, jl);
                switch (c) {
                    case 0: fx(il, jl) = mx; break;
                    case 1: fx(il, jl) = mx * u + p; break;
                    case 2: fx(il, jl) = my * u; break;
                    case 3: fx(il, jl) = u * (E + p); break;
                }
            }
        d.deriv_q1(fx, d.s2);
        d.deriv_q2(fx, d.s3);
        axpy_metric(d.iq1x, d.s2, d.iq2x, d.s3, out[c], -1.0, d.mask);

        for (int jl = 0; jl < nj; ++jl)
            for (int il = 0; il < ni; ++il) {
                if (!d.valid(il, jl)) continue;
                const double rho = e[0](il, jl), mx = e[1](il, jl), my = e[2](il, jl),
                             E = e[3](il, jl);
                const double v = my / rho, p = rho * theta(il, jl);
                switch (c) {
                    case 0: fx(il, jl) = my; break;
                    case 1: fx(il, jl) = mx * v; break;
                    case 2: fx(il, jl) = my * v + p; break;
                    case 3: fx(il, jl) = v * (E + p); break;
                }
            }
        d.deriv_q1(fx, d.s2);
        d.deriv_q2(fx, d.s3);
        axpy_metric(d.iq1y, d.s2, d.iq2y, d.s3, out[c], -1.0, d.mask);
    }

    // artificial dissipation: div(mu grad w), w = rho, rho u, rho v, theta
    for (int c = 0; c < 4; ++c) {
        const Field& w = (c < 3) ? e[c] : theta;
        d.deriv_q1(w, d.s2);
        d.deriv_q2(w, d.s3);
        const size_t n = d.s2.v.size();
        for (size_t k = 0; k < n; ++k) {
            if (!d.mask[k]) continue;
            const double gx = d.iq1x.v[k] * d.s2.v[k] + d.iq2x.v[k] * d.s3.v[k];
            const double gy = d.iq1y.v[k] * d.s2.v[k] + d.iq2y.v[k] * d.s3.v[k];
            d.s4.v[k] = mu.v[k] * gx;
            d.s5.v[k] = mu.v[k] * gy;
        }
        d.deriv_q1(d.s4, d.s2);
        d.deriv_q2(d.s4, d.s3);
        axpy_metric(d.iq1x, d.s2, d.iq2x, d.s3, out[c], 1.0, d.mask);
        d.deriv_q1(d.s5, d.s2);
        d.deriv_q2(d.s5, d.s3);
        axpy_metric(d.iq1y, d.s2, d.iq2y, d.s3, out[c], 1.0, d.mask);
    }
}

namespace {

inline void apply_bc_at(SubpatchData& d, const BcSpec& bc, int il, int jl, int axis, int dir) {
    State& e = d.e;
    switch (bc.kind) {
        case BcKind::inflow:
            for (int c = 0; c < 4; ++c) e[c](il, jl) = bc.state[c];
            break;
        case BcKind::outflow_pressure: {
            const double rho = e[0](il, jl), mx = e[1](il, jl), my = e[2](il, jl);
            e[3](il, jl) = bc.pressure / (kGamma - 1.0) + 0.5 * (mx * mx + my * my) / rho;
            break;
        }
        case BcKind::slip_wall: {
            // wall normal from the parameter gradient of the wall coordinate
            double nx, ny;
            if (axis == 0) {
                nx = d.iq1x(il, jl);
                ny = d.iq1y(il, jl);
            } else {
                nx = d.iq2x(il, jl);
                ny = d.iq2y(il, jl);
            }
            const double nn = std::hypot(nx, ny);
            nx /= nn;
            ny /= nn;
            const double rho = e[0](il, jl), mx = e[1](il, jl), my = e[2](il, jl),
                         E = e[3](il, jl);
            const double p = (kGamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / rho);
            const double mn = mx * nx + my * ny;
            const double tmx = mx - mn * nx, tmy = my - mn * ny;
            e[1](il, jl) = tmx;
            e[2](il, jl) = tmy;
            e[3](il, jl) = p / (kGamma - 1.0) + 0.5 * (tmx * tmx + tmy * tmy) / rho;
            break;
        }
        case BcKind::noslip_adiabatic: {
            const int i1 = il + (axis == 0 ? dir : 0), j1 = jl + (axis == 1 ? dir : 0);
            const int i2 = il + (axis == 0 ? 2 * dir : 0), j2 = jl + (axis == 1 ? 2 * dir : 0);
            auto theta_at = [&](int i, int j) {
                const double rho = e[0](i, j), mx = e[1](i, j), my = e[2](i, j), E = e[3](i, j);
                return (kGamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / rho) / rho;
            };
            const double th = (4.0 * theta_at(i1, j1) - theta_at(i2, j2)) / 3.0;
            const double rho = e[0](il, jl);
            e[1](il, jl) = 0.0;
            e[2](il, jl) = 0.0;
            e[3](il, jl) = rho * th / (kGamma - 1.0);
            break;
        }
        case BcKind::supersonic_outflow:
            break;
        case BcKind::zero_normal_all: {
            const int i1 = il + (axis == 0 ? dir : 0), j1 = jl + (axis == 1 ? dir : 0);
            const int i2 = il + (axis == 0 ? 2 * dir : 0), j2 = jl + (axis == 1 ? 2 * dir : 0);
            for (int c = 0; c < 4; ++c)
                e[c](il, jl) = (4.0 * e[c](i1, j1) - e[c](i2, j2)) / 3.0;
            break;
        }
    }
}

}  // namespace

void enforce_bc(SubpatchData& d, double /*t*/) {
    for (int jl = 0; jl < d.nj; ++jl) {
        const auto& li = d.rows[jl];
        if (li.n <= 0) continue;
        if (li.bc_lo) apply_bc_at(d, *li.bc_lo, li.begin, jl, 0, +1);
        if (li.bc_hi) apply_bc_at(d, *li.bc_hi, li.begin + li.n - 1, jl, 0, -1);
    }
    for (int il = 0; il < d.ni; ++il) {
        const auto& li = d.cols[il];
        if (li.n <= 0) continue;
        if (li.bc_lo) apply_bc_at(d, *li.bc_lo, il, li.begin, 1, +1);
        if (li.bc_hi) apply_bc_at(d, *li.bc_hi, il, li.begin + li.n - 1, 1, -1);
    }
}

void ssprk_stage_update(SubpatchData& d, int stage, double dt) {
    using S = Ssprk54;
    const size_t n = d.e[0].v.size();
    for (int c = 0; c < 4; ++c) {
        double* u = d.e[c].v.data();
        const double* u0 = d.e0[c].v.data();
        double* u2 = d.e2[c].v.data();
        double* u3 = d.e3[c].v.data();
        const double* r = d.rhs[c].v.data();
        double* r3 = d.rhs3[c].v.data();
        switch (stage) {
            case 0:
                for (size_t k = 0; k < n; ++k) u[k] = u0[k] + dt * S::b0 * r[k];
                break;
            case 1:
                for (size_t k = 0; k < n; ++k) {
                    u[k] = S::a20 * u0[k] + S::a21 * u[k] + dt * S::b1 * r[k];
                    u2[k] = u[k];
                }
                break;
            case 2:
                for (size_t k = 0; k < n; ++k) {
                    u[k] = S::a30 * u0[k] + S::a32 * u[k] + dt * S::b2 * r[k];
                    u3[k] = u[k];
                }
                break;
            case 3:
                for (size_t k = 0; k < n; ++k) {
                    r3[k] = r[k];
                    u[k] = S::a40 * u0[k] + S::a43 * u[k] + dt * S::b3 * r[k];
                }
                break;
            case 4:
                for (size_t k = 0; k < n; ++k)
                    u[k] = S::c2 * u2[k] + S::c3 * u3[k] + dt * S::d3 * r3[k] + S::c4 * u[k] +
                           dt * S::d4 * r[k];
                break;
        }
    }
}

double dt_bound_local(const SubpatchData& d) {
    double best = std::numeric_limits<double>::infinity();
    for (int jl = 0; jl < d.nj; ++jl)
        for (int il = 0; il < d.ni; ++il) {
            if (!d.interior(il, jl)) continue;
            const double h = d.h_min(il, jl);
            const double rate = d.speed(il, jl) / h + d.mu(il, jl) / (h * h);
            if (!(rate > 0.0) || !std::isfinite(rate))
                throw InvalidStateError("nonfinite wave speed", d.patch->index, d.id,
                                        d.sp->i0 + il, d.sp->j0 + jl, 0.0);
            best = std::min(best, 1.0 / rate);
        }
    return best;
}

}  // namespace fcs::euler
