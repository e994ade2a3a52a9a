#include "fcs/workbench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fcs/errors.hpp"

namespace fcs::wb {

using euler::kGamma;

std::array<double, 4> shock_left_state(double M, ShockDensity convention) {
    if (!(M > 1.0)) throw UsageError("make_shock_ic: M must exceed 1");
    const double zeta = (2.0 * kGamma * M * M - kGamma + 1.0) / (kGamma + 1.0);
    const double uL = (zeta - 1.0) / (kGamma * M);
    const double ratio = (kGamma + 1.0) * M * M / ((kGamma - 1.0) * M * M + 2.0);
    const double rhoL =
        convention == ShockDensity::paper ? ratio / kGamma : 1.4 * ratio;
    return {rhoL, uL, 0.0, zeta};
}

std::array<double, 2> rankine_hugoniot_residual(double M) {
    const auto st = shock_left_state(M, ShockDensity::paper);
    // independent normal-shock relations for a shock moving at speed M into
    // (rho, u, p) = (1.4, 0, 1), a = 1
    const double p_jump = 1.0 + 2.0 * kGamma / (kGamma + 1.0) * (M * M - 1.0);
    const double u_jump = 2.0 * (M * M - 1.0) / ((kGamma + 1.0) * M);
    return {st[3] - p_jump, st[1] - u_jump};
}

run::InitialCondition make_shock_ic(double M, double x_s, ShockDensity convention) {
    const auto left = shock_left_state(M, convention);
    return [=](double x, double) {
        if (x < x_s)
            return euler::conservative(left[0], left[1], left[2], left[3]);
        return euler::conservative(1.4, 0.0, 0.0, 1.0);
    };
}

run::InitialCondition make_flow_ic(double M) {
    if (M < 0.0) throw UsageError("make_flow_ic: M must be nonnegative");
    return [=](double, double) { return euler::conservative(1.4, M, 0.0, 1.0); };
}

// ---------------------------------------------------------------------------
// exact Riemann solver (iterative pressure solve, gamma = 1.4)

namespace {

double pressure_fn(double p, const RiemannState& s, double* deriv) {
    const double a = std::sqrt(kGamma * s.p / s.rho);
    if (p > s.p) {  // shock
        const double A = 2.0 / ((kGamma + 1.0) * s.rho);
        const double B = (kGamma - 1.0) / (kGamma + 1.0) * s.p;
        const double q = std::sqrt(A / (p + B));
        if (deriv) *deriv = q * (1.0 - 0.5 * (p - s.p) / (p + B));
        return (p - s.p) * q;
    }
    // rarefaction
    const double pr = p / s.p;
    if (deriv) *deriv = std::pow(pr, -(kGamma + 1.0) / (2.0 * kGamma)) / (s.rho * a);
    return 2.0 * a / (kGamma - 1.0) * (std::pow(pr, (kGamma - 1.0) / (2.0 * kGamma)) - 1.0);
}

}  // namespace

RiemannSolution exact_riemann_1d(RiemannState left, RiemannState right) {
    RiemannSolution sol;
    sol.left = left;
    sol.right = right;
    const double du = right.u - left.u;
    // two-rarefaction initial guess, clipped away from vacuum
    const double aL = std::sqrt(kGamma * left.p / left.rho);
    const double aR = std::sqrt(kGamma * right.p / right.rho);
    const double z = (kGamma - 1.0) / (2.0 * kGamma);
    double p = std::pow((aL + aR - 0.5 * (kGamma - 1.0) * du) /
                            (aL / std::pow(left.p, z) + aR / std::pow(right.p, z)),
                        1.0 / z);
    p = std::max(p, 1e-12);
    for (int it = 0; it < 200; ++it) {
        double dL, dR;
        const double f = pressure_fn(p, left, &dL) + pressure_fn(p, right, &dR) + du;
        const double step = f / (dL + dR);
        double pn = p - step;
        if (pn <= 0) pn = 0.5 * p;
        if (std::abs(pn - p) <= 1e-12 * std::max(1.0, p)) {
            p = pn;
            break;
        }
        p = pn;
    }
    sol.p_star = p;
    sol.u_star = 0.5 * (left.u + right.u) +
                 0.5 * (pressure_fn(p, right, nullptr) - pressure_fn(p, left, nullptr));
    return sol;
}

std::array<double, 3> RiemannSolution::sample(double xi) const {
    const double aL = std::sqrt(kGamma * left.p / left.rho);
    const double aR = std::sqrt(kGamma * right.p / right.rho);
    const double g1 = (kGamma - 1.0) / (kGamma + 1.0);
    if (xi <= u_star) {  // left side
        if (p_star > left.p) {
            const double rho_s = left.rho * ((p_star / left.p + g1) / (g1 * p_star / left.p + 1.0));
            const double s = left.u - aL * std::sqrt((kGamma + 1.0) / (2.0 * kGamma) * p_star / left.p +
                                                     (kGamma - 1.0) / (2.0 * kGamma));
            if (xi < s) return {left.rho, left.u, left.p};
            return {rho_s, u_star, p_star};
        }
        const double a_star = aL * std::pow(p_star / left.p, (kGamma - 1.0) / (2.0 * kGamma));
        const double head = left.u - aL, tail = u_star - a_star;
        if (xi < head) return {left.rho, left.u, left.p};
        if (xi > tail) {
            const double rho_s = left.rho * std::pow(p_star / left.p, 1.0 / kGamma);
            return {rho_s, u_star, p_star};
        }
        const double u = 2.0 / (kGamma + 1.0) * (aL + 0.5 * (kGamma - 1.0) * left.u + xi);
        const double a = 2.0 / (kGamma + 1.0) * (aL + 0.5 * (kGamma - 1.0) * (left.u - xi));
        const double rho = left.rho * std::pow(a / aL, 2.0 / (kGamma - 1.0));
        return {rho, u, left.p * std::pow(a / aL, 2.0 * kGamma / (kGamma - 1.0))};
    }
    // right side
    if (p_star > right.p) {
        const double rho_s = right.rho * ((p_star / right.p + g1) / (g1 * p_star / right.p + 1.0));
        const double s = right.u + aR * std::sqrt((kGamma + 1.0) / (2.0 * kGamma) * p_star / right.p +
                                                  (kGamma - 1.0) / (2.0 * kGamma));
        if (xi > s) return {right.rho, right.u, right.p};
        return {rho_s, u_star, p_star};
    }
    const double a_star = aR * std::pow(p_star / right.p, (kGamma - 1.0) / (2.0 * kGamma));
    const double head = right.u + aR, tail = u_star + a_star;
    if (xi > head) return {right.rho, right.u, right.p};
    if (xi < tail) {
        const double rho_s = right.rho * std::pow(p_star / right.p, 1.0 / kGamma);
        return {rho_s, u_star, p_star};
    }
    const double u = 2.0 / (kGamma + 1.0) * (-aR + 0.5 * (kGamma - 1.0) * right.u + xi);
    const double a = 2.0 / (kGamma + 1.0) * (aR - 0.5 * (kGamma - 1.0) * (right.u - xi));
    const double rho = right.rho * std::pow(a / aR, 2.0 / (kGamma - 1.0));
    return {rho, u, right.p * std::pow(a / aR, 2.0 * kGamma / (kGamma - 1.0))};
}

// ---------------------------------------------------------------------------

double oblique_shock_angle(double M, double alpha_t_deg) {
    if (!(M > 1.0)) throw DomainError("oblique shock: supersonic Mach required");
    const double theta = 0.5 * alpha_t_deg * M_PI / 180.0;  // deflection per face
    auto deflection = [&](double beta) {
        const double s = std::sin(beta);
        const double num = M * M * s * s - 1.0;
        const double den = M * M * (kGamma + std::cos(2.0 * beta)) + 2.0;
        return std::atan(2.0 / std::tan(beta) * num / den);
    };
    const double b_lo = std::asin(1.0 / M);
    // peak of the deflection curve by ternary search
    double lo = b_lo, hi = 0.5 * M_PI;
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (deflection(m1) < deflection(m2))
            lo = m1;
        else
            hi = m2;
    }
    const double b_peak = 0.5 * (lo + hi);
    if (deflection(b_peak) < theta)
        throw DomainError("oblique shock: detached regime (deflection too large)");
    // weak-branch root in [asin(1/M), b_peak]
    double a = b_lo, b = b_peak;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (deflection(mid) < theta)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b) * 180.0 / M_PI;
}

// ---------------------------------------------------------------------------
// quadrature, rasters, writers

namespace {

template <typename F>
double window_quadrature(const run::Engine& eng, F&& value) {
    double total = 0.0;
    for (const auto& d : eng.subs()) {
        const auto& sp = *d.sp;
        const auto& p = *d.patch;
        double acc = 0.0;
        for (int j = sp.j0; j <= sp.j1; ++j) {
            const int ib = sp.row_begin(j);
            for (int i = ib; i <= sp.i1; ++i) {
                const int il = i - sp.i0, jl = j - sp.j0;
                const int jb = sp.col_begin(i);
                double w = d.w_norm(il, jl) * d.det(il, jl);
                if (i == ib || i == sp.i1) w *= 0.5;
                if (j == jb || j == sp.j1) w *= 0.5;
                acc += w * value(d, il, jl);
            }
        }
        total += acc * p.h1 * p.h2;
    }
    return total;
}

}  // namespace

double energy_integral(const run::Engine& eng) {
    return window_quadrature(eng, [](const SubpatchData& d, int il, int jl) {
        return d.e[3](il, jl);
    });
}

double area_integral(const run::Engine& eng) {
    return window_quadrature(eng, [](const SubpatchData&, int, int) { return 1.0; });
}

Raster density_gradient_raster(run::Engine& eng, int nx, int ny) {
    // |grad rho| per subpatch into scratch s1
    for (auto& d : eng.subs()) {
        d.deriv_q1(d.e[0], d.s2);
        d.deriv_q2(d.e[0], d.s3);
        for (int jl = 0; jl < d.nj; ++jl)
            for (int il = 0; il < d.ni; ++il) {
                if (!d.valid(il, jl)) {
                    d.s1(il, jl) = 0.0;
                    continue;
                }
                const double gx = d.iq1x(il, jl) * d.s2(il, jl) + d.iq2x(il, jl) * d.s3(il, jl);
                const double gy = d.iq1y(il, jl) * d.s2(il, jl) + d.iq2y(il, jl) * d.s3(il, jl);
                d.s1(il, jl) = std::hypot(gx, gy);
            }
    }
    // domain bounding box
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& d : eng.subs())
        for (int jl = 0; jl < d.nj; ++jl)
            for (int il = 0; il < d.ni; ++il) {
                if (!d.valid(il, jl)) continue;
                x0 = std::min(x0, d.x(il, jl));
                x1 = std::max(x1, d.x(il, jl));
                y0 = std::min(y0, d.y(il, jl));
                y1 = std::max(y1, d.y(il, jl));
            }
    Raster r;
    r.nx = nx;
    r.ny = ny;
    r.x0 = x0;
    r.y0 = y0;
    r.dx = (x1 - x0) / (nx - 1);
    r.dy = (y1 - y0) / (ny - 1);
    r.v.assign(static_cast<size_t>(nx) * ny, 0.0);

    const auto& dec = eng.dec();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Vec2 x{x0 + i * r.dx, y0 + j * r.dy};
            double val = 0.0;
            bool found = false;
            for (const auto& p : dec.patches) {
                Vec2 q;
                if (!p.contains(x, &q, 1e-9)) continue;
                const double uu = q.x / p.h1, vv = q.y / p.h2;
                // bilinear from the containing subpatch with the deepest window
                const geom::Subpatch* best = nullptr;
                double bu = 0, bv = 0, bw = -1.0;
                for (const auto& sp : p.subpatches) {
                    double u, v;
                    if (u = uu, v = vv; true) {
                        if (p.periodic1) {
                            while (u < sp.i0 - 1e-9) u += p.np1;
                            while (u > sp.i1 + 1e-9) u -= p.np1;
                        }
                        if (u < sp.i0 - 1e-9 || u > sp.i1 + 1e-9 || v < sp.j0 - 1e-9 ||
                            v > sp.j1 + 1e-9)
                            continue;
                        if (u < sp.i_cut - 1e-9 && v < sp.j_cut - 1e-9) continue;
                        const double w = visc::raw_window(p, sp, u, v, dec.nf) + 1e-12;
                        if (w > bw) {
                            bw = w;
                            best = &sp;
                            bu = u;
                            bv = v;
                        }
                    }
                }
                if (!best) continue;
                const auto& d = eng.subs()[best->global_id];
                int i0l = std::clamp(static_cast<int>(std::floor(bu)) - best->i0, 0, d.ni - 2);
                int j0l = std::clamp(static_cast<int>(std::floor(bv)) - best->j0, 0, d.nj - 2);
                const double fu = std::clamp(bu - best->i0 - i0l, 0.0, 1.0);
                const double fv = std::clamp(bv - best->j0 - j0l, 0.0, 1.0);
                val = (1 - fu) * (1 - fv) * d.s1(i0l, j0l) + fu * (1 - fv) * d.s1(i0l + 1, j0l) +
                      (1 - fu) * fv * d.s1(i0l, j0l + 1) + fu * fv * d.s1(i0l + 1, j0l + 1);
                found = true;
                break;
            }
            r.v[static_cast<size_t>(j) * nx + i] = found ? val : 0.0;
        }
    return r;
}

Raster schlieren(const Raster& grad, double beta) {
    Raster s = grad;
    double lo = 1e300, hi = -1e300;
    for (double g : grad.v) {
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    if (hi - lo <= 0.0) {
        std::fill(s.v.begin(), s.v.end(), 1.0);  // uniform field convention
        return s;
    }
    for (size_t k = 0; k < s.v.size(); ++k)
        s.v[k] = std::exp(-beta * (grad.v[k] - lo) / (hi - lo));
    return s;
}

void write_pgm(const Raster& r, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path);
    os << "P5\n" << r.nx << " " << r.ny << "\n255\n";
    // row 0 of the raster is the bottom of the domain; PGM goes top-down
    for (int j = r.ny - 1; j >= 0; --j)
        for (int i = 0; i < r.nx; ++i) {
            const double v = std::clamp(r.at(i, j), 0.0, 1.0);
            os.put(static_cast<char>(std::lround(255.0 * v)));
        }
}

double fit_shock_angle(const Raster& grad, double x_lo, double x_hi, double y_lo, double y_hi) {
    std::vector<std::pair<double, double>> pts;
    double gmax = 0.0;
    const int i_lo = std::max(0, static_cast<int>(std::ceil((x_lo - grad.x0) / grad.dx)));
    const int i_hi = std::min(grad.nx - 1, static_cast<int>(std::floor((x_hi - grad.x0) / grad.dx)));
    const int j_lo = std::max(0, static_cast<int>(std::ceil((y_lo - grad.y0) / grad.dy)));
    const int j_hi = std::min(grad.ny - 1, static_cast<int>(std::floor((y_hi - grad.y0) / grad.dy)));
    for (int i = i_lo; i <= i_hi; ++i)
        for (int j = j_lo; j <= j_hi; ++j) gmax = std::max(gmax, grad.at(i, j));
    for (int i = i_lo; i <= i_hi; ++i) {
        double best = 0.0;
        int bj = -1;
        for (int j = j_lo; j <= j_hi; ++j)
            if (grad.at(i, j) > best) {
                best = grad.at(i, j);
                bj = j;
            }
        if (bj < 0 || best < 0.2 * gmax) continue;
        pts.push_back({grad.x0 + i * grad.dx, grad.y0 + bj * grad.dy});
    }
    if (pts.size() < 5) throw DomainError("fit_shock_angle: fewer than 5 usable columns");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return std::atan(slope) * 180.0 / M_PI;
}

void write_subpatch_csv(const run::Engine& eng, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& d : eng.subs()) {
        std::ofstream os(dir + "/sub_" + std::to_string(d.id) + ".csv");
        os << "x,y,rho,u,v,p,mu,tau\n";
        os.precision(17);
        for (int jl = 0; jl < d.nj; ++jl)
            for (int il = 0; il < d.ni; ++il) {
                if (!d.valid(il, jl)) continue;
                const double rho = d.e[0](il, jl);
                const double u = d.e[1](il, jl) / rho, v = d.e[2](il, jl) / rho;
                const double p =
                    (kGamma - 1.0) * (d.e[3](il, jl) - 0.5 * rho * (u * u + v * v));
                os << d.x(il, jl) << ',' << d.y(il, jl) << ',' << rho << ',' << u << ',' << v
                   << ',' << p << ',' << d.mu(il, jl) << ',' << static_cast<int>(d.tau(il, jl))
                   << '\n';
            }
    }
}

void write_manifest(const run::Engine& eng, const run::Engine::RunStats& rs,
                    const std::string& problem, const std::string& dir,
                    const std::vector<std::pair<double, double>>& energy_series) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["format"] = "fcs-manifest";
    j["version"] = 1;
    j["problem"] = problem;
    j["steps"] = rs.steps;
    j["t_final"] = rs.t;
    j["wall_seconds"] = rs.wall_seconds;
    j["seconds_per_step"] = rs.seconds_per_step;
    j["n_points"] = eng.total_points();
    j["n_subpatches"] = eng.dec().total_subpatches();
    j["n_workers"] = eng.ranks().n_workers;
    if (!energy_series.empty()) {
        std::ofstream es(dir + "/energy.csv");
        es.precision(17);
        es << "t,E\n";
        for (auto& [t, E] : energy_series) es << t << ',' << E << '\n';
        j["energy_series"] = "energy.csv";
    }
    std::ofstream os(dir + "/manifest.json");
    os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

std::vector<ScalingRow> scaling_metrics(const std::vector<ScalingRecord>& recs) {
    if (recs.size() < 2) throw UsageError("scaling_metrics: need at least 2 records");
    std::vector<ScalingRow> rows;
    for (const auto& r : recs) {
        ScalingRow row;
        row.rec = r;
        row.S = r.n_workers * r.seconds * 1e6 / (4.0 * r.n_points * r.steps);
        rows.push_back(row);
    }
    auto per_step = [](const ScalingRecord& r) { return r.seconds / r.steps; };
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& ri = rows[i].rec;
        for (size_t b = 0; b < i; ++b) {
            const auto& rb = rows[b].rec;
            if (rb.n_points == ri.n_points && rb.n_workers != ri.n_workers) {
                rows[i].Es_T = per_step(rb) * rb.n_workers / (per_step(ri) * ri.n_workers);
                rows[i].Es_S = rows[b].S / rows[i].S;
                break;
            }
        }
        for (size_t b = 0; b < i; ++b) {
            const auto& rb = rows[b].rec;
            const double load_b = static_cast<double>(rb.n_points) / rb.n_workers;
            const double load_i = static_cast<double>(ri.n_points) / ri.n_workers;
            if (std::abs(load_b - load_i) <= 0.02 * load_b && rb.n_workers != ri.n_workers) {
                rows[i].Ew_T = per_step(rb) / per_step(ri);
                rows[i].Ew_S = rows[b].S / rows[i].S;
                break;
            }
        }
    }
    return rows;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
    std::ostringstream os;
    os << "N,N_C,seconds,steps,S,Ew_T,Ew_S,Es_T,Es_S\n";
    os.precision(12);
    for (const auto& r : rows) {
        os << r.rec.n_points << ',' << r.rec.n_workers << ',' << r.rec.seconds << ','
           << r.rec.steps << ',' << r.S << ',' << r.Ew_T << ',' << r.Ew_S << ',' << r.Es_T << ','
           << r.Es_S << '\n';
    }
    return os.str();
}

}  // namespace fcs::wb
