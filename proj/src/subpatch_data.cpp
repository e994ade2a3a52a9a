#include "fcs/subpatch_data.hpp"

#include <cmath>

#include "fcs/errors.hpp"

namespace fcs {

void SubpatchData::deriv_q1(const Field& f, Field& out) const {
    for (int jl = 0; jl < nj; ++jl) {
        const auto& li = rows[jl];
        if (li.n <= 0) continue;
        li.op->derivative(f.row(jl) + li.begin, 1, out.row(jl) + li.begin, 1, 1);
        double* o = out.row(jl) + li.begin;
        for (int i = 0; i < li.n; ++i) o[i] *= li.inv_len;
    }
}

void SubpatchData::deriv_q2(const Field& f, Field& out) const {
    for (int il = 0; il < ni; ++il) {
        const auto& li = cols[il];
        if (li.n <= 0) continue;
        const double* in = f.v.data() + static_cast<size_t>(li.begin) * ni + il;
        double* o = out.v.data() + static_cast<size_t>(li.begin) * ni + il;
        li.op->derivative(in, ni, o, ni, 1);
        for (int j = 0; j < li.n; ++j) o[static_cast<size_t>(j) * ni] *= li.inv_len;
    }
}

void SubpatchData::filter_field(Field& f) const {
    for (int jl = 0; jl < nj; ++jl) {
        const auto& li = rows[jl];
        if (li.n <= 0) continue;
        li.op->filter(f.row(jl) + li.begin, 1, f.row(jl) + li.begin, 1);
    }
    for (int il = 0; il < ni; ++il) {
        const auto& li = cols[il];
        if (li.n <= 0) continue;
        double* p = f.v.data() + static_cast<size_t>(li.begin) * ni + il;
        li.op->filter(p, ni, p, ni);
    }
}

void SubpatchData::smear_field(Field& f, const Field& mask01) const {
    std::vector<double> strong;
    for (int jl = 0; jl < nj; ++jl) {
        const auto& li = rows[jl];
        if (li.n <= 0) continue;
        strong.resize(li.n);
        double* p = f.row(jl) + li.begin;
        li.op->strong_filter(p, 1, strong.data(), 1);
        const double* m = mask01.row(jl) + li.begin;
        for (int i = 0; i < li.n; ++i) p[i] = m[i] * strong[i] + (1.0 - m[i]) * p[i];
    }
    for (int il = 0; il < ni; ++il) {
        const auto& li = cols[il];
        if (li.n <= 0) continue;
        strong.resize(li.n);
        double* p = f.v.data() + static_cast<size_t>(li.begin) * ni + il;
        li.op->strong_filter(p, ni, strong.data(), 1);
        for (int j = 0; j < li.n; ++j) {
            const double m = mask01(il, li.begin + j);
            double& v = p[static_cast<size_t>(j) * ni];
            v = m * strong[j] + (1.0 - m) * v;
        }
    }
}

void init_subpatch_data(SubpatchData& d, const geom::Patch& p, const geom::Subpatch& sp,
                        int nf, int n_cont, fc::FilterSpec filter, const BcTable& bcs) {
    d.patch = &p;
    d.sp = &sp;
    d.id = sp.global_id;
    d.ni = sp.ni();
    d.nj = sp.nj();
    const int ni = d.ni, nj = d.nj;

    d.mask = geom::fringe_mask(p, sp, nf);

    auto alloc = [&](Field& f) { f = Field(ni, nj); };
    alloc(d.x);
    alloc(d.y);
    alloc(d.iq1x);
    alloc(d.iq2x);
    alloc(d.iq1y);
    alloc(d.iq2y);
    alloc(d.det);
    alloc(d.h_min);
    alloc(d.h_max);
    alloc(d.w_norm);
    for (auto* st : {&d.e, &d.e0, &d.e2, &d.e3, &d.rhs, &d.rhs3})
        for (auto& f : *st) alloc(f);
    for (auto* f : {&d.mu_hat, &d.mu, &d.tau, &d.speed, &d.s1, &d.s2, &d.s3, &d.s4, &d.s5, &d.s6})
        alloc(*f);

    for (int j = sp.j0; j <= sp.j1; ++j)
        for (int i = sp.i0; i <= sp.i1; ++i) {
            if (!sp.valid(i, j)) continue;
            const int il = i - sp.i0, jl = j - sp.j0;
            const double q1 = i * p.h1, q2 = j * p.h2;
            const Vec2 xp = (*p.map)(q1, q2);
            d.x(il, jl) = xp.x;
            d.y(il, jl) = xp.y;
            const Mat2 J = p.map->jacobian(q1, q2);
            const Mat2 Ji = J.inverse();
            d.iq1x(il, jl) = Ji.a;
            d.iq2x(il, jl) = Ji.c;
            d.iq1y(il, jl) = Ji.b;
            d.iq2y(il, jl) = Ji.d;
            d.det(il, jl) = std::abs(J.det());
            // local physical spacing: max forward/backward difference per direction
            const Vec2 x1a = (*p.map)(q1 + p.h1, q2), x1b = (*p.map)(q1 - p.h1, q2);
            const Vec2 x2a = (*p.map)(q1, q2 + p.h2), x2b = (*p.map)(q1, q2 - p.h2);
            const double h1p = std::max((x1a - xp).norm(), (xp - x1b).norm());
            const double h2p = std::max((x2a - xp).norm(), (xp - x2b).norm());
            d.h_min(il, jl) = std::min(h1p, h2p);
            d.h_max(il, jl) = std::max(h1p, h2p);
        }

    auto resolve_bc = [&](const geom::EndInfo& e) -> const BcSpec* {
        if (e.internal || !e.side) return nullptr;
        auto it = bcs.find(e.side->tag);
        if (it == bcs.end())
            throw ConfigError("no boundary condition for side tag '" + e.side->tag + "'");
        return &it->second;
    };

    d.rows.resize(nj);
    for (int j = sp.j0; j <= sp.j1; ++j) {
        auto& li = d.rows[j - sp.j0];
        const int ib = sp.row_begin(j);
        li.begin = ib - sp.i0;
        li.n = sp.i1 - ib + 1;
        li.inv_len = 1.0 / ((li.n - 1) * p.h1);
        li.op = fc::OperatorCache::instance().get(li.n, n_cont, filter);
        li.lo = geom::classify_end(p, sp, 0, j, false);
        li.hi = geom::classify_end(p, sp, 0, j, true);
        li.bc_lo = resolve_bc(li.lo);
        li.bc_hi = resolve_bc(li.hi);
    }
    d.cols.resize(ni);
    for (int i = sp.i0; i <= sp.i1; ++i) {
        auto& li = d.cols[i - sp.i0];
        const int jb = sp.col_begin(i);
        li.begin = jb - sp.j0;
        li.n = sp.j1 - jb + 1;
        li.inv_len = 1.0 / ((li.n - 1) * p.h2);
        li.op = fc::OperatorCache::instance().get(li.n, n_cont, filter);
        li.lo = geom::classify_end(p, sp, 1, i, false);
        li.hi = geom::classify_end(p, sp, 1, i, true);
        li.bc_lo = resolve_bc(li.lo);
        li.bc_hi = resolve_bc(li.hi);
    }
}

}  // namespace fcs
