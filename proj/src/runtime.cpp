#include "fcs/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstring>
#include <mutex>
#include <thread>

#include "fcs/errors.hpp"

namespace fcs::run {

RankAssignment assign_ranks(int n_subpatches, int n_workers) {
    if (n_workers < 1) throw UsageError("assign_ranks: need at least one worker");
    RankAssignment ra;
    ra.n_workers = n_workers;
    ra.worker_of.resize(n_subpatches);
    for (int i = 0; i < n_subpatches; ++i) ra.worker_of[i] = i % n_workers;
    return ra;
}

CommPlan::Stats CommPlan::stats() const {
    Stats s;
    for (const auto& pe : solution) {
        s.copies += static_cast<long>(pe.copies.size());
        s.interps += static_cast<long>(pe.interps.size());
    }
    for (const auto& pe : visc)
        s.visc_entries += static_cast<long>(pe.copies.size() + pe.interps.size());
    return s;
}

Engine::Engine(geom::DomainDecomposition dec, BcTable bcs, InitialCondition ic, EngineConfig cfg)
    : dec_(std::move(dec)), bcs_(std::move(bcs)), ic_(std::move(ic)), cfg_(cfg) {}

Engine::~Engine() = default;

int Engine::total_points() const {
    int n = 0;
    for (const auto& d : subs_) n += d.sp->n_points();
    return n;
}

void Engine::build_subpatch_data() {
    subs_.clear();
    subs_.resize(dec_.total_subpatches());
    for (const auto& p : dec_.patches)
        for (const auto& sp : p.subpatches) {
            SubpatchData& d = subs_[sp.global_id];
            init_subpatch_data(d, p, sp, cfg_.nf, cfg_.n_cont, cfg_.filter, bcs_);
        }
}

namespace {

/** Shift fractional coordinates into a subpatch's (unwrapped) index range;
 *  false when outside or in the L cut. */
bool place_in_subpatch(const geom::Patch& p, const geom::Subpatch& sp, double u, double v,
                       double eps, double* u_out, double* v_out) {
    if (p.periodic1) {
        const double np = p.np1;
        while (u < sp.i0 - eps) u += np;
        while (u > sp.i1 + eps) u -= np;
    }
    if (u < sp.i0 - eps || u > sp.i1 + eps || v < sp.j0 - eps || v > sp.j1 + eps) return false;
    if (u < sp.i_cut - eps && v < sp.j_cut - eps) return false;
    *u_out = u;
    *v_out = v;
    return true;
}

void lagrange_weights(double t, int origin, std::array<double, 6>& w) {
    for (int a = 0; a < 6; ++a) {
        double num = 1.0, den = 1.0;
        for (int b = 0; b < 6; ++b) {
            if (a == b) continue;
            num *= t - (origin + b);
            den *= static_cast<double>(a - b);
        }
        w[a] = num / den;
    }
}

}  // namespace

void Engine::build_plan() {
    const int nsub = dec_.total_subpatches();
    plan_.solution.assign(nsub, {});
    plan_.visc.assign(nsub, {});
    plan_.interp_width = cfg_.interp_width;

    struct BBox {
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    };
    std::vector<BBox> boxes(dec_.patches.size());
    for (const auto& d : subs_)
        for (int jl = 0; jl < d.nj; ++jl)
            for (int il = 0; il < d.ni; ++il) {
                if (!d.valid(il, jl)) continue;
                BBox& b = boxes[d.patch->index];
                b.x0 = std::min(b.x0, d.x(il, jl));
                b.x1 = std::max(b.x1, d.x(il, jl));
                b.y0 = std::min(b.y0, d.y(il, jl));
                b.y1 = std::max(b.y1, d.y(il, jl));
            }
    std::vector<double> margin(dec_.patches.size(), 0.0);
    for (const auto& p : dec_.patches) {
        const auto ms = p.max_spacing();
        margin[p.index] = 2.0 * std::max(ms[0], ms[1]);
    }

    struct Contributor {
        bool copy = false;
        int sub = -1;
        int src_idx = 0;
        double u = 0, v = 0;  // donor-local (unwrapped) lattice coordinates
        double w_raw = 0.0;
    };

    // 6x6 all-interior stencil near (u, v) in the donor; tolerates the
    // evaluation point sitting at most `slack` cells outside the block
    auto build_interp = [&](const Contributor& c, double slack, InterpEntry* ie) -> bool {
        const SubpatchData& ds = subs_[c.sub];
        const geom::Subpatch& sp2 = *ds.sp;
        const double tu = c.u - sp2.i0, tv = c.v - sp2.j0;
        const int bi = static_cast<int>(std::floor(tu)) - 2;
        const int bj = static_cast<int>(std::floor(tv)) - 2;
        int best_si = -1, best_sj = -1;
        double best_pen = 1e300;
        for (int dj = -4; dj <= 4; ++dj)
            for (int di = -4; di <= 4; ++di) {
                const int si = bi + di, sj = bj + dj;
                if (si < 0 || si + 5 >= ds.ni || sj < 0 || sj + 5 >= ds.nj) continue;
                const double out_u = std::max({0.0, si - tu, tu - (si + 5)});
                const double out_v = std::max({0.0, sj - tv, tv - (sj + 5)});
                if (out_u > slack || out_v > slack) continue;
                bool ok = true;
                for (int b = 0; b < 6 && ok; ++b)
                    for (int a = 0; a < 6 && ok; ++a)
                        ok = ds.mask[static_cast<size_t>(sj + b) * ds.ni + si + a] == 1;
                if (!ok) continue;
                const double pen = out_u + out_v + 0.01 * (std::abs(di) + std::abs(dj));
                if (pen < best_pen) {
                    best_pen = pen;
                    best_si = si;
                    best_sj = sj;
                }
            }
        if (best_si < 0) return false;
        ie->src_sub = c.sub;
        ie->si0 = best_si;
        ie->sj0 = best_sj;
        lagrange_weights(tu, best_si, ie->wx);
        lagrange_weights(tv, best_sj, ie->wy);
        return true;
    };

    std::vector<Contributor> contrib;
    for (auto& d : subs_) {
        const geom::Patch& p = *d.patch;
        const geom::Subpatch& sp = *d.sp;
        auto& sol = plan_.solution[d.id];
        auto& vis = plan_.visc[d.id];

        for (int j = sp.j0; j <= sp.j1; ++j)
            for (int i = sp.row_begin(j); i <= sp.i1; ++i) {
                const int il = i - sp.i0, jl = j - sp.j0;
                const int dst = jl * d.ni + il;
                const Vec2 x{d.x(il, jl), d.y(il, jl)};

                contrib.clear();
                const double w_own = visc::raw_window(p, sp, i, j, cfg_.nf);

                for (const auto& sp2 : p.subpatches) {
                    if (sp2.global_id == sp.global_id) continue;
                    double u, v;
                    if (!place_in_subpatch(p, sp2, i, j, 1e-9, &u, &v)) continue;
                    const int i2 = static_cast<int>(std::lround(u));
                    const int j2 = static_cast<int>(std::lround(v));
                    Contributor c;
                    c.copy = true;
                    c.sub = sp2.global_id;
                    c.src_idx = (j2 - sp2.j0) * subs_[sp2.global_id].ni + (i2 - sp2.i0);
                    c.u = u;
                    c.v = v;
                    c.w_raw = visc::raw_window(p, sp2, u, v, cfg_.nf);
                    contrib.push_back(c);
                }
                for (const auto& p2 : dec_.patches) {
                    if (p2.index == p.index) continue;
                    const BBox& bb = boxes[p2.index];
                    const double m = margin[p2.index];
                    if (x.x < bb.x0 - m || x.x > bb.x1 + m || x.y < bb.y0 - m || x.y > bb.y1 + m)
                        continue;
                    Vec2 q;
                    if (!p2.contains(x, &q, 1e-9)) continue;
                    const double uu = q.x / p2.h1, vv = q.y / p2.h2;
                    for (const auto& sp2 : p2.subpatches) {
                        double u, v;
                        if (!place_in_subpatch(p2, sp2, uu, vv, 1e-7, &u, &v)) continue;
                        Contributor c;
                        c.sub = sp2.global_id;
                        c.u = u;
                        c.v = v;
                        c.w_raw = visc::raw_window(p2, sp2, u, v, cfg_.nf);
                        contrib.push_back(c);
                    }
                }

                double denom = w_own;
                for (const auto& c : contrib) denom += c.w_raw;
                if (!(denom > 1e-14))
                    throw DecompositionError("window partition vanishes at (" +
                                             std::to_string(x.x) + ", " + std::to_string(x.y) +
                                             "), subpatch " + std::to_string(d.id));
                d.w_norm(il, jl) = w_own / denom;

                for (const auto& c : contrib) {
                    const double w = c.w_raw / denom;
                    if (w <= 1e-15) continue;
                    if (c.copy) {
                        vis.copies.push_back({dst, c.sub, c.src_idx, w});
                    } else {
                        InterpEntry ie;
                        ie.dst = dst;
                        ie.w = w;
                        if (!build_interp(c, 2.5, &ie))
                            throw DecompositionError(
                                "no admissible viscosity stencil in donor subpatch " +
                                std::to_string(c.sub) + " for (" + std::to_string(x.x) + ", " +
                                std::to_string(x.y) + ")");
                        vis.interps.push_back(ie);
                    }
                }

                if (d.mask[static_cast<size_t>(dst)] == 2) {
                    const Contributor* best = nullptr;
                    for (const auto& c : contrib) {
                        if (!c.copy) continue;
                        if (subs_[c.sub].mask[static_cast<size_t>(c.src_idx)] != 1) continue;
                        if (!best || c.w_raw > best->w_raw) best = &c;
                    }
                    if (best) {
                        sol.copies.push_back({dst, best->sub, best->src_idx, 1.0});
                    } else {
                        std::vector<const Contributor*> cand;
                        for (const auto& c : contrib)
                            if (!c.copy) cand.push_back(&c);
                        std::sort(cand.begin(), cand.end(),
                                  [](auto* a, auto* b) { return a->w_raw > b->w_raw; });
                        bool done = false;
                        for (auto* c : cand) {
                            InterpEntry ie;
                            ie.dst = dst;
                            ie.w = 1.0;
                            if (build_interp(*c, 0.5, &ie)) {
                                sol.interps.push_back(ie);
                                done = true;
                                break;
                            }
                        }
                        if (!done)
                            throw DecompositionError("orphan fringe point at (" +
                                                     std::to_string(x.x) + ", " +
                                                     std::to_string(x.y) + "), subpatch " +
                                                     std::to_string(d.id));
                    }
                }
            }
    }
}

void Engine::apply_ic() {
    for (auto& d : subs_) {
        for (int jl = 0; jl < d.nj; ++jl)
            for (int il = 0; il < d.ni; ++il) {
                if (!d.valid(il, jl)) continue;
                const auto st = ic_(d.x(il, jl), d.y(il, jl));
                for (int c = 0; c < 4; ++c) d.e[c](il, jl) = st[c];
            }
        euler::enforce_bc(d, 0.0);
    }
    exchange_solution();
}

void Engine::exchange_solution() {
    for (auto& d : subs_) step_phase(-1, 6, d.id);  // phase 6 on one subpatch
}

void Engine::init() {
    for (const auto& p : dec_.patches)
        if (p.nv <= cfg_.nf)
            throw ConfigError("window construction requires nv > nf (got nv=" +
                              std::to_string(p.nv) + ", nf=" + std::to_string(cfg_.nf) + ")");
    dec_.assign_global_ids();
    if (cfg_.validate_overlap) {
        auto rep = geom::check_min_overlap(dec_);
        if (!rep.pass) throw DecompositionError("minimum-overlap check failed:\n" + rep.summary());
    }
    classifier_ = std::make_unique<visc::Classifier>(cfg_.classifier);
    build_subpatch_data();
    build_plan();
    apply_ic();
    ranks_ = assign_ranks(dec_.total_subpatches(), cfg_.workers);
    dt_local_.assign(subs_.size(), 0.0);
    initialized_ = true;
}

// Phase bodies. phase: 0 = preliminary viscosity, 1 = blend, 2 = filter/smear
// + dt_local, 3 = RHS + stage update + BC (stage in [0,5)), 6 = fringe
// exchange of the solution. worker == -1 runs a single subpatch (serial hook,
// `stage` carries the subpatch id).
void Engine::step_phase(int worker, int phase, int stage) {
    auto for_own = [&](auto&& body) {
        if (worker < 0) {
            body(subs_[stage]);
            return;
        }
        for (auto& d : subs_)
            if (ranks_.worker_of[d.id] == worker) body(d);
    };

    switch (phase) {
        case 0:
            for_own([&](SubpatchData& d) {
                Field& proxy = d.s1;
                for (int jl = 0; jl < d.nj; ++jl)
                    for (int il = 0; il < d.ni; ++il) {
                        if (!d.valid(il, jl)) {
                            proxy(il, jl) = 0.0;
                            d.speed(il, jl) = 1.0;
                            continue;
                        }
                        try {
                            proxy(il, jl) = visc::proxy_value(d.e[0](il, jl), d.e[1](il, jl),
                                                              d.e[2](il, jl), d.e[3](il, jl));
                            d.speed(il, jl) = visc::mwsb_value(d.e[0](il, jl), d.e[1](il, jl),
                                                               d.e[2](il, jl), d.e[3](il, jl));
                        } catch (const InvalidStateError& ex) {
                            throw InvalidStateError(ex.what(), d.patch->index, d.id,
                                                    d.sp->i0 + il, d.sp->j0 + jl, t_);
                        }
                    }
                classifier_->classify(proxy, *d.sp, &d.tau);
                visc::preliminary_viscosity(d.tau, d.speed, d.h_max, d.mask, cfg_.visc_weights,
                                            &d.mu_hat);
            });
            break;
        case 1:
            for_own([&](SubpatchData& d) {
                const auto& pe = plan_.visc[d.id];
                for (size_t k = 0; k < d.mu.v.size(); ++k)
                    d.mu.v[k] = d.w_norm.v[k] * d.mu_hat.v[k];
                for (const auto& ce : pe.copies)
                    d.mu.v[ce.dst] += ce.w * subs_[ce.src_sub].mu_hat.v[ce.src];
                for (const auto& ie : pe.interps) {
                    const auto& src = subs_[ie.src_sub].mu_hat;
                    double val = 0.0;
                    for (int b = 0; b < 6; ++b) {
                        const double* row = src.row(ie.sj0 + b) + ie.si0;
                        double s = 0.0;
                        for (int a = 0; a < 6; ++a) s += ie.wx[a] * row[a];
                        val += ie.wy[b] * s;
                    }
                    d.mu.v[ie.dst] += ie.w * val;
                }
                for (auto& m : d.mu.v) m = std::max(m, 0.0);
            });
            break;
        case 2:
            for_own([&](SubpatchData& d) {
                // theta before touching the state
                Field& theta = d.s6;
                for (int jl = 0; jl < d.nj; ++jl)
                    for (int il = 0; il < d.ni; ++il) {
                        if (!d.valid(il, jl)) continue;
                        const double rho = d.e[0](il, jl), mx = d.e[1](il, jl),
                                     my = d.e[2](il, jl), E = d.e[3](il, jl);
                        theta(il, jl) =
                            (euler::kGamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / rho) / rho;
                    }
                if (step_ == 0) {
                    // Localized discontinuity smearing of the initial data.
                    // The Mach proxy is blind to purely thermodynamic jumps
                    // (zero initial velocity), so the t=0 mask also classifies
                    // the density field.
                    Field& tau_rho = d.s4;
                    classifier_->classify(d.e[0], *d.sp, &tau_rho);
                    Field& m01 = d.s5;
                    m01.fill(0.0);
                    const int rad = cfg_.smear_radius;
                    for (int jl = 0; jl < d.nj; ++jl)
                        for (int il = 0; il < d.ni; ++il) {
                            if (!d.valid(il, jl)) continue;
                            if (d.tau(il, jl) > 2.0 && tau_rho(il, jl) > 2.0) continue;
                            for (int b = std::max(0, jl - rad); b <= std::min(d.nj - 1, jl + rad); ++b)
                                for (int a = std::max(0, il - rad); a <= std::min(d.ni - 1, il + rad); ++a)
                                    m01(a, b) = 1.0;
                        }
                    d.smear_field(d.e[0], m01);
                    d.smear_field(d.e[1], m01);
                    d.smear_field(d.e[2], m01);
                    d.smear_field(theta, m01);
                } else {
                    d.filter_field(d.e[0]);
                    d.filter_field(d.e[1]);
                    d.filter_field(d.e[2]);
                    d.filter_field(theta);
                }
                for (int jl = 0; jl < d.nj; ++jl)
                    for (int il = 0; il < d.ni; ++il) {
                        if (!d.valid(il, jl)) continue;
                        const double rho = d.e[0](il, jl), mx = d.e[1](il, jl),
                                     my = d.e[2](il, jl);
                        d.e[3](il, jl) = rho * theta(il, jl) / (euler::kGamma - 1.0) +
                                         0.5 * (mx * mx + my * my) / rho;
                    }
                euler::enforce_bc(d, t_);
                for (int c = 0; c < 4; ++c) d.e0[c].v = d.e[c].v;
                dt_local_[d.id] = euler::dt_bound_local(d);
            });
            break;
        case 3:
            for_own([&](SubpatchData& d) {
                euler::euler_rhs(d, d.e, d.mu, d.rhs, t_);
                euler::ssprk_stage_update(d, stage, dt_);
                euler::enforce_bc(d, t_);
            });
            break;
        case 6:
            for_own([&](SubpatchData& d) {
                const auto& pe = plan_.solution[d.id];
                for (const auto& ce : pe.copies) {
                    const auto& src = subs_[ce.src_sub];
                    for (int c = 0; c < 4; ++c) d.e[c].v[ce.dst] = src.e[c].v[ce.src];
                }
                for (const auto& ie : pe.interps) {
                    const auto& src = subs_[ie.src_sub];
                    for (int c = 0; c < 4; ++c) {
                        double val = 0.0;
                        for (int b = 0; b < 6; ++b) {
                            const double* row = src.e[c].row(ie.sj0 + b) + ie.si0;
                            double s = 0.0;
                            for (int a = 0; a < 6; ++a) s += ie.wx[a] * row[a];
                            val += ie.wy[b] * s;
                        }
                        d.e[c].v[ie.dst] = val;
                    }
                }
            });
            break;
        default:
            throw UsageError("bad phase");
    }
}

Engine::RunStats Engine::run(std::function<void(long, double)> on_output) {
    if (!initialized_) init();
    const int nw = cfg_.workers;
    std::barrier bar(nw);
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::atomic<bool> done{false};

    const auto t_start = std::chrono::steady_clock::now();

    auto guarded = [&](int w, int phase, int stage) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
            step_phase(w, phase, stage);
        } catch (...) {
            std::scoped_lock lock(err_mu);
            if (!first_error) first_error = std::current_exception();
            failed.store(true);
        }
    };

    auto worker_fn = [&](int w) {
        for (;;) {
            bar.arrive_and_wait();
            if (done.load() || failed.load()) break;
            guarded(w, 0, 0);  // preliminary viscosity
            bar.arrive_and_wait();
            guarded(w, 1, 0);  // blend
            bar.arrive_and_wait();
            guarded(w, 2, 0);  // smear/filter + registers + dt_local
            bar.arrive_and_wait();
            if (w == 0 && !failed.load()) {
                double b = std::numeric_limits<double>::infinity();
                for (size_t k = 0; k < dt_local_.size(); ++k) b = std::min(b, dt_local_[k]);
                dt_ = cfg_.cfl * b;
                if (t_ + dt_ > cfg_.T) dt_ = cfg_.T - t_;
            }
            bar.arrive_and_wait();
            for (int stage = 0; stage < 5; ++stage) {
                guarded(w, 3, stage);
                bar.arrive_and_wait();
                guarded(w, 6, 0);
                bar.arrive_and_wait();
            }
            if (w == 0 && !failed.load()) {
                t_ += dt_;
                ++step_;
                if (on_output && cfg_.output_every > 0 && step_ % cfg_.output_every == 0)
                    on_output(step_, t_);
                if (t_ >= cfg_.T - 1e-15 || step_ >= cfg_.max_steps) done.store(true);
            }
            bar.arrive_and_wait();
        }
    };

    std::vector<std::thread> pool;
    for (int w = 1; w < nw; ++w) pool.emplace_back(worker_fn, w);
    worker_fn(0);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);

    const auto t_end = std::chrono::steady_clock::now();
    RunStats rs;
    rs.steps = step_;
    rs.t = t_;
    rs.wall_seconds = std::chrono::duration<double>(t_end - t_start).count();
    rs.seconds_per_step = step_ > 0 ? rs.wall_seconds / step_ : 0.0;
    if (on_output) on_output(step_, t_);
    return rs;
}

}  // namespace fcs::run
