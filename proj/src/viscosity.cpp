#include "fcs/viscosity.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "fcs/errors.hpp"
#include "fcs/fc_core.hpp"

namespace fcs::visc {

double proxy_value(double rho, double rho_u, double rho_v, double E) {
    if (!(rho > 0.0)) throw InvalidStateError("nonpositive density", -1, -1, -1, -1, 0.0);
    const double u = rho_u / rho, v = rho_v / rho;
    const double ke = 0.5 * rho * (u * u + v * v);
    const double p = (kGamma - 1.0) * (E - ke);
    if (!(p > 0.0)) throw InvalidStateError("nonpositive pressure", -1, -1, -1, -1, 0.0);
    return std::sqrt(u * u + v * v) * std::sqrt(rho / (kGamma * p));
}

double mwsb_value(double rho, double rho_u, double rho_v, double E) {
    if (!(rho > 0.0)) throw InvalidStateError("nonpositive density", -1, -1, -1, -1, 0.0);
    const double u = rho_u / rho, v = rho_v / rho;
    const double ke = 0.5 * rho * (u * u + v * v);
    const double p = (kGamma - 1.0) * (E - ke);
    if (!(p > 0.0)) throw InvalidStateError("nonpositive pressure", -1, -1, -1, -1, 0.0);
    return std::sqrt(u * u + v * v) + std::sqrt(kGamma * p / rho);
}

namespace {

constexpr char kMagic[4] = {'F', 'C', 'N', 'N'};

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

/** Affine normalization of a stencil to [-1, 1]; returns false for the
 *  zero-variance guard (class 4 bypass). */
bool normalize_stencil(const double* in, int n, double* out, double abs_floor) {
    double lo = in[0], hi = in[0];
    for (int i = 1; i < n; ++i) {
        lo = std::min(lo, in[i]);
        hi = std::max(hi, in[i]);
    }
    const double span = hi - lo;
    const double scale = std::max({std::abs(lo), std::abs(hi), 1e-100});
    if (span <= 1e-13 * scale || span <= abs_floor) return false;
    for (int i = 0; i < n; ++i) out[i] = 2.0 * (in[i] - lo) / span - 1.0;
    return true;
}

}  // namespace

MlpClassifier MlpClassifier::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("classifier weights not found: " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("bad weight file magic");
    const auto version = read_pod<uint32_t>(is);
    if (version != 1) throw ConfigError("unsupported weight file version");
    MlpClassifier m;
    m.activation = static_cast<int>(read_pod<uint32_t>(is));
    const auto nl = read_pod<uint32_t>(is);
    for (uint32_t l = 0; l < nl; ++l) {
        const int r = static_cast<int>(read_pod<uint32_t>(is));
        const int c = static_cast<int>(read_pod<uint32_t>(is));
        m.rows.push_back(r);
        m.cols.push_back(c);
        std::vector<double> w(static_cast<size_t>(r) * c), b(r);
        is.read(reinterpret_cast<char*>(w.data()), w.size() * sizeof(double));
        is.read(reinterpret_cast<char*>(b.data()), b.size() * sizeof(double));
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    if (!is) throw ConfigError("truncated weight file: " + path);
    if (m.rows.empty() || m.cols.front() != kInput || m.rows.back() != kClasses)
        throw ConfigError("weight file has wrong input/output dimensions");
    return m;
}

void MlpClassifier::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write weights: " + path);
    os.write(kMagic, 4);
    write_pod<uint32_t>(os, 1);
    write_pod<uint32_t>(os, static_cast<uint32_t>(activation));
    write_pod<uint32_t>(os, static_cast<uint32_t>(weights.size()));
    for (size_t l = 0; l < weights.size(); ++l) {
        write_pod<uint32_t>(os, static_cast<uint32_t>(rows[l]));
        write_pod<uint32_t>(os, static_cast<uint32_t>(cols[l]));
        os.write(reinterpret_cast<const char*>(weights[l].data()),
                 weights[l].size() * sizeof(double));
        os.write(reinterpret_cast<const char*>(biases[l].data()),
                 biases[l].size() * sizeof(double));
    }
}

void MlpClassifier::forward(const double* in, double* logits) const {
    double buf0[64], buf1[64];
    const double* x = in;
    double* y = buf0;
    for (size_t l = 0; l < weights.size(); ++l) {
        const int r = rows[l], c = cols[l];
        const double* W = weights[l].data();
        for (int i = 0; i < r; ++i) {
            double s = biases[l][i];
            for (int j = 0; j < c; ++j) s += W[static_cast<size_t>(i) * c + j] * x[j];
            y[i] = (l + 1 < weights.size()) ? std::tanh(s) : s;
        }
        x = y;
        y = (y == buf0) ? buf1 : buf0;
    }
    std::copy(x, x + kClasses, logits);
}

int MlpClassifier::classify_stencil(const double* in) const {
    double logits[kClasses];
    forward(in, logits);
    int best = 0;
    for (int k = 1; k < kClasses; ++k)
        if (logits[k] > logits[best]) best = k;
    return best + 1;
}

Classifier::Classifier(ClassifierConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.variant == ClassifierConfig::Variant::ann) {
        if (cfg_.weight_path.empty())
            throw ConfigError("ann classifier requires a weight file path");
        mlp_ = MlpClassifier::load(cfg_.weight_path);
    }
}

void Classifier::classify_line(const double* values, int n, uint8_t* tau) const {
    if (cfg_.variant == ClassifierConfig::Variant::ann) {
        const int w = cfg_.stencil_width;
        if (n < w) {
            std::fill(tau, tau + n, uint8_t{4});
            return;
        }
        double stencil[32];
        for (int i = 0; i < n; ++i) {
            const int start = std::clamp(i - w / 2, 0, n - w);
            if (!normalize_stencil(values + start, w, stencil, cfg_.abs_floor)) {
                tau[i] = 4;
                continue;
            }
            tau[i] = static_cast<uint8_t>(mlp_.classify_stencil(stencil));
        }
        return;
    }
    // deterministic fallback: decay exponent of the last quarter of the FC
    // coefficients over a sliding window
    const int w = std::min(cfg_.window, n);
    if (w < 12) {
        std::fill(tau, tau + n, uint8_t{4});
        return;
    }
    auto op = fc::OperatorCache::instance().get(w);
    std::vector<double> norm(w), mag;
    const int nb = op->n_ext() / 2 + 1;
    const int k_lo = (3 * (nb - 1)) / 4;
    for (int i = 0; i < n; ++i) {
        const int start = std::clamp(i - w / 2, 0, n - w);
        if (!normalize_stencil(values + start, w, norm.data(), cfg_.abs_floor)) {
            tau[i] = 4;
            continue;
        }
        op->spectrum(norm.data(), 1, mag);
        // log-log least squares fit of mag_k over the top quarter of modes
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        double tail_peak = 0.0;
        for (int k = k_lo; k < nb; ++k) {
            const double m = mag[k];
            tail_peak = std::max(tail_peak, m);
            const double lx = std::log(static_cast<double>(k));
            const double ly = std::log(std::max(m, 1e-300));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++cnt;
        }
        const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        const double s = -slope;  // decay exponent
        // magnitude guard: resolved windows have negligible tail content
        if (tail_peak < 2e-4) {
            tau[i] = 4;
        } else if (s < 1.6) {
            tau[i] = 1;
        } else if (s < 2.6) {
            tau[i] = 2;
        } else if (s < 3.6) {
            tau[i] = 3;
        } else {
            tau[i] = 4;
        }
    }
}

void Classifier::classify(const Field& proxy, const geom::Subpatch& sp, Field* tau_out) const {
    tau_out->fill(4.0);
    std::vector<double> line;
    std::vector<uint8_t> tl;
    // rows
    for (int j = sp.j0; j <= sp.j1; ++j) {
        const int ib = sp.row_begin(j);
        const int n = sp.i1 - ib + 1;
        line.resize(n);
        for (int i = 0; i < n; ++i) line[i] = proxy(ib - sp.i0 + i, j - sp.j0);
        tl.resize(n);
        classify_line(line.data(), n, tl.data());
        for (int i = 0; i < n; ++i) (*tau_out)(ib - sp.i0 + i, j - sp.j0) = tl[i];
    }
    // columns, combined by min
    for (int i = sp.i0; i <= sp.i1; ++i) {
        const int jb = sp.col_begin(i);
        const int n = sp.j1 - jb + 1;
        line.resize(n);
        for (int j = 0; j < n; ++j) line[j] = proxy(i - sp.i0, jb - sp.j0 + j);
        tl.resize(n);
        classify_line(line.data(), n, tl.data());
        for (int j = 0; j < n; ++j) {
            double& t = (*tau_out)(i - sp.i0, jb - sp.j0 + j);
            t = std::min(t, static_cast<double>(tl[j]));
        }
    }
}

void preliminary_viscosity(const Field& tau, const Field& speed, const Field& h_loc,
                           const std::vector<uint8_t>& fringe_mask, ViscosityWeights w,
                           Field* mu_hat) {
    mu_hat->fill(0.0);
    for (int j = 0; j < tau.nj; ++j)
        for (int i = 0; i < tau.ni; ++i) {
            const size_t idx = static_cast<size_t>(j) * tau.ni + i;
            if (fringe_mask[idx] != 1) continue;  // fringe and out-of-set points get 0
            const int t = static_cast<int>(tau(i, j));
            (*mu_hat)(i, j) = w.c[std::clamp(t, 1, 4) - 1] * h_loc(i, j) * speed(i, j);
        }
}

double raw_window(const geom::Patch& p, const geom::Subpatch& sp, double u, double v, int nf) {
    const double band = 2.0 * p.nv;
    const double eps = 1e-9;
    auto ramp = [&](double dist) {
        const double t = std::clamp((dist - nf) / (band - nf), 0.0, 1.0);
        const double s = std::sin(0.5 * M_PI * t);
        return s * s;
    };
    double w = 1.0;
    // q1-low side
    {
        const double lo = (v < sp.j_cut - eps) ? sp.i_cut : sp.i0;
        bool internal = true;
        if (!p.periodic1 && lo == 0 && p.sides[0].on_gamma) internal = false;
        if (p.kind == geom::PatchKind::C1 && lo == p.i_corner && v < p.j_corner - eps)
            internal = !p.wall_q1.on_gamma;
        if (internal) w *= ramp(u - lo);
    }
    // q1-high side
    {
        bool internal = true;
        if (!p.periodic1 && sp.i1 == p.np1 - 1 && p.sides[1].on_gamma) internal = false;
        if (internal) w *= ramp(sp.i1 - u);
    }
    // q2-low side
    {
        const double lo = (u < sp.i_cut - eps) ? sp.j_cut : sp.j0;
        bool internal = true;
        if (lo == 0 && p.sides[2].on_gamma) internal = false;
        if (p.kind == geom::PatchKind::C1 && lo == p.j_corner && u < p.i_corner - eps)
            internal = !p.wall_q2.on_gamma;
        if (internal) w *= ramp(v - lo);
    }
    // q2-high side
    {
        bool internal = true;
        if (sp.j1 == p.np2 - 1 && p.sides[3].on_gamma) internal = false;
        if (internal) w *= ramp(sp.j1 - v);
    }
    return w;
}

// ---------------------------------------------------------------------------
// synthetic training data & Adam trainer

namespace {

struct Rng {
    uint64_t s;
    explicit Rng(uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    uint64_t next() {  // splitmix64
        s += 0x9e3779b97f4a7c15ULL;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double sign() { return uniform() < 0.5 ? -1.0 : 1.0; }
};

}  // namespace

int synth_stencil(uint64_t rng_state, int want_class, double* out) {
    Rng rng(rng_state);
    const int n = MlpClassifier::kInput;
    const double b0 = rng.uniform(-1, 1), b1 = rng.uniform(-0.3, 0.3);
    for (int i = 0; i < n; ++i) out[i] = b0 + b1 * i / (n - 1.0);
    double noise = 0.0;
    switch (want_class) {
        case 1: {  // jump inside the stencil
            const double cut = rng.uniform(0.75, n - 1.75);
            const double jump = rng.sign() * rng.uniform(0.5, 2.0);
            for (int i = 0; i < n; ++i)
                if (i > cut) out[i] += jump;
            noise = 0.01 * std::abs(jump);
            break;
        }
        case 2: {  // kink
            const double c = rng.uniform(1.0, n - 2.0);
            const double k = rng.sign() * rng.uniform(0.5, 2.0);
            for (int i = 0; i < n; ++i) out[i] += k * std::abs(i - c) / (n - 1.0);
            noise = 0.004;
            break;
        }
        case 3: {  // oscillatory-rough: a couple of wiggles across the window
            const double w = rng.uniform(1.2, 2.9), ph = rng.uniform(0, 2 * M_PI);
            const double a = rng.uniform(0.5, 2.0);
            for (int i = 0; i < n; ++i) out[i] += a * std::cos(w * i + ph);
            if (rng.uniform() < 0.5) {
                const double ph2 = rng.uniform(0, 2 * M_PI);
                for (int i = 0; i < n; ++i) out[i] += 0.3 * a * std::cos(2 * w * i + ph2);
            }
            noise = 0.01 * a;
            break;
        }
        case 4: {  // smooth: slow trend or gentle arc
            const double w = rng.uniform(0.0, 0.55), ph = rng.uniform(0, 2 * M_PI);
            const double a = rng.uniform(0.2, 2.0);
            for (int i = 0; i < n; ++i) out[i] += a * std::cos(w * i + ph);
            noise = 0.002 * a;
            break;
        }
        default:
            throw UsageError("synth_stencil: class must be 1..4");
    }
    for (int i = 0; i < n; ++i) out[i] += noise * rng.uniform(-1, 1);
    return want_class;
}

TrainReport train_classifier(const TrainConfig& cfg, MlpClassifier* out) {
    const int n_in = MlpClassifier::kInput, n_cls = MlpClassifier::kClasses;
    const std::vector<int> sizes = {n_in, 16, 16, 16, 16, n_cls};

    Rng rng(cfg.seed);
    MlpClassifier m;
    m.activation = 1;
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int r = sizes[l + 1], c = sizes[l];
        m.rows.push_back(r);
        m.cols.push_back(c);
        std::vector<double> w(static_cast<size_t>(r) * c), b(r, 0.0);
        const double scale = std::sqrt(2.0 / c);
        for (auto& x : w) x = scale * (rng.uniform() * 2 - 1);
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }

    // dataset: normalized stencils (the zero-variance guard never fires on
    // these families) with uniform class balance
    const int total = 4 * cfg.per_class;
    std::vector<std::array<double, 7>> xs(total);
    std::vector<int> ys(total);
    {
        int idx = 0;
        double raw[7], nrm[7];
        for (int c = 1; c <= 4; ++c)
            for (int k = 0; k < cfg.per_class; ++k) {
                synth_stencil(rng.next(), c, raw);
                if (!normalize_stencil(raw, 7, nrm, 0.0)) {
                    --k;
                    continue;
                }
                std::copy(nrm, nrm + 7, xs[idx].begin());
                ys[idx] = c - 1;
                ++idx;
            }
    }
    std::vector<int> order(total);
    for (int i = 0; i < total; ++i) order[i] = i;
    for (int i = total - 1; i > 0; --i) std::swap(order[i], order[rng.next() % (i + 1)]);
    const int n_hold = static_cast<int>(total * cfg.holdout_fraction);
    const int n_train = total - n_hold;

    // Adam state
    std::vector<std::vector<double>> mw, vw, mb, vb;
    for (size_t l = 0; l < m.weights.size(); ++l) {
        mw.emplace_back(m.weights[l].size(), 0.0);
        vw.emplace_back(m.weights[l].size(), 0.0);
        mb.emplace_back(m.biases[l].size(), 0.0);
        vb.emplace_back(m.biases[l].size(), 0.0);
    }
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    long step = 0;

    const int n_layers = static_cast<int>(m.weights.size());
    std::vector<std::vector<double>> acts(n_layers + 1), deltas(n_layers);
    for (int l = 0; l <= n_layers; ++l) acts[l].resize(sizes[l]);
    for (int l = 0; l < n_layers; ++l) deltas[l].resize(sizes[l + 1]);
    std::vector<std::vector<double>> gw, gb;
    for (size_t l = 0; l < m.weights.size(); ++l) {
        gw.emplace_back(m.weights[l].size(), 0.0);
        gb.emplace_back(m.biases[l].size(), 0.0);
    }

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // reshuffle training slice
        for (int i = n_train - 1; i > 0; --i)
            std::swap(order[i], order[rng.next() % (i + 1)]);
        const double lr = cfg.lr * (epoch < cfg.epochs / 2 ? 1.0 : 0.25);
        for (int start = 0; start + cfg.batch <= n_train; start += cfg.batch) {
            for (auto& g : gw) std::fill(g.begin(), g.end(), 0.0);
            for (auto& g : gb) std::fill(g.begin(), g.end(), 0.0);
            for (int bidx = 0; bidx < cfg.batch; ++bidx) {
                const int s = order[start + bidx];
                std::copy(xs[s].begin(), xs[s].end(), acts[0].begin());
                for (int l = 0; l < n_layers; ++l) {
                    const int r = m.rows[l], c = m.cols[l];
                    for (int i = 0; i < r; ++i) {
                        double sum = m.biases[l][i];
                        for (int j = 0; j < c; ++j)
                            sum += m.weights[l][static_cast<size_t>(i) * c + j] * acts[l][j];
                        acts[l + 1][i] = (l + 1 < n_layers) ? std::tanh(sum) : sum;
                    }
                }
                // softmax cross-entropy gradient at the output
                double mx = acts[n_layers][0];
                for (int k = 1; k < n_cls; ++k) mx = std::max(mx, acts[n_layers][k]);
                double z = 0;
                for (int k = 0; k < n_cls; ++k) z += std::exp(acts[n_layers][k] - mx);
                for (int k = 0; k < n_cls; ++k) {
                    const double pk = std::exp(acts[n_layers][k] - mx) / z;
                    deltas[n_layers - 1][k] = pk - (k == ys[s] ? 1.0 : 0.0);
                }
                for (int l = n_layers - 1; l >= 0; --l) {
                    const int r = m.rows[l], c = m.cols[l];
                    for (int i = 0; i < r; ++i) {
                        const double d = deltas[l][i];
                        gb[l][i] += d;
                        for (int j = 0; j < c; ++j)
                            gw[l][static_cast<size_t>(i) * c + j] += d * acts[l][j];
                    }
                    if (l > 0) {
                        for (int j = 0; j < c; ++j) {
                            double s2 = 0;
                            for (int i = 0; i < r; ++i)
                                s2 += m.weights[l][static_cast<size_t>(i) * c + j] * deltas[l][i];
                            const double a = acts[l][j];
                            deltas[l - 1][j] = s2 * (1.0 - a * a);
                        }
                    }
                }
            }
            ++step;
            const double bc1 = 1.0 - std::pow(b1, step), bc2 = 1.0 - std::pow(b2, step);
            for (int l = 0; l < n_layers; ++l) {
                for (size_t k = 0; k < m.weights[l].size(); ++k) {
                    const double g = gw[l][k] / cfg.batch;
                    mw[l][k] = b1 * mw[l][k] + (1 - b1) * g;
                    vw[l][k] = b2 * vw[l][k] + (1 - b2) * g * g;
                    m.weights[l][k] -= lr * (mw[l][k] / bc1) / (std::sqrt(vw[l][k] / bc2) + eps);
                }
                for (size_t k = 0; k < m.biases[l].size(); ++k) {
                    const double g = gb[l][k] / cfg.batch;
                    mb[l][k] = b1 * mb[l][k] + (1 - b1) * g;
                    vb[l][k] = b2 * vb[l][k] + (1 - b2) * g * g;
                    m.biases[l][k] -= lr * (mb[l][k] / bc1) / (std::sqrt(vb[l][k] / bc2) + eps);
                }
            }
        }
    }

    TrainReport rep;
    std::array<int, 4> hits{}, counts{};
    for (int h = n_train; h < total; ++h) {
        const int s = order[h];
        const int pred = m.classify_stencil(xs[s].data()) - 1;
        counts[ys[s]]++;
        if (pred == ys[s]) hits[ys[s]]++;
    }
    int tot_hit = 0, tot_cnt = 0;
    for (int c = 0; c < 4; ++c) {
        rep.per_class_accuracy[c] = counts[c] ? static_cast<double>(hits[c]) / counts[c] : 0.0;
        tot_hit += hits[c];
        tot_cnt += counts[c];
    }
    rep.holdout_accuracy = tot_cnt ? static_cast<double>(tot_hit) / tot_cnt : 0.0;
    *out = std::move(m);
    return rep;
}

}  // namespace fcs::visc
