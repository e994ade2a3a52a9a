#include "fcs/fc_core.hpp"

#include <fftw3.h>

#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <tuple>

#include "fcs/errors.hpp"

namespace fcs::fc {

namespace {

std::mutex fftw_plan_mutex;  // FFTW plan creation is not thread-safe

// The trig least-squares system is severely ill-conditioned (sigma ratio
// ~1e20), so the one-time solve runs at 120 decimal digits.
using MP = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<120>>;

// Blend-to-zero construction constants. The trig fit matches the Gram
// parabola on [0, d] and zero on [d+n_cont, d+n_cont+zero_w-1], oversampled,
// with basis period Lam = 2*(d + n_cont + zero_w) and modes up to k_modes.
constexpr int kOversample = 10;
constexpr int kZeroWidth = 3;
constexpr int kModes = 15;

// Gaussian elimination with partial pivoting; a is n x n row-major, b is n.
void solve_mp(std::vector<MP>& a, std::vector<MP>& b, int n) {
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int r = k + 1; r < n; ++r)
            if (abs(a[r * n + k]) > abs(a[piv * n + k])) piv = r;
        if (piv != k) {
            for (int c = k; c < n; ++c) std::swap(a[k * n + c], a[piv * n + c]);
            std::swap(b[k], b[piv]);
        }
        if (a[k * n + k] == 0) throw ConfigError("blend matrix solve: singular system");
        for (int r = k + 1; r < n; ++r) {
            const MP f = a[r * n + k] / a[k * n + k];
            for (int c = k; c < n; ++c) a[r * n + c] -= f * a[k * n + c];
            b[r] -= f * b[k];
        }
    }
    for (int k = n - 1; k >= 0; --k) {
        MP s = b[k];
        for (int c = k + 1; c < n; ++c) s -= a[k * n + c] * b[c];
        b[k] = s / a[k * n + k];
    }
}

std::vector<double> build_blend_matrix(int n_cont) {
    const int d = FcOperator::degree;
    const MP lam = MP(2) * (d + n_cont + kZeroWidth);
    const MP twopi = 2 * boost::math::constants::pi<MP>();
    const int n_match = kOversample * d + 1;
    const int n_zero = kOversample * (kZeroWidth - 1) + 1;
    const int rows = n_match + n_zero;
    const int cols = 2 * kModes + 1;

    std::vector<MP> zs(rows);
    for (int i = 0; i < n_match; ++i) zs[i] = MP(d) * i / (n_match - 1);
    for (int i = 0; i < n_zero; ++i)
        zs[n_match + i] = MP(d + n_cont) + MP(kZeroWidth - 1) * i / (n_zero - 1);

    std::vector<MP> B(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        B[r * cols] = 1;
        for (int m = 1; m <= kModes; ++m) {
            const MP arg = twopi * m * zs[r] / lam;
            B[r * cols + 2 * m - 1] = cos(arg);
            B[r * cols + 2 * m] = sin(arg);
        }
    }
    // normal equations G = B^T B (solved once per Gram basis polynomial)
    std::vector<MP> G0(static_cast<size_t>(cols) * cols);
    for (int i = 0; i < cols; ++i)
        for (int j = i; j < cols; ++j) {
            MP s = 0;
            for (int r = 0; r < rows; ++r) s += B[r * cols + i] * B[r * cols + j];
            G0[i * cols + j] = s;
            G0[j * cols + i] = s;
        }

    // Orthonormal Gram basis on the points {0, 1, 2}: values pv(k, i) and
    // monomial coefficients coef(m, k), via Gram-Schmidt on 1, z, z^2.
    double pv[3][3], coef[3][3];
    {
        double q[3][3] = {{1, 1, 1}, {0, 1, 2}, {0, 1, 4}};  // rows: 1, z, z^2 at points
        double cf[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        for (int k = 0; k < 3; ++k) {
            for (int p = 0; p < k; ++p) {
                double dot = 0;
                for (int i = 0; i < 3; ++i) dot += q[p][i] * q[k][i];
                for (int i = 0; i < 3; ++i) q[k][i] -= dot * q[p][i];
                for (int m = 0; m < 3; ++m) cf[k][m] -= dot * cf[p][m];
            }
            double nrm = 0;
            for (int i = 0; i < 3; ++i) nrm += q[k][i] * q[k][i];
            nrm = std::sqrt(nrm);
            for (int i = 0; i < 3; ++i) q[k][i] /= nrm;
            for (int m = 0; m < 3; ++m) cf[k][m] /= nrm;
        }
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i) {
                pv[k][i] = q[k][i];
                coef[k][i] = cf[k][i];
            }
    }

    const int n_gap = n_cont - 1;
    std::vector<double> A(static_cast<size_t>(n_gap) * (d + 1), 0.0);
    for (int k = 0; k <= d; ++k) {
        std::vector<MP> rhs(rows);
        for (int r = 0; r < n_match; ++r) {
            const MP z = zs[r];
            rhs[r] = MP(coef[k][0]) + MP(coef[k][1]) * z + MP(coef[k][2]) * z * z;
        }
        std::vector<MP> btr(cols);
        for (int i = 0; i < cols; ++i) {
            MP s = 0;
            for (int r = 0; r < rows; ++r) s += B[r * cols + i] * rhs[r];
            btr[i] = s;
        }
        std::vector<MP> G = G0;
        solve_mp(G, btr, cols);
        // residual guards against precision loss in the normal equations
        MP resid = 0;
        for (int r = 0; r < rows; ++r) {
            MP v = 0;
            for (int i = 0; i < cols; ++i) v += B[r * cols + i] * btr[i];
            const MP dv = abs(v - rhs[r]);
            if (dv > resid) resid = dv;
        }
        if (resid > 1e-13) throw ConfigError("blend matrix fit residual too large");
        for (int j = 0; j < n_gap; ++j) {
            const MP z = MP(d + 1 + j);
            MP val = btr[0];
            for (int m = 1; m <= kModes; ++m) {
                const MP arg = twopi * m * z / lam;
                val += btr[2 * m - 1] * cos(arg) + btr[2 * m] * sin(arg);
            }
            for (int i = 0; i <= d; ++i)
                A[static_cast<size_t>(j) * (d + 1) + i] +=
                    static_cast<double>(val) * pv[k][i];
        }
    }
    return A;
}

}  // namespace

const std::vector<double>& FcOperator::blend_matrix(int n_cont) {
    static std::mutex mu;
    static std::map<int, std::vector<double>> cache;
    std::scoped_lock lock(mu);
    auto it = cache.find(n_cont);
    if (it == cache.end()) it = cache.emplace(n_cont, build_blend_matrix(n_cont)).first;
    return it->second;
}

struct FcOperator::Impl {
    fftw_plan fwd = nullptr, bwd = nullptr;
    int n_ext = 0;

    // Per-thread scratch sized for the largest n_ext requested so far.
    struct Scratch {
        std::vector<double> ext;
        std::vector<std::complex<double>> spec;
    };
    static Scratch& scratch(int n_ext) {
        thread_local Scratch s;
        if (static_cast<int>(s.ext.size()) < n_ext) {
            s.ext.resize(n_ext);
            s.spec.resize(n_ext / 2 + 1);
        }
        return s;
    }

    ~Impl() {
        std::scoped_lock lock(fftw_plan_mutex);
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

FcOperator::FcOperator(int n_points, int n_cont, FilterSpec filter)
    : n_(n_points), n_cont_(n_cont) {
    if (n_points < 10) throw ConfigError("FcOperator: n_points must be >= 10");
    if (n_cont < 4) throw ConfigError("FcOperator: n_cont must be >= 4");
    n_ext_ = n_ + n_cont_ - 1;
    period_ = static_cast<double>(n_ext_) / (n_ - 1);  // in units of the line span
    n_modes_ = n_ext_ / 2 + 1;
    blend_ = &blend_matrix(n_cont_);

    const int kmax = n_ext_ / 2;
    filter_profile_.resize(n_modes_);
    smear_profile_.resize(n_modes_);
    for (int k = 0; k < n_modes_; ++k) {
        const double r = kmax > 0 ? static_cast<double>(k) / kmax : 0.0;
        filter_profile_[k] = std::exp(-filter.alpha * std::pow(r, 2.0 * filter.p));
        smear_profile_[k] = std::exp(-filter.alpha * std::pow(r, 2.0 * filter.p_smear));
    }

    impl_ = std::make_unique<Impl>();
    impl_->n_ext = n_ext_;
    auto& s = Impl::scratch(n_ext_);
    std::scoped_lock lock(fftw_plan_mutex);
    impl_->fwd = fftw_plan_dft_r2c_1d(n_ext_, s.ext.data(),
                                      reinterpret_cast<fftw_complex*>(s.spec.data()),
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    impl_->bwd = fftw_plan_dft_c2r_1d(n_ext_, reinterpret_cast<fftw_complex*>(s.spec.data()),
                                      s.ext.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
}

FcOperator::~FcOperator() = default;

void FcOperator::continuation(const double* in, double* gap_out) const {
    const int d = degree;
    const auto& A = *blend_;
    const int n_gap = n_cont_ - 1;
    const double* right = in + (n_ - 1 - d);
    for (int j = 0; j < n_gap; ++j) {
        double v = 0.0;
        for (int i = 0; i <= d; ++i) v += A[static_cast<size_t>(j) * (d + 1) + i] * right[i];
        gap_out[j] = v;
    }
    // left blend: reflected matrix acting on the reversed first d+1 samples
    for (int j = 0; j < n_gap; ++j) {
        double v = 0.0;
        const int jr = n_gap - 1 - j;
        for (int i = 0; i <= d; ++i) v += A[static_cast<size_t>(jr) * (d + 1) + i] * in[d - i];
        gap_out[j] += v;
    }
}

namespace {
inline void gather(const double* in, int stride, int n, double* dst) {
    if (stride == 1) {
        std::copy(in, in + n, dst);
    } else {
        for (int i = 0; i < n; ++i) dst[i] = in[static_cast<long>(i) * stride];
    }
}
inline void scatter(const double* src, double* out, int stride, int n) {
    if (stride == 1) {
        std::copy(src, src + n, out);
    } else {
        for (int i = 0; i < n; ++i) out[static_cast<long>(i) * stride] = src[i];
    }
}
}  // namespace

void FcOperator::derivative(const double* in, int in_stride, double* out, int out_stride,
                            int order) const {
    if (order != 1 && order != 2) throw UsageError("fc_derivative: order must be 1 or 2");
    auto& s = Impl::scratch(n_ext_);
    gather(in, in_stride, n_, s.ext.data());
    continuation(s.ext.data(), s.ext.data() + n_);
    fftw_execute_dft_r2c(impl_->fwd, s.ext.data(), reinterpret_cast<fftw_complex*>(s.spec.data()));

    const double beta = period_;  // line span is 1 by convention; caller rescales by h
    const int nb = n_ext_ / 2 + 1;
    const double w0 = 2.0 * M_PI / beta;
    const double inv_n = 1.0 / n_ext_;
    if (order == 1) {
        for (int k = 0; k < nb; ++k) {
            const double w = w0 * k * inv_n;
            const std::complex<double> c = s.spec[k];
            s.spec[k] = std::complex<double>(-w * c.imag(), w * c.real());
        }
        if (n_ext_ % 2 == 0) s.spec[nb - 1] = 0.0;  // Nyquist has no odd derivative
    } else {
        for (int k = 0; k < nb; ++k) {
            const double w = w0 * k;
            s.spec[k] *= -w * w * inv_n;
        }
    }
    fftw_execute_dft_c2r(impl_->bwd, reinterpret_cast<fftw_complex*>(s.spec.data()), s.ext.data());
    scatter(s.ext.data(), out, out_stride, n_);
}

void FcOperator::apply_profile(const double* in, int in_stride, double* out, int out_stride,
                               const std::vector<double>& profile) const {
    auto& s = Impl::scratch(n_ext_);
    gather(in, in_stride, n_, s.ext.data());
    continuation(s.ext.data(), s.ext.data() + n_);
    fftw_execute_dft_r2c(impl_->fwd, s.ext.data(), reinterpret_cast<fftw_complex*>(s.spec.data()));
    const int nb = n_ext_ / 2 + 1;
    const double inv_n = 1.0 / n_ext_;
    for (int k = 0; k < nb; ++k) s.spec[k] *= profile[k] * inv_n;
    fftw_execute_dft_c2r(impl_->bwd, reinterpret_cast<fftw_complex*>(s.spec.data()), s.ext.data());
    scatter(s.ext.data(), out, out_stride, n_);
}

void FcOperator::filter(const double* in, int in_stride, double* out, int out_stride) const {
    apply_profile(in, in_stride, out, out_stride, filter_profile_);
}

void FcOperator::strong_filter(const double* in, int in_stride, double* out,
                               int out_stride) const {
    apply_profile(in, in_stride, out, out_stride, smear_profile_);
}

void FcOperator::spectrum(const double* in, int in_stride, std::vector<double>& mag) const {
    auto& s = Impl::scratch(n_ext_);
    gather(in, in_stride, n_, s.ext.data());
    continuation(s.ext.data(), s.ext.data() + n_);
    fftw_execute_dft_r2c(impl_->fwd, s.ext.data(), reinterpret_cast<fftw_complex*>(s.spec.data()));
    const int nb = n_ext_ / 2 + 1;
    mag.resize(nb);
    for (int k = 0; k < nb; ++k) mag[k] = std::abs(s.spec[k]) / n_ext_;
}

double FcOperator::evaluate(const std::vector<double>& in, double x) const {
    if (static_cast<int>(in.size()) != n_) throw UsageError("evaluate: length mismatch");
    std::vector<double> ext(n_ext_);
    std::copy(in.begin(), in.end(), ext.begin());
    continuation(ext.data(), ext.data() + n_);
    std::vector<std::complex<double>> spec(n_ext_ / 2 + 1);
    {
        auto& s = Impl::scratch(n_ext_);
        std::copy(ext.begin(), ext.end(), s.ext.begin());
        fftw_execute_dft_r2c(impl_->fwd, s.ext.data(),
                             reinterpret_cast<fftw_complex*>(s.spec.data()));
        std::copy(s.spec.begin(), s.spec.begin() + spec.size(), spec.begin());
    }
    const double beta = period_;
    double v = spec[0].real() / n_ext_;
    const int nb = static_cast<int>(spec.size());
    for (int k = 1; k < nb; ++k) {
        const double wk = (n_ext_ % 2 == 0 && k == nb - 1) ? 1.0 : 2.0;
        const double arg = 2.0 * M_PI * k * x / beta;
        v += wk / n_ext_ * (spec[k].real() * std::cos(arg) - spec[k].imag() * std::sin(arg));
    }
    return v;
}

GridLine smear_initial_data(const FcOperator& op, const GridLine& line,
                            const std::vector<double>& mask) {
    if (mask.size() != line.values.size())
        throw UsageError("smear_initial_data: mask length mismatch");
    GridLine out = line;
    bool any = false;
    for (double m : mask)
        if (m != 0.0) { any = true; break; }
    if (!any) return out;  // blend identity: mask == 0 returns the input exactly
    std::vector<double> strong(line.values.size());
    op.strong_filter(line.values.data(), 1, strong.data(), 1);
    for (size_t i = 0; i < strong.size(); ++i)
        out.values[i] = mask[i] * strong[i] + (1.0 - mask[i]) * line.values[i];
    return out;
}

GridLine fc_derivative(const FcOperator& op, const GridLine& line, int order) {
    if (static_cast<int>(line.values.size()) != op.n_points())
        throw UsageError("fc_derivative: length mismatch");
    GridLine out = line;
    op.derivative(line.values.data(), 1, out.values.data(), 1, order);
    // derivative() works on the unit-span line; rescale to physical spacing
    const double scale = std::pow(1.0 / (line.h * (op.n_points() - 1)), order);
    for (auto& v : out.values) v *= scale;
    return out;
}

GridLine apply_filter(const FcOperator& op, const GridLine& line) {
    if (static_cast<int>(line.values.size()) != op.n_points())
        throw UsageError("apply_filter: length mismatch");
    GridLine out = line;
    op.filter(line.values.data(), 1, out.values.data(), 1);
    return out;
}

struct OperatorCache::Impl {
    std::mutex mu;
    std::map<std::tuple<int, int, double, int, int>, std::shared_ptr<const FcOperator>> cache;
    static Impl& get() {
        static Impl i;
        return i;
    }
};

OperatorCache& OperatorCache::instance() {
    static OperatorCache c;
    return c;
}

std::shared_ptr<const FcOperator> OperatorCache::get(int n_points, int n_cont,
                                                     FilterSpec filter) {
    auto& impl = Impl::get();
    std::scoped_lock lock(impl.mu);
    auto key = std::make_tuple(n_points, n_cont, filter.alpha, filter.p, filter.p_smear);
    auto it = impl.cache.find(key);
    if (it == impl.cache.end()) {
        auto op = std::make_shared<FcOperator>(n_points, n_cont, filter);
        it = impl.cache.emplace(key, std::move(op)).first;
    }
    return it->second;
}

std::shared_ptr<const FcOperator> OperatorCache::get(int n_points) {
    return get(n_points, 25, FilterSpec{});
}

std::shared_ptr<const FcOperator> build_fc_operator(int n_points, int n_cont, int filter_order,
                                                    double filter_alpha) {
    if (filter_order % 2 != 0) throw ConfigError("filter_order must be even (2p)");
    FilterSpec f;
    f.alpha = filter_alpha;
    f.p = filter_order / 2;
    return OperatorCache::instance().get(n_points, n_cont, f);
}

}  // namespace fcs::fc
