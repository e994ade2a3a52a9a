#ifndef FCS_FIELD_HPP
#define FCS_FIELD_HPP

#include <cstddef>
#include <vector>

namespace fcs {

/** Scalar field on a subpatch bounding box, row-major (j outer, i inner). */
struct Field {
    int ni = 0, nj = 0;
    std::vector<double> v;

    Field() = default;
    Field(int ni_, int nj_, double fill = 0.0)
        : ni(ni_), nj(nj_), v(static_cast<size_t>(ni_) * nj_, fill) {}

    double& operator()(int i, int j) { return v[static_cast<size_t>(j) * ni + i]; }
    double operator()(int i, int j) const { return v[static_cast<size_t>(j) * ni + i]; }
    double* row(int j) { return v.data() + static_cast<size_t>(j) * ni; }
    const double* row(int j) const { return v.data() + static_cast<size_t>(j) * ni; }
    void fill(double x) { v.assign(v.size(), x); }
};

}  // namespace fcs

#endif
