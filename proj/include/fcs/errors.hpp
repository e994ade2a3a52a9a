#ifndef FCS_ERRORS_HPP
#define FCS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fcs {

/** Bad sizes, missing files, malformed configuration. */
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/** API misuse (wrong argument ranges, mismatched lengths). */
struct UsageError : std::invalid_argument {
    explicit UsageError(const std::string& msg) : std::invalid_argument(msg) {}
};

/** Degenerate mappings, non-invertible corners, impossible layouts. */
struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

/** Overlap/fringe bookkeeping failures: orphan points, impure donors,
 *  windows that do not cover the domain. */
struct DecompositionError : std::runtime_error {
    explicit DecompositionError(const std::string& msg) : std::runtime_error(msg) {}
};

/** Nonpositive density or pressure at a grid point. No limiter is applied;
 *  the solver aborts with the offending location. */
struct InvalidStateError : std::runtime_error {
    int patch = -1;
    int subpatch = -1;
    int i = -1, j = -1;
    double t = 0.0;
    InvalidStateError(const std::string& msg, int patch_, int subpatch_, int i_, int j_, double t_)
        : std::runtime_error(msg), patch(patch_), subpatch(subpatch_), i(i_), j(j_), t(t_) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fcs

#endif
