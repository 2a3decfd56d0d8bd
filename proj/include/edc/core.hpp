#pragma once

#include <algorithm>
#include <numeric>
#include <optional>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "edc/common.hpp"

namespace edc {

enum class Boundary { line, ring };

// ---------------------------------------------------------------------------
// PureState: normalized amplitude vector over an ordered list of subsystems.
// Site 0 is the most significant tensor factor; for a chain of qubits the
// basis index of |b0 b1 ... b_{n-1}> is sum_s b_s 2^(n-1-s).
// Subsystem dimensions are stored per site so purifications and measurement
// support blocks (whose factors are not all equal) use the same type.
// ---------------------------------------------------------------------------
class PureState {
public:
    PureState(std::vector<Index> dims, Vec amplitudes, Boundary boundary = Boundary::line)
        : dims_(std::move(dims)), amps_(std::move(amplitudes)), boundary_(boundary) {
        Index total = 1;
        for (Index d : dims_) {
            if (d < 1) throw NotAState("subsystem dimension must be >= 1");
            total *= d;
        }
        if (amps_.size() != total)
            throw NotAState("amplitude vector length does not match subsystem dimensions");
        double n = amps_.norm();
        if (std::abs(n - 1.0) > tol::state_norm)
            throw NotAState("state is not normalized: |norm - 1| = " + std::to_string(std::abs(n - 1.0)));
    }

    static PureState qubits(int num_sites, Vec amplitudes, Boundary boundary = Boundary::line) {
        return PureState(std::vector<Index>(num_sites, 2), std::move(amplitudes), boundary);
    }

    int num_sites() const { return static_cast<int>(dims_.size()); }
    const std::vector<Index>& dims() const { return dims_; }
    Index dim() const { return amps_.size(); }
    Boundary boundary() const { return boundary_; }
    const Vec& amplitudes() const { return amps_; }

    bool uniform_local_dim() const {
        return std::all_of(dims_.begin(), dims_.end(), [&](Index d) { return d == dims_[0]; });
    }
    Index local_dim() const {
        if (!uniform_local_dim()) throw Error("state has mixed subsystem dimensions");
        return dims_[0];
    }

    PureState with_boundary(Boundary b) const { return PureState(dims_, amps_, b); }

private:
    std::vector<Index> dims_;
    Vec amps_;
    Boundary boundary_;
};

// ---------------------------------------------------------------------------
// DensityOperator: Hermitian, PSD, unit-trace matrix with subsystem metadata.
// Construction checks Hermiticity and trace (O(d^2)); positivity is verified
// where a spectral decomposition is taken anyway, and in validate_full().
// ---------------------------------------------------------------------------
class DensityOperator {
public:
    DensityOperator(std::vector<Index> dims, Mat matrix)
        : dims_(std::move(dims)), mat_(std::move(matrix)) {
        Index total = 1;
        for (Index d : dims_) {
            if (d < 1) throw NotAState("subsystem dimension must be >= 1");
            total *= d;
        }
        if (mat_.rows() != total || mat_.cols() != total)
            throw NotAState("matrix size does not match subsystem dimensions");
        double herm_defect = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
        if (herm_defect > tol::hermitian)
            throw NotAState("matrix is not Hermitian: defect = " + std::to_string(herm_defect));
        mat_ = (mat_ + mat_.adjoint()) / 2.0;  // scrub float drift
        double tr = mat_.trace().real();
        if (std::abs(tr - 1.0) > tol::trace_one)
            throw NotAState("trace is not 1: " + std::to_string(tr));
    }

    const std::vector<Index>& dims() const { return dims_; }
    Index dim() const { return mat_.rows(); }
    const Mat& matrix() const { return mat_; }
    int num_subsystems() const { return static_cast<int>(dims_.size()); }

    void validate_full() const {
        Eigen::SelfAdjointEigenSolver<Mat> es(mat_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -tol::psd)
            throw NotAState("matrix has a negative eigenvalue: " +
                            std::to_string(es.eigenvalues().minCoeff()));
    }

    // view the same matrix with subsystems grouped differently (total dim fixed)
    DensityOperator regrouped(std::vector<Index> dims) const {
        return DensityOperator(std::move(dims), mat_);
    }

private:
    std::vector<Index> dims_;
    Mat mat_;
};

// ---------------------------------------------------------------------------
// Region: contiguous interval of sites. On a ring the interval may wrap.
// ---------------------------------------------------------------------------
struct Region {
    int start = 0;
    int length = 1;

    std::vector<int> sites(const PureState& state) const {
        const int n = state.num_sites();
        if (length < 1) throw InvalidRegion("region length must be >= 1");
        if (state.boundary() == Boundary::line) {
            if (start < 0 || start + length > n)
                throw InvalidRegion("region [" + std::to_string(start) + ", " +
                                    std::to_string(start + length) + ") exceeds a line of " +
                                    std::to_string(n) + " sites");
        } else {
            if (start < 0 || start >= n || length > n)
                throw InvalidRegion("region does not fit on a ring of " + std::to_string(n) +
                                    " sites");
        }
        std::vector<int> out(length);
        for (int i = 0; i < length; ++i) out[i] = (start + i) % n;
        return out;
    }
};

// ---------------------------------------------------------------------------
// SpectralDecomposition of a Hermitian matrix, eigenvalues sorted descending.
// ---------------------------------------------------------------------------
struct SpectralDecomposition {
    RVec eigenvalues;   // descending
    Mat eigenvectors;   // columns match eigenvalues
};

inline SpectralDecomposition spectral(const Mat& m) {
    double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (defect > tol::hermitian)
        throw Error("spectral(): matrix is not Hermitian (defect " + std::to_string(defect) + ")");
    Eigen::SelfAdjointEigenSolver<Mat> es((m + m.adjoint()) / 2.0);
    if (es.info() != Eigen::Success) throw Error("spectral(): eigensolver failed");
    const Index d = m.rows();
    SpectralDecomposition out;
    out.eigenvalues.resize(d);
    out.eigenvectors.resize(d, d);
    for (Index i = 0; i < d; ++i) {  // ascending -> descending
        out.eigenvalues[i] = es.eigenvalues()[d - 1 - i];
        out.eigenvectors.col(i) = es.eigenvectors().col(d - 1 - i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Index bookkeeping helpers for mixed-radix subsystem labels.
// ---------------------------------------------------------------------------
namespace detail {

inline Index dim_product(const std::vector<Index>& dims) {
    return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

// strides[s] = product of dims after s (row-major / big-endian layout)
inline std::vector<Index> strides_of(const std::vector<Index>& dims) {
    std::vector<Index> strides(dims.size(), 1);
    for (int s = static_cast<int>(dims.size()) - 2; s >= 0; --s)
        strides[s] = strides[s + 1] * dims[s + 1];
    return strides;
}

}  // namespace detail

// Reorder subsystems of a pure state: new_order[k] = old index of the k-th new site.
inline PureState permute_sites(const PureState& state, const std::vector<int>& new_order) {
    const auto& dims = state.dims();
    const int n = state.num_sites();
    if (static_cast<int>(new_order.size()) != n)
        throw InvalidSubsystem("permutation size does not match site count");
    std::vector<bool> seen(n, false);
    for (int s : new_order) {
        if (s < 0 || s >= n || seen[s]) throw InvalidSubsystem("invalid site permutation");
        seen[s] = true;
    }
    std::vector<Index> new_dims(n);
    for (int k = 0; k < n; ++k) new_dims[k] = dims[new_order[k]];
    auto old_strides = detail::strides_of(dims);
    auto new_strides = detail::strides_of(new_dims);
    Vec out(state.dim());
    const Vec& in = state.amplitudes();
    std::vector<Index> digits(n);
    for (Index idx = 0; idx < in.size(); ++idx) {
        Index rem = idx;
        for (int s = 0; s < n; ++s) {
            digits[s] = rem / old_strides[s];
            rem %= old_strides[s];
        }
        Index nidx = 0;
        for (int k = 0; k < n; ++k) nidx += digits[new_order[k]] * new_strides[k];
        out[nidx] = in[idx];
    }
    return PureState(std::move(new_dims), std::move(out), state.boundary());
}

// Amplitudes reshaped as a (kept sites) x (remaining sites) matrix, kept sites leading.
inline Mat bipartite_matrix(const PureState& state, const std::vector<int>& kept_sites) {
    const int n = state.num_sites();
    std::vector<bool> in_kept(n, false);
    for (int s : kept_sites) {
        if (s < 0 || s >= n) throw InvalidSubsystem("site index out of range");
        if (in_kept[s]) throw InvalidSubsystem("duplicate site index");
        in_kept[s] = true;
    }
    std::vector<int> order(kept_sites);
    for (int s = 0; s < n; ++s)
        if (!in_kept[s]) order.push_back(s);
    PureState p = permute_sites(state, order);
    Index dk = 1;
    for (int s : kept_sites) dk *= state.dims()[s];
    return Eigen::Map<const Mat>(p.amplitudes().data(), state.dim() / dk, dk).transpose();
}

// Reduced density operator on an arbitrary subset of sites (need not be contiguous).
inline DensityOperator reduced_density_sites(const PureState& state,
                                             const std::vector<int>& sites) {
    Mat m = bipartite_matrix(state, sites);
    std::vector<Index> dims;
    dims.reserve(sites.size());
    for (int s : sites) dims.push_back(state.dims()[s]);
    return DensityOperator(std::move(dims), m * m.adjoint());
}

// ---------------------------------------------------------------------------
// reduced_density: marginal of a pure state on a contiguous region.
// ---------------------------------------------------------------------------
inline DensityOperator reduced_density(const PureState& state, const Region& region) {
    auto sites = region.sites(state);
    if (region.length > 10)
        throw RegionTooLarge("region of " + std::to_string(region.length) +
                             " sites exceeds the 10-site density-operator cap");
    return reduced_density_sites(state, sites);
}

// ---------------------------------------------------------------------------
// partial_trace: keep the listed subsystems of a density operator.
// ---------------------------------------------------------------------------
inline DensityOperator partial_trace(const DensityOperator& rho, const std::vector<int>& keep) {
    const auto& dims = rho.dims();
    const int m = rho.num_subsystems();
    if (keep.empty()) throw InvalidSubsystem("keep set must be nonempty");
    std::vector<bool> kept(m, false);
    for (int s : keep) {
        if (s < 0 || s >= m) throw InvalidSubsystem("subsystem index out of range");
        if (kept[s]) throw InvalidSubsystem("duplicate subsystem index");
        kept[s] = true;
    }
    std::vector<int> keep_sorted(keep);
    std::sort(keep_sorted.begin(), keep_sorted.end());
    std::vector<int> traced;
    for (int s = 0; s < m; ++s)
        if (!kept[s]) traced.push_back(s);

    std::vector<Index> keep_dims, traced_dims;
    for (int s : keep_sorted) keep_dims.push_back(dims[s]);
    for (int s : traced) traced_dims.push_back(dims[s]);
    const Index dk = detail::dim_product(keep_dims);
    const Index dt = detail::dim_product(traced_dims);

    auto strides = detail::strides_of(dims);
    // full index = sum over kept digits + traced digits with original strides
    auto compose = [&](Index ik, Index it) {
        Index idx = 0;
        Index rem = ik;
        for (size_t j = keep_sorted.size(); j-- > 0;) {
            idx += (rem % keep_dims[j]) * strides[keep_sorted[j]];
            rem /= keep_dims[j];
        }
        rem = it;
        for (size_t j = traced.size(); j-- > 0;) {
            idx += (rem % traced_dims[j]) * strides[traced[j]];
            rem /= traced_dims[j];
        }
        return idx;
    };

    Mat out = Mat::Zero(dk, dk);
    const Mat& src = rho.matrix();
    for (Index r = 0; r < dk; ++r)
        for (Index c = 0; c < dk; ++c) {
            cxd acc = 0;
            for (Index t = 0; t < dt; ++t) acc += src(compose(r, t), compose(c, t));
            out(r, c) = acc;
        }
    return DensityOperator(std::move(keep_dims), std::move(out));
}

// ---------------------------------------------------------------------------
// purify: eigen-purification sum_i sqrt(l_i) |v_i>|i>, eigenvalues descending,
// eigenvector phases fixed so the first non-negligible component is real positive.
// Output is bipartite with dims [d, rank].
// ---------------------------------------------------------------------------
inline PureState purify(const DensityOperator& rho) {
    rho.validate_full();
    auto sd = spectral(rho.matrix());
    const Index d = rho.dim();
    Index rank = 0;
    for (Index i = 0; i < d; ++i)
        if (sd.eigenvalues[i] > tol::rank_cutoff) ++rank;
    if (rank == 0) throw NotAState("density operator has no spectral weight");
    // canonical order: eigenvalues descending, ties broken by the position of the
    // eigenvector's first non-negligible component (so diag states purify to |i>|i>)
    auto pivot = [&](Index col) {
        for (Index a = 0; a < d; ++a)
            if (std::abs(sd.eigenvectors(a, col)) > 1e-9) return a;
        return d;
    };
    std::vector<Index> order(rank);
    std::iota(order.begin(), order.end(), Index{0});
    for (Index lo = 0; lo < rank;) {
        Index hi = lo + 1;
        while (hi < rank && std::abs(sd.eigenvalues[order[hi]] - sd.eigenvalues[order[lo]]) <= 1e-12)
            ++hi;
        std::sort(order.begin() + lo, order.begin() + hi,
                  [&](Index i, Index j) { return pivot(i) < pivot(j); });
        lo = hi;
    }
    Mat phi(d, rank);
    for (Index k = 0; k < rank; ++k) {
        Index i = order[k];
        Vec v = sd.eigenvectors.col(i);
        for (Index a = 0; a < d; ++a) {
            if (std::abs(v[a]) > 1e-9) {
                v *= std::conj(v[a]) / std::abs(v[a]);
                break;
            }
        }
        phi.col(k) = std::sqrt(std::max(0.0, sd.eigenvalues[i])) * v;
    }
    // phi(a, i) -> amplitude of |a>|i>: index a*rank + i (row-major over (a, i))
    Vec flat(d * rank);
    for (Index a = 0; a < d; ++a)
        for (Index i = 0; i < rank; ++i) flat[a * rank + i] = phi(a, i);
    flat /= flat.norm();
    return PureState({d, rank}, std::move(flat));
}

// ---------------------------------------------------------------------------
// trace_distance and fidelity.
// ---------------------------------------------------------------------------
inline double trace_norm(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es((m + m.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.dim() != sigma.dim())
        throw DimMismatch("trace_distance: operators have different dimension");
    return 0.5 * trace_norm(rho.matrix() - sigma.matrix());
}

// ||sqrt(rho) sqrt(sigma)||_1
inline double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.dim() != sigma.dim())
        throw DimMismatch("fidelity: operators have different dimension");
    auto sd = spectral(rho.matrix());
    Mat sqrt_rho = sd.eigenvectors *
                   sd.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                   sd.eigenvectors.adjoint();
    auto se = spectral(sigma.matrix());
    Mat sqrt_sigma = se.eigenvectors *
                     se.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                     se.eigenvectors.adjoint();
    Eigen::JacobiSVD<Mat> svd(sqrt_rho * sqrt_sigma);
    return svd.singularValues().sum();
}

// Kronecker product following the site ordering (first factor most significant).
inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Vec kron_vec(const Vec& a, const Vec& b) {
    Vec out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

inline DensityOperator projector(const PureState& state) {
    return DensityOperator(state.dims(),
                           state.amplitudes() * state.amplitudes().adjoint());
}

// Schmidt coefficients (descending) across kept_sites | rest.
inline RVec schmidt_values(const PureState& state, const std::vector<int>& kept_sites) {
    Mat m = bipartite_matrix(state, kept_sites);
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues();
}

}  // namespace edc
