#pragma once

#include "edc/core.hpp"

namespace edc {

// ---------------------------------------------------------------------------
// Haar-random unitary: complex Ginibre + QR, R-diagonal phases absorbed.
// ---------------------------------------------------------------------------
inline Mat haar_unitary(Index dim, Rng& rng) {
    if (dim < 1) throw Error("haar_unitary: dim must be >= 1");
    Mat g(dim, dim);
    for (Index i = 0; i < dim; ++i)
        for (Index j = 0; j < dim; ++j) g(i, j) = rng.next_cnormal();
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (Index i = 0; i < dim; ++i) {
        cxd d = r(i, i);
        q.col(i) *= (std::abs(d) > 0 ? d / std::abs(d) : cxd(1, 0));
    }
    return q;
}

inline Mat haar_unitary(Index dim, std::uint64_t seed) {
    Rng rng(seed);
    return haar_unitary(dim, rng);
}

// ---------------------------------------------------------------------------
// Certified estimate of Cor(X:Y) = max_{||M||,||N|| <= 1} |tr((M x N) Delta)|
// with Delta = rho_XY - rho_X x rho_Y.
// ---------------------------------------------------------------------------
struct CorrelationEstimate {
    double lower_bound = 0.0;
    double upper_bound = 0.0;   // ||Delta||_1 (Hoelder)
    Mat witness_M;
    Mat witness_N;
    int restarts_used = 0;
    bool converged = false;
};

namespace detail {

// K[x',x] = sum_{y,y'} N[y,y'] Delta[(x'y'),(xy)]; optimizing M for fixed N
// reduces to max |tr(M K)| = ||K||_1 at M = V U^dag (K = U S V^dag).
inline Mat contract_y(const Mat& delta, const Mat& n, Index dx, Index dy) {
    Mat k(dx, dx);
    for (Index xp = 0; xp < dx; ++xp)
        for (Index x = 0; x < dx; ++x)
            k(xp, x) = (delta.block(xp * dy, x * dy, dy, dy) * n).trace();
    return k;
}

inline Mat contract_x(const Mat& delta, const Mat& m, Index dx, Index dy) {
    Mat k = Mat::Zero(dy, dy);
    for (Index x = 0; x < dx; ++x)
        for (Index xp = 0; xp < dx; ++xp)
            if (m(x, xp) != cxd(0, 0)) k += m(x, xp) * delta.block(xp * dy, x * dy, dy, dy);
    return k;
}

struct PolarStep {
    Mat contraction;  // optimal unit-norm operator
    double value;     // ||K||_1
};

inline PolarStep polar_maximizer(const Mat& k) {
    Eigen::JacobiSVD<Mat> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {svd.matrixV() * svd.matrixU().adjoint(), svd.singularValues().sum()};
}

inline bool is_power_of_two(Index d) { return d >= 1 && (d & (d - 1)) == 0; }

struct PauliScanResult {
    double value = 0.0;
    std::vector<int> string;  // 0=I 1=X 2=Y 3=Z per qubit, X qubits first
};

inline void pauli_scan(const Mat& cur, std::vector<int>& prefix, PauliScanResult& best) {
    if (cur.rows() == 1) {
        bool all_identity = std::all_of(prefix.begin(), prefix.end(), [](int p) { return p == 0; });
        double v = std::abs(cur(0, 0));
        if (!all_identity && v > best.value) {
            best.value = v;
            best.string = prefix;
        }
        return;
    }
    const Index h = cur.rows() / 2;
    const Mat b00 = cur.topLeftCorner(h, h);
    const Mat b01 = cur.topRightCorner(h, h);
    const Mat b10 = cur.bottomLeftCorner(h, h);
    const Mat b11 = cur.bottomRightCorner(h, h);
    const cxd i1(0, 1);
    const Mat children[4] = {b00 + b11, b10 + b01, i1 * b01 - i1 * b10, b00 - b11};
    for (int p = 0; p < 4; ++p) {
        prefix.push_back(p);
        pauli_scan(children[p], prefix, best);
        prefix.pop_back();
    }
}

inline Mat pauli_matrix(int p) {
    Mat m(2, 2);
    const cxd i1(0, 1);
    switch (p) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, -i1, i1, 0; break;
        default: m << 1, 0, 0, -1; break;
    }
    return m;
}

inline Mat pauli_string_matrix(const std::vector<int>& string, size_t from, size_t to) {
    Mat out = Mat::Identity(1, 1);
    for (size_t q = from; q < to; ++q) out = kron(out, pauli_matrix(string[q]));
    return out;
}

inline Mat delta_of(const DensityOperator& rho_xy) {
    if (rho_xy.num_subsystems() != 2) throw DimMismatch("expected bipartite dims [dX, dY]");
    Mat rx = partial_trace(rho_xy, {0}).matrix();
    Mat ry = partial_trace(rho_xy, {1}).matrix();
    return rho_xy.matrix() - kron(rx, ry);
}

}  // namespace detail

// Best product-Pauli witness |tr((P x Q) Delta)| over all Pauli strings on the
// qubit factorizations of X and Y (the all-identity string excluded).
// Also used as the see-saw warm start.
struct PauliWitness {
    double value = 0.0;
    Mat p;  // on X
    Mat q;  // on Y
};

inline PauliWitness pauli_witness_full(const DensityOperator& rho_xy) {
    const Index dx = rho_xy.dims()[0];
    const Index dy = rho_xy.dims()[1];
    if (!detail::is_power_of_two(dx) || !detail::is_power_of_two(dy))
        throw NotQubits("pauli_witness: X and Y must factor into qubits");
    Mat delta = detail::delta_of(rho_xy);
    size_t qx = 0, qy = 0;
    for (Index v = dx; v > 1; v >>= 1) ++qx;
    for (Index v = dy; v > 1; v >>= 1) ++qy;
    detail::PauliScanResult best;
    std::vector<int> prefix;
    prefix.reserve(qx + qy);
    detail::pauli_scan(delta, prefix, best);
    if (best.string.empty())  // delta == 0; any non-identity pair witnesses 0
        best.string.assign(qx + qy, 0), best.string[0] = 3;
    PauliWitness w;
    w.value = best.value;
    w.p = detail::pauli_string_matrix(best.string, 0, qx);
    w.q = detail::pauli_string_matrix(best.string, qx, qx + qy);
    return w;
}

inline double pauli_witness(const DensityOperator& rho_xy) {
    return pauli_witness_full(rho_xy).value;
}

inline CorrelationEstimate cor_estimate(const DensityOperator& rho_xy, int restarts = 32,
                                        double tolerance = 1e-9, std::uint64_t seed = 0) {
    if (rho_xy.num_subsystems() != 2)
        throw DimMismatch("cor_estimate: expected bipartite dims [dX, dY]");
    if (restarts < 1) throw Error("cor_estimate: restarts must be >= 1");
    const Index dx = rho_xy.dims()[0];
    const Index dy = rho_xy.dims()[1];
    Mat delta = detail::delta_of(rho_xy);

    CorrelationEstimate out;
    out.upper_bound = trace_norm(delta);
    out.witness_M = Mat::Identity(dx, dx);
    out.witness_N = Mat::Identity(dy, dy);

    std::vector<Mat> starts;
    starts.reserve(restarts + 1);
    if (detail::is_power_of_two(dx) && detail::is_power_of_two(dy))
        starts.push_back(pauli_witness_full(rho_xy).q);
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, 2 * r + 1));
        starts.push_back(haar_unitary(dy, rng));
    }

    constexpr int max_iters = 500;
    for (const Mat& n0 : starts) {
        Mat n = n0;
        Mat m;
        double prev = -1.0;
        double val = 0.0;
        bool conv = false;
        for (int it = 0; it < max_iters; ++it) {
            auto sm = detail::polar_maximizer(detail::contract_y(delta, n, dx, dy));
            m = sm.contraction;
            auto sn = detail::polar_maximizer(detail::contract_x(delta, m, dx, dy));
            n = sn.contraction;
            val = sn.value;
            if (val < prev - 1e-10)
                throw Error("cor_estimate: see-saw objective decreased");  // asserted invariant
            if (val - prev < tolerance) {
                conv = true;
                break;
            }
            prev = val;
        }
        if (val > out.lower_bound) {
            out.lower_bound = val;
            out.witness_M = m;
            out.witness_N = n;
            out.converged = conv;
        }
    }
    out.restarts_used = static_cast<int>(starts.size());
    // the witness pair must reproduce the reported bound
    double check = std::abs((kron(out.witness_M, out.witness_N) * delta).trace());
    if (std::abs(check - out.lower_bound) > 1e-9)
        out.lower_bound = check;
    return out;
}

// ---------------------------------------------------------------------------
// Decay profile: Cor between the leftmost x_size sites and a y_size block
// starting l sites after it, for each separation l.
// ---------------------------------------------------------------------------
struct SeparationEstimate {
    int separation;
    CorrelationEstimate estimate;
};

inline std::vector<SeparationEstimate> decay_profile(const PureState& state, int x_size,
                                                     int y_size,
                                                     const std::vector<int>& separations,
                                                     int restarts = 32, double tolerance = 1e-9,
                                                     std::uint64_t seed = 0) {
    const int n = state.num_sites();
    if (x_size < 1 || y_size < 1) throw DoesNotFit("block sizes must be >= 1");
    if (x_size + y_size > 10)
        throw RegionTooLarge("x_size + y_size > 10 exceeds the density-operator cap");
    for (int l : separations) {
        if (l < 0 || x_size + l + y_size > n)
            throw DoesNotFit("separation " + std::to_string(l) + " does not fit on " +
                             std::to_string(n) + " sites");
    }
    std::vector<SeparationEstimate> out(separations.size(),
                                        SeparationEstimate{0, CorrelationEstimate{}});
    parallel_for(static_cast<Index>(separations.size()), [&](Index i) {
        int l = separations[i];
        std::vector<int> sites;
        for (int s = 0; s < x_size; ++s) sites.push_back(s);
        for (int s = 0; s < y_size; ++s) sites.push_back(x_size + l + s);
        auto rho = reduced_density_sites(state, sites)
                       .regrouped({Index(1) << x_size, Index(1) << y_size});
        int eff = l;
        if (state.boundary() == Boundary::ring) eff = std::min(l, n - x_size - y_size - l);
        out[i] = SeparationEstimate{
            eff, cor_estimate(rho, restarts, tolerance, derive_seed(seed, 1000 + l))};
    });
    return out;
}

// ---------------------------------------------------------------------------
// Exponential fit: least squares of log2(cor) = -l/xi + b over points above
// the numerical floor.
// ---------------------------------------------------------------------------
struct DecayFit {
    double xi = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS of log2 residuals
    std::vector<std::pair<int, double>> points;
};

inline DecayFit fit_correlation_length(const std::vector<std::pair<int, double>>& profile) {
    DecayFit fit;
    for (auto& [l, c] : profile)
        if (c > 1e-12) fit.points.emplace_back(l, c);
    if (fit.points.size() < 3)
        throw InsufficientPoints("need >= 3 points above the 1e-12 floor, have " +
                                 std::to_string(fit.points.size()));
    double sl = 0, sy = 0, sll = 0, sly = 0;
    const double k = static_cast<double>(fit.points.size());
    for (auto& [l, c] : fit.points) {
        double y = std::log2(c);
        sl += l;
        sy += y;
        sll += static_cast<double>(l) * l;
        sly += l * y;
    }
    double slope = (k * sly - sl * sy) / (k * sll - sl * sl);
    fit.intercept = (sy - slope * sl) / k;
    if (!(slope < 0))
        throw NotDecaying("profile is not decaying (fitted slope " + std::to_string(slope) + ")");
    fit.xi = -1.0 / slope;
    double ss = 0;
    for (auto& [l, c] : fit.points) {
        double r = std::log2(c) - (fit.intercept + slope * l);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / k);
    return fit;
}

inline DecayFit fit_correlation_length(const std::vector<SeparationEstimate>& profile) {
    std::vector<std::pair<int, double>> pts;
    pts.reserve(profile.size());
    for (auto& p : profile) pts.emplace_back(p.separation, p.estimate.lower_bound);
    return fit_correlation_length(pts);
}

}  // namespace edc
