#pragma once

#include <limits>

#include <Eigen/Cholesky>

#include "edc/core.hpp"

namespace edc {

// ---------------------------------------------------------------------------
// Von Neumann entropies (bits).
// ---------------------------------------------------------------------------
inline double entropy_of_spectrum(const RVec& eigenvalues) {
    double h = 0.0;
    for (Index i = 0; i < eigenvalues.size(); ++i) {
        double l = eigenvalues[i];
        if (l > tol::entropy_floor) h -= l * std::log2(l);
    }
    return h;
}

inline double von_neumann(const DensityOperator& rho) {
    auto sd = spectral(rho.matrix());
    if (sd.eigenvalues.minCoeff() < -tol::psd)
        throw NotAState("von_neumann: negative eigenvalue " +
                        std::to_string(sd.eigenvalues.minCoeff()));
    return entropy_of_spectrum(sd.eigenvalues);
}

// Entropy of an arbitrary site subset of a pure state, via its Schmidt spectrum.
// Works for any subset size on <= 16 sites (no density matrix is formed).
inline double entropy_of_sites(const PureState& state, const std::vector<int>& sites) {
    RVec s = schmidt_values(state, sites);
    return entropy_of_spectrum(s.cwiseProduct(s));
}

inline double mutual_information_sites(const PureState& state, const std::vector<int>& a,
                                       const std::vector<int>& b) {
    std::vector<int> ab(a);
    ab.insert(ab.end(), b.begin(), b.end());
    return entropy_of_sites(state, a) + entropy_of_sites(state, b) -
           entropy_of_sites(state, ab);
}

// H(A|C) = H(AC) - H(C) for a bipartite density operator with dims [A, C].
inline double conditional_von_neumann(const DensityOperator& rho_ac) {
    if (rho_ac.num_subsystems() != 2)
        throw DimMismatch("conditional_von_neumann: expected bipartite dims");
    return von_neumann(rho_ac) - von_neumann(partial_trace(rho_ac, {1}));
}

inline double mutual_information(const DensityOperator& rho_ab) {
    if (rho_ab.num_subsystems() != 2)
        throw DimMismatch("mutual_information: expected bipartite dims");
    return von_neumann(partial_trace(rho_ab, {0})) + von_neumann(partial_trace(rho_ab, {1})) -
           von_neumann(rho_ab);
}

// ---------------------------------------------------------------------------
// Smoothing spec. Only spectral truncation is implemented: the smallest
// eigenvalues with total mass <= epsilon are dropped and the rest renormalized.
// The truncated state sits within epsilon trace distance of the input, so the
// resulting value is a surrogate bound, not the exact ball optimum; reports
// label such outputs "truncation surrogate".
// ---------------------------------------------------------------------------
struct SmoothingSpec {
    double epsilon = 0.0;
    enum class Method { spectral_truncation } method = Method::spectral_truncation;

    SmoothingSpec() = default;
    explicit SmoothingSpec(double eps) : epsilon(eps) {
        if (eps < 0.0 || eps >= 1.0) throw Error("smoothing epsilon must be in [0, 1)");
    }
};

inline DensityOperator spectral_truncate(const DensityOperator& rho, double epsilon) {
    if (epsilon <= 0.0) return rho;
    auto sd = spectral(rho.matrix());
    const Index d = rho.dim();
    double dropped = 0.0;
    Index keep = d;
    for (Index i = d; i-- > 1;) {  // never drop the largest eigenvalue
        double l = std::max(0.0, sd.eigenvalues[i]);
        if (dropped + l > epsilon) break;
        dropped += l;
        keep = i;
    }
    Mat out = Mat::Zero(d, d);
    double mass = 0.0;
    for (Index i = 0; i < keep; ++i) mass += std::max(0.0, sd.eigenvalues[i]);
    for (Index i = 0; i < keep; ++i) {
        double l = std::max(0.0, sd.eigenvalues[i]) / mass;
        out += l * (sd.eigenvectors.col(i) * sd.eigenvectors.col(i).adjoint());
    }
    return DensityOperator(rho.dims(), std::move(out));
}

// ---------------------------------------------------------------------------
// H_max of a marginal: log2 rank at eps = 0; with smoothing, log2 of the
// smallest k whose top-k eigenvalue mass reaches 1 - eps.
// ---------------------------------------------------------------------------
inline double h_max_marginal(const DensityOperator& rho, const SmoothingSpec& spec = {}) {
    auto sd = spectral(rho.matrix());
    if (sd.eigenvalues.minCoeff() < -tol::psd) throw NotAState("h_max_marginal: not a state");
    if (spec.epsilon <= 0.0) {
        Index rank = 0;
        for (Index i = 0; i < sd.eigenvalues.size(); ++i)
            if (sd.eigenvalues[i] > tol::rank_cutoff) ++rank;
        return std::log2(static_cast<double>(std::max<Index>(rank, 1)));
    }
    double acc = 0.0;
    for (Index k = 0; k < sd.eigenvalues.size(); ++k) {
        acc += std::max(0.0, sd.eigenvalues[k]);
        if (acc >= 1.0 - spec.epsilon) return std::log2(static_cast<double>(k + 1));
    }
    return std::log2(static_cast<double>(sd.eigenvalues.size()));
}

// ---------------------------------------------------------------------------
// Conditional min-entropy H_min(A|B) as the SDP
//     minimize tr(sigma')  s.t.  I_A (x) sigma' >= rho_AB
// solved by log-barrier path following (damped Newton on sigma'). Each barrier
// center yields the dual point X = S^{-1}/t (S = I (x) sigma' - rho), which
// after a lambda_max(tr_A X) rescale is feasible for
//     maximize tr(rho X)  s.t.  X >= 0, tr_A X <= I_B,
// so the reported primal-dual gap is a genuine certificate.
// ---------------------------------------------------------------------------
struct MinEntropyResult {
    double value_bits;                // -log2 tr(sigma'*)
    double trace_sigma;               // tr(sigma'*)
    DensityOperator sigma_witness;    // sigma'/tr(sigma') on B
    Mat dual_witness;                 // X >= 0 with tr_A X <= I_B
    double dual_value;                // tr(rho X)
    double primal_dual_gap;
};

namespace detail {

// tr_A of a (dA*dB)-dim matrix with A the leading factor
inline Mat trace_out_first(const Mat& m, Index da, Index db) {
    Mat out = Mat::Zero(db, db);
    for (Index a = 0; a < da; ++a) out += m.block(a * db, a * db, db, db);
    return out;
}

inline double logdet_if_pd(const Mat& m, bool& ok) {
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success) {
        ok = false;
        return 0.0;
    }
    double ld = 0.0;
    for (Index i = 0; i < m.rows(); ++i) {
        double d = std::real(llt.matrixL()(i, i));
        if (!(d > 0.0)) {
            ok = false;
            return 0.0;
        }
        ld += std::log(d);
    }
    ok = true;
    return 2.0 * ld;
}

}  // namespace detail

inline MinEntropyResult h_min(const DensityOperator& rho_ab, double tolerance = 1e-7) {
    if (rho_ab.num_subsystems() != 2) throw DimMismatch("h_min: expected bipartite dims");
    const Index da = rho_ab.dims()[0];
    const Index db = rho_ab.dims()[1];
    const Index d = da * db;
    if (d > 256) throw DimTooLarge("h_min: dim(AB) = " + std::to_string(d) + " exceeds 256");
    const Mat& rho = rho_ab.matrix();

    auto lift = [&](const Mat& s) {  // I_A (x) s
        Mat out = Mat::Zero(d, d);
        for (Index a = 0; a < da; ++a) out.block(a * db, a * db, db, db) = s;
        return out;
    };

    double lmax = spectral(rho).eigenvalues[0];
    Mat sigma = (lmax + 1.0) * Mat::Identity(db, db);

    double t = 1.0;
    const double mu = 6.0;
    double best_gap = std::numeric_limits<double>::infinity();
    Mat best_sigma = sigma;
    Mat best_dual = Mat::Zero(d, d);
    double best_dual_value = 0.0;
    double prev_gap = std::numeric_limits<double>::infinity();

    for (int outer = 0; outer < 80; ++outer) {
        // Newton centering for  t*tr(sigma) - logdet(I (x) sigma - rho)
        for (int it = 0; it < 120; ++it) {
            Mat S = lift(sigma) - rho;
            Eigen::LLT<Mat> llt(S);
            if (llt.info() != Eigen::Success)
                throw SolverDidNotConverge("h_min: barrier iterate left the cone",
                                           -std::log2(sigma.trace().real()), 0.0);
            Mat Sinv = llt.solve(Mat::Identity(d, d));
            Mat G = t * Mat::Identity(db, db) - detail::trace_out_first(Sinv, da, db);

            // Hessian on vec(D), row-major pairs (b1,b2) x (b3,b4):
            // H = sum_{a,a'} Sinv[(a,b1),(a',b3)] * Sinv[(a',b4),(a,b2)]
            Mat H = Mat::Zero(db * db, db * db);
            for (Index b1 = 0; b1 < db; ++b1)
                for (Index b2 = 0; b2 < db; ++b2)
                    for (Index b3 = 0; b3 < db; ++b3)
                        for (Index b4 = 0; b4 < db; ++b4) {
                            cxd acc = 0;
                            for (Index a = 0; a < da; ++a)
                                for (Index ap = 0; ap < da; ++ap)
                                    acc += Sinv(a * db + b1, ap * db + b3) *
                                           Sinv(ap * db + b4, a * db + b2);
                            H(b1 * db + b2, b3 * db + b4) = acc;
                        }
            Vec g(db * db);
            for (Index b1 = 0; b1 < db; ++b1)
                for (Index b2 = 0; b2 < db; ++b2) g[b1 * db + b2] = -G(b1, b2);
            Vec dvec = H.partialPivLu().solve(g);
            Mat D(db, db);
            for (Index b1 = 0; b1 < db; ++b1)
                for (Index b2 = 0; b2 < db; ++b2) D(b1, b2) = dvec[b1 * db + b2];
            D = (D + D.adjoint()) / 2.0;

            double lam2 = -std::real((G.adjoint() * D).trace());
            if (lam2 / 2.0 < 1e-12) break;

            bool ok = false;
            double f0 = t * sigma.trace().real() - detail::logdet_if_pd(lift(sigma) - rho, ok);
            double alpha = 1.0;
            while (alpha > 1e-14) {
                Mat cand = sigma + alpha * D;
                bool pd = false;
                double ld = detail::logdet_if_pd(lift(cand) - rho, pd);
                if (pd && t * cand.trace().real() - ld <= f0 - 0.25 * alpha * lam2) break;
                alpha /= 2.0;
            }
            if (alpha <= 1e-14) break;
            sigma += alpha * D;
            sigma = (sigma + sigma.adjoint()) / 2.0;
        }

        // dual point from this center, with feasibility repair
        Mat S = lift(sigma) - rho;
        Eigen::LLT<Mat> sllt(S);
        if (sllt.info() != Eigen::Success) break;  // numeric end of the path
        Mat X = sllt.solve(Mat::Identity(d, d)) / t;
        X = (X + X.adjoint()) / 2.0;
        Mat ta = detail::trace_out_first(X, da, db);
        double scale = spectral(ta).eigenvalues[0];
        if (scale > 1.0) X /= scale;
        double primal = sigma.trace().real();
        double dual = std::real((rho * X).trace());
        double gap = primal - dual;
        if (!std::isfinite(gap)) break;
        if (gap < best_gap) {
            best_gap = gap;
            best_sigma = sigma;
            best_dual = X;
            best_dual_value = dual;
        }
        if (best_gap <= tolerance) {
            double trs = best_sigma.trace().real();
            return MinEntropyResult{-std::log2(trs), trs,
                                    DensityOperator({db}, best_sigma / trs), best_dual,
                                    best_dual_value, std::max(0.0, best_gap)};
        }
        if (gap > 1.5 * prev_gap && prev_gap < 1e-3) break;  // path lost to roundoff
        prev_gap = gap;
        t *= mu;
    }
    throw SolverDidNotConverge("h_min: gap " + std::to_string(best_gap) +
                                   " did not reach tolerance " + std::to_string(tolerance),
                               -std::log2(best_sigma.trace().real()),
                               -std::log2(std::max(best_dual_value, 1e-300)));
}

inline MinEntropyResult h_min_smoothed(const DensityOperator& rho_ab, const SmoothingSpec& spec,
                                       double tolerance = 1e-7) {
    if (spec.epsilon <= 0.0) return h_min(rho_ab, tolerance);
    return h_min(spectral_truncate(rho_ab, spec.epsilon), tolerance);
}

// ---------------------------------------------------------------------------
// H_max(A|C) by duality: purify rho_AC (ancilla B = eigen-purification) and
// return -H_min(A|B) on the purification's AB marginal.
// ---------------------------------------------------------------------------
inline double h_max_conditional(const DensityOperator& rho_ac, const SmoothingSpec& spec = {},
                                double tolerance = 1e-7) {
    if (rho_ac.num_subsystems() != 2)
        throw DimMismatch("h_max_conditional: expected bipartite dims");
    const Index da = rho_ac.dims()[0];
    const Index dc = rho_ac.dims()[1];
    PureState phi = purify(rho_ac);                    // dims [da*dc, r]
    const Index r = phi.dims()[1];
    PureState phi3({da, dc, r}, phi.amplitudes());     // regroup the AC factor
    DensityOperator rho_ab = reduced_density_sites(phi3, {0, 2});
    return -h_min_smoothed(rho_ab, spec, tolerance).value_bits;
}

// I_max(A:B) = H_max(A) - H_min(A|B), with smoothing applied to both pieces.
inline double i_max(const DensityOperator& rho_ab, const SmoothingSpec& spec = {},
                    double tolerance = 1e-7) {
    if (rho_ab.num_subsystems() != 2) throw DimMismatch("i_max: expected bipartite dims");
    DensityOperator rho_a = partial_trace(rho_ab, {0});
    return h_max_marginal(rho_a, spec) - h_min_smoothed(rho_ab, spec, tolerance).value_bits;
}

}  // namespace edc
