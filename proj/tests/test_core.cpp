#include <catch2/catch_amalgamated.hpp>

#include "edc/core.hpp"
#include "oracles.hpp"

using namespace edc;
using Catch::Approx;

namespace {

PureState bell_pair() {
    Vec v(4);
    v << 1, 0, 0, 1;
    return PureState::qubits(2, v / std::sqrt(2.0));
}

PureState ghz_state(int n) {
    Vec v = Vec::Zero(Index(1) << n);
    v[0] = v[v.size() - 1] = 1.0 / std::sqrt(2.0);
    return PureState::qubits(n, v);
}

}  // namespace

TEST_CASE("PureState validates norm and dims") {
    Vec v(4);
    v << 1, 0, 0, 1;
    REQUIRE_THROWS_AS(PureState::qubits(2, v), NotAState);
    REQUIRE_THROWS_AS(PureState({2, 3}, v / v.norm()), NotAState);
    auto s = PureState::qubits(2, v / v.norm());
    REQUIRE(s.num_sites() == 2);
    REQUIRE(s.local_dim() == 2);
}

TEST_CASE("reduced_density on the named states") {
    SECTION("Bell pair, single site -> I/2") {
        auto rho = reduced_density(bell_pair(), Region{0, 1});
        REQUIRE((rho.matrix() - Mat::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("|0> x |+>, site 1 -> |+><+|") {
        Vec plus(2);
        plus << 1, 1;
        plus /= std::sqrt(2.0);
        Vec zero(2);
        zero << 1, 0;
        auto s = PureState::qubits(2, kron_vec(zero, plus));
        auto rho = reduced_density(s, Region{1, 1});
        Mat expect = plus * plus.adjoint();
        REQUIRE((rho.matrix() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("GHZ_3, sites {0,1} -> (|00><00| + |11><11|)/2") {
        auto rho = reduced_density(ghz_state(3), Region{0, 2});
        Mat expect = Mat::Zero(4, 4);
        expect(0, 0) = expect(3, 3) = 0.5;
        REQUIRE((rho.matrix() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("errors") {
        REQUIRE_THROWS_AS(reduced_density(ghz_state(3), Region{2, 2}), InvalidRegion);
        Vec v = Vec::Zero(Index(1) << 12);
        v[0] = 1;
        auto s = PureState::qubits(12, v);
        REQUIRE_THROWS_AS(reduced_density(s, Region{0, 11}), RegionTooLarge);
    }
    SECTION("ring regions wrap") {
        auto s = ghz_state(4).with_boundary(Boundary::ring);
        auto rho = reduced_density(s, Region{3, 2});  // sites {3, 0}
        Mat expect = Mat::Zero(4, 4);
        expect(0, 0) = expect(3, 3) = 0.5;
        REQUIRE((rho.matrix() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("partial_trace basics") {
    auto tau = DensityOperator({2}, oracle::random_density(2, 7));
    auto sig = DensityOperator({2}, oracle::random_density(2, 8));
    auto prod = DensityOperator({2, 2}, kron(tau.matrix(), sig.matrix()));
    SECTION("product marginal") {
        auto out = partial_trace(prod, {0});
        REQUIRE((out.matrix() - tau.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("Bell marginal is maximally mixed") {
        auto rho = projector(bell_pair());
        auto out = partial_trace(rho, {0});
        REQUIRE((out.matrix() - Mat::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("keep = all is the identity map") {
        auto out = partial_trace(prod, {0, 1});
        REQUIRE((out.matrix() - prod.matrix()).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("invalid subsystems") {
        REQUIRE_THROWS_AS(partial_trace(prod, {}), InvalidSubsystem);
        REQUIRE_THROWS_AS(partial_trace(prod, {2}), InvalidSubsystem);
        REQUIRE_THROWS_AS(partial_trace(prod, {0, 0}), InvalidSubsystem);
    }
    SECTION("matches the naive digit-loop partial trace on mixed radix dims") {
        Mat rho = oracle::random_density(2 * 3 * 2, 21);
        auto d = DensityOperator({2, 3, 2}, rho);
        for (auto keep : std::vector<std::vector<int>>{{0}, {1}, {2}, {0, 2}, {1, 2}, {0, 1}}) {
            auto mine = partial_trace(d, keep);
            Mat ref = oracle::naive_partial_trace(rho, {2, 3, 2}, keep);
            REQUIRE((mine.matrix() - ref).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("reduced_density equals partial_trace of the projector (exhaustive, <= 4 qubits)") {
    for (int n = 2; n <= 4; ++n) {
        auto psi = PureState::qubits(n, oracle::random_state_vec(Index(1) << n, 100 + n));
        auto full = projector(psi);
        for (int start = 0; start < n; ++start)
            for (int len = 1; start + len <= n; ++len) {
                std::vector<int> keep(len);
                for (int i = 0; i < len; ++i) keep[i] = start + i;
                auto a = reduced_density(psi, Region{start, len});
                auto b = partial_trace(full, keep);
                REQUIRE((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-12);
            }
    }
}

TEST_CASE("purify") {
    SECTION("pure input gets a rank-1 ancilla") {
        Mat rho = Mat::Zero(2, 2);
        rho(0, 0) = 1.0;
        auto p = purify(DensityOperator({2}, rho));
        REQUIRE(p.dims() == std::vector<Index>{2, 1});
        REQUIRE(std::abs(p.amplitudes()[0] - 1.0) < 1e-12);
    }
    SECTION("I/2 purifies to a Bell pair") {
        auto p = purify(DensityOperator({2}, Mat::Identity(2, 2) / 2.0));
        Vec expect(4);
        expect << 1, 0, 0, 1;
        expect /= std::sqrt(2.0);
        REQUIRE((p.amplitudes() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("diag(0.9, 0.1) -> sqrt(.9)|00> + sqrt(.1)|11>") {
        Mat rho = Mat::Zero(2, 2);
        rho(0, 0) = 0.9;
        rho(1, 1) = 0.1;
        auto p = purify(DensityOperator({2}, rho));
        Vec expect(4);
        expect << std::sqrt(0.9), 0, 0, std::sqrt(0.1);
        REQUIRE((p.amplitudes() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("marginal round trip on random densities") {
        for (unsigned seed : {1u, 2u, 3u, 4u}) {
            Mat rho = oracle::random_density(4, seed);
            auto d = DensityOperator({4}, rho);
            auto p = purify(d);
            auto back = partial_trace(projector(p), {0});
            REQUIRE(trace_distance(back.regrouped({4}), d) < 1e-9);
        }
    }
}

TEST_CASE("trace_distance") {
    auto rho = DensityOperator({2}, oracle::random_density(2, 5));
    REQUIRE(trace_distance(rho, rho) == Approx(0.0).margin(1e-14));
    Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
    p0(0, 0) = 1;
    p1(1, 1) = 1;
    REQUIRE(trace_distance(DensityOperator({2}, p0), DensityOperator({2}, p1)) ==
            Approx(1.0).margin(1e-12));
    Mat d1 = Mat::Zero(2, 2);
    d1(0, 0) = 0.75;
    d1(1, 1) = 0.25;
    REQUIRE(trace_distance(DensityOperator({2}, d1),
                           DensityOperator({2}, Mat::Identity(2, 2) / 2.0)) ==
            Approx(0.25).margin(1e-12));
    REQUIRE_THROWS_AS(
        trace_distance(rho, DensityOperator({4}, oracle::random_density(4, 6))), DimMismatch);

    SECTION("triangle inequality on random 2-qubit triples") {
        for (unsigned seed = 0; seed < 40; ++seed) {
            auto a = DensityOperator({4}, oracle::random_density(4, 3 * seed));
            auto b = DensityOperator({4}, oracle::random_density(4, 3 * seed + 1));
            auto c = DensityOperator({4}, oracle::random_density(4, 3 * seed + 2));
            REQUIRE(trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-9);
        }
    }
}

TEST_CASE("fidelity") {
    auto rho = DensityOperator({2}, oracle::random_density(2, 9));
    REQUIRE(fidelity(rho, rho) == Approx(1.0).margin(1e-10));
    Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
    p0(0, 0) = 1;
    p1(1, 1) = 1;
    REQUIRE(fidelity(DensityOperator({2}, p0), DensityOperator({2}, p1)) ==
            Approx(0.0).margin(1e-12));
    Mat plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    REQUIRE(fidelity(DensityOperator({2}, plus), DensityOperator({2}, p0)) ==
            Approx(1.0 / std::sqrt(2.0)).margin(1e-10));

    SECTION("Fuchs-van de Graaf on 200 random pairs") {
        for (unsigned seed = 0; seed < 200; ++seed) {
            Index dim = (seed % 2 == 0) ? 2 : 4;
            auto a = DensityOperator({dim}, oracle::random_density(dim, 1000 + 2 * seed));
            auto b = DensityOperator({dim}, oracle::random_density(dim, 1001 + 2 * seed));
            double f = fidelity(a, b);
            double t = trace_distance(a, b);
            REQUIRE(1.0 - f <= t + 1e-9);
            REQUIRE(t <= std::sqrt(std::max(0.0, 1.0 - f * f)) + 1e-9);
        }
    }
}

TEST_CASE("partial_trace preserves trace and positivity") {
    for (unsigned seed = 0; seed < 20; ++seed) {
        Mat rho = oracle::random_density(8, 500 + seed);
        auto d = DensityOperator({2, 2, 2}, rho);
        for (auto keep : std::vector<std::vector<int>>{{0}, {1, 2}, {0, 2}}) {
            auto out = partial_trace(d, keep);
            REQUIRE(out.matrix().trace().real() == Approx(1.0).margin(1e-10));
            REQUIRE_NOTHROW(out.validate_full());
        }
    }
}

TEST_CASE("permute_sites and bipartite_matrix agree with direct amplitude bookkeeping") {
    auto psi = PureState::qubits(3, oracle::random_state_vec(8, 77));
    auto p = permute_sites(psi, {2, 0, 1});
    // amplitude of |b2 b0 b1> must equal amplitude of |b0 b1 b2>
    for (Index b0 = 0; b0 < 2; ++b0)
        for (Index b1 = 0; b1 < 2; ++b1)
            for (Index b2 = 0; b2 < 2; ++b2) {
                Index orig = b0 * 4 + b1 * 2 + b2;
                Index perm = b2 * 4 + b0 * 2 + b1;
                REQUIRE(std::abs(psi.amplitudes()[orig] - p.amplitudes()[perm]) < 1e-14);
            }
    // Schmidt spectrum of a non-contiguous cut matches a reduced density spectrum
    auto rho = reduced_density_sites(psi, {0, 2});
    auto sv = schmidt_values(psi, {0, 2});
    auto sd = spectral(rho.matrix());
    for (Index i = 0; i < sv.size(); ++i)
        REQUIRE(sv[i] * sv[i] == Approx(sd.eigenvalues[i]).margin(1e-10));
}
