#include <catch2/catch_amalgamated.hpp>

#include "qnsf/dense.hpp"
#include "test_util.hpp"

#include <functional>
#include <random>

using namespace qnsf;
using testutil::field_for_d;
using testutil::random_connected_graph;
using testutil::random_element;
using testutil::random_graph;
using testutil::random_nonzero;

namespace {

using StateFn = std::function<void(DenseState&)>;

// Full matrix of an operator, built column by column from basis states.
std::vector<cplx> matrix_of(const FieldCtxPtr& ctx, const std::vector<int>& labels, const StateFn& fn) {
    int64_t dim = 1;
    for (size_t i = 0; i < labels.size(); ++i) dim *= ctx->d();
    std::vector<cplx> mat(static_cast<size_t>(dim * dim));
    for (int64_t col = 0; col < dim; ++col) {
        DenseState st(ctx, labels);
        st.amps()[static_cast<size_t>(col)] = 1.0;
        fn(st);
        for (int64_t row = 0; row < dim; ++row)
            mat[static_cast<size_t>(row * dim + col)] = st.amps()[static_cast<size_t>(row)];
    }
    return mat;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    REQUIRE(a.size() == b.size());
    double mx = 0;
    for (size_t i = 0; i < a.size(); ++i) mx = std::max(mx, std::abs(a[i] - b[i]));
    return mx;
}

void check_same_operator(const FieldCtxPtr& ctx, const std::vector<int>& labels, const StateFn& lhs,
                         const StateFn& rhs, double tol = 1e-12) {
    CHECK(max_diff(matrix_of(ctx, labels, lhs), matrix_of(ctx, labels, rhs)) <= tol);
}

}  // namespace

TEST_CASE("graph state amplitudes", "[dense]") {
    SECTION("single vertex is |+>") {
        auto f3 = field_for_d(3);
        WeightedGraph g(f3);
        g.add_vertex(1);
        auto st = DenseState::graph_state(g);
        for (const auto& a : st.amps()) CHECK(std::abs(a - 1.0 / std::sqrt(3.0)) < 1e-12);
    }
    SECTION("qubit edge gives (1,1,1,-1)/2") {
        auto st = DenseState::graph_state(linear_cluster(field_for_d(2), 2));
        const auto& a = st.amps();
        CHECK(std::abs(a[0] - 0.5) < 1e-12);
        CHECK(std::abs(a[1] - 0.5) < 1e-12);
        CHECK(std::abs(a[2] - 0.5) < 1e-12);
        CHECK(std::abs(a[3] + 0.5) < 1e-12);
    }
    SECTION("qutrit edge weights amplitudes by omega^{xy}") {
        auto f3 = field_for_d(3);
        auto st = DenseState::graph_state(linear_cluster(f3, 2));
        for (int64_t x = 0; x < 3; ++x)
            for (int64_t y = 0; y < 3; ++y) {
                cplx expect = Character(3, x * y).value() / 3.0;
                CHECK(std::abs(st.amps()[static_cast<size_t>(x + 3 * y)] - expect) < 1e-12);
            }
    }
}

TEST_CASE("generator actions", "[dense]") {
    auto f3 = field_for_d(3);
    SECTION("Z phases the basis") {
        auto st = DenseState::basis_state(f3, {0}, {{0, f3->one()}});
        st.z(0, f3->one());
        CHECK(std::abs(st.amps()[1] - Character(3, 1).value()) < 1e-12);
    }
    SECTION("X shifts cyclically") {
        auto st = DenseState::basis_state(f3, {0}, {{0, f3->scalar(2)}});
        st.x(0, f3->one());
        CHECK(std::abs(st.amps()[0] - 1.0) < 1e-12);
    }
    SECTION("W(1,1) at d=2 is the standard Y") {
        auto f2 = field_for_d(2);
        auto mat = matrix_of(f2, {0}, [&](DenseState& st) { st.weyl(0, f2->one(), f2->one(), f2->zero()); });
        // Y = [[0, -i], [i, 0]] row-major.
        CHECK(std::abs(mat[0]) < 1e-12);
        CHECK(std::abs(mat[1] - cplx{0, -1}) < 1e-12);
        CHECK(std::abs(mat[2] - cplx{0, 1}) < 1e-12);
        CHECK(std::abs(mat[3]) < 1e-12);
    }
}

TEST_CASE("projector properties", "[dense]") {
    SECTION("Z projector is a basis projector") {
        for (auto [d, bval] : {std::pair{2, 0}, std::pair{3, 2}}) {
            auto ctx = field_for_d(d);
            auto mat = matrix_of(ctx, {0}, [&](DenseState& st) {
                st.project_weyl(0, ctx->one(), ctx->zero(), ctx->scalar(bval));
            });
            for (int64_t r = 0; r < d; ++r)
                for (int64_t c = 0; c < d; ++c) {
                    const double expect = (r == bval && c == bval) ? 1.0 : 0.0;
                    CHECK(std::abs(mat[static_cast<size_t>(r * d + c)] - expect) < 1e-12);
                }
        }
    }
    SECTION("projectors are idempotent and complete") {
        std::mt19937 rng(5);
        for (int d : {2, 3, 5}) {
            auto ctx = field_for_d(d);
            FieldElement z = random_element(ctx, rng), x = random_element(ctx, rng);
            if (z.is_zero() && x.is_zero()) z = ctx->one();
            std::vector<cplx> sum(static_cast<size_t>(d * d), cplx{0, 0});
            for (const auto& b : ctx->elements()) {
                auto once = matrix_of(ctx, {0}, [&](DenseState& st) { st.project_weyl(0, z, x, b); });
                auto twice = matrix_of(ctx, {0}, [&](DenseState& st) {
                    st.project_weyl(0, z, x, b);
                    st.project_weyl(0, z, x, b);
                });
                CHECK(max_diff(once, twice) <= 1e-12);
                for (size_t i = 0; i < sum.size(); ++i) sum[i] += once[i];
            }
            for (int64_t r = 0; r < d; ++r)
                for (int64_t c = 0; c < d; ++c)
                    CHECK(std::abs(sum[static_cast<size_t>(r * d + c)] - (r == c ? 1.0 : 0.0)) <= 1e-12);
        }
    }
}

TEST_CASE("graph states have flat Z overlaps", "[dense]") {
    std::mt19937 rng(17);
    for (int d : {2, 3, 5, 9}) {
        auto ctx = field_for_d(d);
        const int n = d <= 3 ? 4 : 3;
        auto g = random_graph(ctx, n, rng);
        auto base = DenseState::graph_state(g);
        int64_t all = 1;
        for (int i = 0; i < n; ++i) all *= d;
        std::uniform_int_distribution<int64_t> pick(0, all - 1);
        for (int trial = 0; trial < 25; ++trial) {
            int64_t code = pick(rng);
            std::map<int, FieldElement> zs;
            bool zero = true;
            for (int v = 1; v <= n; ++v) {
                auto e = ctx->element(code % d);
                code /= d;
                if (!e.is_zero()) zero = false;
                zs[v] = e;
            }
            DenseState shifted = base;
            shifted.apply_z_word(zs);
            const double overlap = std::abs(base.inner(shifted));
            if (zero) CHECK(overlap == Catch::Approx(1.0).margin(1e-12));
            else CHECK(overlap <= 1e-12);
        }
    }
}

TEST_CASE("measurement-derivation Clifford equivalences", "[dense]") {
    std::mt19937 rng(23);
    for (int d : {3, 5, 9}) {
        auto ctx = field_for_d(d);
        WeightedGraph g(ctx);
        g.add_vertex(1);
        g.add_vertex(2);
        const FieldElement a = random_nonzero(ctx, rng);
        g.set_edge(1, 2, a);
        const std::vector<int> labels{1, 2};
        const FieldElement b = random_element(ctx, rng);
        const FieldElement m = random_nonzero(ctx, rng);
        const FieldElement n = random_nonzero(ctx, rng);

        // P(W_v(1,m), b) = L_v(-m) P(Z_v, b) L_v(m)
        check_same_operator(
            ctx, labels,
            [&](DenseState& st) { st.project_weyl(1, ctx->one(), m, b); },
            [&](DenseState& st) {
                st.local_complement_unitary(g, 1, m);
                st.project_weyl(1, ctx->one(), ctx->zero(), b);
                st.local_complement_unitary(g, 1, -m);
            });

        // P(X_v, b) = L_w0(-r) P(W_v(1,1), b) L_w0(r) with r = -A_{w0,v}^{-2}
        const FieldElement r = -(a.pow(2).inv());
        check_same_operator(
            ctx, labels,
            [&](DenseState& st) { st.project_weyl(1, ctx->zero(), ctx->one(), b); },
            [&](DenseState& st) {
                st.local_complement_unitary(g, 2, r);
                st.project_weyl(1, ctx->one(), ctx->one(), b);
                st.local_complement_unitary(g, 2, -r);
            });

        // P(X_v(m), b) = M_v(m) P(X_v, b) M_v(m^-1)
        check_same_operator(
            ctx, labels,
            [&](DenseState& st) { st.project_weyl(1, ctx->zero(), m, b); },
            [&](DenseState& st) {
                st.mgate(1, m.inv());
                st.project_weyl(1, ctx->zero(), ctx->one(), b);
                st.mgate(1, m);
            });

        // P(Z_v(n), b) = M_v(n^-1) P(Z_v, b) M_v(n)
        check_same_operator(
            ctx, labels,
            [&](DenseState& st) { st.project_weyl(1, n, ctx->zero(), b); },
            [&](DenseState& st) {
                st.mgate(1, n);
                st.project_weyl(1, ctx->one(), ctx->zero(), b);
                st.mgate(1, n.inv());
            });

        // P(W_v(n,m), b) = L_v(-m/n) P(Z_v(n), b) L_v(m/n)
        check_same_operator(
            ctx, labels,
            [&](DenseState& st) { st.project_weyl(1, n, m, b); },
            [&](DenseState& st) {
                st.local_complement_unitary(g, 1, m / n);
                st.project_weyl(1, n, ctx->zero(), b);
                st.local_complement_unitary(g, 1, -(m / n));
            });
    }
}

TEST_CASE("commutation relations", "[dense]") {
    std::mt19937 rng(29);
    for (int d : {2, 3, 5, 9}) {
        auto ctx = field_for_d(d);
        const FieldElement z = random_nonzero(ctx, rng);
        const FieldElement x = random_nonzero(ctx, rng);
        const FieldElement a = random_nonzero(ctx, rng);
        const FieldElement m = random_nonzero(ctx, rng);
        const std::vector<int> one{0};
        const std::vector<int> two{0, 1};

        // H Z(z) = X(-z) H ; H X(x) = Z(x) H
        check_same_operator(ctx, one,
                            [&](DenseState& s) { s.z(0, z); s.h(0); },
                            [&](DenseState& s) { s.h(0); s.x(0, -z); });
        check_same_operator(ctx, one,
                            [&](DenseState& s) { s.x(0, x); s.h(0); },
                            [&](DenseState& s) { s.h(0); s.z(0, x); });
        // Hdag Z(z) = X(z) Hdag ; Hdag X(x) = Z(-x) Hdag
        check_same_operator(ctx, one,
                            [&](DenseState& s) { s.z(0, z); s.hdag(0); },
                            [&](DenseState& s) { s.hdag(0); s.x(0, z); });
        check_same_operator(ctx, one,
                            [&](DenseState& s) { s.x(0, x); s.hdag(0); },
                            [&](DenseState& s) { s.hdag(0); s.z(0, -x); });
        // M(m^-1) Z(z) = Z(mz) M(m^-1) ; M(m^-1) X(x) = X(m^-1 x) M(m^-1)
        check_same_operator(ctx, one,
                            [&](DenseState& s) { s.z(0, z); s.mgate(0, m.inv()); },
                            [&](DenseState& s) { s.mgate(0, m.inv()); s.z(0, m * z); });
        check_same_operator(ctx, one,
                            [&](DenseState& s) { s.x(0, x); s.mgate(0, m.inv()); },
                            [&](DenseState& s) { s.mgate(0, m.inv()); s.x(0, m.inv() * x); });
        // Z(a) X(x) = chi(ax) X(x) Z(a)
        check_same_operator(ctx, one,
                            [&](DenseState& s) { s.x(0, x); s.z(0, a); },
                            [&](DenseState& s) {
                                s.z(0, a);
                                s.x(0, x);
                                s.scale((a * x).chi().value());
                            });
        // S relations
        if (ctx->p() != 2) {
            const FieldElement lam = random_nonzero(ctx, rng);
            check_same_operator(ctx, one,
                                [&](DenseState& s) { s.z(0, z); s.s(0, lam); },
                                [&](DenseState& s) { s.s(0, lam); s.z(0, z); });
            // S(lam) X(x) = chi(2^-1 lam x^2) X(x) Z(lam x) S(lam)
            check_same_operator(ctx, one,
                                [&](DenseState& s) { s.x(0, x); s.s(0, lam); },
                                [&](DenseState& s) {
                                    s.s(0, lam);
                                    s.z(0, lam * x);
                                    s.x(0, x);
                                    s.scale((ctx->two_inv() * lam * x * x).chi().value());
                                });
        } else {
            // S X = chi4(1) X Z S at d = 2
            check_same_operator(ctx, one,
                                [&](DenseState& s) { s.x(0, ctx->one()); s.s_z4(0, 1); },
                                [&](DenseState& s) {
                                    s.s_z4(0, 1);
                                    s.z(0, ctx->one());
                                    s.x(0, ctx->one());
                                    s.scale(cplx{0, 1});
                                });
        }
        // CX_{0->1}: CX Z_1(z) = Z_0(-z) Z_1(z) CX ; CX X_0(x) = X_0(x) X_1(x) CX
        check_same_operator(ctx, two,
                            [&](DenseState& s) { s.z(1, z); s.cx(0, 1); },
                            [&](DenseState& s) { s.cx(0, 1); s.z(0, -z); s.z(1, z); });
        check_same_operator(ctx, two,
                            [&](DenseState& s) { s.x(0, x); s.cx(0, 1); },
                            [&](DenseState& s) { s.cx(0, 1); s.x(0, x); s.x(1, x); });
        // CZ: CZ X_0(x) = X_0(x) Z_1(x) CZ and symmetrically
        check_same_operator(ctx, two,
                            [&](DenseState& s) { s.x(0, x); s.cz(0, 1, ctx->one()); },
                            [&](DenseState& s) { s.cz(0, 1, ctx->one()); s.z(1, x); s.x(0, x); });
        check_same_operator(ctx, two,
                            [&](DenseState& s) { s.x(1, x); s.cz(0, 1, ctx->one()); },
                            [&](DenseState& s) { s.cz(0, 1, ctx->one()); s.z(0, x); s.x(1, x); });
    }
}

TEST_CASE("graph manipulation bridges", "[dense]") {
    std::mt19937 rng(31);
    for (int d : {2, 3, 5, 9}) {
        auto ctx = field_for_d(d);
        const int n = d <= 3 ? 4 : 3;
        for (int trial = 0; trial < 8; ++trial) {
            auto g = random_graph(ctx, n, rng);
            std::uniform_int_distribution<int> pick_v(1, n);
            const int v = pick_v(rng);
            const FieldElement m = random_nonzero(ctx, rng);

            SECTION("tau bridge d=" + std::to_string(d) + " trial " + std::to_string(trial)) {
                auto lhs = DenseState::graph_state(local_complement(g, v, m));
                auto rhs = DenseState::graph_state(g);
                rhs.local_complement_unitary(g, v, m);
                CHECK(equal_up_to_phase(lhs, rhs, 1e-9));
            }
            SECTION("local multiply bridge d=" + std::to_string(d) + " trial " + std::to_string(trial)) {
                auto lhs = DenseState::graph_state(local_multiply(g, v, m));
                auto rhs = DenseState::graph_state(g);
                rhs.local_multiply_unitary(v, m);
                CHECK(equal_up_to_phase(lhs, rhs, 1e-9));
            }
            SECTION("cz bridge d=" + std::to_string(d) + " trial " + std::to_string(trial)) {
                const int u = v % n + 1;
                auto lhs = DenseState::graph_state(apply_cz(g, u, v, m));
                auto rhs = DenseState::graph_state(g);
                rhs.cz(u, v, m);
                CHECK(max_diff(lhs.amps(), rhs.amps()) <= 1e-12);
            }
            SECTION("X translation d=" + std::to_string(d) + " trial " + std::to_string(trial)) {
                const FieldElement xamt = random_element(ctx, rng);
                auto lhs = DenseState::graph_state(g);
                lhs.x(v, xamt);
                auto rhs = DenseState::graph_state(g);
                std::map<int, FieldElement> zs;
                for (const auto& [u, w] : g.row(v)) zs[u] = -(xamt * w);
                rhs.apply_z_word(zs);
                CHECK(max_diff(lhs.amps(), rhs.amps()) <= 1e-12);
            }
        }
    }
}

TEST_CASE("channels and fidelity", "[dense]") {
    auto f2 = field_for_d(2);
    auto bell = DenseState::graph_state(linear_cluster(f2, 2));

    SECTION("identity channel leaves the ensemble alone") {
        Ensemble ens{{1.0, bell}};
        auto out = apply_z_channel(ens, {{1.0, {}}});
        REQUIRE(out.size() == 1);
        CHECK(out[0].first == 1.0);
        CHECK(max_diff(out[0].second.amps(), bell.amps()) == 0.0);
    }
    SECTION("full dephasing of |+> is maximally mixed") {
        WeightedGraph g(f2);
        g.add_vertex(1);
        Ensemble ens{{1.0, DenseState::graph_state(g)}};
        auto out = apply_z_channel(
            ens, {{0.5, {}}, {0.5, {{1, f2->one()}}}});
        auto rho = density_of(out);
        CHECK(rho.trace() == Catch::Approx(1.0).margin(1e-12));
        CHECK(std::abs(rho.a[0] - 0.5) < 1e-12);
        CHECK(std::abs(rho.a[1]) < 1e-12);
        CHECK(std::abs(rho.a[2]) < 1e-12);
        CHECK(std::abs(rho.a[3] - 0.5) < 1e-12);
    }
    SECTION("Bell pair under a half Z error has fidelity 1/2") {
        Ensemble ens{{1.0, bell}};
        auto out = apply_z_channel(ens, {{0.5, {}}, {0.5, {{1, f2->one()}}}});
        CHECK(ensemble_fidelity(out, bell) == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("orthogonal and identical fidelities") {
        auto zero = DenseState::basis_state(f2, {1, 2});
        CHECK(ensemble_fidelity({{1.0, bell}}, bell) == Catch::Approx(1.0).margin(1e-12));
        DenseState flipped = zero;
        flipped.x(1, f2->one());
        CHECK(ensemble_fidelity({{1.0, zero}}, flipped) == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("even extensions are rejected by the oracle", "[dense]") {
    auto f4 = FieldCtx::make(2, 2);
    WeightedGraph g(f4);
    g.add_vertex(1);
    CHECK_THROWS_WITH(DenseState::graph_state(g), Catch::Matchers::ContainsSubstring("even-extension unsupported"));
}
