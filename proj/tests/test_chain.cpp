#include "qnsf/chain.hpp"
#include "qnsf/dense.hpp"

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <complex>
#include <random>
#include <set>
#include <vector>

using namespace qnsf;
using namespace qnsf::testutil;

namespace {

StrategyOrder make_order(std::vector<int> sigma) {
    StrategyOrder o;
    o.sigma = std::move(sigma);
    return o;
}

StrategyOrder random_order(int N, std::mt19937& rng) {
    StrategyOrder o = StrategyOrder::side_to_side(N);
    std::shuffle(o.sigma.begin(), o.sigma.end(), rng);
    return o;
}

// Dense-amplitude oracle for the whole pipeline: every combination of
// depolarizing Weyl words is simulated explicitly, measured with the recorded
// corrections undone, and folded into <target|rho|target> / tr(rho).
double oracle_chain_fidelity(int N, const FieldCtxPtr& ctx, double lam, const ChainResult& res,
                             const StrategyOrder& order) {
    const int64_t d = ctx->d();
    const int64_t dd = d * d;
    const DenseState base = DenseState::graph_state(linear_cluster(ctx, N));
    const DenseState target = DenseState::graph_state(res.state.graph);

    std::vector<MeasurementSpec> specs;
    std::vector<int> measured;
    for (int label : order.measurement_sequence()) {
        MeasurementSpec spec;
        spec.v = label;
        spec.basis = {ctx->one(), ctx->one()};
        spec.b = ctx->zero();
        specs.push_back(spec);
        measured.push_back(label);
    }

    int64_t combos = 1;
    for (int v = 0; v < N; ++v) combos *= dd;

    double num = 0, den = 0;
    for (int64_t idx = 0; idx < combos; ++idx) {
        double w = 1;
        DenseState st = base;
        int64_t rem = idx;
        for (int v = 1; v <= N; ++v) {
            const int64_t zx = rem % dd;
            rem /= dd;
            const int64_t z = zx / d;
            const int64_t x = zx % d;
            w *= zx == 0 ? lam + (1 - lam) / static_cast<double>(dd)
                         : (1 - lam) / static_cast<double>(dd);
            if (x != 0) st.apply_x_word({{v, ctx->element(x)}});
            if (z != 0) st.apply_z_word({{v, ctx->element(z)}});
        }
        for (size_t k = 0; k < specs.size(); ++k) {
            st.project_weyl(specs[k].v, specs[k].basis.z, specs[k].basis.x, specs[k].b);
            st.apply_correction_inverse(res.state.corrections[k]);
        }
        Ensemble one;
        one.emplace_back(w, std::move(st));
        const DensityMatrix rho = reduced_density(one, measured);
        for (int64_t i = 0; i < rho.dim; ++i) {
            den += rho.a[static_cast<size_t>(i * rho.dim + i)].real();
            for (int64_t j = 0; j < rho.dim; ++j)
                num += (std::conj(target.amps()[static_cast<size_t>(i)]) *
                        rho.a[static_cast<size_t>(i * rho.dim + j)] *
                        target.amps()[static_cast<size_t>(j)])
                           .real();
        }
    }
    return num / den;
}

}  // namespace

TEST_CASE("strategy order validation") {
    REQUIRE(StrategyOrder::side_to_side(5).sigma == std::vector<int>{2, 3, 4});
    REQUIRE(StrategyOrder::side_to_side(5).measurement_sequence() == std::vector<int>{4, 3, 2});
    REQUIRE_NOTHROW(make_order({3, 2, 4}).validate(5));
    REQUIRE_THROWS_AS(make_order({2, 3}).validate(5), std::invalid_argument);
    REQUIRE_THROWS_AS(make_order({2, 3, 3}).validate(5), std::invalid_argument);
    REQUIRE_THROWS_AS(make_order({1, 3, 4}).validate(5), std::invalid_argument);
    REQUIRE_THROWS_AS(make_order({2, 3, 5}).validate(5), std::invalid_argument);
}

TEST_CASE("side-to-side weight vector closed form") {
    SECTION("p=3, N=6") {
        const WeightVector w = side_to_side_weights(6, 3);
        REQUIRE(w.at(1, 0) == 1);
        REQUIRE(w.at(1, 1) == 2);
        REQUIRE(w.at(1, 2) == 1);
        REQUIRE(w.total() == 4);
    }
    SECTION("p=2, N=100") {
        const WeightVector w = side_to_side_weights(100, 2);
        REQUIRE(w.at(1, 0) == 49);
        REQUIRE(w.at(1, 1) == 49);
        REQUIRE(w.at(0, 0) == 0);
        REQUIRE(w.at(0, 1) == 0);
    }
    SECTION("p=5, N=3") {
        const WeightVector w = side_to_side_weights(3, 5);
        REQUIRE(w.at(1, 1) == 1);
        REQUIRE(w.total() == 1);
    }
}

TEST_CASE("three-vertex chain leaves a single M(1,1)") {
    for (int d : {2, 3, 5, 9}) {
        const FieldCtxPtr ctx = field_for_d(d);
        const ChainResult res = run_chain(3, ctx, Rational(1, 2), StrategyOrder::side_to_side(3));
        REQUIRE(res.middle_maps.size() == 1);
        REQUIRE(res.middle_maps[0].alpha == 1);
        REQUIRE(res.middle_maps[0].beta == 1);
        REQUIRE(res.weights.at(1, 1) == 1);
        REQUIRE(res.weights.total() == 1);
    }
}

TEST_CASE("engine weights match the side-to-side closed form") {
    for (int p : {2, 3, 5}) {
        const FieldCtxPtr ctx = FieldCtx::make(p, 1);
        for (int N = 3; N <= 16; ++N) {
            const ChainResult res =
                run_chain(N, ctx, Rational(2, 5), StrategyOrder::side_to_side(N));
            REQUIRE(res.weights == side_to_side_weights(N, p));
        }
    }
}

TEST_CASE("every random order classifies and matches the analytic fidelity") {
    std::mt19937 rng(45321);
    const Rational lam(3, 7);
    for (int d : {2, 3, 5, 9}) {
        const FieldCtxPtr ctx = field_for_d(d);
        for (int N = 4; N <= 7; ++N) {
            for (int trial = 0; trial < 4; ++trial) {
                const StrategyOrder order = random_order(N, rng);
                const ChainResult res = run_chain(N, ctx, lam, order);
                REQUIRE(res.weights.total() == N - 2);
                const Rational convolved = fidelity_of(res.state.channels, res.state.graph);
                const Rational analytic = analytic_fidelity(res.weights, lam, ctx->d());
                REQUIRE(convolved == analytic);
            }
        }
    }
}

TEST_CASE("weight vectors do not depend on the extension degree") {
    std::mt19937 rng(8181);
    for (int p : {2, 3}) {
        const FieldCtxPtr base = FieldCtx::make(p, 1);
        const FieldCtxPtr ext = FieldCtx::make(p, 2);
        for (int N : {4, 6}) {
            for (int trial = 0; trial < 3; ++trial) {
                const StrategyOrder order = random_order(N, rng);
                const ChainResult a = run_chain(N, base, Rational(1, 3), order);
                const ChainResult b = run_chain(N, ext, Rational(1, 3), order);
                REQUIRE(a.weights == b.weights);
            }
        }
    }
}

TEST_CASE("middle and edge maps compose multiplicatively in lambda") {
    for (int d : {2, 3, 9}) {
        const FieldCtxPtr ctx = field_for_d(d);
        const Rational l1(2, 3), l2(4, 5);
        SECTION("middle maps with matching labels, d=" + std::to_string(d)) {
            for (int alpha : {0, 1}) {
                for (int beta = 0; beta < ctx->p(); ++beta) {
                    const auto a = middle_map_channel(ctx, 1, 9, alpha, beta, l1);
                    const auto b = middle_map_channel(ctx, 1, 9, alpha, beta, l2);
                    const auto expect = middle_map_channel(ctx, 1, 9, alpha, beta, Rational(l1 * l2));
                    REQUIRE(detail::channels_equal(compact(convolve(a, b)), expect));
                }
            }
        }
        SECTION("edge maps, d=" + std::to_string(d)) {
            const auto a = edge_map_channel(ctx, 1, 9, l1);
            const auto b = edge_map_channel(ctx, 1, 9, l2);
            const auto expect = edge_map_channel(ctx, 1, 9, Rational(l1 * l2));
            REQUIRE(detail::channels_equal(compact(convolve(a, b)), expect));
        }
    }
}

TEST_CASE("analytic fidelity frozen values") {
    SECTION("no middle weights leaves only the edge maps") {
        for (int64_t d : {2, 3, 5}) {
            const WeightVector w(d == 2 ? 2 : static_cast<int>(d));
            const Rational lam(1, 2);
            const Rational expect = lam * lam + (Rational(1) - lam * lam) / Rational(d * d);
            REQUIRE(analytic_fidelity(w, lam, d) == expect);
        }
    }
    SECTION("single unit weight at (1,1), d=2, lambda=1/2") {
        WeightVector w(2);
        w.at(1, 1) = 1;
        REQUIRE(analytic_fidelity(w, Rational(1, 2), 2) == Rational(3, 8));
        REQUIRE_THAT(analytic_fidelity(w, 0.5, 2), Catch::Matchers::WithinAbs(0.375, 1e-15));
    }
    SECTION("noiseless input") {
        WeightVector w(3);
        w.at(1, 2) = 4;
        w.at(0, 1) = 2;
        REQUIRE(analytic_fidelity(w, Rational(1), 9) == Rational(1));
        REQUIRE(analytic_fidelity(w, 1.0, 3) == 1.0);
    }
    SECTION("input validation") {
        WeightVector w(2);
        REQUIRE_THROWS_AS(analytic_fidelity(w, Rational(1, 2), 6), std::invalid_argument);
        REQUIRE_THROWS_AS(analytic_fidelity(w, Rational(1, 2), 3), std::invalid_argument);
        WeightVector malformed;
        REQUIRE_THROWS_AS(analytic_fidelity(malformed, Rational(1, 2), 2), std::invalid_argument);
    }
}

TEST_CASE("analytic fidelity agrees with the convolution over random weights") {
    std::mt19937 rng(66110);
    std::uniform_int_distribution<int> entry(0, 6);
    std::uniform_real_distribution<double> lam_pick(0.1, 0.9);
    for (int64_t d : {2, 3, 4, 5, 8, 9}) {
        const int p = d == 4 || d == 8 ? 2 : (d == 9 ? 3 : static_cast<int>(d));
        const FieldCtxPtr ctx = field_for_d(static_cast<int>(d));
        for (int trial = 0; trial < 12; ++trial) {
            WeightVector w(p);
            for (auto& x : w.w) x = entry(rng);
            const double lam = lam_pick(rng);

            std::vector<NoiseChannel<double>> chans;
            for (int a = 0; a < p; ++a)
                for (int b = 0; b < p; ++b) {
                    if ((a != 0 || b != 0) && w.at(a, b) > 0)
                        chans.push_back(middle_map_channel(
                            ctx, 1, 2, a, b, detail::int_pow(lam, w.at(a, b))));
                }
            chans.push_back(edge_map_channel(ctx, 1, 2, lam));
            chans.push_back(edge_map_channel(ctx, 1, 2, lam));

            WeightedGraph g(ctx);
            g.add_vertex(1);
            g.add_vertex(2);
            g.set_edge(1, 2, ctx->one());
            const double convolved = fidelity_of(chans, g);
            const double analytic = analytic_fidelity(w, lam, d);
            REQUIRE_THAT(analytic, Catch::Matchers::WithinAbs(convolved, 1e-12));
        }
    }
}

TEST_CASE("order sensitivity exists on the five-vertex qubit chain") {
    const FieldCtxPtr ctx = FieldCtx::make(2, 1);
    std::set<std::vector<long long>> distinct;
    std::vector<int> mids{2, 3, 4};
    std::sort(mids.begin(), mids.end());
    do {
        const ChainResult res = run_chain(5, ctx, Rational(1, 2), make_order(mids));
        distinct.insert(res.weights.w);
    } while (std::next_permutation(mids.begin(), mids.end()));
    REQUIRE(distinct.size() >= 2);
}

TEST_CASE("full pipeline fidelity matches the dense oracle") {
    std::mt19937 rng(24680);
    const Rational lam(3, 5);
    const double lam_d = 0.6;
    struct Config {
        int d, N;
    };
    for (const Config& cfg : {Config{2, 3}, Config{2, 4}, Config{2, 5}, Config{3, 3},
                              Config{3, 4}, Config{3, 5}, Config{5, 3}}) {
        const FieldCtxPtr ctx = field_for_d(cfg.d);
        const StrategyOrder order =
            cfg.N >= 4 && cfg.d == 2 ? random_order(cfg.N, rng) : StrategyOrder::side_to_side(cfg.N);
        const ChainResult res = run_chain(cfg.N, ctx, lam, order);
        const double f_nsf = to_double(fidelity_of(res.state.channels, res.state.graph));
        const double f_oracle = oracle_chain_fidelity(cfg.N, ctx, lam_d, res, order);
        REQUIRE_THAT(f_nsf, Catch::Matchers::WithinAbs(f_oracle, 1e-9));
        const double f_analytic = analytic_fidelity(res.weights, lam_d, ctx->d());
        REQUIRE_THAT(f_analytic, Catch::Matchers::WithinAbs(f_oracle, 1e-9));
    }
}

TEST_CASE("bell chain sweep") {
    SECTION("noiseless parameters stay at fidelity one") {
        const auto rows = bell_chain_sweep(10, 2, 1, 4, 1.0, 1.0, Scaling::Choi);
        REQUIRE(rows.size() == 4);
        for (const auto& row : rows) {
            REQUIRE(row.fidelity == 1.0);
            REQUIRE(row.adapted == 1.0);
        }
    }
    SECTION("rows carry the sweep parameters") {
        const auto rows = bell_chain_sweep(12, 3, 1, 3, 0.99, 0.9, Scaling::Linear);
        REQUIRE(rows.size() == 3);
        for (size_t i = 0; i < rows.size(); ++i) {
            const int m = static_cast<int>(i) + 1;
            REQUIRE(rows[i].p == 3);
            REQUIRE(rows[i].m == m);
            int64_t d = 1;
            for (int k = 0; k < m; ++k) d *= 3;
            REQUIRE(rows[i].d == d);
            REQUIRE(rows[i].N == 12);
            REQUIRE_THAT(rows[i].q_d, Catch::Matchers::WithinAbs(q_d_linear(0.99, d), 1e-15));
            REQUIRE_THAT(rows[i].adapted,
                         Catch::Matchers::WithinAbs(std::pow(rows[i].fidelity, 1.0 / m), 1e-12));
        }
    }
    SECTION("explicit side-to-side order matches the closed-form path") {
        const StrategyOrder order = StrategyOrder::side_to_side(8);
        const auto a = bell_chain_sweep(8, 2, 1, 3, 0.995, 0.97, Scaling::Choi);
        const auto b = bell_chain_sweep(8, 2, 1, 3, 0.995, 0.97, Scaling::Choi, &order);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].fidelity == b[i].fidelity);
    }
    SECTION("input validation") {
        REQUIRE_THROWS_AS(bell_chain_sweep(2, 2, 1, 3, 0.9, 0.9, Scaling::Choi),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(bell_chain_sweep(5, 4, 1, 3, 0.9, 0.9, Scaling::Choi),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(bell_chain_sweep(5, 2, 2, 1, 0.9, 0.9, Scaling::Choi),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(bell_chain_sweep(5, 2, 1, 3, 1.2, 0.9, Scaling::Choi),
                          std::invalid_argument);
    }
}

TEST_CASE("edge channels returned by run_chain have the edge-map form") {
    const FieldCtxPtr ctx = FieldCtx::make(3, 1);
    const Rational lam(1, 4);
    const ChainResult res = run_chain(4, ctx, lam, StrategyOrder::side_to_side(4));
    const auto expect = edge_map_channel(ctx, 1, 4, lam);
    REQUIRE(detail::channels_equal(compact(res.edge_channels.first), expect));
    REQUIRE(detail::channels_equal(compact(res.edge_channels.second), expect));
}
