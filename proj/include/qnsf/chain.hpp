#pragma once

// Linear-cluster-to-Bell-pair pipeline: measurement-order strategies, the
// classification of the surviving noise channels into middle/edge map form,
// weight vectors, and the closed-form fidelity of the resulting pair.

#include "qnsf/fidelity.hpp"
#include "qnsf/field.hpp"
#include "qnsf/graph.hpp"
#include "qnsf/measure.hpp"
#include "qnsf/noise.hpp"

#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qnsf {

// Permutation sigma of the middle labels {2..N-1}; measurements run from the
// back of sigma to the front.
struct StrategyOrder {
    std::vector<int> sigma;

    static StrategyOrder side_to_side(int N) {
        StrategyOrder o;
        for (int v = 2; v <= N - 1; ++v) o.sigma.push_back(v);
        return o;
    }

    std::vector<int> measurement_sequence() const { return {sigma.rbegin(), sigma.rend()}; }

    void validate(int N) const {
        if (N < 3) throw std::invalid_argument("StrategyOrder: chain needs at least 3 vertices");
        if (static_cast<int>(sigma.size()) != N - 2)
            throw std::invalid_argument("StrategyOrder: order must list every middle vertex once");
        std::vector<char> seen(static_cast<size_t>(N) + 1, 0);
        for (int v : sigma) {
            if (v < 2 || v > N - 1 || seen[static_cast<size_t>(v)])
                throw std::invalid_argument("StrategyOrder: not a permutation of {2..N-1}");
            seen[static_cast<size_t>(v)] = 1;
        }
    }
};

struct MiddleMap {
    int alpha = 0;
    int beta = 0;
    long long w = 1;
};

// Per-strategy tally of how often each middle map M(alpha, beta) acts on the
// final pair; p*p entries indexed by alpha*p + beta.
struct WeightVector {
    int p = 0;
    std::vector<long long> w;

    WeightVector() = default;
    explicit WeightVector(int prime) : p(prime), w(static_cast<size_t>(prime) * prime, 0) {
        if (prime < 2) throw std::invalid_argument("WeightVector: p must be at least 2");
    }

    size_t index(int alpha, int beta) const {
        if (alpha < 0 || alpha >= p || beta < 0 || beta >= p)
            throw std::out_of_range("WeightVector: index outside GF(p) x GF(p)");
        return static_cast<size_t>(alpha) * p + static_cast<size_t>(beta);
    }
    long long& at(int alpha, int beta) { return w[index(alpha, beta)]; }
    long long at(int alpha, int beta) const { return w[index(alpha, beta)]; }
    long long total() const { return std::accumulate(w.begin(), w.end(), 0LL); }

    friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

// M(alpha, beta) with parameter lambda: keeps the identity with weight
// lambda + (1-lambda)/d and spreads (1-lambda)/d over Z_first(alpha u)
// Z_last(beta u) for nonzero u.
template <class P>
NoiseChannel<P> middle_map_channel(const FieldCtxPtr& ctx, int first, int last, int alpha,
                                   int beta, const P& lambda) {
    NoiseChannel<P> ch;
    const P base = (P(1) - lambda) / P(ctx->d());
    ch.terms.push_back({lambda + base, {}});
    const FieldElement a = ctx->scalar(alpha);
    const FieldElement b = ctx->scalar(beta);
    for (int64_t u = 1; u < ctx->d(); ++u) {
        const FieldElement e = ctx->element(u);
        ZNoiseVector op;
        if (const FieldElement za = a * e; !za.is_zero()) op.set(first, za);
        if (const FieldElement zb = b * e; !zb.is_zero()) op.set(last, zb);
        ch.terms.push_back({base, std::move(op)});
    }
    return compact(std::move(ch));
}

// Edge map with parameter lambda: identity weight lambda plus a uniform
// (1-lambda)/d^2 over every Z_first(z) Z_last(x) word.
template <class P>
NoiseChannel<P> edge_map_channel(const FieldCtxPtr& ctx, int first, int last, const P& lambda) {
    NoiseChannel<P> ch;
    const P spread = (P(1) - lambda) / P(ctx->d() * ctx->d());
    for (int64_t z = 0; z < ctx->d(); ++z)
        for (int64_t x = 0; x < ctx->d(); ++x) {
            ZNoiseVector op;
            if (z != 0) op.set(first, ctx->element(z));
            if (x != 0) op.set(last, ctx->element(x));
            ch.terms.push_back({z == 0 && x == 0 ? lambda + spread : spread, std::move(op)});
        }
    return compact(std::move(ch));
}

namespace detail {

template <class P>
bool channels_equal(const NoiseChannel<P>& a, const NoiseChannel<P>& b) {
    if (a.terms.size() != b.terms.size()) return false;
    for (size_t i = 0; i < a.terms.size(); ++i)
        if (!(a.terms[i].p == b.terms[i].p) || !(a.terms[i].op == b.terms[i].op)) return false;
    return true;
}

inline std::string describe_channel(const NoiseChannel<Rational>& ch) {
    std::string s = "{";
    for (const auto& t : ch.terms) {
        s += " " + t.p.str() + ":[";
        for (const auto& [v, e] : t.op.entries)
            s += std::to_string(v) + "^" + std::to_string(e.index()) + " ";
        s += "]";
    }
    return s + " }";
}

}  // namespace detail

// Structural match against the middle-map family; probabilities are compared
// exactly, so a mismatch means the update rules produced something outside the
// derived form.
inline MiddleMap classify_middle(const NoiseChannel<Rational>& ch, const FieldCtxPtr& ctx,
                                 int first, int last, const Rational& lambda) {
    const NoiseChannel<Rational> got = compact(ch);
    std::vector<std::pair<int, int>> candidates{{0, 0}, {0, 1}};
    for (int beta = 0; beta < ctx->p(); ++beta) candidates.emplace_back(1, beta);
    for (const auto& [a, b] : candidates) {
        if (detail::channels_equal(got, middle_map_channel(ctx, first, last, a, b, lambda)))
            return {a, b, 1};
    }
    throw std::runtime_error("classify_middle: channel is not of the middle-map form: " +
                             detail::describe_channel(got));
}

inline void classify_edge(const NoiseChannel<Rational>& ch, const FieldCtxPtr& ctx, int first,
                          int last, const Rational& lambda) {
    const NoiseChannel<Rational> got = compact(ch);
    if (!detail::channels_equal(got, edge_map_channel(ctx, first, last, lambda)))
        throw std::runtime_error("classify_edge: channel is not of the edge-map form: " +
                                 detail::describe_channel(got));
}

struct ChainResult {
    TrackedState<Rational> state;
    WeightVector weights;
    std::vector<MiddleMap> middle_maps;  // indexed by middle vertex label - 2
    std::pair<NoiseChannel<Rational>, NoiseChannel<Rational>> edge_channels;
};

// Full pipeline: linear cluster with a depolarizing channel on every vertex,
// W(1,1) measurements on the middle vertices in the given order, then exact
// classification of every surviving channel.
inline ChainResult run_chain(int N, const FieldCtxPtr& ctx, const Rational& lambda,
                             const StrategyOrder& order) {
    order.validate(N);
    if (lambda < 0 || lambda > 1)
        throw std::invalid_argument("run_chain: lambda must lie in [0, 1]");

    WeightedGraph g = linear_cluster(ctx, N);
    TrackedState<Rational> st;
    for (int v = 1; v <= N; ++v) st.channels.push_back(depolarizing_channel(g, v, lambda));
    st.graph = std::move(g);

    std::vector<ScriptOp> script;
    for (int label : order.measurement_sequence()) {
        MeasurementSpec spec;
        spec.v = label;
        spec.basis = {ctx->one(), ctx->one()};
        spec.b = ctx->zero();
        script.push_back(ScriptOp::measure(spec));
    }

    ChainResult out;
    out.state = nsf_apply(std::move(st), script);
    out.weights = WeightVector(ctx->p());

    const int first = 1, last = N;
    for (int v = 2; v <= N - 1; ++v) {
        const MiddleMap mm =
            classify_middle(out.state.channels[static_cast<size_t>(v - 1)], ctx, first, last, lambda);
        out.weights.at(mm.alpha, mm.beta) += 1;
        out.middle_maps.push_back(mm);
    }
    classify_edge(out.state.channels.front(), ctx, first, last, lambda);
    classify_edge(out.state.channels.back(), ctx, first, last, lambda);
    out.edge_channels = {out.state.channels.front(), out.state.channels.back()};
    return out;
}

// Closed form for the right-to-left strategy: with n = N-2 = m p + s the
// alpha = 1 block reads [m, m+1 (s times), m (p-1-s times)] and every other
// entry is zero.
inline WeightVector side_to_side_weights(int N, int p) {
    if (N < 3) throw std::invalid_argument("side_to_side_weights: chain needs at least 3 vertices");
    WeightVector w(p);
    const long long n = N - 2;
    const long long m = n / p;
    const long long s = n % p;
    for (int beta = 0; beta < p; ++beta)
        w.at(1, beta) = m + (beta >= 1 && beta <= s ? 1 : 0);
    return w;
}

namespace detail {

inline int prime_inverse(int a, int p) {
    for (int x = 1; x < p; ++x)
        if (a * x % p == 1) return x;
    throw std::invalid_argument("prime_inverse: not invertible");
}

// Scale (alpha, beta) != (0,0) so its first nonzero coordinate is one; scalar
// multiples label the same map because u runs over the whole field.
inline std::pair<int, int> canonical_pair(int alpha, int beta, int p) {
    if (alpha == 0 && beta == 0) return {0, 0};
    if (alpha == 0) return {0, 1};
    return {1, beta * prime_inverse(alpha, p) % p};
}

template <class P>
P int_pow(P base, long long e) {
    P r(1);
    while (e > 0) {
        if (e & 1) r = r * base;
        base = base * base;
        e >>= 1;
    }
    return r;
}

}  // namespace detail

// Closed-form fidelity of the final pair for a given weight vector: the maps
// are composed symbolically in the basis {rho', Sigma(alpha,beta), Sigma},
// then only the identity component survives the overlap.
template <class P>
P analytic_fidelity(const WeightVector& w, const P& lambda, int64_t d) {
    if (w.p < 2 || w.w.size() != static_cast<size_t>(w.p) * w.p)
        throw std::invalid_argument("analytic_fidelity: malformed weight vector");
    int64_t q = d;
    while (q > 1 && q % w.p == 0) q /= w.p;
    if (d < 2 || q != 1)
        throw std::invalid_argument("analytic_fidelity: d must be a power of p");

    std::map<std::pair<int, int>, long long> merged;
    for (int a = 0; a < w.p; ++a)
        for (int b = 0; b < w.p; ++b) {
            const long long cnt = w.at(a, b);
            if (cnt < 0) throw std::invalid_argument("analytic_fidelity: negative weight");
            if (cnt == 0) continue;
            const auto key = detail::canonical_pair(a, b, w.p);
            if (key == std::pair<int, int>{0, 0}) continue;  // M(0,0) is the identity map
            merged[key] += cnt;
        }

    const P dd(d);
    P c_rho(1);
    P c_sum(0);
    std::map<std::pair<int, int>, P> c_sig;

    for (const auto& [key, cnt] : merged) {
        const P mu = detail::int_pow(lambda, cnt);
        const P gain = (P(1) - mu) / dd;
        const P rho_old = c_rho;
        for (auto& [other, c] : c_sig) {
            if (other == key) continue;
            c_sum = c_sum + gain * c;
            c = mu * c;
        }
        c_sig[key] = c_sig[key] + gain * rho_old;
        c_rho = mu * rho_old;
    }

    // Both edge maps at once: their composition is a single edge map with
    // parameter lambda^2.
    const P mu_e = lambda * lambda;
    c_sum = c_sum + (P(1) - mu_e) / (dd * dd) * c_rho;
    for (auto& [key, c] : c_sig) {
        c_sum = c_sum + (P(1) - mu_e) / dd * c;
        c = mu_e * c;
    }
    c_rho = mu_e * c_rho;

    P f = c_rho + c_sum;
    for (const auto& [key, c] : c_sig) f = f + c;
    return f;
}

enum class Scaling { Choi, Linear, Quadratic };

inline const char* to_string(Scaling s) {
    switch (s) {
        case Scaling::Choi: return "choi";
        case Scaling::Linear: return "linear";
        case Scaling::Quadratic: return "quadratic";
    }
    throw std::invalid_argument("to_string: unknown scaling");
}

inline Scaling scaling_from_string(const std::string& s) {
    if (s == "choi") return Scaling::Choi;
    if (s == "linear") return Scaling::Linear;
    if (s == "quadratic") return Scaling::Quadratic;
    throw std::invalid_argument("scaling: expected one of choi, linear, quadratic");
}

inline double q_d_scaled(Scaling scaling, double q2, int p, int m) {
    int64_t d = 1;
    for (int i = 0; i < m; ++i) d *= p;
    switch (scaling) {
        case Scaling::Choi: return q_d_choi(q2, m);
        case Scaling::Linear: return q_d_linear(q2, d);
        case Scaling::Quadratic: return q_d_quadratic(q2, d);
    }
    throw std::invalid_argument("q_d_scaled: unknown scaling");
}

// The weight vector of a strategy depends only on N, p and the order, never
// on the extension degree, so one m = 1 run covers every dimension p^m.
inline WeightVector chain_weights(int N, int p, const StrategyOrder& order) {
    return run_chain(N, FieldCtx::make(p, 1), Rational(1, 2), order).weights;
}

struct SweepRow {
    int p = 0;
    int m = 0;
    int64_t d = 0;
    int N = 0;
    double r = 0;
    double q2 = 0;
    double q_d = 0;
    Scaling scaling = Scaling::Choi;
    double fidelity = 0;
    double adapted = 0;
};

inline std::vector<SweepRow> bell_chain_sweep(int N, int p, int m_lo, int m_hi, double q2,
                                              double r, Scaling scaling,
                                              const StrategyOrder* order = nullptr) {
    if (N < 3) throw std::invalid_argument("bell_chain_sweep: chain needs at least 3 vertices");
    if (!detail::is_prime(p)) throw std::invalid_argument("bell_chain_sweep: p must be prime");
    if (m_lo < 1 || m_hi < m_lo) throw std::invalid_argument("bell_chain_sweep: bad m range");
    if (q2 < 0 || q2 > 1 || r < 0 || r > 1)
        throw std::invalid_argument("bell_chain_sweep: q2 and r must lie in [0, 1]");

    const WeightVector w = order ? chain_weights(N, p, *order) : side_to_side_weights(N, p);
    std::vector<SweepRow> rows;
    for (int m = m_lo; m <= m_hi; ++m) {
        SweepRow row;
        row.p = p;
        row.m = m;
        row.d = 1;
        for (int i = 0; i < m; ++i) row.d *= p;
        row.N = N;
        row.r = r;
        row.q2 = q2;
        row.q_d = q_d_scaled(scaling, q2, p, m);
        row.scaling = scaling;
        row.fidelity = analytic_fidelity(w, r * row.q_d, row.d);
        row.adapted = adapted_fidelity(row.fidelity, m);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qnsf
