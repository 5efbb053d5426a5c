#pragma once

// Z-type noise tracking: sparse noise vectors, Pauli-diagonal channels, the
// per-operation update rules, and the engine loop that co-evolves a graph
// with its attached channels.  Probabilities are a template parameter: exact
// rationals for bookkeeping-sensitive work, doubles for large sweeps.

#include "qnsf/field.hpp"
#include "qnsf/graph.hpp"
#include "qnsf/measure.hpp"

#include <boost/container/flat_map.hpp>
#include <boost/container/flat_set.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qnsf {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

// Sparse vector of Z exponents, one per vertex.  Zero entries are dropped on
// every mutation, so equality and ordering see a canonical form.
struct ZNoiseVector {
    using Entries = boost::container::flat_map<int, FieldElement>;
    Entries entries;

    bool is_identity() const { return entries.empty(); }
    bool has(int v) const { return entries.count(v) != 0; }

    FieldElement get(int v, const FieldCtx& ctx) const {
        auto it = entries.find(v);
        return it == entries.end() ? ctx.zero() : it->second;
    }
    void set(int v, const FieldElement& x) {
        if (x.is_zero())
            entries.erase(v);
        else
            entries.insert_or_assign(v, x);
    }
    void add(int v, const FieldElement& x) {
        if (x.is_zero()) return;
        auto it = entries.find(v);
        if (it == entries.end()) {
            entries.emplace(v, x);
            return;
        }
        it->second = it->second + x;
        if (it->second.is_zero()) entries.erase(it);
    }
    void add(const ZNoiseVector& other) {
        for (const auto& [v, x] : other.entries) add(v, x);
    }
    template <class Row>
    void add_scaled(const Row& row, const FieldElement& c) {
        if (c.is_zero()) return;
        for (const auto& [u, w] : row) add(u, c * w);
    }
    void drop(int v) { entries.erase(v); }

    // Canonical key for use in ordered containers.
    using Key = std::vector<std::pair<int, int64_t>>;
    Key key() const {
        Key k;
        k.reserve(entries.size());
        for (const auto& [v, x] : entries) k.emplace_back(v, x.index());
        return k;
    }

    friend bool operator==(const ZNoiseVector& a, const ZNoiseVector& b) {
        if (a.entries.size() != b.entries.size()) return false;
        auto ib = b.entries.begin();
        for (const auto& [v, x] : a.entries) {
            if (ib->first != v || ib->second.index() != x.index()) return false;
            ++ib;
        }
        return true;
    }
    friend bool operator<(const ZNoiseVector& a, const ZNoiseVector& b) {
        auto ia = a.entries.begin(), ib = b.entries.begin();
        for (; ia != a.entries.end() && ib != b.entries.end(); ++ia, ++ib) {
            if (ia->first != ib->first) return ia->first < ib->first;
            if (ia->second.index() != ib->second.index()) return ia->second.index() < ib->second.index();
        }
        return ia == a.entries.end() && ib != b.entries.end();
    }
};

template <class P>
struct NoiseTerm {
    P p{};
    ZNoiseVector op;
};

template <class P>
struct NoiseChannel {
    std::vector<NoiseTerm<P>> terms;

    P total() const {
        P t{};
        for (const auto& term : terms) t += term.p;
        return t;
    }
};

// Merge terms with equal noise vectors (summing probabilities) and drop
// zero-probability terms; the result is sorted, hence canonical.
template <class P>
void compact_inplace(NoiseChannel<P>& ch) {
    std::sort(ch.terms.begin(), ch.terms.end(),
              [](const NoiseTerm<P>& a, const NoiseTerm<P>& b) { return a.op < b.op; });
    size_t out = 0;
    for (size_t i = 0; i < ch.terms.size();) {
        size_t j = i + 1;
        while (j < ch.terms.size() && ch.terms[j].op == ch.terms[i].op) {
            ch.terms[i].p += ch.terms[j].p;
            ++j;
        }
        if (!(ch.terms[i].p == P{})) {
            if (out != i) ch.terms[out] = std::move(ch.terms[i]);
            ++out;
        }
        i = j;
    }
    ch.terms.resize(out);
}

template <class P>
NoiseChannel<P> compact(NoiseChannel<P> ch) {
    compact_inplace(ch);
    return ch;
}

// Product channel: noise vectors add, probabilities multiply.
template <class P>
NoiseChannel<P> convolve(const NoiseChannel<P>& a, const NoiseChannel<P>& b) {
    NoiseChannel<P> out;
    out.terms.reserve(a.terms.size() * b.terms.size());
    for (const auto& ta : a.terms)
        for (const auto& tb : b.terms) {
            NoiseTerm<P> t{ta.p * tb.p, ta.op};
            t.op.add(tb.op);
            out.terms.push_back(std::move(t));
        }
    compact_inplace(out);
    return out;
}

// X_v(x)|G> = Z(-x A_v)|G>, so a Weyl word (z, x) acts on a graph state as
// the Z word z - sum_v x_v A_v (up to phase, which the tracking layer drops).
inline ZNoiseVector translate_to_z(const WeightedGraph& g, const ZNoiseVector& z, const ZNoiseVector& x) {
    ZNoiseVector out = z;
    for (const auto& [v, xv] : x.entries) out.add_scaled(g.row(v), -xv);
    return out;
}

template <class P>
NoiseChannel<P> depolarizing_channel(const WeightedGraph& g, int v, const P& lambda) {
    if (lambda < P{} || P{1} < lambda)
        throw std::invalid_argument("depolarizing_channel: lambda outside [0, 1]");
    if (!g.has_vertex(v))
        throw std::invalid_argument("depolarizing_channel: unknown vertex " + std::to_string(v));
    const FieldCtx& ctx = g.field();
    NoiseChannel<P> ch;
    ch.terms.push_back({lambda, {}});
    const P q = (P{1} - lambda) / P(ctx.d() * ctx.d());
    for (const auto& zz : ctx.elements())
        for (const auto& xx : ctx.elements()) {
            ZNoiseVector zvec, xvec;
            zvec.set(v, zz);
            xvec.set(v, xx);
            ch.terms.push_back({q, translate_to_z(g, zvec, xvec)});
        }
    compact_inplace(ch);
    return ch;
}

template <class P>
struct PauliTerm {
    P p{};
    ZNoiseVector z;
    ZNoiseVector x;
};

template <class P>
NoiseChannel<P> pauli_channel(const WeightedGraph& g, const std::vector<PauliTerm<P>>& weyl_terms) {
    NoiseChannel<P> ch;
    for (const auto& t : weyl_terms) {
        if (t.p < P{}) throw std::invalid_argument("pauli_channel: negative probability");
        for (const auto& [v, e] : t.z.entries)
            if (!g.has_vertex(v)) throw std::invalid_argument("pauli_channel: unknown vertex " + std::to_string(v));
        ch.terms.push_back({t.p, translate_to_z(g, t.z, t.x)});
    }
    compact_inplace(ch);
    if constexpr (std::is_same_v<P, Rational>) {
        if (ch.total() != P{1}) throw std::invalid_argument("pauli_channel: probabilities must sum to 1");
    } else {
        if (std::abs(to_double(ch.total()) - 1.0) > 1e-12)
            throw std::invalid_argument("pauli_channel: probabilities must sum to 1");
    }
    return ch;
}

// --- update rules -----------------------------------------------------------
//
// Each rule commutes a manipulation operator past Z(op), yielding a new Z
// word on the post-manipulation state; all rules use the graph as it is
// *before* the manipulation.

inline ZNoiseVector update_for_local_multiply(ZNoiseVector op, int v, const FieldElement& m) {
    if (m.is_zero()) throw std::invalid_argument("update_for_local_multiply: m must be nonzero");
    auto it = op.entries.find(v);
    if (it != op.entries.end()) it->second = m * it->second;
    return op;
}

inline ZNoiseVector update_for_local_complement(ZNoiseVector op, const WeightedGraph& g, int v,
                                                const FieldElement& m) {
    const FieldElement ov = op.get(v, g.field());
    if (!ov.is_zero()) op.add_scaled(g.row(v), m * ov);
    return op;
}

inline ZNoiseVector update_for_cz(ZNoiseVector op) { return op; }

namespace detail {

// Per-unit-exponent delta rows for a measurement update.  For a basis with
// z != 0 the noise at v picks up (x/z) * A_v.  For an X-type basis (z = 0)
// on a connected vertex, with A' = adj(G o_x v) and A'' = adj(tau_w0(r)(G o_x v)):
// noise at v picks up x * A''_v, and noise at w0 picks up
// r * A'_{w0} + r * A'_{w0,v} * A''_v.  Entries at v are omitted throughout
// since coordinate v is dropped afterwards.
struct MeasurementRows {
    bool x_type = false;
    int w0 = -1;
    WeightedGraph::Row dv;
    WeightedGraph::Row dw;
};

inline MeasurementRows measurement_update_rows(const WeightedGraph& g, const MeasurementSpec& spec) {
    MeasurementRows out;
    const FieldElement z = spec.basis.z, x = spec.basis.x;
    if (!z.is_zero()) {
        const FieldElement scale = x / z;
        if (!scale.is_zero())
            for (const auto& [u, w] : g.row(spec.v)) out.dv.emplace(u, scale * w);
        return out;
    }

    out.x_type = true;
    out.w0 = resolve_w0(g, spec);
    const WeightedGraph::Row& av = g.row(spec.v);
    const WeightedGraph::Row& aw = g.row(out.w0);
    const FieldElement apwv = x * aw.at(spec.v);  // A'_{w0,v}
    const FieldElement r = -(apwv.pow(2).inv());

    // A''_v on the survivors: A''_{v,w0} = A'_{v,w0}; elsewhere
    // A''_{v,u} = x*A_{v,u} + r*A'_{w0,v}*A_{w0,u}.
    WeightedGraph::Row a2v;
    a2v.emplace(out.w0, apwv);
    for (const auto& [u, w] : av)
        if (u != out.w0) a2v[u] = x * w;
    for (const auto& [u, w] : aw)
        if (u != spec.v) {
            const FieldElement c = a2v.count(u) ? a2v[u] : g.field().zero();
            const FieldElement nw = c + r * apwv * w;
            if (nw.is_zero())
                a2v.erase(u);
            else
                a2v[u] = nw;
        }

    for (const auto& [u, w] : a2v) {
        const FieldElement c = x * w;
        if (!c.is_zero()) out.dv.emplace(u, c);
    }
    for (const auto& [u, w] : aw)
        if (u != spec.v) out.dw.emplace(u, r * w);
    for (const auto& [u, w] : a2v) {
        const FieldElement c = r * apwv * w;
        auto it = out.dw.find(u);
        if (it == out.dw.end()) {
            if (!c.is_zero()) out.dw.emplace(u, c);
        } else {
            it->second = it->second + c;
            if (it->second.is_zero()) out.dw.erase(it);
        }
    }
    return out;
}

}  // namespace detail

inline ZNoiseVector update_for_measurement(ZNoiseVector op, const WeightedGraph& g,
                                           const MeasurementSpec& spec) {
    if (!g.has_vertex(spec.v))
        throw std::invalid_argument("update_for_measurement: unknown vertex " + std::to_string(spec.v));
    const FieldCtx& ctx = g.field();
    if (classify(g, spec.v, spec.basis) == RuleTag::ISOLATED) {
        if (op.has(spec.v))
            throw std::invalid_argument(
                "update_for_measurement: Z noise on an isolated vertex cannot cross an X-type measurement");
        return op;
    }
    const auto rows = detail::measurement_update_rows(g, spec);
    const FieldElement ov = op.get(spec.v, ctx);
    const FieldElement ow = rows.x_type ? op.get(rows.w0, ctx) : ctx.zero();
    if (!ov.is_zero()) op.add_scaled(rows.dv, ov);
    if (!ow.is_zero()) op.add_scaled(rows.dw, ow);
    op.drop(spec.v);
    return op;
}

// --- engine -----------------------------------------------------------------

struct ScriptOp {
    enum class Kind { LocalComplement, LocalMultiply, CZ, Measure };
    Kind kind = Kind::CZ;
    int v = 0;
    int u = 0;           // CZ partner
    FieldElement m;      // tau / local-multiply parameter, CZ weight
    MeasurementSpec spec;

    static ScriptOp local_complement(int v, FieldElement m) {
        ScriptOp o;
        o.kind = Kind::LocalComplement;
        o.v = v;
        o.m = std::move(m);
        return o;
    }
    static ScriptOp local_multiply(int v, FieldElement m) {
        ScriptOp o;
        o.kind = Kind::LocalMultiply;
        o.v = v;
        o.m = std::move(m);
        return o;
    }
    static ScriptOp cz(int u, int v, FieldElement c) {
        ScriptOp o;
        o.kind = Kind::CZ;
        o.u = u;
        o.v = v;
        o.m = std::move(c);
        return o;
    }
    static ScriptOp measure(MeasurementSpec s) {
        ScriptOp o;
        o.kind = Kind::Measure;
        o.v = s.v;
        o.spec = std::move(s);
        return o;
    }
};

template <class P>
struct TrackedState {
    WeightedGraph graph;
    std::vector<NoiseChannel<P>> channels;
    std::vector<CorrectionRecord> corrections;
};

struct NsfStats {
    long long updates_last_op = 0;  // fresh (vertex, exponent) delta computations in the latest step
    long long updates_max = 0;
    bool within_bound = true;       // every step stayed <= d * n(pre-step vertices)
};

// Runs the script against the tracked state: per operation, every channel
// term is updated against the pre-operation graph, channels are compacted,
// and then the graph (and correction list, for measurements) advances.
// Per-step deltas are memoized by (vertex, exponent), so the number of fresh
// update computations per operation is at most d * n.
template <class P>
TrackedState<P> nsf_apply(TrackedState<P> state, const std::vector<ScriptOp>& script,
                          NsfStats* stats = nullptr) {
    if (stats) *stats = NsfStats{};

    // Per-channel vertex support lets untouched channels skip whole steps.
    std::vector<boost::container::flat_set<int>> support(state.channels.size());
    auto rebuild_support = [&](size_t i) {
        support[i].clear();
        for (const auto& t : state.channels[i].terms)
            for (const auto& [v, x] : t.op.entries) support[i].insert(v);
    };
    for (size_t i = 0; i < state.channels.size(); ++i) {
        compact_inplace(state.channels[i]);
        rebuild_support(i);
    }

    for (const ScriptOp& sop : script) {
        const WeightedGraph& g = state.graph;
        const long long bound = g.field().d() * static_cast<long long>(g.n());
        long long misses = 0;
        std::map<std::pair<int, int64_t>, ZNoiseVector> memo;
        auto delta_for = [&](int vert, const FieldElement& val, const WeightedGraph::Row& row,
                             const FieldElement& scale) -> const ZNoiseVector& {
            auto [it, fresh] = memo.try_emplace({vert, val.index()});
            if (fresh) {
                ++misses;
                it->second.add_scaled(row, val * scale);
            }
            return it->second;
        };

        switch (sop.kind) {
            case ScriptOp::Kind::LocalComplement: {
                const WeightedGraph::Row& row = g.row(sop.v);
                for (size_t i = 0; i < state.channels.size(); ++i) {
                    if (!support[i].contains(sop.v)) continue;
                    for (auto& term : state.channels[i].terms) {
                        const FieldElement ov = term.op.get(sop.v, g.field());
                        if (!ov.is_zero()) term.op.add(delta_for(sop.v, ov, row, sop.m));
                    }
                    compact_inplace(state.channels[i]);
                    rebuild_support(i);
                }
                state.graph = local_complement(std::move(state.graph), sop.v, sop.m);
                break;
            }
            case ScriptOp::Kind::LocalMultiply: {
                if (sop.m.is_zero())
                    throw std::invalid_argument("nsf_apply: local multiplication by zero");
                std::map<int64_t, FieldElement> scaled;
                for (size_t i = 0; i < state.channels.size(); ++i) {
                    if (!support[i].contains(sop.v)) continue;
                    for (auto& term : state.channels[i].terms) {
                        auto it = term.op.entries.find(sop.v);
                        if (it == term.op.entries.end()) continue;
                        auto [mit, fresh] = scaled.try_emplace(it->second.index());
                        if (fresh) {
                            ++misses;
                            mit->second = sop.m * it->second;
                        }
                        it->second = mit->second;
                    }
                    compact_inplace(state.channels[i]);
                }
                state.graph = local_multiply(std::move(state.graph), sop.v, sop.m);
                break;
            }
            case ScriptOp::Kind::CZ:
                state.graph = apply_cz(std::move(state.graph), sop.u, sop.v, sop.m);
                break;
            case ScriptOp::Kind::Measure: {
                const MeasurementSpec& spec = sop.spec;
                if (!g.has_vertex(spec.v))
                    throw std::invalid_argument("nsf_apply: unknown vertex " + std::to_string(spec.v));
                if (classify(g, spec.v, spec.basis) == RuleTag::ISOLATED) {
                    for (size_t i = 0; i < state.channels.size(); ++i)
                        if (support[i].contains(spec.v))
                            throw std::invalid_argument(
                                "nsf_apply: Z noise on an isolated vertex cannot cross an X-type "
                                "measurement");
                } else {
                    const auto rows = detail::measurement_update_rows(g, spec);
                    const FieldElement one = g.field().one();
                    for (size_t i = 0; i < state.channels.size(); ++i) {
                        const bool tv = support[i].contains(spec.v);
                        const bool tw = rows.x_type && support[i].contains(rows.w0);
                        if (!tv && !tw) continue;
                        for (auto& term : state.channels[i].terms) {
                            const FieldElement ov = term.op.get(spec.v, g.field());
                            const FieldElement ow =
                                rows.x_type ? term.op.get(rows.w0, g.field()) : g.field().zero();
                            if (!ov.is_zero()) term.op.add(delta_for(spec.v, ov, rows.dv, one));
                            if (!ow.is_zero()) term.op.add(delta_for(rows.w0, ow, rows.dw, one));
                            term.op.drop(spec.v);
                        }
                        compact_inplace(state.channels[i]);
                        rebuild_support(i);
                    }
                }
                MeasureResult res = measure(std::move(state.graph), spec);
                state.graph = std::move(res.graph);
                state.corrections.push_back(std::move(res.correction));
                break;
            }
        }

        if (stats) {
            stats->updates_last_op = misses;
            stats->updates_max = std::max(stats->updates_max, misses);
            if (misses > bound) stats->within_bound = false;
        }
    }
    return state;
}

}  // namespace qnsf
