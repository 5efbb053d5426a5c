#pragma once

// Graph-level rules for measuring a local Weyl operator W_v(z,x) with
// outcome b: the post-measurement graph plus a correction record naming the
// local Clifford that maps the result back to graph-state form.

#include "qnsf/graph.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qnsf {

struct WeylIndex {
    FieldElement z;
    FieldElement x;
};

struct MeasurementSpec {
    int v = 0;
    WeylIndex basis;
    FieldElement b;
    std::optional<int> w0;  // neighbor choice, X-type bases only
};

enum class RuleTag { Z, Y_TYPE, X, X_M, W_NM, ISOLATED };

inline const char* to_string(RuleTag t) {
    switch (t) {
        case RuleTag::Z: return "Z";
        case RuleTag::Y_TYPE: return "Y_TYPE";
        case RuleTag::X: return "X";
        case RuleTag::X_M: return "X_M";
        case RuleTag::W_NM: return "W_NM";
        case RuleTag::ISOLATED: return "ISOLATED";
    }
    return "?";
}

inline RuleTag classify(const WeylIndex& basis) {
    const bool z0 = basis.z.is_zero(), x0 = basis.x.is_zero();
    if (z0 && x0) throw std::invalid_argument("classify: (0,0) is not a measurement basis");
    if (!z0) {
        const bool z_is_one = basis.z == basis.z.ctx().one();
        if (x0) return z_is_one ? RuleTag::Z : RuleTag::W_NM;
        return z_is_one ? RuleTag::Y_TYPE : RuleTag::W_NM;
    }
    return basis.x == basis.x.ctx().one() ? RuleTag::X : RuleTag::X_M;
}

inline RuleTag classify(const WeightedGraph& g, int v, const WeylIndex& basis) {
    RuleTag t = classify(basis);
    if (basis.z.is_zero() && g.is_isolated(v)) return RuleTag::ISOLATED;
    return t;
}

// A single local gate in a correction: R_v(m) = H_v S_v(m) H_v^dag, a
// multi-vertex S or Z word with per-vertex parameters, or M_v(m).  Gates are
// listed in application order (front acts on the state first).
struct GateDesc {
    enum class Kind { R, S, SVec, ZVec, M };
    Kind kind;
    int v = 0;
    FieldElement param;
    std::map<int, FieldElement> vec;
    // d = 2 only: explicit Z4 exponents for SVec parameters.  Over F_2 the
    // field datum cannot distinguish S = diag(1, i) from its adjoint; the
    // measurement rules record which lift they mean.
    std::map<int, int> vec_z4;

    static GateDesc r(int v, FieldElement m) { return {Kind::R, v, std::move(m), {}, {}}; }
    static GateDesc s(int v, FieldElement l) { return {Kind::S, v, std::move(l), {}, {}}; }
    static GateDesc m(int v, FieldElement l) { return {Kind::M, v, std::move(l), {}, {}}; }
    static GateDesc s_vec(std::map<int, FieldElement> p, std::map<int, int> z4 = {}) {
        return {Kind::SVec, 0, {}, std::move(p), std::move(z4)};
    }
    static GateDesc z_vec(std::map<int, FieldElement> p) { return {Kind::ZVec, 0, {}, std::move(p), {}}; }
};

struct CorrectionRecord {
    std::vector<GateDesc> gates;
    bool isolated = false;

    void push(GateDesc g) {
        // Drop gates that are identities so records stay minimal.
        switch (g.kind) {
            case GateDesc::Kind::R:
            case GateDesc::Kind::S:
                if (g.param.is_zero()) return;
                break;
            case GateDesc::Kind::M:
                if (g.param == g.param.ctx().one()) return;
                break;
            case GateDesc::Kind::SVec:
            case GateDesc::Kind::ZVec: {
                std::erase_if(g.vec, [](const auto& kv) { return kv.second.is_zero(); });
                std::erase_if(g.vec_z4, [&](const auto& kv) { return !g.vec.count(kv.first); });
                if (g.vec.empty()) return;
                break;
            }
        }
        gates.push_back(std::move(g));
    }
};

struct MeasureResult {
    WeightedGraph graph;
    CorrectionRecord correction;
    RuleTag rule;
    // Resolved X-type geometry, recorded for the noise update and for tests.
    std::optional<int> w0;
    std::optional<FieldElement> r;
};

namespace detail {

inline int resolve_w0(const WeightedGraph& g, const MeasurementSpec& spec) {
    if (spec.w0) {
        if (!g.has_vertex(*spec.w0) || g.weight(spec.v, *spec.w0).is_zero())
            throw std::invalid_argument("measure: neighbor choice w0 is not a neighbor of v");
        return *spec.w0;
    }
    return g.row(spec.v).begin()->first;
}

}  // namespace detail

inline MeasureResult measure(WeightedGraph g, const MeasurementSpec& spec) {
    const auto& ctx = g.field();
    if (!g.has_vertex(spec.v))
        throw std::invalid_argument("measure: unknown vertex " + std::to_string(spec.v));
    const FieldElement z = spec.basis.z, x = spec.basis.x;
    if (z.is_zero() && x.is_zero())
        throw std::invalid_argument("measure: (0,0) is not a measurement basis");

    MeasureResult out;
    out.rule = classify(g, spec.v, spec.basis);

    if (!z.is_zero()) {
        // W(n,m) branch, n = z, m = x: G' = tau_v(m/n)(G) o_{n^-1} v \ v.
        // The local multiplication only touches row v, which is about to be
        // deleted, so it survives solely in the correction bookkeeping.
        const WeightedGraph::Row a_v = g.row(spec.v);
        const FieldElement mn = x / z;
        const FieldElement n_inv = z.inv();
        out.graph = delete_vertex(local_complement(std::move(g), spec.v, mn), spec.v);

        std::map<int, FieldElement> z_params, s_params;
        for (const auto& [u, w] : a_v) {
            s_params.emplace(u, mn * w * w);
            z_params.emplace(u, spec.b * n_inv * w);
        }
        out.correction.push(GateDesc::z_vec(std::move(z_params)));
        out.correction.push(GateDesc::s_vec(std::move(s_params)));
        return out;
    }

    if (g.is_isolated(spec.v)) {
        out.graph = delete_vertex(std::move(g), spec.v);
        out.correction.isolated = true;
        return out;
    }

    // X-type branch, basis (0,x): local multiplication by x, then local
    // complementations at the chosen neighbor w0 and at v.
    const int w0 = detail::resolve_w0(g, spec);
    WeightedGraph h = local_multiply(std::move(g), spec.v, x);
    const FieldElement r = -(h.weight(w0, spec.v).pow(2).inv());
    const WeightedGraph::Row a_w0 = h.row(w0);
    WeightedGraph h2 = local_complement(std::move(h), w0, r);
    const WeightedGraph::Row a2_v = h2.row(spec.v);
    out.graph = delete_vertex(local_complement(std::move(h2), spec.v, ctx.one()), spec.v);
    out.w0 = w0;
    out.r = r;

    // At d = 2 the S gates need explicit Z4 exponents: the S(A''^2) factors
    // take the canonical lift, while the S(r*A~^2) factors arise from an
    // inverse local-complementation unitary and take the conjugate lift.
    const bool z4 = ctx.p() == 2 && ctx.m() == 1;
    std::map<int, FieldElement> z_params, s_params, s_tilde;
    std::map<int, int> s_params_z4, s_tilde_z4;
    for (const auto& [u, w] : a2_v) {
        if (u == spec.v) continue;
        s_params.emplace(u, w * w);
        z_params.emplace(u, spec.b * w);
        if (z4) s_params_z4.emplace(u, static_cast<int>((w * w).index()));
    }
    for (const auto& [u, w] : a_w0) {
        if (u == spec.v) continue;
        s_tilde.emplace(u, r * w * w);
        if (z4) s_tilde_z4.emplace(u, (4 - static_cast<int>((r * w * w).index())) % 4);
    }
    out.correction.push(GateDesc::z_vec(std::move(z_params)));
    out.correction.push(GateDesc::s_vec(std::move(s_params), std::move(s_params_z4)));
    out.correction.push(GateDesc::s_vec(std::move(s_tilde), std::move(s_tilde_z4)));
    out.correction.push(GateDesc::r(w0, -r));
    return out;
}

}  // namespace qnsf
