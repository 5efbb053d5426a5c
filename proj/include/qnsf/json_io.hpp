#pragma once

// JSON serialization for fields, graphs, operation scripts, channels and
// correction records.  Elements are coefficient arrays (low degree first);
// graphs carry their field header so files are self-describing.

#include "qnsf/field.hpp"
#include "qnsf/graph.hpp"
#include "qnsf/measure.hpp"
#include "qnsf/noise.hpp"

#include "json.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qnsf {

using Json = nlohmann::json;

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

inline const Json& field_at(const Json& j, const char* key, const std::string& where) {
    require(j.is_object(), where + ": expected an object");
    const auto it = j.find(key);
    require(it != j.end(), where + ": missing key \"" + key + "\"");
    return *it;
}

}  // namespace detail

inline Json element_to_json(const FieldElement& e) { return Json(e.coeffs()); }

inline FieldElement element_from_json(const Json& j, const FieldCtxPtr& ctx,
                                      const std::string& where) {
    detail::require(j.is_array(), where + ": element must be a coefficient array");
    detail::require(static_cast<int>(j.size()) == ctx->m(),
                    where + ": element needs exactly " + std::to_string(ctx->m()) +
                        " coefficients");
    std::vector<int> coeffs;
    for (const auto& c : j) {
        detail::require(c.is_number_integer(), where + ": coefficients must be integers");
        const int v = c.get<int>();
        detail::require(v >= 0 && v < ctx->p(),
                        where + ": coefficients must lie in [0, " + std::to_string(ctx->p()) + ")");
        coeffs.push_back(v);
    }
    return ctx->from_coeffs(coeffs);
}

inline Json field_to_json(const FieldCtx& ctx) {
    return Json{{"p", ctx.p()}, {"m", ctx.m()}, {"irreducible", ctx.irreducible()}};
}

inline FieldCtxPtr field_from_json(const Json& j) {
    const std::string where = "field";
    const int p = detail::field_at(j, "p", where).get<int>();
    const int m = detail::field_at(j, "m", where).get<int>();
    if (j.contains("irreducible"))
        return FieldCtx::make(p, m, j.at("irreducible").get<std::vector<int>>());
    return FieldCtx::make(p, m);
}

inline Json graph_to_json(const WeightedGraph& g) {
    Json edges = Json::array();
    for (const auto& [u, v, w] : g.edges())
        edges.push_back(Json{{"u", u}, {"v", v}, {"w", element_to_json(w)}});
    return Json{{"field", field_to_json(*g.ctx())}, {"vertices", g.vertices()},
                {"edges", std::move(edges)}};
}

inline WeightedGraph graph_from_json(const Json& j) {
    const FieldCtxPtr ctx = field_from_json(detail::field_at(j, "field", "graph"));
    WeightedGraph g(ctx);
    const Json& verts = detail::field_at(j, "vertices", "graph");
    detail::require(verts.is_array(), "graph: \"vertices\" must be an array");
    std::set<int> seen;
    for (const auto& v : verts) {
        detail::require(v.is_number_integer(), "graph: vertex labels must be integers");
        const int label = v.get<int>();
        detail::require(seen.insert(label).second,
                        "graph: duplicate vertex label " + std::to_string(label));
        g.add_vertex(label);
    }
    const Json& edges = detail::field_at(j, "edges", "graph");
    detail::require(edges.is_array(), "graph: \"edges\" must be an array");
    std::set<std::pair<int, int>> edge_seen;
    for (const auto& e : edges) {
        const int u = detail::field_at(e, "u", "edge").get<int>();
        const int v = detail::field_at(e, "v", "edge").get<int>();
        detail::require(u != v, "edge: loops are not allowed");
        detail::require(seen.count(u) && seen.count(v),
                        "edge: endpoint not in the vertex list");
        const auto key = std::minmax(u, v);
        detail::require(edge_seen.insert(key).second, "edge: duplicate edge");
        g.set_edge(u, v, element_from_json(detail::field_at(e, "w", "edge"), ctx, "edge weight"));
    }
    return g;
}

inline std::vector<ScriptOp> script_from_json(const Json& j, const FieldCtxPtr& ctx) {
    detail::require(j.is_array(), "script: expected an array of operations");
    std::vector<ScriptOp> ops;
    for (const auto& entry : j) {
        const std::string op = detail::field_at(entry, "op", "script entry").get<std::string>();
        if (op == "measure") {
            MeasurementSpec spec;
            spec.v = detail::field_at(entry, "v", "measure").get<int>();
            spec.basis.z = element_from_json(detail::field_at(entry, "z", "measure"), ctx, "measure z");
            spec.basis.x = element_from_json(detail::field_at(entry, "x", "measure"), ctx, "measure x");
            spec.b = entry.contains("b")
                         ? element_from_json(entry.at("b"), ctx, "measure b")
                         : ctx->zero();
            if (entry.contains("w0")) spec.w0 = entry.at("w0").get<int>();
            ops.push_back(ScriptOp::measure(spec));
        } else if (op == "local_complement") {
            ops.push_back(ScriptOp::local_complement(
                detail::field_at(entry, "v", op).get<int>(),
                element_from_json(detail::field_at(entry, "m", op), ctx, op)));
        } else if (op == "local_multiply") {
            ops.push_back(ScriptOp::local_multiply(
                detail::field_at(entry, "v", op).get<int>(),
                element_from_json(detail::field_at(entry, "m", op), ctx, op)));
        } else if (op == "cz") {
            ops.push_back(ScriptOp::cz(detail::field_at(entry, "u", op).get<int>(),
                                       detail::field_at(entry, "v", op).get<int>(),
                                       element_from_json(detail::field_at(entry, "m", op), ctx, op)));
        } else {
            throw std::invalid_argument("script: unknown operation \"" + op + "\"");
        }
    }
    return ops;
}

// Channel input.  Pauli terms give one coefficient array per graph vertex, in
// the order of the graph's sorted vertex list.
inline NoiseChannel<double> channel_from_json(const Json& j, const WeightedGraph& g) {
    const std::string type = detail::field_at(j, "type", "channel").get<std::string>();
    const FieldCtxPtr& ctx = g.ctx();
    if (type == "depolarizing") {
        const int v = detail::field_at(j, "v", "depolarizing channel").get<int>();
        const double lambda = detail::field_at(j, "lambda", "depolarizing channel").get<double>();
        return depolarizing_channel(g, v, lambda);
    }
    if (type == "pauli") {
        const Json& terms = detail::field_at(j, "terms", "pauli channel");
        detail::require(terms.is_array() && !terms.empty(),
                        "pauli channel: \"terms\" must be a nonempty array");
        const std::vector<int> verts = g.vertices();
        std::vector<PauliTerm<double>> parsed;
        for (const auto& t : terms) {
            PauliTerm<double> term;
            term.p = detail::field_at(t, "p", "pauli term").get<double>();
            for (const char* key : {"z", "x"}) {
                const Json& words = detail::field_at(t, key, "pauli term");
                detail::require(words.is_array() && words.size() == verts.size(),
                                std::string("pauli term: \"") + key +
                                    "\" needs one coefficient array per graph vertex");
                ZNoiseVector& dst = key[0] == 'z' ? term.z : term.x;
                for (size_t i = 0; i < verts.size(); ++i) {
                    const FieldElement e =
                        element_from_json(words[i], ctx, std::string("pauli term ") + key);
                    if (!e.is_zero()) dst.set(verts[i], e);
                }
            }
            parsed.push_back(std::move(term));
        }
        return pauli_channel(g, parsed);
    }
    throw std::invalid_argument("channel type \"" + type +
                                "\" is not Pauli-diagonal; only \"depolarizing\" and \"pauli\" "
                                "channels can be tracked");
}

inline std::vector<NoiseChannel<double>> channels_from_json(const Json& j,
                                                            const WeightedGraph& g) {
    detail::require(j.is_array(), "channels: expected an array");
    std::vector<NoiseChannel<double>> out;
    for (const auto& entry : j) out.push_back(channel_from_json(entry, g));
    return out;
}

// Output forms.  Tracked channels are Z-diagonal, so terms carry a probability
// and one Z coefficient array per vertex of the accompanying graph.
inline Json channel_to_json(const NoiseChannel<double>& ch, const WeightedGraph& g) {
    Json terms = Json::array();
    for (const auto& t : ch.terms) {
        Json word = Json::array();
        for (int v : g.vertices()) word.push_back(element_to_json(t.op.get(v, *g.ctx())));
        terms.push_back(Json{{"p", t.p}, {"z", std::move(word)}});
    }
    return Json{{"terms", std::move(terms)}};
}

inline Json correction_to_json(const CorrectionRecord& rec) {
    Json gates = Json::array();
    for (const auto& gd : rec.gates) {
        Json g;
        switch (gd.kind) {
            case GateDesc::Kind::R: g = {{"gate", "r"}, {"v", gd.v}, {"param", element_to_json(gd.param)}}; break;
            case GateDesc::Kind::S: g = {{"gate", "s"}, {"v", gd.v}, {"param", element_to_json(gd.param)}}; break;
            case GateDesc::Kind::M: g = {{"gate", "m"}, {"v", gd.v}, {"param", element_to_json(gd.param)}}; break;
            case GateDesc::Kind::SVec:
            case GateDesc::Kind::ZVec: {
                g["gate"] = gd.kind == GateDesc::Kind::SVec ? "s_vec" : "z_vec";
                Json params = Json::array();
                for (const auto& [v, e] : gd.vec) {
                    Json entry{{"v", v}, {"c", element_to_json(e)}};
                    if (const auto it = gd.vec_z4.find(v); it != gd.vec_z4.end())
                        entry["z4"] = it->second;
                    params.push_back(std::move(entry));
                }
                g["params"] = std::move(params);
                break;
            }
        }
        gates.push_back(std::move(g));
    }
    return Json{{"isolated", rec.isolated}, {"gates", std::move(gates)}};
}

}  // namespace qnsf
