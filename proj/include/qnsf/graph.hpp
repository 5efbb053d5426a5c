#pragma once

// Weighted simple graphs over GF(p^m) and the three graph-level Clifford
// manipulations: local complementation tau_v(m), local multiplication
// G o_m v, and controlled-Z edge addition.  Vertex labels are stable across
// deletions so scripts and noise vectors can keep referring to them.

#include "qnsf/field.hpp"

#include <map>
#include <queue>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

namespace qnsf {

class WeightedGraph {
public:
    using Row = std::map<int, FieldElement>;

    WeightedGraph() = default;
    explicit WeightedGraph(FieldCtxPtr ctx) : ctx_(std::move(ctx)) {}

    const FieldCtxPtr& ctx() const { return ctx_; }
    const FieldCtx& field() const {
        if (!ctx_) throw std::invalid_argument("WeightedGraph: no field context");
        return *ctx_;
    }

    size_t n() const { return rows_.size(); }
    bool has_vertex(int v) const { return rows_.count(v) != 0; }

    void add_vertex(int v) {
        if (!rows_.emplace(v, Row{}).second)
            throw std::invalid_argument("WeightedGraph: duplicate vertex " + std::to_string(v));
    }

    std::vector<int> vertices() const {
        std::vector<int> out;
        out.reserve(rows_.size());
        for (const auto& [v, row] : rows_) out.push_back(v);
        return out;
    }

    // Row v of the adjacency matrix as a sparse map (nonzero entries only).
    const Row& row(int v) const { return at(v); }

    FieldElement weight(int u, int v) const {
        const Row& r = at(u);
        require(v);
        auto it = r.find(v);
        return it == r.end() ? field().zero() : it->second;
    }

    size_t degree(int v) const { return at(v).size(); }
    bool is_isolated(int v) const { return at(v).empty(); }

    void set_edge(int u, int v, const FieldElement& w) {
        if (u == v) throw std::invalid_argument("WeightedGraph: self-loops are not allowed");
        require(u);
        require(v);
        if (w.is_zero()) {
            rows_[u].erase(v);
            rows_[v].erase(u);
        } else {
            rows_[u].insert_or_assign(v, w);
            rows_[v].insert_or_assign(u, w);
        }
    }

    // Undirected edge list with u < v, sorted, deterministic.
    std::vector<std::tuple<int, int, FieldElement>> edges() const {
        std::vector<std::tuple<int, int, FieldElement>> out;
        for (const auto& [u, row] : rows_)
            for (const auto& [v, w] : row)
                if (u < v) out.emplace_back(u, v, w);
        return out;
    }

    bool operator==(const WeightedGraph& o) const {
        if (rows_.size() != o.rows_.size()) return false;
        for (const auto& [v, row] : rows_) {
            auto it = o.rows_.find(v);
            if (it == o.rows_.end() || it->second != row) return false;
        }
        return true;
    }
    bool operator!=(const WeightedGraph& o) const { return !(*this == o); }

    friend WeightedGraph local_complement(WeightedGraph g, int v, const FieldElement& m);
    friend WeightedGraph local_multiply(WeightedGraph g, int v, const FieldElement& m);
    friend WeightedGraph apply_cz(WeightedGraph g, int u, int v, const FieldElement& c);
    friend WeightedGraph delete_vertex(WeightedGraph g, int v);

private:
    const Row& at(int v) const {
        auto it = rows_.find(v);
        if (it == rows_.end())
            throw std::invalid_argument("WeightedGraph: unknown vertex " + std::to_string(v));
        return it->second;
    }
    void require(int v) const { (void)at(v); }

    FieldCtxPtr ctx_;
    std::map<int, Row> rows_;
};

// tau_v(m): A'_{ij} = A_{ij} + m * A_{vi} * A_{vj} off the diagonal; the
// diagonal stays zero (the graph is simple; the self-loop phases live in the
// S(-m A_v^2) factor of the corresponding Clifford).
inline WeightedGraph local_complement(WeightedGraph g, int v, const FieldElement& m) {
    const WeightedGraph::Row nb = g.at(v);  // copy: the rows below mutate
    if (m.is_zero()) return g;
    std::vector<std::pair<int, FieldElement>> nbv(nb.begin(), nb.end());
    for (size_t i = 0; i < nbv.size(); ++i) {
        for (size_t j = i + 1; j < nbv.size(); ++j) {
            const auto& [u1, w1] = nbv[i];
            const auto& [u2, w2] = nbv[j];
            g.set_edge(u1, u2, g.weight(u1, u2) + m * w1 * w2);
        }
    }
    return g;
}

// G o_m v: scale row and column v by m (m must be invertible).
inline WeightedGraph local_multiply(WeightedGraph g, int v, const FieldElement& m) {
    if (m.is_zero()) throw std::invalid_argument("local_multiply: factor must be nonzero");
    const WeightedGraph::Row nb = g.at(v);
    for (const auto& [u, w] : nb) g.set_edge(v, u, m * w);
    return g;
}

inline WeightedGraph apply_cz(WeightedGraph g, int u, int v, const FieldElement& c) {
    if (u == v) throw std::invalid_argument("apply_cz: vertices must differ");
    g.set_edge(u, v, g.weight(u, v) + c);
    return g;
}

inline WeightedGraph delete_vertex(WeightedGraph g, int v) {
    const WeightedGraph::Row nb = g.at(v);
    for (const auto& [u, w] : nb) g.rows_[u].erase(v);
    g.rows_.erase(v);
    return g;
}

inline std::vector<std::pair<int, FieldElement>> neighbors(const WeightedGraph& g, int v) {
    const auto& r = g.row(v);
    return {r.begin(), r.end()};
}

// Path graph on vertices 1..N, all edge weights 1.
inline WeightedGraph linear_cluster(FieldCtxPtr ctx, int N) {
    if (N < 2) throw std::invalid_argument("linear_cluster: need at least 2 vertices");
    WeightedGraph g(ctx);
    for (int v = 1; v <= N; ++v) g.add_vertex(v);
    const FieldElement one = ctx->one();
    for (int v = 1; v < N; ++v) g.set_edge(v, v + 1, one);
    return g;
}

inline bool is_connected(const WeightedGraph& g) {
    if (g.n() <= 1) return true;
    const auto verts = g.vertices();
    std::set<int> seen{verts.front()};
    std::queue<int> todo;
    todo.push(verts.front());
    while (!todo.empty()) {
        int u = todo.front();
        todo.pop();
        for (const auto& [w, wt] : g.row(u))
            if (seen.insert(w).second) todo.push(w);
    }
    return seen.size() == g.n();
}

}  // namespace qnsf
