#pragma once

// Fidelity of a pure graph-state target under composed Z-type channels.
// Since <G|Z(z)|G> = delta_{z,0}, the fidelity is the total probability of
// the identity word after convolving all channels over the additive group
// F_d^n — no density matrix is ever formed.  Also: Choi-Jamiolkowski
// conversions and the depolarizing-parameter scalings between qubit and
// qudit hardware models.

#include "qnsf/graph.hpp"
#include "qnsf/noise.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace qnsf {

template <class P>
using ZDistribution = std::map<ZNoiseVector, P>;

template <class P>
ZDistribution<P> compose(const std::vector<NoiseChannel<P>>& channels) {
    ZDistribution<P> dist;
    dist.emplace(ZNoiseVector{}, P{1});
    for (const auto& ch : channels) {
        ZDistribution<P> next;
        for (const auto& [op, p] : dist)
            for (const auto& t : ch.terms) {
                ZNoiseVector sum = op;
                sum.add(t.op);
                next[std::move(sum)] += p * t.p;
            }
        dist = std::move(next);
    }
    return dist;
}

template <class P>
P fidelity_of(const std::vector<NoiseChannel<P>>& channels, const WeightedGraph& target) {
    for (const auto& ch : channels)
        for (const auto& t : ch.terms)
            for (const auto& [v, e] : t.op.entries)
                if (!target.has_vertex(v))
                    throw std::invalid_argument("fidelity_of: noise vertex " + std::to_string(v) +
                                                " is not in the target graph");
    const ZDistribution<P> dist = compose(channels);
    const auto it = dist.find(ZNoiseVector{});
    return it == dist.end() ? P{} : it->second;
}

// Choi-state fidelity of the depolarizing channel with parameter lambda.
inline double choi_fidelity_depolarizing(double lambda, int64_t d) {
    return lambda + (1.0 - lambda) / static_cast<double>(d * d);
}

// Average channel fidelity from the Choi fidelity.
inline double average_from_choi(double f_choi, int64_t d) {
    return (static_cast<double>(d) * f_choi + 1.0) / (static_cast<double>(d) + 1.0);
}

// Depolarizing parameter of m qubit channels merged into one d = 2^m qudit
// channel with matching Choi fidelity: q_d = ((3 q2 + 1)^m - 1) / (4^m - 1).
template <class P>
P q_d_choi(const P& q2, int m) {
    const P a = P{3} * q2 + P{1};
    P num{1}, den{1};
    for (int i = 0; i < m; ++i) {
        num *= a;
        den *= P{4};
    }
    return (num - P{1}) / (den - P{1});
}

// Hardware scalings: linearly many two-level rotations, or quadratically many.
inline double q_d_linear(double q2, int64_t d) {
    return std::pow(q2, static_cast<double>(d) / 2.0);
}
inline double q_d_quadratic(double q2, int64_t d) {
    return std::pow(q2, static_cast<double>(d) * static_cast<double>(d - 1) / 2.0);
}

// Per-qubit-equivalent fidelity of a d = 2^m qudit pair.
inline double adapted_fidelity(double f, int m) {
    return std::pow(f, 1.0 / static_cast<double>(m));
}

}  // namespace qnsf
