#pragma once

// Brute-force dense simulator: exact amplitudes for graph states and the
// Clifford/Weyl operators acting on them.  Serves as ground truth for the
// graph, measurement, and noise-tracking rules.  Supports all odd prime
// powers plus d = 2; even extension fields (d = 4, 8, ...) would need the
// Galois-ring character lift and are rejected.

#include "qnsf/graph.hpp"
#include "qnsf/measure.hpp"

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <vector>

namespace qnsf {

using cplx = std::complex<double>;

namespace detail {

inline cplx i_pow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}

}  // namespace detail

class DenseState {
public:
    static constexpr int64_t kDefaultCap = int64_t(1) << 16;

    DenseState(FieldCtxPtr ctx, std::vector<int> labels, int64_t cap = kDefaultCap)
        : ctx_(std::move(ctx)), labels_(std::move(labels)) {
        check_field(*ctx_);
        d_ = ctx_->d();
        dim_ = 1;
        for (size_t k = 0; k < labels_.size(); ++k) {
            dim_ *= d_;
            if (dim_ > cap) throw std::invalid_argument("DenseState: d^n exceeds the dense cap");
        }
        amp_.assign(static_cast<size_t>(dim_), cplx{0, 0});
    }

    static void check_field(const FieldCtx& ctx) {
        if (ctx.p() == 2 && ctx.m() > 1)
            throw std::invalid_argument(
                "even-extension unsupported: the dense oracle covers odd prime powers and d = 2");
    }

    // |G> with amplitude d^{-n/2} chi(sum_{i<j} A_ij x_i x_j).
    static DenseState graph_state(const WeightedGraph& g, int64_t cap = kDefaultCap) {
        DenseState st(g.ctx(), g.vertices(), cap);
        const double norm = 1.0 / std::sqrt(static_cast<double>(st.dim_));
        const auto edges = g.edges();
        for (int64_t idx = 0; idx < st.dim_; ++idx) {
            Character phase(st.ctx_->p(), 0);
            for (const auto& [u, v, w] : edges) {
                FieldElement xu = st.ctx_->element(st.digit(idx, st.axis_of(u)));
                FieldElement xv = st.ctx_->element(st.digit(idx, st.axis_of(v)));
                phase = phase * (w * xu * xv).chi();
            }
            st.amp_[static_cast<size_t>(idx)] = norm * phase.value();
        }
        return st;
    }

    // Product basis state |vals>, defaulting to |0> on unlisted qudits.
    static DenseState basis_state(FieldCtxPtr ctx, std::vector<int> labels,
                                  const std::map<int, FieldElement>& vals = {},
                                  int64_t cap = kDefaultCap) {
        DenseState st(std::move(ctx), std::move(labels), cap);
        int64_t idx = 0;
        for (const auto& [v, a] : vals) idx += a.index() * st.stride(st.axis_of(v));
        st.amp_[static_cast<size_t>(idx)] = 1.0;
        return st;
    }

    const FieldCtxPtr& ctx() const { return ctx_; }
    const std::vector<int>& labels() const { return labels_; }
    int64_t dim() const { return dim_; }
    size_t n() const { return labels_.size(); }
    const std::vector<cplx>& amps() const { return amp_; }
    std::vector<cplx>& amps() { return amp_; }

    int axis_of(int label) const {
        for (size_t k = 0; k < labels_.size(); ++k)
            if (labels_[k] == label) return static_cast<int>(k);
        throw std::invalid_argument("DenseState: unknown qudit label " + std::to_string(label));
    }
    int64_t stride(int axis) const {
        int64_t s = 1;
        for (int k = 0; k < axis; ++k) s *= d_;
        return s;
    }
    int64_t digit(int64_t idx, int axis) const { return (idx / stride(axis)) % d_; }

    // --- single-qudit and two-qudit gates, addressed by label ---

    void z(int v, const FieldElement& a) {
        diag(v, [&](const FieldElement& x) { return chi_val(a * x); });
    }

    void x(int v, const FieldElement& a) {
        perm(v, [&](const FieldElement& y) { return y + a; }, [](const FieldElement&) { return cplx{1, 0}; });
    }

    void h(int v) { fourier(v, false); }
    void hdag(int v) { fourier(v, true); }

    // S with an explicit Z4 exponent; only meaningful at d = 2.
    void s_z4(int v, int k) {
        if (d_ != 2) throw std::invalid_argument("DenseState: s_z4 is a d = 2 gate");
        diag(v, [&](const FieldElement& x) { return detail::i_pow(static_cast<int>(k * x.index())); });
    }

    void s(int v, const FieldElement& lam) {
        if (ctx_->p() == 2) {
            s_z4(v, static_cast<int>(lam.index()));
            return;
        }
        const FieldElement half = ctx_->two_inv();
        diag(v, [&](const FieldElement& x) { return chi_val(half * lam * x * x); });
    }

    void mgate(int v, const FieldElement& lam) {
        if (lam.is_zero()) throw std::invalid_argument("DenseState: M(0) is not invertible");
        perm(v, [&](const FieldElement& y) { return lam * y; }, [](const FieldElement&) { return cplx{1, 0}; });
    }

    void cz(int u, int v, const FieldElement& c) {
        const int au = axis_of(u), av = axis_of(v);
        if (au == av) throw std::invalid_argument("DenseState: CZ needs distinct qudits");
        for (int64_t i = 0; i < dim_; ++i) {
            FieldElement xu = ctx_->element(digit(i, au));
            FieldElement xv = ctx_->element(digit(i, av));
            amp_[static_cast<size_t>(i)] *= chi_val(c * xu * xv);
        }
    }

    void cx(int s, int t) {
        const int as = axis_of(s), at = axis_of(t);
        if (as == at) throw std::invalid_argument("DenseState: CX needs distinct qudits");
        std::vector<cplx> out(amp_.size(), cplx{0, 0});
        for (int64_t i = 0; i < dim_; ++i) {
            FieldElement xs = ctx_->element(digit(i, as));
            FieldElement xt = ctx_->element(digit(i, at));
            int64_t j = i + ((xt + xs).index() - xt.index()) * stride(at);
            out[static_cast<size_t>(j)] = amp_[static_cast<size_t>(i)];
        }
        amp_.swap(out);
    }

    // R_v(m) = H_v S_v(m) H_v^dag, with the canonical {0,1} lift of the S
    // parameter at d = 2 (the lift that makes the correction records of the
    // measurement rules exact there).
    void r(int v, const FieldElement& m) {
        hdag(v);
        s(v, m);
        h(v);
    }

    // W_v(z, x, t): chi(t) chi(-2^{-1} z x) Z_v(z) X_v(x) for odd p, and the
    // Z4-lifted chi_4(t - z x) Z(z) X(x) at d = 2.
    void weyl(int v, const FieldElement& z, const FieldElement& xx, const FieldElement& t) {
        cplx front;
        if (ctx_->p() == 2) {
            const int lift = static_cast<int>(t.index() - z.index() * xx.index());
            front = detail::i_pow(lift);
        } else {
            front = chi_val(t) * chi_val(-(ctx_->two_inv() * z * xx));
        }
        x(v, xx);
        this->z(v, z);
        for (auto& a : amp_) a *= front;
    }

    // The local complementation unitary: |tau_v(m)(G)> = L_v(m)|G>, with
    // L_v(m) = H_v S_v(m) H_v^dag  (x)_j S_j(-m A_{v,j}^2) for odd p.  At
    // d = 2 the verified Z4 lift puts S(-m), i.e. the adjoint of the
    // canonical lift, on the vertex and S(+m A^2) on the neighbors.
    void local_complement_unitary(const WeightedGraph& g, int v, const FieldElement& m) {
        for (const auto& [j, w] : g.row(v)) {
            if (ctx_->p() == 2) s_z4(j, static_cast<int>((m * w * w).index()));
            else s(j, -(m * w * w));
        }
        if (ctx_->p() == 2) {
            hdag(v);
            s_z4(v, 4 - static_cast<int>(m.index()));
            h(v);
        } else {
            r(v, m);
        }
    }

    // G o_m v at the state level is M_v(m^{-1}).
    void local_multiply_unitary(int v, const FieldElement& m) { mgate(v, m.inv()); }

    void apply_gate(const GateDesc& gd) {
        switch (gd.kind) {
            case GateDesc::Kind::R: r(gd.v, gd.param); break;
            case GateDesc::Kind::S: s(gd.v, gd.param); break;
            case GateDesc::Kind::M: mgate(gd.v, gd.param); break;
            case GateDesc::Kind::SVec:
                if (ctx_->p() == 2 && !gd.vec_z4.empty()) {
                    for (const auto& [u, k] : gd.vec_z4) s_z4(u, k);
                } else {
                    for (const auto& [u, l] : gd.vec) s(u, l);
                }
                break;
            case GateDesc::Kind::ZVec:
                for (const auto& [u, l] : gd.vec) z(u, l);
                break;
        }
    }

    void apply_gate_inverse(const GateDesc& gd) {
        auto s_inv = [&](int v, const FieldElement& lam) {
            if (ctx_->p() == 2)
                s_z4(v, (4 - static_cast<int>(lam.index())) % 4);
            else
                s(v, -lam);
        };
        switch (gd.kind) {
            case GateDesc::Kind::R:
                hdag(gd.v);
                s_inv(gd.v, gd.param);
                h(gd.v);
                break;
            case GateDesc::Kind::S: s_inv(gd.v, gd.param); break;
            case GateDesc::Kind::M: mgate(gd.v, gd.param.inv()); break;
            case GateDesc::Kind::SVec:
                if (ctx_->p() == 2 && !gd.vec_z4.empty()) {
                    for (const auto& [u, k] : gd.vec_z4) s_z4(u, (4 - k) % 4);
                } else {
                    for (const auto& [u, l] : gd.vec) s_inv(u, l);
                }
                break;
            case GateDesc::Kind::ZVec:
                for (const auto& [u, l] : gd.vec) z(u, -l);
                break;
        }
    }

    void apply_correction(const CorrectionRecord& rec) {
        for (const auto& gd : rec.gates) apply_gate(gd);
    }

    void apply_correction_inverse(const CorrectionRecord& rec) {
        for (auto it = rec.gates.rbegin(); it != rec.gates.rend(); ++it) apply_gate_inverse(*it);
    }

    void apply_z_word(const std::map<int, FieldElement>& zs) {
        for (const auto& [v, a] : zs) z(v, a);
    }
    void apply_x_word(const std::map<int, FieldElement>& xs) {
        for (const auto& [v, a] : xs) x(v, a);
    }

    // P(W_v(z,x), b) = (1/d) sum_y conj(chi(y b)) W_v(y z, y x); applied
    // without renormalization, so the squared norm is the branch probability.
    void project_weyl(int v, const FieldElement& z, const FieldElement& xx, const FieldElement& b) {
        std::vector<cplx> acc(amp_.size(), cplx{0, 0});
        const std::vector<cplx> original = amp_;
        for (const auto& y : ctx_->elements()) {
            amp_ = original;
            weyl(v, y * z, y * xx, ctx_->zero());
            const cplx coeff = std::conj(chi_val(y * b));
            for (size_t i = 0; i < amp_.size(); ++i) acc[i] += coeff * amp_[i];
        }
        amp_.swap(acc);
        const double inv_d = 1.0 / static_cast<double>(d_);
        for (auto& a : amp_) a *= inv_d;
    }

    // --- linear algebra ---

    double norm2() const {
        double s = 0;
        for (const auto& a : amp_) s += std::norm(a);
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }
    void scale(cplx c) {
        for (auto& a : amp_) a *= c;
    }
    void normalize() {
        const double nn = norm();
        if (nn < 1e-300) throw std::runtime_error("DenseState: cannot normalize the zero vector");
        scale(cplx{1.0 / nn, 0});
    }

    cplx inner(const DenseState& o) const {
        if (dim_ != o.dim_) throw std::invalid_argument("DenseState: dimension mismatch");
        cplx s{0, 0};
        for (size_t i = 0; i < amp_.size(); ++i) s += std::conj(amp_[i]) * o.amp_[i];
        return s;
    }

private:
    template <typename PhaseFn>
    void diag(int v, PhaseFn f) {
        const int axis = axis_of(v);
        std::vector<cplx> table(static_cast<size_t>(d_));
        for (int64_t a = 0; a < d_; ++a) table[static_cast<size_t>(a)] = f(ctx_->element(a));
        const int64_t st = stride(axis);
        for (int64_t i = 0; i < dim_; ++i)
            amp_[static_cast<size_t>(i)] *= table[static_cast<size_t>((i / st) % d_)];
    }

    template <typename MapFn, typename PhaseFn>
    void perm(int v, MapFn target, PhaseFn f) {
        const int axis = axis_of(v);
        const int64_t st = stride(axis);
        std::vector<int64_t> to(static_cast<size_t>(d_));
        std::vector<cplx> ph(static_cast<size_t>(d_));
        for (int64_t a = 0; a < d_; ++a) {
            FieldElement x = ctx_->element(a);
            to[static_cast<size_t>(a)] = target(x).index();
            ph[static_cast<size_t>(a)] = f(x);
        }
        std::vector<cplx> out(amp_.size(), cplx{0, 0});
        for (int64_t i = 0; i < dim_; ++i) {
            const int64_t a = (i / st) % d_;
            const int64_t j = i + (to[static_cast<size_t>(a)] - a) * st;
            out[static_cast<size_t>(j)] = ph[static_cast<size_t>(a)] * amp_[static_cast<size_t>(i)];
        }
        amp_.swap(out);
    }

    // H|x> = d^{-1/2} sum_y chi(x y)|y>; the adjoint flips the character.
    void fourier(int v, bool dagger) {
        const int axis = axis_of(v);
        const int64_t st = stride(axis);
        std::vector<cplx> mat(static_cast<size_t>(d_ * d_));
        const double nfac = 1.0 / std::sqrt(static_cast<double>(d_));
        for (int64_t yy = 0; yy < d_; ++yy)
            for (int64_t xx = 0; xx < d_; ++xx) {
                cplx c = chi_val(ctx_->element(xx) * ctx_->element(yy));
                mat[static_cast<size_t>(yy * d_ + xx)] = nfac * (dagger ? std::conj(c) : c);
            }
        std::vector<cplx> buf(static_cast<size_t>(d_));
        const int64_t block = st * d_;
        for (int64_t hi = 0; hi < dim_ / block; ++hi) {
            for (int64_t lo = 0; lo < st; ++lo) {
                const int64_t base = hi * block + lo;
                for (int64_t a = 0; a < d_; ++a) buf[static_cast<size_t>(a)] = amp_[static_cast<size_t>(base + a * st)];
                for (int64_t yy = 0; yy < d_; ++yy) {
                    cplx acc{0, 0};
                    for (int64_t xx = 0; xx < d_; ++xx)
                        acc += mat[static_cast<size_t>(yy * d_ + xx)] * buf[static_cast<size_t>(xx)];
                    amp_[static_cast<size_t>(base + yy * st)] = acc;
                }
            }
        }
    }

    cplx chi_val(const FieldElement& a) const { return a.chi().value(); }

    FieldCtxPtr ctx_;
    std::vector<int> labels_;
    int64_t d_ = 0;
    int64_t dim_ = 0;
    std::vector<cplx> amp_;
};

inline bool equal_up_to_phase(const DenseState& a, const DenseState& b, double tol = 1e-9) {
    DenseState an = a, bn = b;
    an.normalize();
    bn.normalize();
    return std::abs(std::abs(an.inner(bn)) - 1.0) <= tol;
}

// The d-dimensional eigenvector of W(z,x) with eigenvalue chi(b), pulled out
// of the rank-1 projector P(W(z,x), b); phase is arbitrary.
inline std::vector<cplx> weyl_eigenvector(const FieldCtxPtr& ctx, const FieldElement& z,
                                          const FieldElement& x, const FieldElement& b) {
    const int64_t d = ctx->d();
    std::vector<cplx> best;
    double best_norm = -1;
    for (int64_t col = 0; col < d; ++col) {
        DenseState st = DenseState::basis_state(ctx, {0}, {{0, ctx->element(col)}});
        st.project_weyl(0, z, x, b);
        const double nn = st.norm();
        if (nn > best_norm) {
            best_norm = nn;
            best = st.amps();
        }
    }
    if (best_norm < 1e-9) throw std::runtime_error("weyl_eigenvector: empty eigenspace");
    double inv = 1.0 / best_norm;
    for (auto& c : best) c *= inv;
    return best;
}

// Weighted ensemble of pure states: the oracle's mixed-state representation.
using Ensemble = std::vector<std::pair<double, DenseState>>;

inline Ensemble apply_z_channel(const Ensemble& ens,
                                const std::vector<std::pair<double, std::map<int, FieldElement>>>& terms) {
    Ensemble out;
    out.reserve(ens.size() * terms.size());
    for (const auto& [w, st] : ens) {
        for (const auto& [p, zs] : terms) {
            if (p == 0.0) continue;
            DenseState s = st;
            s.apply_z_word(zs);
            out.emplace_back(w * p, std::move(s));
        }
    }
    return out;
}

inline double ensemble_fidelity(const Ensemble& ens, const DenseState& target) {
    double f = 0;
    for (const auto& [w, st] : ens) f += w * std::norm(target.inner(st));
    return f;
}

// Amplitude-count ceiling for dense states; NSF_DENSE_CAP overrides the
// built-in default.
inline int64_t dense_cap() {
    if (const char* s = std::getenv("NSF_DENSE_CAP")) {
        char* end = nullptr;
        const long long v = std::strtoll(s, &end, 10);
        if (end != s && *end == '\0' && v > 0) return v;
    }
    return DenseState::kDefaultCap;
}

struct DensityMatrix {
    int64_t dim = 0;
    std::vector<cplx> a;  // row-major dim x dim

    static DensityMatrix zero(int64_t dim) {
        DensityMatrix m;
        m.dim = dim;
        m.a.assign(static_cast<size_t>(dim * dim), cplx{0, 0});
        return m;
    }
    double trace() const {
        double t = 0;
        for (int64_t i = 0; i < dim; ++i) t += a[static_cast<size_t>(i * dim + i)].real();
        return t;
    }
    void scale(double s) {
        for (auto& c : a) c *= s;
    }
    void normalize() {
        const double t = trace();
        if (std::abs(t) < 1e-300) throw std::runtime_error("DensityMatrix: zero trace");
        scale(1.0 / t);
    }
    double max_abs_diff(const DensityMatrix& o) const {
        if (dim != o.dim) throw std::invalid_argument("DensityMatrix: dimension mismatch");
        double mx = 0;
        for (size_t i = 0; i < a.size(); ++i) mx = std::max(mx, std::abs(a[i] - o.a[i]));
        return mx;
    }
};

inline DensityMatrix density_of(const Ensemble& ens) {
    if (ens.empty()) throw std::invalid_argument("density_of: empty ensemble");
    DensityMatrix rho = DensityMatrix::zero(ens.front().second.dim());
    for (const auto& [w, st] : ens) {
        const auto& v = st.amps();
        for (int64_t r = 0; r < rho.dim; ++r)
            for (int64_t c = 0; c < rho.dim; ++c)
                rho.a[static_cast<size_t>(r * rho.dim + c)] +=
                    w * v[static_cast<size_t>(r)] * std::conj(v[static_cast<size_t>(c)]);
    }
    return rho;
}

// Partial trace over the qudits with the given labels.
inline DensityMatrix reduced_density(const Ensemble& ens, const std::vector<int>& drop_labels) {
    if (ens.empty()) throw std::invalid_argument("reduced_density: empty ensemble");
    const DenseState& first = ens.front().second;
    const int64_t d = first.ctx()->d();
    const int n = static_cast<int>(first.labels().size());
    std::vector<bool> dropped(static_cast<size_t>(n), false);
    for (int lbl : drop_labels) dropped[static_cast<size_t>(first.axis_of(lbl))] = true;
    int64_t rdim = 1, ddim = 1;
    for (int ax = 0; ax < n; ++ax) (dropped[static_cast<size_t>(ax)] ? ddim : rdim) *= d;

    DensityMatrix rho = DensityMatrix::zero(rdim);
    std::vector<std::vector<cplx>> bucket(static_cast<size_t>(ddim),
                                          std::vector<cplx>(static_cast<size_t>(rdim)));
    for (const auto& [w, stt] : ens) {
        for (auto& b : bucket) std::fill(b.begin(), b.end(), cplx{0, 0});
        const auto& v = stt.amps();
        for (int64_t i = 0; i < first.dim(); ++i) {
            int64_t rest = i, kept = 0, drop = 0, kmul = 1, dmul = 1;
            for (int ax = 0; ax < n; ++ax) {
                const int64_t digit = rest % d;
                rest /= d;
                if (dropped[static_cast<size_t>(ax)]) {
                    drop += digit * dmul;
                    dmul *= d;
                } else {
                    kept += digit * kmul;
                    kmul *= d;
                }
            }
            bucket[static_cast<size_t>(drop)][static_cast<size_t>(kept)] = v[static_cast<size_t>(i)];
        }
        for (const auto& b : bucket)
            for (int64_t r = 0; r < rdim; ++r)
                for (int64_t c = 0; c < rdim; ++c)
                    rho.a[static_cast<size_t>(r * rdim + c)] +=
                        w * b[static_cast<size_t>(r)] * std::conj(b[static_cast<size_t>(c)]);
    }
    return rho;
}

inline DensityMatrix reduced_density(const Ensemble& ens, int drop_label) {
    return reduced_density(ens, std::vector<int>{drop_label});
}

}  // namespace qnsf
