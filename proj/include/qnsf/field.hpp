#pragma once

// Exact arithmetic in GF(p^m): coefficient-vector elements modulo a monic
// irreducible polynomial, the field trace down to GF(p), and the additive
// characters chi that carry all phase information in the formalism.

#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qnsf {

namespace detail {

inline bool is_prime(int64_t n) {
    if (n < 2) return false;
    for (int64_t f = 2; f * f <= n; ++f)
        if (n % f == 0) return false;
    return true;
}

// Dense polynomials over GF(p), coefficients low-degree first, no trailing
// zeros (the zero polynomial is the empty vector).
using Poly = std::vector<int>;

inline Poly poly_trim(Poly a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
    return a;
}

inline Poly poly_mul(const Poly& a, const Poly& b, int p) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            c[i + j] = static_cast<int>((c[i + j] + int64_t(a[i]) * b[j]) % p);
    return poly_trim(std::move(c));
}

inline Poly poly_mod(Poly a, const Poly& mod, int p) {
    a = poly_trim(std::move(a));
    const int deg_m = static_cast<int>(mod.size()) - 1;
    while (static_cast<int>(a.size()) - 1 >= deg_m) {
        const int deg_a = static_cast<int>(a.size()) - 1;
        // mod is monic, so the quotient digit is just the leading coefficient.
        const int q = a.back();
        for (int i = 0; i <= deg_m; ++i) {
            int& c = a[deg_a - deg_m + i];
            c = static_cast<int>(((c - int64_t(q) * mod[i]) % p + p) % p);
        }
        a = poly_trim(std::move(a));
    }
    return a;
}

// Exhaustive trial division by every monic polynomial of degree 1..deg/2.
inline bool poly_is_irreducible(const Poly& f, int p) {
    const int deg = static_cast<int>(f.size()) - 1;
    if (deg < 1 || f.back() != 1) return false;
    if (deg == 1) return true;
    for (int dd = 1; dd <= deg / 2; ++dd) {
        int64_t count = 1;
        for (int i = 0; i < dd; ++i) count *= p;
        for (int64_t k = 0; k < count; ++k) {
            Poly g(dd + 1, 0);
            int64_t t = k;
            for (int i = 0; i < dd; ++i) { g[i] = static_cast<int>(t % p); t /= p; }
            g[dd] = 1;
            if (poly_mod(f, g, p).empty()) return false;
        }
    }
    return true;
}

}  // namespace detail

// A root of unity e^{2*pi*i*k/p}, kept as the exact exponent k mod p.  For
// p = 2 this is the sign (-1)^k.  Multiplication adds exponents.
class Character {
public:
    Character(int p, int64_t k) : p_(p), k_(static_cast<int>(((k % p) + p) % p)) {}

    int p() const { return p_; }
    int exponent() const { return k_; }

    Character operator*(const Character& o) const {
        if (p_ != o.p_) throw std::invalid_argument("Character: mismatched roots of unity");
        return Character(p_, k_ + o.k_);
    }
    Character conj() const { return Character(p_, -k_); }
    Character pow(int64_t e) const { return Character(p_, k_ * (((e % p_) + p_) % p_)); }

    bool operator==(const Character& o) const { return p_ == o.p_ && k_ == o.k_; }
    bool operator!=(const Character& o) const { return !(*this == o); }
    bool is_one() const { return k_ == 0; }

    std::complex<double> value() const {
        if (k_ == 0) return {1.0, 0.0};
        if (2 * k_ == p_) return {-1.0, 0.0};
        const double a = 2.0 * std::numbers::pi * k_ / p_;
        return {std::cos(a), std::sin(a)};
    }

private:
    int p_;
    int k_;
};

class FieldCtx;
using FieldCtxPtr = std::shared_ptr<const FieldCtx>;

// Immutable element of GF(p^m).  Internally just the canonical integer
// encoding idx = sum_i coeffs[i] * p^i plus a pointer to the shared context;
// coefficient vectors are materialized on demand.
class FieldElement {
public:
    FieldElement() : idx_(0), ctx_(nullptr) {}
    FieldElement(int64_t idx, const FieldCtx* ctx) : idx_(idx), ctx_(ctx) {}

    int64_t index() const { return idx_; }
    const FieldCtx& ctx() const {
        if (!ctx_) throw std::invalid_argument("FieldElement: null context");
        return *ctx_;
    }
    const FieldCtx* ctx_ptr() const { return ctx_; }

    bool is_zero() const { return idx_ == 0; }

    std::vector<int> coeffs() const;

    FieldElement operator+(const FieldElement& o) const;
    FieldElement operator-(const FieldElement& o) const;
    FieldElement operator-() const;
    FieldElement operator*(const FieldElement& o) const;
    FieldElement operator/(const FieldElement& o) const;
    FieldElement inv() const;
    FieldElement pow(int64_t e) const;
    FieldElement& operator+=(const FieldElement& o) { return *this = *this + o; }
    FieldElement& operator-=(const FieldElement& o) { return *this = *this - o; }
    FieldElement& operator*=(const FieldElement& o) { return *this = *this * o; }

    int trace() const;
    Character chi() const;

    bool operator==(const FieldElement& o) const;
    bool operator!=(const FieldElement& o) const { return !(*this == o); }
    bool operator<(const FieldElement& o) const { return idx_ < o.idx_; }

    std::string str() const;

private:
    int64_t idx_;
    const FieldCtx* ctx_;
};

// The field GF(p^m): modulus data plus derived lookup tables.  Contexts are
// shared read-only; construct through FieldCtx::make and keep the shared_ptr
// alive for as long as any element referencing it exists.
class FieldCtx {
public:
    // Largest d for which full d x d add/mul tables are materialized; above
    // this all arithmetic falls back to per-call polynomial computation.
    static constexpr int64_t kTableCap = 1024;

    static FieldCtxPtr make(int p, int m) {
        return FieldCtxPtr(new FieldCtx(p, m, find_irreducible(p, m)));
    }
    static FieldCtxPtr make(int p, int m, std::vector<int> irreducible) {
        return FieldCtxPtr(new FieldCtx(p, m, std::move(irreducible)));
    }

    // Lexicographically smallest monic irreducible of degree m over GF(p),
    // comparing coefficient tuples low-degree first.
    static std::vector<int> find_irreducible(int p, int m) {
        if (!detail::is_prime(p)) throw std::invalid_argument("find_irreducible: p must be prime");
        if (m < 1) throw std::invalid_argument("find_irreducible: m must be >= 1");
        std::vector<int> low(m, 0);
        while (true) {
            std::vector<int> cand(low);
            cand.push_back(1);
            if (detail::poly_is_irreducible(cand, p)) return cand;
            // Advance the odometer with the highest-degree coefficient
            // fastest, so candidates appear in low-degree-first lex order.
            int i = m - 1;
            while (i >= 0 && low[i] == p - 1) low[i--] = 0;
            if (i < 0) throw std::logic_error("find_irreducible: exhausted candidates");
            ++low[i];
        }
    }

    int p() const { return p_; }
    int m() const { return m_; }
    int64_t d() const { return d_; }
    const std::vector<int>& irreducible() const { return irr_; }

    FieldElement zero() const { return {0, this}; }
    FieldElement one() const { return element(1 % d_); }
    FieldElement element(int64_t idx) const {
        if (idx < 0 || idx >= d_) throw std::invalid_argument("FieldCtx: element index out of range");
        return {idx, this};
    }
    FieldElement from_coeffs(const std::vector<int>& coeffs) const {
        if (static_cast<int>(coeffs.size()) != m_)
            throw std::invalid_argument("FieldCtx: coefficient vector must have length m");
        int64_t idx = 0, pw = 1;
        for (int i = 0; i < m_; ++i) {
            const int c = ((coeffs[i] % p_) + p_) % p_;
            idx += c * pw;
            pw *= p_;
        }
        return {idx, this};
    }
    // The prime subfield embedding of an integer.
    FieldElement scalar(int64_t k) const { return element(((k % p_) + p_) % p_); }
    // Inverse of 2 in the prime subfield; only meaningful in odd characteristic.
    FieldElement two_inv() const {
        if (p_ == 2) throw std::domain_error("FieldCtx: 2^{-1} does not exist in characteristic 2");
        return scalar(2).inv();
    }

    std::vector<FieldElement> elements() const {
        std::vector<FieldElement> out;
        out.reserve(static_cast<size_t>(d_));
        for (int64_t i = 0; i < d_; ++i) out.push_back({i, this});
        return out;
    }

    std::vector<int> decode(int64_t idx) const {
        std::vector<int> c(m_);
        for (int i = 0; i < m_; ++i) { c[i] = static_cast<int>(idx % p_); idx /= p_; }
        return c;
    }

    int64_t add_idx(int64_t a, int64_t b) const {
        if (has_tables_) return add_tab_[a * d_ + b];
        return add_slow(a, b);
    }
    int64_t neg_idx(int64_t a) const {
        if (has_tables_) return neg_tab_[a];
        return neg_slow(a);
    }
    int64_t mul_idx(int64_t a, int64_t b) const {
        if (has_tables_) return mul_tab_[a * d_ + b];
        return mul_slow(a, b);
    }
    int64_t inv_idx(int64_t a) const {
        if (a == 0) throw std::domain_error("FieldElement: division by zero");
        if (has_tables_) return inv_tab_[a];
        return pow_idx(a, d_ - 2);
    }
    int64_t pow_idx(int64_t a, int64_t e) const {
        if (e < 0) { a = inv_idx(a); e = -e; }
        int64_t r = 1, base = a;
        while (e > 0) {
            if (e & 1) r = mul_idx(r, base);
            base = mul_idx(base, base);
            e >>= 1;
        }
        return r;
    }
    int trace_idx(int64_t a) const {
        if (has_tables_) return trace_tab_[a];
        return trace_slow(a);
    }

    bool same_field(const FieldCtx& o) const {
        return this == &o || (p_ == o.p_ && m_ == o.m_ && irr_ == o.irr_);
    }

private:
    FieldCtx(int p, int m, std::vector<int> irr) : p_(p), m_(m), irr_(std::move(irr)) {
        if (!detail::is_prime(p_)) throw std::invalid_argument("FieldCtx: p must be prime");
        if (m_ < 1) throw std::invalid_argument("FieldCtx: m must be >= 1");
        if (static_cast<int>(irr_.size()) != m_ + 1 || irr_.back() != 1)
            throw std::invalid_argument("FieldCtx: modulus must be monic of degree m");
        for (int& c : irr_) {
            c %= p_;
            if (c < 0) c += p_;
        }
        if (irr_.back() != 1)
            throw std::invalid_argument("FieldCtx: modulus must be monic of degree m");
        if (m_ <= 12 && !detail::poly_is_irreducible(irr_, p_))
            throw std::invalid_argument("FieldCtx: modulus polynomial is reducible");
        d_ = 1;
        for (int i = 0; i < m_; ++i) {
            d_ *= p_;
            if (d_ > (int64_t(1) << 40)) throw std::invalid_argument("FieldCtx: field too large");
        }
        has_tables_ = d_ <= kTableCap;
        if (has_tables_) build_tables();
    }

    int64_t encode(const std::vector<int>& c) const {
        int64_t idx = 0, pw = 1;
        for (int i = 0; i < m_; ++i) { idx += c[i] * pw; pw *= p_; }
        return idx;
    }

    int64_t add_slow(int64_t a, int64_t b) const {
        std::vector<int> ca = decode(a), cb = decode(b);
        for (int i = 0; i < m_; ++i) ca[i] = (ca[i] + cb[i]) % p_;
        return encode(ca);
    }
    int64_t neg_slow(int64_t a) const {
        std::vector<int> ca = decode(a);
        for (int i = 0; i < m_; ++i) ca[i] = (p_ - ca[i]) % p_;
        return encode(ca);
    }
    int64_t mul_slow(int64_t a, int64_t b) const {
        detail::Poly pa = detail::poly_trim(decode(a)), pb = detail::poly_trim(decode(b));
        detail::Poly pr = detail::poly_mod(detail::poly_mul(pa, pb, p_), irr_, p_);
        pr.resize(m_, 0);
        return encode(pr);
    }
    int trace_slow(int64_t a) const {
        int64_t acc = 0, x = a;
        for (int n = 0; n < m_; ++n) {
            acc = add_slow(acc, x);
            x = pow_idx(x, p_);
        }
        // The trace lands in the prime subfield, whose elements encode as
        // themselves.
        if (acc >= p_) throw std::logic_error("FieldCtx: trace left the prime subfield");
        return static_cast<int>(acc);
    }

    void build_tables() {
        const size_t n = static_cast<size_t>(d_);
        add_tab_.resize(n * n);
        mul_tab_.resize(n * n);
        neg_tab_.resize(n);
        inv_tab_.assign(n, 0);
        trace_tab_.resize(n);
        for (size_t a = 0; a < n; ++a) {
            neg_tab_[a] = neg_slow(a);
            for (size_t b = 0; b < n; ++b) {
                add_tab_[a * n + b] = add_slow(a, b);
                const int64_t r = mul_slow(a, b);
                mul_tab_[a * n + b] = r;
                if (r == 1) inv_tab_[a] = static_cast<int64_t>(b);
            }
        }
        for (size_t a = 0; a < n; ++a) trace_tab_[a] = trace_slow(a);
    }

    int p_;
    int m_;
    int64_t d_ = 0;
    std::vector<int> irr_;
    bool has_tables_ = false;
    std::vector<int64_t> add_tab_, mul_tab_, neg_tab_, inv_tab_;
    std::vector<int> trace_tab_;
};

inline std::vector<int> FieldElement::coeffs() const { return ctx().decode(idx_); }

inline FieldElement FieldElement::operator+(const FieldElement& o) const {
    if (!ctx().same_field(o.ctx())) throw std::invalid_argument("FieldElement: context mismatch");
    return {ctx_->add_idx(idx_, o.idx_), ctx_};
}
inline FieldElement FieldElement::operator-(const FieldElement& o) const {
    if (!ctx().same_field(o.ctx())) throw std::invalid_argument("FieldElement: context mismatch");
    return {ctx_->add_idx(idx_, ctx_->neg_idx(o.idx_)), ctx_};
}
inline FieldElement FieldElement::operator-() const { return {ctx().neg_idx(idx_), ctx_}; }
inline FieldElement FieldElement::operator*(const FieldElement& o) const {
    if (!ctx().same_field(o.ctx())) throw std::invalid_argument("FieldElement: context mismatch");
    return {ctx_->mul_idx(idx_, o.idx_), ctx_};
}
inline FieldElement FieldElement::operator/(const FieldElement& o) const {
    if (!ctx().same_field(o.ctx())) throw std::invalid_argument("FieldElement: context mismatch");
    return {ctx_->mul_idx(idx_, ctx_->inv_idx(o.idx_)), ctx_};
}
inline FieldElement FieldElement::inv() const { return {ctx().inv_idx(idx_), ctx_}; }
inline FieldElement FieldElement::pow(int64_t e) const { return {ctx().pow_idx(idx_, e), ctx_}; }
inline int FieldElement::trace() const { return ctx().trace_idx(idx_); }
inline Character FieldElement::chi() const { return Character(ctx().p(), ctx().trace_idx(idx_)); }

inline bool FieldElement::operator==(const FieldElement& o) const {
    if (ctx_ == o.ctx_) return idx_ == o.idx_;
    if (!ctx_ || !o.ctx_) return false;
    return ctx_->same_field(*o.ctx_) && idx_ == o.idx_;
}

inline std::string FieldElement::str() const {
    const auto c = coeffs();
    std::string out;
    for (size_t i = 0; i < c.size(); ++i) {
        if (c[i] == 0) continue;
        if (!out.empty()) out += "+";
        if (i == 0) out += std::to_string(c[i]);
        else {
            if (c[i] != 1) out += std::to_string(c[i]) + "*";
            out += (i == 1) ? "t" : ("t^" + std::to_string(i));
        }
    }
    return out.empty() ? "0" : out;
}

}  // namespace qnsf
