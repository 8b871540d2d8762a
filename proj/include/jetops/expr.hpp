#ifndef JETOPS_EXPR_HPP
#define JETOPS_EXPR_HPP

// Canonical-form differential expressions.
//
// An Expr is a fraction: a Laurent polynomial numerator over a factored
// denominator of primitive sum bases.  Numerator monomials are products of
// kernel powers, where a kernel is one of
//   - an independent variable, a parameter, a function-symbol derivative,
//   - a jet variable (dependent or potential, with a derivative multi-index),
//   - a fractional/parametric power of a sum (Pow), or
//   - a formal x-antiderivative (Nli, printed Dxinv(...)).
// Pow exponents are kept with rational part in [0,1); integer carries are
// expanded into the numerator (positive) or pushed to the denominator
// (negative).  Equal expressions therefore share one representation, and an
// expression is zero iff its numerator has no terms.

#include "jetops/exponent.hpp"
#include "jetops/multi_index.hpp"
#include "jetops/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace jetops {

enum class KKind : std::uint8_t { Indep = 0, Param = 1, Func = 2, Jet = 3, Pow = 4, Nli = 5 };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Kernel {
    KKind kind = KKind::Indep;
    int id = -1;       // Indep/Param/Func: symbol id; Jet: field id
    MultiIndex idx;    // Jet: derivative counts per independent; Func: counts per argument slot
    ExprPtr sub;       // Pow: base (denominator-free); Nli: integrand
    std::size_t h = 0;

    void rehash();
};

struct Monomial {
    Rat coeff;
    std::vector<std::pair<Kernel, Exponent>> factors;  // sorted by kernel order, no zero exponents

    Monomial() : coeff(0) {}
    explicit Monomial(Rat c) : coeff(std::move(c)) {}
};

struct Poly {
    std::vector<Monomial> terms;  // strictly descending in monomial order, nonzero coeffs
    bool is_zero() const { return terms.empty(); }
};

struct DenFactor {
    Poly base;  // primitive sum: >=2 terms, unit content, positive leading coeff
    long exp;   // >= 1
};

struct Expr {
    Poly num;
    std::vector<DenFactor> den;  // sorted by base

    bool is_zero() const { return num.is_zero(); }
};

// ---------------------------------------------------------------------------
// ordering and equality

int kernel_cmp(const Kernel& a, const Kernel& b);
int poly_cmp(const Poly& a, const Poly& b);

inline int rat_cmp(const Rat& a, const Rat& b) { return a < b ? -1 : (a == b ? 0 : 1); }

inline int exp_cmp(const Exponent& a, const Exponent& b) {
    auto o = a <=> b;
    return o < 0 ? -1 : (o == 0 ? 0 : 1);
}

inline std::size_t poly_hash(const Poly& p) {
    std::size_t h = 0xcbf29ce484222325ull;
    for (auto& m : p.terms) {
        h = h * 1099511628211ull + rat_hash(m.coeff);
        for (auto& [k, e] : m.factors) h = h * 1099511628211ull + (k.h ^ e.hash());
    }
    return h;
}

inline void Kernel::rehash() {
    std::size_t v = static_cast<std::size_t>(kind) * 0x9e3779b97f4a7c15ull + static_cast<std::size_t>(id + 1);
    v = v * 31 + idx.hash();
    if (sub) v = v * 1099511628211ull + poly_hash(sub->num);
    h = v;
}

inline int kernel_cmp(const Kernel& a, const Kernel& b) {
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
    if (a.id != b.id) return a.id < b.id ? -1 : 1;
    auto o = a.idx <=> b.idx;
    if (o != 0) return o < 0 ? -1 : 1;
    bool as = static_cast<bool>(a.sub), bs = static_cast<bool>(b.sub);
    if (as != bs) return as < bs ? -1 : 1;
    if (as) {
        if (a.h != b.h) return a.h < b.h ? -1 : 1;
        return poly_cmp(a.sub->num, b.sub->num);
    }
    return 0;
}

// graded weight: total differential order carried by direct jet factors
inline Rat mono_weight(const Monomial& m) {
    Rat w(0);
    for (auto& [k, e] : m.factors)
        if (k.kind == KKind::Jet) w += Rat(k.idx.order()) * e.c;
    return w;
}

// term order: graded by jet weight, then lexicographic on factor lists
inline int mono_cmp(const Monomial& a, const Monomial& b) {
    int c = rat_cmp(mono_weight(a), mono_weight(b));
    if (c != 0) return c;
    std::size_t i = 0, j = 0;
    while (i < a.factors.size() && j < b.factors.size()) {
        int kc = kernel_cmp(a.factors[i].first, b.factors[j].first);
        if (kc < 0) {
            // a has a smaller kernel with nonzero exp where b has 0
            return exp_cmp(a.factors[i].second, Exponent()) > 0 ? 1 : -1;
        }
        if (kc > 0) return exp_cmp(b.factors[j].second, Exponent()) > 0 ? -1 : 1;
        int ec = exp_cmp(a.factors[i].second, b.factors[j].second);
        if (ec != 0) return ec;
        ++i, ++j;
    }
    if (i < a.factors.size()) return exp_cmp(a.factors[i].second, Exponent()) > 0 ? 1 : -1;
    if (j < b.factors.size()) return exp_cmp(b.factors[j].second, Exponent()) > 0 ? -1 : 1;
    return 0;
}

inline int poly_cmp(const Poly& a, const Poly& b) {
    std::size_t n = std::min(a.terms.size(), b.terms.size());
    for (std::size_t i = 0; i < n; ++i) {
        int c = mono_cmp(a.terms[i], b.terms[i]);
        if (c != 0) return c;
        c = rat_cmp(a.terms[i].coeff, b.terms[i].coeff);
        if (c != 0) return c;
    }
    if (a.terms.size() != b.terms.size()) return a.terms.size() < b.terms.size() ? -1 : 1;
    return 0;
}

inline bool kernel_eq(const Kernel& a, const Kernel& b) {
    return a.h == b.h && kernel_cmp(a, b) == 0;
}

inline bool mono_factors_eq(const Monomial& a, const Monomial& b) {
    if (a.factors.size() != b.factors.size()) return false;
    for (std::size_t i = 0; i < a.factors.size(); ++i)
        if (!(a.factors[i].second == b.factors[i].second) ||
            !kernel_eq(a.factors[i].first, b.factors[i].first))
            return false;
    return true;
}

inline bool poly_eq(const Poly& a, const Poly& b) { return poly_cmp(a, b) == 0; }

bool expr_eq_struct(const Expr& a, const Expr& b);

// ---------------------------------------------------------------------------
// small constructors

inline Poly poly_from_monos(std::vector<Monomial> ms) {
    std::sort(ms.begin(), ms.end(), [](const Monomial& x, const Monomial& y) { return mono_cmp(x, y) > 0; });
    Poly p;
    for (auto& m : ms) {
        if (m.coeff == 0) continue;
        if (!p.terms.empty() && mono_factors_eq(p.terms.back(), m)) {
            p.terms.back().coeff += m.coeff;
            if (p.terms.back().coeff == 0) p.terms.pop_back();
        } else {
            p.terms.push_back(std::move(m));
        }
    }
    return p;
}

inline Expr expr_zero() { return Expr{}; }

inline Expr expr_rat(Rat r) {
    Expr e;
    if (r != 0) e.num.terms.push_back(Monomial(std::move(r)));
    return e;
}

inline Expr expr_int(long n) { return expr_rat(Rat(n)); }

inline bool expr_is_rat(const Expr& e, const Rat& r) {
    if (e.is_zero()) return r == 0;
    return e.den.empty() && e.num.terms.size() == 1 && e.num.terms[0].factors.empty() &&
           e.num.terms[0].coeff == r;
}

inline bool expr_is_one(const Expr& e) { return expr_is_rat(e, Rat(1)); }

inline std::optional<Rat> expr_as_rat(const Expr& e) {
    if (e.is_zero()) return Rat(0);
    if (e.den.empty() && e.num.terms.size() == 1 && e.num.terms[0].factors.empty())
        return e.num.terms[0].coeff;
    return std::nullopt;
}

Expr expr_mul(const Expr& a, const Expr& b);
Expr expr_add(const Expr& a, const Expr& b);
Expr expr_pow(const Expr& a, const Exponent& e);
Expr expr_inv(const Expr& a);

inline Expr expr_from_poly(Poly p) {
    Expr e;
    e.num = std::move(p);
    return e;
}

inline Expr expr_kernel(Kernel k, Exponent e = Exponent(1)) {
    // route through the canonicalizing power machinery
    Monomial m{Rat(1)};
    m.factors.push_back({std::move(k), Exponent(1)});
    Poly p;
    p.terms.push_back(std::move(m));
    Expr base = expr_from_poly(std::move(p));
    if (e == Exponent(1)) return base;
    return expr_pow(base, e);
}

inline Kernel make_indep_kernel(int id) {
    Kernel k;
    k.kind = KKind::Indep;
    k.id = id;
    k.rehash();
    return k;
}
inline Kernel make_param_kernel(int id) {
    Kernel k;
    k.kind = KKind::Param;
    k.id = id;
    k.rehash();
    return k;
}
inline Kernel make_func_kernel(int id, MultiIndex slots) {
    Kernel k;
    k.kind = KKind::Func;
    k.id = id;
    k.idx = std::move(slots);
    k.rehash();
    return k;
}
inline Kernel make_jet_kernel_raw(int field, MultiIndex j) {
    Kernel k;
    k.kind = KKind::Jet;
    k.id = field;
    k.idx = std::move(j);
    k.rehash();
    return k;
}
inline Kernel make_nli_kernel(Expr integrand) {
    Kernel k;
    k.kind = KKind::Nli;
    k.sub = std::make_shared<const Expr>(std::move(integrand));
    k.rehash();
    return k;
}

// ---------------------------------------------------------------------------
// content extraction

// splits p = content * primitive.  If with_scale, the rational content (gcd of
// coefficients, signed by the leading term) is extracted too; kernel content is
// the per-kernel minimum exponent across all terms.
inline std::pair<Monomial, Poly> poly_extract_content(const Poly& p, bool with_scale) {
    Monomial content{Rat(1)};
    if (p.terms.empty()) return {content, p};
    if (with_scale) {
        mpz_class g(0), l(1);
        for (auto& m : p.terms) {
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), m.coeff.get_num().get_mpz_t());
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), m.coeff.get_den().get_mpz_t());
        }
        Rat scale(g, l);
        scale.canonicalize();
        if (p.terms[0].coeff < 0) scale = -scale;
        content.coeff = scale;
    }
    // kernel-wise min exponents (only kernels appearing in the first term can
    // have a nonzero minimum if all exponents are positive; Laurent exponents
    // force a full scan)
    std::vector<std::pair<Kernel, Exponent>> mins;
    bool first = true;
    for (auto& m : p.terms) {
        if (first) {
            mins = m.factors;
            first = false;
            continue;
        }
        std::vector<std::pair<Kernel, Exponent>> next;
        std::size_t i = 0, j = 0;
        while (i < mins.size() || j < m.factors.size()) {
            if (j == m.factors.size() || (i < mins.size() && kernel_cmp(mins[i].first, m.factors[j].first) < 0)) {
                // kernel absent from m: min(e, 0)
                if (exp_cmp(mins[i].second, Exponent()) < 0) next.push_back(mins[i]);
                ++i;
            } else if (i == mins.size() || kernel_cmp(m.factors[j].first, mins[i].first) < 0) {
                if (exp_cmp(m.factors[j].second, Exponent()) < 0) next.push_back(m.factors[j]);
                ++j;
            } else {
                next.push_back(exp_cmp(mins[i].second, m.factors[j].second) <= 0 ? mins[i] : m.factors[j]);
                ++i, ++j;
            }
        }
        mins = std::move(next);
        if (mins.empty() && !with_scale) break;
    }
    content.factors = mins;
    if (content.coeff == 1 && content.factors.empty()) return {content, p};
    // divide out
    Poly prim;
    prim.terms.reserve(p.terms.size());
    for (auto& m : p.terms) {
        Monomial q;
        q.coeff = m.coeff / content.coeff;
        std::size_t i = 0, j = 0;
        while (i < m.factors.size() || j < content.factors.size()) {
            if (j == content.factors.size() ||
                (i < m.factors.size() && kernel_cmp(m.factors[i].first, content.factors[j].first) < 0)) {
                q.factors.push_back(m.factors[i]);
                ++i;
            } else if (i == m.factors.size() ||
                       kernel_cmp(content.factors[j].first, m.factors[i].first) < 0) {
                Exponent e = Exponent() - content.factors[j].second;
                q.factors.push_back({content.factors[j].first, e});
                ++j;
            } else {
                Exponent e = m.factors[i].second - content.factors[j].second;
                if (!e.is_zero()) q.factors.push_back({m.factors[i].first, e});
                ++i, ++j;
            }
        }
        prim.terms.push_back(std::move(q));
    }
    return {content, prim};
}

// ---------------------------------------------------------------------------
// multiplication with pow-kernel carries

struct Carry {
    Poly base;
    long exp;  // positive: expand into numerator; negative: denominator factor
};

// appends (k, e) to the factor list under construction, splitting integer
// parts of Pow exponents into carries
inline void push_factor(std::vector<std::pair<Kernel, Exponent>>& out, std::vector<Carry>& carries,
                        const Kernel& k, Exponent e) {
    if (e.is_zero()) return;
    if (k.kind == KKind::Pow) {
        long n = rat_floor(e.c);
        if (n != 0) {
            carries.push_back({k.sub->num, n});
            e.c -= n;
        }
        if (e.is_zero()) return;
    }
    out.push_back({k, std::move(e)});
}

// merges two sorted factor lists adding exponents
inline Monomial mono_mul_core(const Monomial& a, const Monomial& b, std::vector<Carry>& carries) {
    Monomial r;
    r.coeff = a.coeff * b.coeff;
    r.factors.reserve(a.factors.size() + b.factors.size());
    std::size_t i = 0, j = 0;
    while (i < a.factors.size() || j < b.factors.size()) {
        if (j == b.factors.size() ||
            (i < a.factors.size() && kernel_cmp(a.factors[i].first, b.factors[j].first) < 0)) {
            push_factor(r.factors, carries, a.factors[i].first, a.factors[i].second);
            ++i;
        } else if (i == a.factors.size() || kernel_cmp(b.factors[j].first, a.factors[i].first) < 0) {
            push_factor(r.factors, carries, b.factors[j].first, b.factors[j].second);
            ++j;
        } else {
            push_factor(r.factors, carries, a.factors[i].first, a.factors[i].second + b.factors[j].second);
            ++i, ++j;
        }
    }
    return r;
}

Expr expr_mul_mono(const Expr& a, const Monomial& m);

Poly poly_pow_int(const Poly& p, long n);

inline Poly poly_add(const Poly& a, const Poly& b) {
    Poly r;
    r.terms.reserve(a.terms.size() + b.terms.size());
    std::size_t i = 0, j = 0;
    while (i < a.terms.size() || j < b.terms.size()) {
        int c;
        if (i == a.terms.size())
            c = -1;
        else if (j == b.terms.size())
            c = 1;
        else
            c = mono_cmp(a.terms[i], b.terms[j]);
        if (c > 0)
            r.terms.push_back(a.terms[i++]);
        else if (c < 0)
            r.terms.push_back(b.terms[j++]);
        else {
            Monomial m = a.terms[i++];
            m.coeff += b.terms[j++].coeff;
            if (m.coeff != 0) r.terms.push_back(std::move(m));
        }
    }
    return r;
}

inline Poly poly_neg(Poly p) {
    for (auto& m : p.terms) m.coeff = -m.coeff;
    return p;
}

inline Poly poly_scale(Poly p, const Rat& s) {
    if (s == 0) return Poly{};
    for (auto& m : p.terms) m.coeff *= s;
    return p;
}

// multiplication that may not carry (asserts no carries appear); used for
// polynomials over atoms with safe exponents
inline Poly poly_mul_nocarry(const Poly& a, const Poly& b) {
    std::vector<Monomial> out;
    out.reserve(a.terms.size() * b.terms.size());
    std::vector<Carry> carries;
    for (auto& x : a.terms)
        for (auto& y : b.terms) {
            out.push_back(mono_mul_core(x, y, carries));
            if (!carries.empty()) throw std::logic_error("unexpected pow carry");
        }
    return poly_from_monos(std::move(out));
}

// ---------------------------------------------------------------------------
// denominator handling

Expr expr_with_den(Poly num, std::vector<DenFactor> den);

// divides the numerator by denominator factors where possible (trial exact
// division), removes spent factors
std::optional<Poly> poly_div_exact(const Poly& a, const Poly& s, long cap = 20000);

inline Expr expr_cancel(Expr e) {
    if (e.num.is_zero()) return expr_zero();
    for (std::size_t i = 0; i < e.den.size();) {
        bool removed = false;
        while (e.den[i].exp > 0) {
            auto q = poly_div_exact(e.num, e.den[i].base);
            if (!q) break;
            e.num = std::move(*q);
            if (--e.den[i].exp == 0) {
                e.den.erase(e.den.begin() + i);
                removed = true;
                break;
            }
        }
        if (!removed) ++i;
        if (e.num.is_zero()) return expr_zero();
    }
    return e;
}

// pushes base^exp into the denominator of (num, den), normalizing the base
inline void den_push(Poly& num, std::vector<DenFactor>& den, Poly base, long exp) {
    if (exp <= 0) throw std::logic_error("den_push exponent");
    if (base.is_zero()) throw std::domain_error("zero denominator");
    auto [content, prim] = poly_extract_content(base, /*with_scale=*/true);
    // invert the content exp times into the numerator
    Monomial inv{rat_pow(Rat(1) / content.coeff, exp)};
    for (auto& [k, e] : content.factors) inv.factors.push_back({k, e.scaled(Rat(-exp))});
    {
        std::vector<Carry> carries;
        std::vector<Monomial> out;
        for (auto& m : num.terms) out.push_back(mono_mul_core(m, inv, carries));
        num = poly_from_monos(std::move(out));
        for (auto& c : carries) {
            if (c.exp > 0)
                num = poly_mul_nocarry(num, poly_pow_int(c.base, c.exp));
            else
                den_push(num, den, c.base, -c.exp);
        }
    }
    if (prim.terms.size() == 1) {
        // pure monomial base: fold entirely into numerator
        Monomial minv{rat_pow(Rat(1) / prim.terms[0].coeff, exp)};
        for (auto& [k, e] : prim.terms[0].factors) minv.factors.push_back({k, e.scaled(Rat(-exp))});
        std::vector<Carry> carries;
        std::vector<Monomial> out;
        for (auto& m : num.terms) out.push_back(mono_mul_core(m, minv, carries));
        num = poly_from_monos(std::move(out));
        for (auto& c : carries) {
            if (c.exp > 0)
                num = poly_mul_nocarry(num, poly_pow_int(c.base, c.exp));
            else
                den_push(num, den, c.base, -c.exp);
        }
        return;
    }
    for (auto& f : den) {
        if (poly_eq(f.base, prim)) {
            f.exp += exp;
            return;
        }
    }
    den.push_back({std::move(prim), exp});
    std::sort(den.begin(), den.end(),
              [](const DenFactor& x, const DenFactor& y) { return poly_cmp(x.base, y.base) < 0; });
}

inline Expr expr_with_den(Poly num, std::vector<DenFactor> den) {
    Expr e;
    e.num = std::move(num);
    if (e.num.is_zero()) return expr_zero();
    e.den = std::move(den);
    std::sort(e.den.begin(), e.den.end(),
              [](const DenFactor& x, const DenFactor& y) { return poly_cmp(x.base, y.base) < 0; });
    return expr_cancel(std::move(e));
}

// ---------------------------------------------------------------------------
// arithmetic

inline Expr expr_mul_mono(const Expr& a, const Monomial& m) {
    if (a.is_zero() || m.coeff == 0) return expr_zero();
    std::vector<Carry> carries;
    std::vector<Monomial> out;
    out.reserve(a.num.terms.size());
    for (auto& t : a.num.terms) out.push_back(mono_mul_core(t, m, carries));
    Poly num = poly_from_monos(std::move(out));
    std::vector<DenFactor> den = a.den;
    for (auto& c : carries) {
        if (c.exp > 0)
            num = poly_mul_nocarry(num, poly_pow_int(c.base, c.exp));
        else
            den_push(num, den, c.base, -c.exp);
    }
    return expr_with_den(std::move(num), std::move(den));
}

inline Expr expr_add(const Expr& a, const Expr& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    // common denominator: lcm over matching primitive bases
    std::vector<DenFactor> lcm = a.den;
    for (auto& f : b.den) {
        bool found = false;
        for (auto& g : lcm)
            if (poly_eq(g.base, f.base)) {
                g.exp = std::max(g.exp, f.exp);
                found = true;
                break;
            }
        if (!found) lcm.push_back(f);
    }
    auto scale_up = [&](const Expr& e) {
        Poly n = e.num;
        for (auto& g : lcm) {
            long have = 0;
            for (auto& f : e.den)
                if (poly_eq(f.base, g.base)) have = f.exp;
            if (g.exp > have) n = poly_mul_nocarry(n, poly_pow_int(g.base, g.exp - have));
        }
        return n;
    };
    Poly num = poly_add(scale_up(a), scale_up(b));
    return expr_with_den(std::move(num), std::move(lcm));
}

inline Expr expr_neg(Expr a) {
    a.num = poly_neg(std::move(a.num));
    return a;
}

inline Expr expr_sub(const Expr& a, const Expr& b) { return expr_add(a, expr_neg(b)); }

inline Expr expr_scale(Expr a, const Rat& s) {
    if (s == 0) return expr_zero();
    a.num = poly_scale(std::move(a.num), s);
    return a;
}

inline Expr expr_mul(const Expr& a, const Expr& b) {
    if (a.is_zero() || b.is_zero()) return expr_zero();
    Expr acc = expr_zero();
    for (auto& m : b.num.terms) acc = expr_add(acc, expr_mul_mono(a, m));
    std::vector<DenFactor> den = acc.den;
    Poly num = acc.num;
    for (auto& f : b.den) den_push(num, den, f.base, f.exp);
    return expr_with_den(std::move(num), std::move(den));
}

inline Poly poly_pow_int(const Poly& p, long n) {
    if (n < 0) throw std::logic_error("poly_pow_int negative");
    Poly acc;
    acc.terms.push_back(Monomial(Rat(1)));
    Poly base = p;
    while (n) {
        if (n & 1) acc = poly_mul_nocarry(acc, base);
        n >>= 1;
        if (n) base = poly_mul_nocarry(base, base);
    }
    return acc;
}

inline Expr expr_inv(const Expr& a) {
    if (a.is_zero()) throw std::domain_error("zero denominator");
    // old denominator moves to the numerator
    Poly num;
    num.terms.push_back(Monomial(Rat(1)));
    for (auto& f : a.den) num = poly_mul_nocarry(num, poly_pow_int(f.base, f.exp));
    std::vector<DenFactor> den;
    den_push(num, den, a.num, 1);
    return expr_with_den(std::move(num), std::move(den));
}

inline Expr expr_div(const Expr& a, const Expr& b) { return expr_mul(a, expr_inv(b)); }

inline Expr expr_pow_int(const Expr& a, long n) {
    if (n == 0) return expr_rat(Rat(1));
    bool inv = n < 0;
    unsigned long k = inv ? -n : n;
    Expr acc = expr_rat(Rat(1));
    Expr base = a;
    while (k) {
        if (k & 1) acc = expr_mul(acc, base);
        k >>= 1;
        if (k) base = expr_mul(base, base);
    }
    return inv ? expr_inv(acc) : acc;
}

// general power with an Exponent: distributes over monomial factors; sums with
// non-integer exponents become Pow kernels
inline Expr expr_pow(const Expr& a, const Exponent& e) {
    if (e.is_zero()) return expr_rat(Rat(1));
    if (e.is_integer()) return expr_pow_int(a, e.as_integer());
    if (a.is_zero()) return expr_zero();
    // denominator factors: S^k in den -> S^(-k*e) via recursion
    Expr acc = expr_rat(Rat(1));
    for (auto& f : a.den) {
        Expr basexpr = expr_from_poly(f.base);
        acc = expr_mul(acc, expr_pow(basexpr, e.scaled(Rat(-f.exp))));
    }
    if (a.num.terms.size() == 1) {
        const Monomial& m = a.num.terms[0];
        Expr r = expr_rat(Rat(1));
        if (m.coeff != 1) {
            if (!rat_is_int(e.c) || !e.params.empty()) {
                // c^(non-integer): keep the whole monomial opaque under a Pow kernel
                r = expr_zero();
            } else {
                r = expr_rat(rat_pow(m.coeff, e.as_integer()));
            }
        }
        if (!r.is_zero()) {
            for (auto& [k, fe] : m.factors) {
                if (k.kind == KKind::Pow) {
                    // (S^fe)^e legal when one side is pure rational
                    if (fe.is_rational())
                        r = expr_mul(r, expr_pow(expr_from_poly(k.sub->num), e.scaled(fe.c)));
                    else if (e.is_rational())
                        r = expr_mul(r, expr_pow(expr_from_poly(k.sub->num), fe.scaled(e.c)));
                    else
                        throw std::domain_error("unsupported exponent product");
                } else {
                    Exponent ne;
                    if (fe.is_rational())
                        ne = e.scaled(fe.c);
                    else if (e.is_rational())
                        ne = fe.scaled(e.c);
                    else
                        throw std::domain_error("unsupported exponent product");
                    Monomial f1{Rat(1)};
                    std::vector<Carry> carries;
                    push_factor(f1.factors, carries, k, ne);
                    Poly p;
                    p.terms.push_back(std::move(f1));
                    Expr piece = expr_from_poly(std::move(p));
                    for (auto& c : carries) {
                        if (c.exp > 0)
                            piece = expr_mul(piece, expr_from_poly(poly_pow_int(c.base, c.exp)));
                        else {
                            Poly n = piece.num;
                            std::vector<DenFactor> d = piece.den;
                            den_push(n, d, c.base, -c.exp);
                            piece = expr_with_den(std::move(n), std::move(d));
                        }
                    }
                    r = expr_mul(r, piece);
                }
            }
            return expr_mul(acc, r);
        }
    }
    // sum (or coefficient-bearing monomial with non-integer exponent):
    // extract kernel content, keep the primitive part under a Pow kernel
    auto [content, prim] = poly_extract_content(a.num, /*with_scale=*/false);
    Expr cpart = expr_rat(Rat(1));
    for (auto& [k, fe] : content.factors) {
        Monomial cm{Rat(1)};
        cm.factors.push_back({k, fe});
        Poly cp;
        cp.terms.push_back(cm);
        cpart = expr_mul(cpart, expr_pow(expr_from_poly(cp), e));
    }
    Kernel pk;
    pk.kind = KKind::Pow;
    pk.sub = std::make_shared<const Expr>(expr_from_poly(prim));
    pk.rehash();
    Monomial pm{Rat(1)};
    std::vector<Carry> carries;
    push_factor(pm.factors, carries, pk, e);
    Poly pp;
    pp.terms.push_back(std::move(pm));
    Expr r = expr_from_poly(std::move(pp));
    for (auto& c : carries) {
        if (c.exp > 0)
            r = expr_mul(r, expr_from_poly(poly_pow_int(c.base, c.exp)));
        else {
            Poly n = r.num;
            std::vector<DenFactor> d = r.den;
            den_push(n, d, c.base, -c.exp);
            r = expr_with_den(std::move(n), std::move(d));
        }
    }
    return expr_mul(acc, expr_mul(cpart, r));
}

// ---------------------------------------------------------------------------
// exact division of Laurent polynomials

inline std::optional<Monomial> mono_div(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.coeff = a.coeff / b.coeff;
    std::size_t i = 0, j = 0;
    std::vector<Carry> carries;
    while (i < a.factors.size() || j < b.factors.size()) {
        if (j == b.factors.size() ||
            (i < a.factors.size() && kernel_cmp(a.factors[i].first, b.factors[j].first) < 0)) {
            push_factor(r.factors, carries, a.factors[i].first, a.factors[i].second);
            ++i;
        } else if (i == a.factors.size() || kernel_cmp(b.factors[j].first, a.factors[i].first) < 0) {
            push_factor(r.factors, carries, b.factors[j].first, Exponent() - b.factors[j].second);
            ++j;
        } else {
            push_factor(r.factors, carries, a.factors[i].first,
                        a.factors[i].second - b.factors[j].second);
            ++i, ++j;
        }
    }
    if (!carries.empty()) return std::nullopt;  // would leave the polynomial ring
    return r;
}

inline std::optional<Poly> poly_div_exact(const Poly& a, const Poly& s, long cap) {
    if (s.is_zero()) return std::nullopt;
    if (a.is_zero()) return Poly{};
    const Monomial& lead = s.terms.front();
    const Monomial& trail = s.terms.back();
    // lower bound on quotient monomials: trail(R0)/trail(s)
    auto qmin = mono_div(a.terms.back(), trail);
    Poly r = a;
    std::vector<Monomial> q;
    long iter = 0;
    while (!r.is_zero()) {
        if (++iter > cap) return std::nullopt;
        auto t = mono_div(r.terms.front(), lead);
        if (!t) return std::nullopt;
        if (qmin) {
            std::vector<Carry> carries;
            Monomial probe = mono_mul_core(*t, trail, carries);
            if (carries.empty() && mono_cmp(probe, a.terms.back()) < 0) return std::nullopt;
        }
        // r -= t*s
        std::vector<Monomial> prod;
        prod.reserve(s.terms.size());
        bool bad = false;
        for (auto& m : s.terms) {
            std::vector<Carry> carries;
            prod.push_back(mono_mul_core(m, *t, carries));
            if (!carries.empty()) {
                bad = true;
                break;
            }
        }
        if (bad) return std::nullopt;
        q.push_back(*t);
        r = poly_add(r, poly_neg(poly_from_monos(std::move(prod))));
    }
    return poly_from_monos(std::move(q));
}

inline bool expr_eq_struct(const Expr& a, const Expr& b) {
    if (!poly_eq(a.num, b.num)) return false;
    if (a.den.size() != b.den.size()) return false;
    for (std::size_t i = 0; i < a.den.size(); ++i)
        if (a.den[i].exp != b.den[i].exp || !poly_eq(a.den[i].base, b.den[i].base)) return false;
    return true;
}

// semantic equality: a - b == 0 (decidable: zero iff empty numerator)
inline bool expr_equal(const Expr& a, const Expr& b) { return expr_sub(a, b).is_zero(); }

}  // namespace jetops

#endif
