#ifndef JETOPS_DERIV_HPP
#define JETOPS_DERIV_HPP

#include "jetops/space.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace jetops {

// defined in integrate.hpp; normalizes a formal x-antiderivative
Expr make_nonlocal(const VarSpace& sp, const Expr& g);

inline Expr exponent_to_expr(const Exponent& e) {
    Expr r = expr_rat(e.c);
    for (auto& [id, co] : e.params)
        r = expr_add(r, expr_scale(expr_kernel(make_param_kernel(id)), co));
    return r;
}

inline Expr kernel_pow_expr(const Kernel& k, const Exponent& e) {
    if (k.kind == KKind::Pow) return expr_pow(expr_from_poly(k.sub->num), e);
    return expr_kernel(k, e);
}

// generic derivation: applies the product/chain/quotient rules over the
// canonical representation, delegating the derivative of each kernel atom
using AtomDeriv = std::function<Expr(const Kernel&)>;

inline Expr derive(const Expr& e, const AtomDeriv& datom) {
    Expr out = expr_zero();
    for (auto& m : e.num.terms) {
        for (std::size_t t = 0; t < m.factors.size(); ++t) {
            const auto& [k, ex] = m.factors[t];
            Expr dk = datom(k);
            if (dk.is_zero()) continue;
            Monomial rest{m.coeff};
            for (std::size_t s = 0; s < m.factors.size(); ++s)
                if (s != t) rest.factors.push_back(m.factors[s]);
            Poly rp;
            rp.terms.push_back(std::move(rest));
            Expr term = expr_mul(expr_from_poly(rp),
                                 expr_mul(exponent_to_expr(ex),
                                          expr_mul(kernel_pow_expr(k, ex - Exponent(1)), dk)));
            out = expr_add(out, term);
        }
    }
    if (!e.den.empty()) {
        Expr numpart = out;
        for (auto& f : e.den) {
            Poly n = numpart.num;
            std::vector<DenFactor> d = numpart.den;
            den_push(n, d, f.base, f.exp);
            numpart = expr_with_den(std::move(n), std::move(d));
        }
        out = numpart;
        // - sum_i k_i * num * dS_i / (S_i^{k_i+1} * rest)
        for (std::size_t i = 0; i < e.den.size(); ++i) {
            Expr ds = derive(expr_from_poly(e.den[i].base), datom);
            if (ds.is_zero()) continue;
            Expr piece = expr_mul(expr_from_poly(e.num), ds);
            piece = expr_scale(piece, Rat(-e.den[i].exp));
            Poly n = piece.num;
            std::vector<DenFactor> d = piece.den;
            for (std::size_t j = 0; j < e.den.size(); ++j)
                den_push(n, d, e.den[j].base, e.den[j].exp + (i == j ? 1 : 0));
            out = expr_add(out, expr_with_den(std::move(n), std::move(d)));
        }
    }
    return out;
}

namespace detail {
struct KernelLess {
    bool operator()(const Kernel& a, const Kernel& b) const { return kernel_cmp(a, b) < 0; }
};
inline bool cache_enabled() {
    static const bool off = std::getenv("JETOPS_NO_CACHE") != nullptr;
    return !off;
}
}  // namespace detail

Expr total_derivative(const VarSpace& sp, const Expr& e, int i);

inline Expr total_derivative_kernel(const VarSpace& sp, const Kernel& k, int i) {
    switch (k.kind) {
        case KKind::Indep:
            return k.id == i ? expr_rat(Rat(1)) : expr_zero();
        case KKind::Param:
            return expr_zero();
        case KKind::Jet:
            return make_jet(sp, k.id, k.idx.plus(i));
        case KKind::Func: {
            const FuncSpec& f = sp.funcs[k.id];
            if (k.idx.order() == 0) {
                auto it = f.diff_rules.find(i);
                if (it != f.diff_rules.end()) return it->second;
            }
            Expr out = expr_zero();
            for (std::size_t s = 0; s < f.args.size(); ++s) {
                Expr darg;
                if (f.args[s].is_indep)
                    darg = f.args[s].indep == i ? expr_rat(Rat(1)) : expr_zero();
                else
                    darg = make_jet(sp, f.args[s].field, f.args[s].jet.plus(i));
                if (darg.is_zero()) continue;
                out = expr_add(out, expr_mul(make_func(sp, k.id, k.idx.plus(s)), darg));
            }
            return out;
        }
        case KKind::Pow:
            return total_derivative(sp, *k.sub, i);
        case KKind::Nli:
            if (i == sp.x_index) return *k.sub;
            return make_nonlocal(sp, total_derivative(sp, *k.sub, i));
    }
    return expr_zero();
}

inline Expr total_derivative(const VarSpace& sp, const Expr& e, int i) {
    thread_local std::map<std::pair<int, Kernel>, Expr,
                          bool (*)(const std::pair<int, Kernel>&, const std::pair<int, Kernel>&)>
        cache(+[](const std::pair<int, Kernel>& a, const std::pair<int, Kernel>& b) {
            if (a.first != b.first) return a.first < b.first;
            return kernel_cmp(a.second, b.second) < 0;
        });
    AtomDeriv datom = [&](const Kernel& k) -> Expr {
        if (!detail::cache_enabled() || k.kind == KKind::Pow)
            return total_derivative_kernel(sp, k, i);
        auto key = std::make_pair(i, k);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        Expr d = total_derivative_kernel(sp, k, i);
        if (cache.size() > 4096) cache.clear();
        cache.emplace(std::move(key), d);
        return d;
    };
    return derive(e, datom);
}

inline Expr total_derivative_multi(const VarSpace& sp, Expr e, const MultiIndex& j) {
    for (std::size_t i = 0; i < j.mult.size(); ++i)
        for (int c = 0; c < j.mult[i]; ++c) e = total_derivative(sp, e, static_cast<int>(i));
    return e;
}

// partial derivative w.r.t. a jet variable (chains through Pow bases and
// function-symbol arguments; Nli kernels are opaque)
inline Expr partial_jet(const VarSpace& sp, const Expr& e, int field, const MultiIndex& j) {
    AtomDeriv datom = [&](const Kernel& k) -> Expr {
        switch (k.kind) {
            case KKind::Jet:
                return (k.id == field && k.idx == j) ? expr_rat(Rat(1)) : expr_zero();
            case KKind::Pow:
                return partial_jet(sp, *k.sub, field, j);
            case KKind::Func: {
                const FuncSpec& f = sp.funcs[k.id];
                Expr out = expr_zero();
                for (std::size_t s = 0; s < f.args.size(); ++s)
                    if (!f.args[s].is_indep && f.args[s].field == field && f.args[s].jet == j)
                        out = expr_add(out, make_func(sp, k.id, k.idx.plus(s)));
                return out;
            }
            default:
                return expr_zero();
        }
    };
    return derive(e, datom);
}

// explicit partial w.r.t. an independent variable (jets held fixed)
inline Expr partial_indep(const VarSpace& sp, const Expr& e, int i) {
    AtomDeriv datom = [&](const Kernel& k) -> Expr {
        switch (k.kind) {
            case KKind::Indep:
                return k.id == i ? expr_rat(Rat(1)) : expr_zero();
            case KKind::Pow:
                return partial_indep(sp, *k.sub, i);
            case KKind::Func: {
                const FuncSpec& f = sp.funcs[k.id];
                Expr out = expr_zero();
                for (std::size_t s = 0; s < f.args.size(); ++s)
                    if (f.args[s].is_indep && f.args[s].indep == i)
                        out = expr_add(out, make_func(sp, k.id, k.idx.plus(s)));
                return out;
            }
            default:
                return expr_zero();
        }
    };
    return derive(e, datom);
}

// ---------------------------------------------------------------------------
// structure queries

struct JetRef {
    int field;
    MultiIndex idx;
    friend bool operator<(const JetRef& a, const JetRef& b) {
        if (a.field != b.field) return a.field < b.field;
        return (a.idx <=> b.idx) < 0;
    }
    friend bool operator==(const JetRef& a, const JetRef& b) {
        return a.field == b.field && a.idx == b.idx;
    }
};

inline void collect_jets_poly(const VarSpace& sp, const Poly& p, bool include_nli,
                              std::set<JetRef>& out);

inline void collect_jets(const VarSpace& sp, const Expr& e, bool include_nli, std::set<JetRef>& out) {
    collect_jets_poly(sp, e.num, include_nli, out);
    for (auto& f : e.den) collect_jets_poly(sp, f.base, include_nli, out);
}

inline void collect_jets_poly(const VarSpace& sp, const Poly& p, bool include_nli,
                              std::set<JetRef>& out) {
    for (auto& m : p.terms)
        for (auto& [k, ex] : m.factors) {
            switch (k.kind) {
                case KKind::Jet:
                    out.insert({k.id, k.idx});
                    break;
                case KKind::Func:
                    for (auto& a : sp.funcs[k.id].args)
                        if (!a.is_indep) out.insert({a.field, a.jet});
                    break;
                case KKind::Pow:
                    collect_jets(sp, *k.sub, include_nli, out);
                    break;
                case KKind::Nli:
                    if (include_nli) collect_jets(sp, *k.sub, include_nli, out);
                    break;
                default:
                    break;
            }
        }
}

inline bool has_kind_poly(const Poly& p, KKind kind, bool recurse_nli = true) {
    for (auto& m : p.terms)
        for (auto& [k, ex] : m.factors) {
            if (k.kind == kind) return true;
            if (k.kind == KKind::Pow && has_kind_poly(k.sub->num, kind, recurse_nli)) return true;
            if (k.kind == KKind::Nli && recurse_nli && has_kind_poly(k.sub->num, kind, recurse_nli))
                return true;
        }
    return false;
}

inline bool has_kind(const Expr& e, KKind kind) {
    if (has_kind_poly(e.num, kind)) return true;
    for (auto& f : e.den)
        if (has_kind_poly(f.base, kind)) return true;
    return false;
}

inline bool is_local(const Expr& e) { return !has_kind(e, KKind::Nli); }

// maximum differential order among jets (0 if none)
inline int max_jet_order(const VarSpace& sp, const Expr& e) {
    std::set<JetRef> jets;
    collect_jets(sp, e, true, jets);
    int n = 0;
    for (auto& j : jets) n = std::max(n, j.idx.order());
    return n;
}

}  // namespace jetops

#endif
