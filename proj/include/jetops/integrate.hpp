#ifndef JETOPS_INTEGRATE_HPP
#define JETOPS_INTEGRATE_HPP

// Exact formal x-antidifferentiation.  make_nonlocal(sp, g) returns the
// canonical form of D_x^{-1} g: the exactly integrable part is integrated by
// repeated top-reduction (the coefficient of the highest x-derivative is
// integrated with respect to the next-lower jet, including chain-rule powers
// of sums such as (u^2-u_x^2)^(k/2)), and what remains is wrapped in Nli
// kernels.  Jets of the dependent variable are viewed through the potential
// (u = D_x^m v) so that D_x^{-1} u_t = v_t and friends come out exactly.

#include "jetops/deriv.hpp"

#include <optional>

namespace jetops {

// ---------------------------------------------------------------------------
// jet views through the potential

inline std::pair<int, MultiIndex> jet_view(const VarSpace& sp, int field, const MultiIndex& j) {
    if (field == 0 && sp.fields.size() > 1 && sp.x_index >= 0) {
        return {1, j.plus(sp.x_index, sp.fields[1].order)};
    }
    return {field, j};
}

// order used for head selection: x-count first, then total order, then lex
inline bool view_less(const std::pair<int, MultiIndex>& a, const std::pair<int, MultiIndex>& b,
                      int x_index) {
    int ax = a.second.count(x_index), bx = b.second.count(x_index);
    if (ax != bx) return ax < bx;
    if (a.second.order() != b.second.order()) return a.second.order() < b.second.order();
    auto c = a.second <=> b.second;
    if (c != 0) return c < 0;
    return a.first > b.first;  // deeper potential ranked lower
}

inline bool expr_depends_on_x(const VarSpace& sp, const Expr& e);

inline bool mono_depends_on_x(const VarSpace& sp, const Monomial& m) {
    for (auto& [k, ex] : m.factors) {
        switch (k.kind) {
            case KKind::Indep:
                if (k.id == sp.x_index) return true;
                break;
            case KKind::Jet:
                return true;
            case KKind::Func: {
                for (auto& a : sp.funcs[k.id].args)
                    if ((a.is_indep && a.indep == sp.x_index) || !a.is_indep) return true;
                break;
            }
            case KKind::Pow:
            case KKind::Nli:
                if (expr_depends_on_x(sp, *k.sub)) return true;
                break;
            default:
                break;
        }
    }
    return false;
}

inline bool expr_depends_on_x(const VarSpace& sp, const Expr& e) {
    for (auto& m : e.num.terms)
        if (mono_depends_on_x(sp, m)) return true;
    for (auto& f : e.den)
        for (auto& m : f.base.terms)
            if (mono_depends_on_x(sp, m)) return true;
    return false;
}

namespace detail {

// the maximal view-jet with at least one x-derivative occurring in a monomial
// (direct jet factors and jets inside Pow bases); nullopt if none
inline std::optional<std::pair<int, MultiIndex>> mono_head(const VarSpace& sp, const Monomial& m) {
    std::optional<std::pair<int, MultiIndex>> best;
    auto consider = [&](int field, const MultiIndex& j) {
        auto v = jet_view(sp, field, j);
        if (v.second.count(sp.x_index) < 1) return;
        if (!best || view_less(*best, v, sp.x_index)) best = v;
    };
    for (auto& [k, ex] : m.factors) {
        if (k.kind == KKind::Jet) consider(k.id, k.idx);
        if (k.kind == KKind::Pow) {
            std::set<JetRef> js;
            collect_jets(sp, *k.sub, false, js);
            for (auto& j : js) consider(j.field, j.idx);
        }
        if (k.kind == KKind::Func) {
            for (auto& a : sp.funcs[k.id].args)
                if (!a.is_indep) consider(a.field, a.jet);
        }
    }
    return best;
}

inline bool mono_has_nli(const Monomial& m) {
    for (auto& [k, ex] : m.factors)
        if (k.kind == KKind::Nli) return true;
    return false;
}

inline bool mono_has_xfunc(const VarSpace& sp, const Monomial& m) {
    for (auto& [k, ex] : m.factors) {
        if (k.kind == KKind::Func) {
            for (auto& a : sp.funcs[k.id].args)
                if (a.is_indep && a.indep == sp.x_index) return true;
        }
        if (k.kind == KKind::Pow && has_kind_poly(k.sub->num, KKind::Func)) {
            std::set<JetRef> dummy;
            // conservative: any func inside a pow base that depends on x
            for (auto& mm : k.sub->num.terms)
                if (mono_has_xfunc(sp, mm)) return true;
        }
    }
    return false;
}

// does this monomial contain a view-jet strictly greater than `bound`?
inline bool mono_has_jet_above(const VarSpace& sp, const Monomial& m,
                               const std::pair<int, MultiIndex>& bound) {
    std::set<JetRef> js;
    for (auto& [k, ex] : m.factors) {
        if (k.kind == KKind::Jet) js.insert({k.id, k.idx});
        if (k.kind == KKind::Pow) collect_jets(sp, *k.sub, true, js);
        if (k.kind == KKind::Nli) return true;  // opaque, treat as unbounded
        if (k.kind == KKind::Func)
            for (auto& a : sp.funcs[k.id].args)
                if (!a.is_indep) js.insert({a.field, a.jet});
    }
    for (auto& j : js) {
        auto v = jet_view(sp, j.field, j.idx);
        if (view_less(bound, v, sp.x_index)) return true;
    }
    return false;
}

// ordinary antiderivative of C with respect to the jet variable w (all other
// kernels fixed).  Returns {T, failed} with C = dT/dw + failed.
inline std::pair<Expr, Expr> w_integrate(const VarSpace& sp, const Expr& C, const Kernel& w) {
    Expr T = expr_zero(), failed = expr_zero();
    // ride the denominator along; den factors containing w are not handled
    std::vector<DenFactor> den_ok;
    for (auto& f : C.den) {
        Expr fb = expr_from_poly(f.base);
        if (!partial_jet(sp, fb, w.id, w.idx).is_zero()) {
            return {expr_zero(), C};
        }
        den_ok.push_back(f);
    }
    for (auto& m : C.num.terms) {
        Expr mval = expr_with_den(Poly{{m}}, den_ok);
        Exponent alpha(0);
        std::vector<std::pair<Kernel, Exponent>> chains;  // pow factors whose base contains w
        bool bad = false;
        for (auto& [k, ex] : m.factors) {
            if (k.kind == KKind::Jet && kernel_eq(k, w)) {
                alpha = ex;
            } else if (k.kind == KKind::Pow) {
                if (!partial_jet(sp, expr_from_poly(k.sub->num), w.id, w.idx).is_zero())
                    chains.push_back({k, ex});
            } else if (k.kind == KKind::Nli) {
                bad = true;  // opaque in x
            } else if (k.kind == KKind::Func) {
                for (auto& a : sp.funcs[k.id].args)
                    if (!a.is_indep && a.field == w.id && a.jet == w.idx) bad = true;
            }
        }
        if (bad || chains.size() > 1) {
            failed = expr_add(failed, mval);
            continue;
        }
        if (chains.empty()) {
            if (alpha == Exponent(Rat(-1))) {  // would need a logarithm
                failed = expr_add(failed, mval);
                continue;
            }
            // T += m * w / (alpha+1)
            Expr t = expr_mul(mval, expr_kernel(w));
            t = expr_div(t, exponent_to_expr(alpha + Exponent(1)));
            T = expr_add(T, t);
            continue;
        }
        // single chain S^e with w in the base
        const Kernel& S = chains[0].first;
        const Exponent& e = chains[0].second;
        Expr base = expr_from_poly(S.sub->num);
        Expr dS = partial_jet(sp, base, w.id, w.idx);
        Expr wx = expr_kernel(w);
        // mval with the S-factor and the w-power stripped
        Expr core = expr_div(mval, expr_mul(kernel_pow_expr(S, e), expr_pow(wx, alpha)));
        if (!alpha.is_integer() || !partial_jet(sp, core, w.id, w.idx).is_zero()) {
            failed = expr_add(failed, mval);
            continue;
        }
        long a = alpha.as_integer();
        // case S linear in w: dS/dw = c (w-free): int w^a S^e dw, a >= 0
        Expr ddS = partial_jet(sp, dS, w.id, w.idx);
        if (ddS.is_zero() && a >= 0) {
            // substitute w = (S - P)/c with P = S - c w
            Expr c = dS;
            Expr P = expr_sub(base, expr_mul(c, wx));
            Expr sum = expr_zero();
            // int ((S-P)/c)^a S^e dS / c = sum_i binom(a,i) (-P)^{a-i} S^{e+i+1} / ((e+i+1) c^{a+1})
            for (long i = 0; i <= a; ++i) {
                Rat binom = factorial(static_cast<int>(a)) /
                            (factorial(static_cast<int>(i)) * factorial(static_cast<int>(a - i)));
                Expr term = expr_scale(expr_pow_int(expr_neg(P), a - i), binom);
                term = expr_mul(term, expr_pow(base, e + Exponent(Rat(i + 1))));
                term = expr_div(term, exponent_to_expr(e + Exponent(Rat(i + 1))));
                sum = expr_add(sum, term);
            }
            sum = expr_div(sum, expr_pow_int(c, a + 1));
            T = expr_add(T, expr_mul(core, sum));
            continue;
        }
        // case S quadratic in w without a linear term: dS/dw = 2 c w
        Expr c2 = expr_scale(partial_jet(sp, dS, w.id, w.idx), Rat(1, 2));
        bool quad = !c2.is_zero() && partial_jet(sp, c2, w.id, w.idx).is_zero() &&
                    expr_equal(dS, expr_scale(expr_mul(c2, wx), Rat(2)));
        if (quad && a >= 1 && a % 2 == 1) {
            long j = (a - 1) / 2;
            Expr P = expr_sub(base, expr_mul(c2, expr_pow_int(wx, 2)));
            Expr sum = expr_zero();
            // int w^{2j+1} S^e dw = sum_i binom(j,i) (-P)^{j-i} S^{e+i+1} / (2 c^{j+1} (e+i+1))
            for (long i = 0; i <= j; ++i) {
                Rat binom = factorial(static_cast<int>(j)) /
                            (factorial(static_cast<int>(i)) * factorial(static_cast<int>(j - i)));
                Expr term = expr_scale(expr_pow_int(expr_neg(P), j - i), binom);
                term = expr_mul(term, expr_pow(base, e + Exponent(Rat(i + 1))));
                term = expr_div(term, exponent_to_expr(e + Exponent(Rat(i + 1))));
                sum = expr_add(sum, term);
            }
            sum = expr_div(sum, expr_scale(expr_pow_int(c2, j + 1), Rat(2)));
            T = expr_add(T, expr_mul(core, sum));
            continue;
        }
        failed = expr_add(failed, mval);
    }
    return {T, failed};
}

// wraps an irreducible integrand into coefficient * Nli kernels (x-free
// content pulled out, per-monomial linearity)
inline Expr wrap_nonlocal(const VarSpace& sp, const Expr& e) {
    if (e.is_zero()) return expr_zero();
    std::vector<DenFactor> den_out, den_in;
    for (auto& f : e.den) {
        if (expr_depends_on_x(sp, expr_from_poly(f.base)))
            den_in.push_back(f);
        else
            den_out.push_back(f);
    }
    Expr out = expr_zero();
    for (auto& m : e.num.terms) {
        Monomial outer{m.coeff}, inner{Rat(1)};
        for (auto& [k, ex] : m.factors) {
            Monomial probe{Rat(1)};
            probe.factors.push_back({k, ex});
            if (mono_depends_on_x(sp, probe))
                inner.factors.push_back({k, ex});
            else
                outer.factors.push_back({k, ex});
        }
        Expr integrand = expr_with_den(Poly{{inner}}, den_in);
        Kernel nk = make_nli_kernel(std::move(integrand));
        Monomial full = outer;
        full.factors.push_back({nk, Exponent(1)});
        std::sort(full.factors.begin(), full.factors.end(),
                  [](auto& a, auto& b) { return kernel_cmp(a.first, b.first) < 0; });
        out = expr_add(out, expr_with_den(Poly{{full}}, den_out));
    }
    return out;
}

}  // namespace detail

inline Expr make_nonlocal(const VarSpace& sp, const Expr& g) {
    using namespace detail;
    if (g.is_zero()) return expr_zero();
    if (sp.x_index < 0) throw std::domain_error("no distinguished spatial variable");
    // split off x-dependent denominator factors: those parts are opaque
    {
        bool xden = false;
        for (auto& f : g.den)
            if (expr_depends_on_x(sp, expr_from_poly(f.base))) xden = true;
        if (xden) return wrap_nonlocal(sp, g);
    }
    Expr out = expr_zero();
    Expr R = g;
    Expr stash = expr_zero();
    Kernel xk = make_indep_kernel(sp.x_index);
    int rounds = 0;
    while (!R.is_zero() && rounds++ < 512) {
        // partition the numerator of R
        std::vector<Monomial> xfree, xpoly, headed, nli_or_func, other;
        std::optional<std::pair<int, MultiIndex>> head;
        for (auto& m : R.num.terms) {
            if (!mono_depends_on_x(sp, m)) {
                xfree.push_back(m);
                continue;
            }
            if (mono_has_nli(m) || mono_has_xfunc(sp, m)) {
                nli_or_func.push_back(m);
                continue;
            }
            auto h = mono_head(sp, m);
            if (!h) {
                // x-dependence only through explicit powers of x
                xpoly.push_back(m);
                continue;
            }
            headed.push_back(m);
            if (!head || view_less(*head, *h, sp.x_index)) head = h;
        }
        Expr Rden = expr_with_den(Poly{}, {});  // placeholder
        std::vector<DenFactor> den = R.den;
        auto with_den = [&](std::vector<Monomial> ms) {
            return expr_with_den(poly_from_monos(std::move(ms)), den);
        };
        Expr progress = expr_zero();
        bool progressed = false;
        if (!xfree.empty()) {
            Expr part = with_den(std::move(xfree));
            out = expr_add(out, expr_mul(part, expr_kernel(xk)));
            R = expr_sub(R, part);
            progressed = true;
        }
        if (!xpoly.empty()) {
            Expr done = expr_zero(), fail = expr_zero();
            for (auto& m : xpoly) {
                Exponent n(0);
                for (auto& [k, ex] : m.factors)
                    if (kernel_eq(k, xk)) n = ex;
                Expr mval = expr_with_den(Poly{{m}}, den);
                if (n == Exponent(Rat(-1)) || !n.is_rational()) {
                    fail = expr_add(fail, mval);
                    continue;
                }
                Expr t = expr_mul(mval, expr_kernel(xk));
                t = expr_div(t, exponent_to_expr(n + Exponent(1)));
                done = expr_add(done, t);
                R = expr_sub(R, mval);
                progressed = true;
            }
            out = expr_add(out, done);
            if (!fail.is_zero()) {
                stash = expr_add(stash, fail);
                R = expr_sub(R, fail);
                progressed = true;
            }
        }
        if (!nli_or_func.empty()) {
            Expr part = with_den(std::move(nli_or_func));
            stash = expr_add(stash, part);
            R = expr_sub(R, part);
            progressed = true;
        }
        if (head) {
            // h = w + x; collect the linear coefficient of h among headed monomials
            auto hview = *head;
            MultiIndex wview = hview.second;
            wview.bump(sp.x_index, -1);
            // canonical kernels for h and w
            auto canon = [&](std::pair<int, MultiIndex> v) -> Kernel {
                int f = v.first;
                MultiIndex j = v.second;
                if (f > 0 && sp.x_index >= 0 && j.count(sp.x_index) >= sp.fields[f].order) {
                    j.bump(sp.x_index, -sp.fields[f].order);
                    f = 0;
                }
                return make_jet_kernel_raw(f, j);
            };
            Kernel hk = canon(hview), wk = canon({hview.first, wview});
            Expr C = expr_zero(), reject = expr_zero();
            for (auto& m : headed) {
                auto mh = mono_head(sp, m);
                if (!(mh && mh->first == hview.first && mh->second == hview.second)) continue;
                Expr mval = expr_with_den(Poly{{m}}, den);
                // require h as a direct linear factor, nothing above w elsewhere
                Exponent he(0);
                Monomial rest{m.coeff};
                for (auto& [k, ex] : m.factors) {
                    if (k.kind == KKind::Jet && kernel_eq(k, hk))
                        he = ex;
                    else
                        rest.factors.push_back({k, ex});
                }
                if (!(he == Exponent(1)) || mono_has_jet_above(sp, rest, {hview.first, wview})) {
                    reject = expr_add(reject, mval);
                    continue;
                }
                C = expr_add(C, expr_with_den(Poly{{rest}}, den));
            }
            if (!reject.is_zero()) {
                stash = expr_add(stash, reject);
                R = expr_sub(R, reject);
                progressed = true;
            }
            if (!C.is_zero()) {
                auto [T, cfail] = w_integrate(sp, C, wk);
                if (!cfail.is_zero()) {
                    Expr fpart = expr_mul(cfail, expr_kernel(hk));
                    stash = expr_add(stash, fpart);
                    R = expr_sub(R, fpart);
                    progressed = true;
                }
                if (!T.is_zero()) {
                    out = expr_add(out, T);
                    R = expr_sub(R, total_derivative(sp, T, sp.x_index));
                    progressed = true;
                }
            }
        }
        if (!progressed) {
            stash = expr_add(stash, R);
            R = expr_zero();
        }
    }
    if (!R.is_zero()) stash = expr_add(stash, R);
    return expr_add(out, detail::wrap_nonlocal(sp, stash));
}

// ---------------------------------------------------------------------------
// substitution

inline bool expr_contains_kernel(const Expr& e, const Kernel& k);

inline bool poly_contains_kernel(const Poly& p, const Kernel& k) {
    for (auto& m : p.terms)
        for (auto& [kk, ex] : m.factors) {
            if (kernel_eq(kk, k)) return true;
            if (kk.sub && expr_contains_kernel(*kk.sub, k)) return true;
        }
    return false;
}

inline bool expr_contains_kernel(const Expr& e, const Kernel& k) {
    if (poly_contains_kernel(e.num, k)) return true;
    for (auto& f : e.den)
        if (poly_contains_kernel(f.base, k)) return true;
    return false;
}

// replaces every occurrence of `target` (a kernel atom) by `val`
inline Expr substitute(const VarSpace& sp, const Expr& e, const Kernel& target, const Expr& val) {
    if (!expr_contains_kernel(e, target)) return e;
    Expr out = expr_zero();
    for (auto& m : e.num.terms) {
        Expr acc = expr_rat(m.coeff);
        for (auto& [k, ex] : m.factors) {
            if (kernel_eq(k, target)) {
                acc = expr_mul(acc, expr_pow(val, ex));
            } else if (k.sub && expr_contains_kernel(*k.sub, target)) {
                Expr sub2 = substitute(sp, *k.sub, target, val);
                if (k.kind == KKind::Pow)
                    acc = expr_mul(acc, expr_pow(sub2, ex));
                else
                    acc = expr_mul(acc, expr_pow(make_nonlocal(sp, sub2), ex));
            } else {
                Monomial single{Rat(1)};
                single.factors.push_back({k, ex});
                acc = expr_mul(acc, expr_from_poly(Poly{{single}}));
            }
        }
        out = expr_add(out, acc);
    }
    for (auto& f : e.den) {
        Expr b = substitute(sp, expr_from_poly(f.base), target, val);
        out = expr_div(out, expr_pow_int(b, f.exp));
    }
    return out;
}

// substitutes a parameter by an exact rational value, everywhere including
// exponents (re-canonicalizing powers that become integral)
inline Expr subst_param(const VarSpace& sp, const Expr& e, int pid, const Rat& val) {
    Kernel pk = make_param_kernel(pid);
    Expr out = expr_zero();
    for (auto& m : e.num.terms) {
        Expr acc = expr_rat(m.coeff);
        for (auto& [k, ex] : m.factors) {
            Exponent ex2 = ex.subst_param(pid, val);
            if (ex2.is_zero()) continue;
            if (kernel_eq(k, pk)) {
                if (!ex2.is_integer()) throw std::domain_error("parameter power not integral");
                acc = expr_mul(acc, expr_rat(rat_pow(val, ex2.as_integer())));
            } else if (k.sub && expr_contains_kernel(*k.sub, pk)) {
                Expr sub2 = subst_param(sp, *k.sub, pid, val);
                if (k.kind == KKind::Pow)
                    acc = expr_mul(acc, expr_pow(sub2, ex2));
                else
                    acc = expr_mul(acc, expr_pow(make_nonlocal(sp, sub2), ex2));
            } else if (!(ex2 == ex)) {
                acc = expr_mul(acc, expr_pow(kernel_pow_expr(k, Exponent(1)), ex2));
            } else {
                Monomial single{Rat(1)};
                single.factors.push_back({k, ex});
                acc = expr_mul(acc, expr_from_poly(Poly{{single}}));
            }
        }
        out = expr_add(out, acc);
    }
    for (auto& f : e.den) {
        Expr b = subst_param(sp, expr_from_poly(f.base), pid, val);
        out = expr_div(out, expr_pow_int(b, f.exp));
    }
    return out;
}

}  // namespace jetops

#endif
