#ifndef JETOPS_FRECHET_HPP
#define JETOPS_FRECHET_HPP

// Frechet derivative F' = sum_J F_{u_J} D_J as a total-differential operator,
// its formal adjoint, Euler and higher Euler operators, and the prolonged
// symmetry action.  Potential jets v_J (u = D_x^m v) contribute D_J Dxinv^m;
// a nonlocal term Dxinv(g) contributes (dF/dN) Dxinv g'.

#include "jetops/op.hpp"

namespace jetops {

// partial derivative of e with respect to an Nli kernel (treated as an atom)
inline Expr partial_nli(const Expr& e, const Kernel& target) {
    AtomDeriv datom = [&](const Kernel& k) -> Expr {
        if (k.kind == KKind::Nli && kernel_eq(k, target)) return expr_rat(Rat(1));
        if (k.kind == KKind::Pow) return partial_nli(*k.sub, target);
        return expr_zero();
    };
    return derive(e, datom);
}

inline void collect_nli(const Expr& e, std::vector<Kernel>& out) {
    auto seen = [&](const Kernel& k) {
        for (auto& s : out)
            if (kernel_eq(s, k)) return true;
        return false;
    };
    auto scan_poly = [&](const Poly& p, auto&& self) -> void {
        for (auto& m : p.terms)
            for (auto& [k, ex] : m.factors) {
                if (k.kind == KKind::Nli && !seen(k)) out.push_back(k);
                if (k.kind == KKind::Pow) {
                    self(k.sub->num, self);
                    for (auto& f : k.sub->den) self(f.base, self);
                }
            }
    };
    scan_poly(e.num, scan_poly);
    for (auto& f : e.den) scan_poly(f.base, scan_poly);
}

inline TotalOperator frechet(const VarSpace& sp, const Expr& f) {
    std::vector<OpWord> raw;
    std::set<JetRef> jets;
    collect_jets(sp, f, /*include_nli=*/false, jets);
    for (auto& j : jets) {
        Expr c = partial_jet(sp, f, j.field, j.idx);
        if (c.is_zero()) continue;
        OpWord w;
        w.push_back(OpFactor::coeff(std::move(c)));
        for (std::size_t i = 0; i < j.idx.mult.size(); ++i)
            for (int r = 0; r < j.idx.mult[i]; ++r) w.push_back(OpFactor::deriv(static_cast<int>(i)));
        for (int r = 0; r < (j.field > 0 ? sp.fields[j.field].order : 0); ++r)
            w.push_back(OpFactor::inv());
        raw.push_back(std::move(w));
    }
    TotalOperator local = op_canon(sp, std::move(raw));
    std::vector<Kernel> nlis;
    collect_nli(f, nlis);
    for (auto& nk : nlis) {
        Expr c = partial_nli(f, nk);
        if (c.is_zero()) continue;
        TotalOperator chain = op_compose(
            sp, op_canon(sp, {{OpFactor::coeff(std::move(c)), OpFactor::inv()}}), frechet(sp, *nk.sub));
        local = op_add(sp, local, chain);
    }
    return local;
}

// direct formula F'^* = sum_J (-1)^{|J|} D_J F_{u_J}
inline TotalOperator frechet_adjoint(const VarSpace& sp, const Expr& f) {
    std::vector<OpWord> raw;
    std::set<JetRef> jets;
    collect_jets(sp, f, false, jets);
    for (auto& j : jets) {
        Expr c = partial_jet(sp, f, j.field, j.idx);
        if (c.is_zero()) continue;
        int m = j.field > 0 ? sp.fields[j.field].order : 0;
        int sign = (j.idx.order() + m) % 2 ? -1 : 1;
        OpWord w;
        w.push_back(OpFactor::coeff(expr_rat(Rat(sign))));
        for (int r = 0; r < m; ++r) w.push_back(OpFactor::inv());
        for (std::size_t i = 0; i < j.idx.mult.size(); ++i)
            for (int r = 0; r < j.idx.mult[i]; ++r) w.push_back(OpFactor::deriv(static_cast<int>(i)));
        w.push_back(OpFactor::coeff(std::move(c)));
        raw.push_back(std::move(w));
    }
    TotalOperator local = op_canon(sp, std::move(raw));
    std::vector<Kernel> nlis;
    collect_nli(f, nlis);
    for (auto& nk : nlis) {
        Expr c = partial_nli(f, nk);
        if (c.is_zero()) continue;
        // (c Dxinv g')^* = - g'^* Dxinv c
        TotalOperator chain = op_compose(
            sp, frechet_adjoint(sp, *nk.sub),
            op_canon(sp, {{OpFactor::coeff(expr_rat(Rat(-1))), OpFactor::inv(),
                           OpFactor::coeff(std::move(c))}}));
        local = op_add(sp, local, chain);
    }
    return local;
}

// pr X_P(F) = F'(P)
inline Expr prolonged_action(const VarSpace& sp, const Expr& p, const Expr& f) {
    return op_apply(sp, frechet(sp, f), p);
}

// pr X_P applied to an operator: Leibniz over the coefficient factors
inline TotalOperator prolong_operator(const VarSpace& sp, const Expr& p, const TotalOperator& s) {
    std::vector<OpWord> raw;
    for (auto& w : s.words) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i].kind != OpFactor::Coeff) continue;
            Expr dc = prolonged_action(sp, p, w[i].c);
            if (dc.is_zero()) continue;
            OpWord nw = w;
            nw[i].c = std::move(dc);
            raw.push_back(std::move(nw));
        }
    }
    return op_canon(sp, std::move(raw));
}

// E_u(F) = sum_J (-D)_J F_{u_J} over the dependent variable (field 0)
inline Expr euler_op(const VarSpace& sp, const Expr& f) {
    if (!is_local(f)) throw std::domain_error("nonlocal term not admissible in Euler operator");
    std::set<JetRef> jets;
    collect_jets(sp, f, true, jets);
    Expr out = expr_zero();
    for (auto& j : jets) {
        if (j.field != 0) throw std::domain_error("Euler operator requires potential-free input");
        Expr c = partial_jet(sp, f, 0, j.idx);
        if (c.is_zero()) continue;
        int sign = j.idx.order() % 2 ? -1 : 1;
        out = expr_add(out, expr_scale(total_derivative_multi(sp, c, j.idx), Rat(sign)));
    }
    return out;
}

// E_u^{(J)}(F) = sum_{K >= J} binom(K, J) (-D)_{K/J} F_{u_K}
inline Expr higher_euler(const VarSpace& sp, const Expr& f, const MultiIndex& j) {
    if (!is_local(f)) throw std::domain_error("nonlocal term not admissible in Euler operator");
    if (j.order() > 4) throw std::domain_error("higher Euler operator capped at order 4");
    std::set<JetRef> jets;
    collect_jets(sp, f, true, jets);
    Expr out = expr_zero();
    for (auto& k : jets) {
        if (k.field != 0 || !k.idx.contains(j)) continue;
        Expr c = partial_jet(sp, f, 0, k.idx);
        if (c.is_zero()) continue;
        MultiIndex rest = k.idx.minus(j);
        int sign = rest.order() % 2 ? -1 : 1;
        Rat b = multi_binom(k.idx, j);
        out = expr_add(out, expr_scale(total_derivative_multi(sp, c, rest), b * Rat(sign)));
    }
    return out;
}

}  // namespace jetops

#endif
