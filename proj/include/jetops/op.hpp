#ifndef JETOPS_OP_HPP
#define JETOPS_OP_HPP

// Linear operators in total derivatives with expression coefficients and a
// formal inverse Dxinv of the distinguished spatial derivative.  Words are
// rewritten to a canonical shape:
//   [coeff] (Dxinv^a coeff)* Dxinv^b  D_J
// with derivatives rightmost, no x-derivative to the right of any Dxinv
// (integration by parts is always applied), x-free coefficient content pulled
// to the front, and words sharing a tail merged by adding lead coefficients.

#include "jetops/integrate.hpp"

#include <deque>

namespace jetops {

struct OpFactor {
    enum Kind { Coeff, Deriv, Inv } kind = Coeff;
    Expr c;
    int var = -1;

    static OpFactor coeff(Expr e) {
        OpFactor f;
        f.kind = Coeff;
        f.c = std::move(e);
        return f;
    }
    static OpFactor deriv(int v) {
        OpFactor f;
        f.kind = Deriv;
        f.var = v;
        return f;
    }
    static OpFactor inv() {
        OpFactor f;
        f.kind = Inv;
        return f;
    }
};

using OpWord = std::vector<OpFactor>;

struct TotalOperator {
    std::vector<OpWord> words;  // canonical: first factor of each word is its lead Coeff
    bool is_zero() const { return words.empty(); }
};

// rewrites raw words to canonical form, merging equal tails
inline TotalOperator op_canon(const VarSpace& sp, std::vector<OpWord> raw) {
    std::deque<OpWord> queue(raw.begin(), raw.end());
    std::vector<OpWord> done;
    long fuel = 2000000;
    while (!queue.empty()) {
        if (--fuel < 0) throw std::runtime_error("operator rewriting did not terminate");
        OpWord w = std::move(queue.front());
        queue.pop_front();
        // drop unit coefficients, merge adjacent coefficients, drop zero words
        bool zero = false;
        OpWord w2;
        for (auto& f : w) {
            if (f.kind == OpFactor::Coeff) {
                if (f.c.is_zero()) {
                    zero = true;
                    break;
                }
                if (expr_is_one(f.c)) continue;
                if (!w2.empty() && w2.back().kind == OpFactor::Coeff) {
                    w2.back().c = expr_mul(w2.back().c, f.c);
                    if (w2.back().c.is_zero()) {
                        zero = true;
                        break;
                    }
                    continue;
                }
            }
            w2.push_back(f);
        }
        if (zero) continue;
        w = std::move(w2);

        bool rewrote = false;
        // non-lead coefficients split termwise so equal operators share a form
        for (std::size_t i = 1; i < w.size() && !rewrote; ++i) {
            if (w[i].kind == OpFactor::Coeff && w[i].c.num.terms.size() >= 2) {
                for (auto& m : w[i].c.num.terms) {
                    OpWord piece(w.begin(), w.begin() + i);
                    piece.push_back(OpFactor::coeff(expr_with_den(Poly{{m}}, w[i].c.den)));
                    piece.insert(piece.end(), w.begin() + i + 1, w.end());
                    queue.push_back(std::move(piece));
                }
                rewrote = true;
            }
        }
        if (rewrote) continue;
        for (std::size_t i = 0; i + 1 < w.size() && !rewrote; ++i) {
            OpFactor &a = w[i], &b = w[i + 1];
            // Dx Dxinv = Dxinv Dx = 1
            if (a.kind == OpFactor::Deriv && a.var == sp.x_index && b.kind == OpFactor::Inv) {
                w.erase(w.begin() + i, w.begin() + i + 2);
                queue.push_back(std::move(w));
                rewrote = true;
                break;
            }
            if (a.kind == OpFactor::Inv && b.kind == OpFactor::Deriv && b.var == sp.x_index) {
                w.erase(w.begin() + i, w.begin() + i + 2);
                queue.push_back(std::move(w));
                rewrote = true;
                break;
            }
            // move derivatives right past coefficients: D c = c D + (Dc)
            if (a.kind == OpFactor::Deriv && b.kind == OpFactor::Coeff) {
                OpWord w1(w.begin(), w.begin() + i);
                OpWord tail(w.begin() + i + 2, w.end());
                OpWord wa = w1;
                wa.push_back(OpFactor::coeff(b.c));
                wa.push_back(OpFactor::deriv(a.var));
                wa.insert(wa.end(), tail.begin(), tail.end());
                OpWord wb = w1;
                wb.push_back(OpFactor::coeff(total_derivative(sp, b.c, a.var)));
                wb.insert(wb.end(), tail.begin(), tail.end());
                queue.push_back(std::move(wa));
                queue.push_back(std::move(wb));
                rewrote = true;
                break;
            }
            // move t/y-derivatives right past Dxinv (they commute)
            if (a.kind == OpFactor::Deriv && a.var != sp.x_index && b.kind == OpFactor::Inv) {
                std::swap(w[i], w[i + 1]);
                queue.push_back(std::move(w));
                rewrote = true;
                break;
            }
            // sort derivative runs by variable index
            if (a.kind == OpFactor::Deriv && b.kind == OpFactor::Deriv && a.var > b.var) {
                std::swap(w[i], w[i + 1]);
                queue.push_back(std::move(w));
                rewrote = true;
                break;
            }
            if (a.kind == OpFactor::Inv && b.kind == OpFactor::Coeff) {
                // integration by parts: Dxinv c Dx^k ... with an x-derivative
                // somewhere in the trailing derivative run
                std::size_t j = i + 2;
                std::size_t xpos = 0;
                bool found = false;
                while (j < w.size() && w[j].kind == OpFactor::Deriv) {
                    if (w[j].var == sp.x_index) {
                        xpos = j;
                        found = true;
                        break;
                    }
                    ++j;
                }
                if (found) {
                    // Dxinv c (derivs...) -> c (derivs minus one Dx)
                    //                       - Dxinv (Dx c) (derivs minus one Dx)
                    OpWord head(w.begin(), w.begin() + i);
                    OpWord derivs(w.begin() + i + 2, w.end());
                    derivs.erase(derivs.begin() + (xpos - (i + 2)));
                    OpWord wa = head;
                    wa.push_back(OpFactor::coeff(b.c));
                    wa.insert(wa.end(), derivs.begin(), derivs.end());
                    OpWord wb = head;
                    wb.push_back(OpFactor::coeff(expr_rat(Rat(-1))));
                    wb.push_back(OpFactor::inv());
                    wb.push_back(OpFactor::coeff(total_derivative(sp, b.c, sp.x_index)));
                    wb.insert(wb.end(), derivs.begin(), derivs.end());
                    queue.push_back(std::move(wa));
                    queue.push_back(std::move(wb));
                    rewrote = true;
                    break;
                }
                // normalize a sandwiched monomial coefficient: x-free content
                // commutes through Dxinv; an explicit positive integer power
                // of x is pulled with Dxinv x^n = x^n Dxinv - n Dxinv x^{n-1} Dxinv
                // (terminating on the x-degree); a jet-bearing core stays put
                if (b.c.num.terms.size() == 1) {
                    const Monomial& mono = b.c.num.terms[0];
                    Monomial xfree{mono.coeff}, core{Rat(1)};
                    long xdeg = 0;
                    bool skip = false;
                    for (auto& [k, ex] : mono.factors) {
                        if (k.kind == KKind::Indep && k.id == sp.x_index) {
                            if (ex.is_integer() && ex.as_integer() > 0)
                                xdeg = ex.as_integer();
                            else {
                                core.factors.push_back({k, ex});
                            }
                            continue;
                        }
                        Monomial probe{Rat(1)};
                        probe.factors.push_back({k, ex});
                        if (mono_depends_on_x(sp, probe))
                            core.factors.push_back({k, ex});
                        else
                            xfree.factors.push_back({k, ex});
                    }
                    bool xfree_trivial = xfree.coeff == 1 && xfree.factors.empty();
                    bool den_xfree_all = true;
                    std::vector<DenFactor> den_out, den_in;
                    for (auto& f : b.c.den) {
                        if (expr_depends_on_x(sp, expr_from_poly(f.base))) {
                            den_in.push_back(f);
                            den_xfree_all = false;
                        } else {
                            den_out.push_back(f);
                        }
                    }
                    (void)den_xfree_all;
                    if (!skip && (!xfree_trivial || xdeg > 0 || !den_out.empty())) {
                        Expr outer = expr_with_den(Poly{{xfree}}, den_out);
                        Expr inner = expr_with_den(Poly{{core}}, den_in);
                        OpWord head(w.begin(), w.begin() + i);
                        OpWord tail(w.begin() + i + 2, w.end());
                        if (xdeg == 0) {
                            if (!xfree_trivial || !den_out.empty()) {
                                OpWord wa = head;
                                wa.push_back(OpFactor::coeff(outer));
                                wa.push_back(OpFactor::inv());
                                wa.push_back(OpFactor::coeff(inner));
                                wa.insert(wa.end(), tail.begin(), tail.end());
                                queue.push_back(std::move(wa));
                                rewrote = true;
                                break;
                            }
                        } else {
                            Expr xe = expr_pow_int(expr_kernel(make_indep_kernel(sp.x_index)), xdeg);
                            OpWord wa = head;
                            wa.push_back(OpFactor::coeff(expr_mul(outer, xe)));
                            wa.push_back(OpFactor::inv());
                            wa.push_back(OpFactor::coeff(inner));
                            wa.insert(wa.end(), tail.begin(), tail.end());
                            queue.push_back(std::move(wa));
                            OpWord wb = head;
                            wb.push_back(
                                OpFactor::coeff(expr_scale(outer, Rat(-xdeg))));
                            wb.push_back(OpFactor::inv());
                            wb.push_back(OpFactor::coeff(expr_pow_int(
                                expr_kernel(make_indep_kernel(sp.x_index)), xdeg - 1)));
                            wb.push_back(OpFactor::inv());
                            wb.push_back(OpFactor::coeff(inner));
                            wb.insert(wb.end(), tail.begin(), tail.end());
                            queue.push_back(std::move(wb));
                            rewrote = true;
                            break;
                        }
                    }
                }
            }
        }
        if (rewrote) continue;
        done.push_back(std::move(w));
    }
    // ensure a lead coefficient, merge equal tails
    struct Entry {
        Expr lead;
        OpWord tail;
    };
    std::vector<Entry> entries;
    for (auto& w : done) {
        Expr lead = expr_rat(Rat(1));
        OpWord tail = w;
        if (!tail.empty() && tail.front().kind == OpFactor::Coeff) {
            lead = tail.front().c;
            tail.erase(tail.begin());
        }
        bool merged = false;
        for (auto& e : entries) {
            if (e.tail.size() != tail.size()) continue;
            bool same = true;
            for (std::size_t i = 0; i < tail.size() && same; ++i) {
                if (e.tail[i].kind != tail[i].kind) same = false;
                else if (tail[i].kind == OpFactor::Deriv && e.tail[i].var != tail[i].var) same = false;
                else if (tail[i].kind == OpFactor::Coeff && !expr_eq_struct(e.tail[i].c, tail[i].c))
                    same = false;
            }
            if (same) {
                e.lead = expr_add(e.lead, lead);
                merged = true;
                break;
            }
        }
        if (!merged) entries.push_back({std::move(lead), std::move(tail)});
    }
    // deterministic order: by tail length, then factorwise
    auto factor_cmp = [](const OpFactor& a, const OpFactor& b) {
        if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
        if (a.kind == OpFactor::Deriv) return a.var < b.var ? -1 : (a.var == b.var ? 0 : 1);
        if (a.kind == OpFactor::Coeff) {
            int c = poly_cmp(a.c.num, b.c.num);
            if (c != 0) return c;
        }
        return 0;
    };
    std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
        if (a.tail.size() != b.tail.size()) return a.tail.size() < b.tail.size();
        for (std::size_t i = 0; i < a.tail.size(); ++i) {
            int c = factor_cmp(a.tail[i], b.tail[i]);
            if (c != 0) return c < 0;
        }
        return poly_cmp(a.lead.num, b.lead.num) < 0;
    });
    TotalOperator out;
    for (auto& e : entries) {
        if (e.lead.is_zero()) continue;
        OpWord w;
        w.push_back(OpFactor::coeff(e.lead));
        w.insert(w.end(), e.tail.begin(), e.tail.end());
        out.words.push_back(std::move(w));
    }
    return out;
}

inline TotalOperator op_zero() { return TotalOperator{}; }

inline TotalOperator op_identity(const VarSpace& sp) {
    return op_canon(sp, {{OpFactor::coeff(expr_rat(Rat(1)))}});
}

inline TotalOperator op_from_coeff(const VarSpace& sp, Expr c) {
    return op_canon(sp, {{OpFactor::coeff(std::move(c))}});
}

inline TotalOperator op_add(const VarSpace& sp, const TotalOperator& a, const TotalOperator& b) {
    std::vector<OpWord> raw = a.words;
    raw.insert(raw.end(), b.words.begin(), b.words.end());
    return op_canon(sp, std::move(raw));
}

inline TotalOperator op_scale(const VarSpace& sp, const Expr& s, const TotalOperator& a) {
    std::vector<OpWord> raw;
    for (auto& w : a.words) {
        OpWord nw;
        nw.push_back(OpFactor::coeff(s));
        nw.insert(nw.end(), w.begin(), w.end());
        raw.push_back(std::move(nw));
    }
    return op_canon(sp, std::move(raw));
}

inline TotalOperator op_sub(const VarSpace& sp, const TotalOperator& a, const TotalOperator& b) {
    return op_add(sp, a, op_scale(sp, expr_rat(Rat(-1)), b));
}

inline TotalOperator op_compose(const VarSpace& sp, const TotalOperator& a, const TotalOperator& b) {
    std::vector<OpWord> raw;
    for (auto& wa : a.words)
        for (auto& wb : b.words) {
            OpWord w = wa;
            w.insert(w.end(), wb.begin(), wb.end());
            raw.push_back(std::move(w));
        }
    return op_canon(sp, std::move(raw));
}

// (c D_J)^* = (-1)^{|J|} D_J c,  Dxinv^* = -Dxinv
inline TotalOperator op_adjoint(const VarSpace& sp, const TotalOperator& a) {
    std::vector<OpWord> raw;
    for (auto& w : a.words) {
        OpWord r;
        int sign = 0;
        for (auto it = w.rbegin(); it != w.rend(); ++it) {
            r.push_back(*it);
            if (it->kind != OpFactor::Coeff) ++sign;
        }
        if (sign % 2) {
            OpWord s;
            s.push_back(OpFactor::coeff(expr_rat(Rat(-1))));
            s.insert(s.end(), r.begin(), r.end());
            r = std::move(s);
        }
        raw.push_back(std::move(r));
    }
    return op_canon(sp, std::move(raw));
}

inline Expr op_apply_word(const VarSpace& sp, const OpWord& w, Expr e) {
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        switch (it->kind) {
            case OpFactor::Coeff:
                e = expr_mul(it->c, e);
                break;
            case OpFactor::Deriv:
                e = total_derivative(sp, e, it->var);
                break;
            case OpFactor::Inv:
                e = make_nonlocal(sp, e);
                break;
        }
        if (e.is_zero()) return e;
    }
    return e;
}

inline Expr op_apply(const VarSpace& sp, const TotalOperator& a, const Expr& e) {
    Expr out = expr_zero();
    for (auto& w : a.words) out = expr_add(out, op_apply_word(sp, w, e));
    return out;
}

inline bool op_eq(const VarSpace& sp, const TotalOperator& a, const TotalOperator& b) {
    TotalOperator d = op_sub(sp, a, b);
    return d.is_zero();
}

// operator builders used by parsers and the Frechet machinery
inline TotalOperator op_deriv(const VarSpace& sp, int var, int count = 1) {
    OpWord w;
    w.push_back(OpFactor::coeff(expr_rat(Rat(1))));
    for (int i = 0; i < count; ++i) w.push_back(OpFactor::deriv(var));
    return op_canon(sp, {w});
}

inline TotalOperator op_inv_pow(const VarSpace& sp, int count) {
    OpWord w;
    w.push_back(OpFactor::coeff(expr_rat(Rat(1))));
    for (int i = 0; i < count; ++i) w.push_back(OpFactor::inv());
    return op_canon(sp, {w});
}

}  // namespace jetops

#endif
