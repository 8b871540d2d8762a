#ifndef JETOPS_PRINT_HPP
#define JETOPS_PRINT_HPP

#include "jetops/op.hpp"

#include <sstream>
#include <string>

namespace jetops {

std::string print_expr(const VarSpace& sp, const Expr& e);

namespace printdetail {

inline std::string exponent_str(const VarSpace& sp, const Exponent& e) {
    std::ostringstream os;
    bool first = true;
    for (auto& [id, co] : e.params) {
        std::string name = sp.params[id].name;
        if (co == 1) {
            os << (first ? "" : "+") << name;
        } else if (co == -1) {
            os << "-" << name;
        } else if (rat_is_int(co)) {
            if (!first && co > 0) os << "+";
            os << rat_str(co) << "*" << name;
        } else {
            // p/q * name printed name*p/q-free form: use name/q style for 1/q
            if (!first && co > 0) os << "+";
            if (co.get_num() == 1)
                os << name << "/" << co.get_den().get_str();
            else if (co.get_num() == -1)
                os << "-" << name << "/" << co.get_den().get_str();
            else
                os << "(" << rat_str(co) << ")*" << name;
        }
        first = false;
    }
    if (e.c != 0 || first) {
        if (!first && e.c > 0) os << "+";
        os << rat_str(e.c);
    }
    return os.str();
}

inline std::string power_suffix(const VarSpace& sp, const Exponent& e) {
    if (e == Exponent(1)) return "";
    if (e.is_integer() && e.as_integer() > 0) return "^" + std::to_string(e.as_integer());
    return "^(" + exponent_str(sp, e) + ")";
}

inline std::string kernel_str(const VarSpace& sp, const Kernel& k) {
    std::ostringstream os;
    switch (k.kind) {
        case KKind::Indep:
            os << sp.indep[k.id];
            break;
        case KKind::Param:
            os << sp.params[k.id].name;
            break;
        case KKind::Jet: {
            os << sp.fields[k.id].name << "[";
            bool first = true;
            for (std::size_t i = 0; i < k.idx.mult.size(); ++i)
                for (int r = 0; r < k.idx.mult[i]; ++r) {
                    if (!first) os << ",";
                    os << sp.indep[i];
                    first = false;
                }
            os << "]";
            break;
        }
        case KKind::Func: {
            const FuncSpec& f = sp.funcs[k.id];
            auto arg_str = [&](const FuncArg& a) {
                if (a.is_indep) return sp.indep[a.indep];
                std::ostringstream as;
                as << sp.fields[a.field].name << "[";
                bool first = true;
                for (std::size_t i = 0; i < a.jet.mult.size(); ++i)
                    for (int r = 0; r < a.jet.mult[i]; ++r) {
                        if (!first) as << ",";
                        as << sp.indep[i];
                        first = false;
                    }
                as << "]";
                return as.str();
            };
            int ord = k.idx.order();
            if (ord == 0 || (f.args.size() == 1 && ord <= 3)) {
                os << f.name;
                for (int r = 0; r < ord; ++r) os << "'";
                os << "(";
                for (std::size_t i = 0; i < f.args.size(); ++i)
                    os << (i ? "," : "") << arg_str(f.args[i]);
                os << ")";
            } else {
                os << "diff(" << f.name;
                for (std::size_t s = 0; s < f.args.size(); ++s)
                    if (k.idx.count(s) > 0)
                        os << ",(" << arg_str(f.args[s]) << "," << k.idx.count(s) << ")";
                os << ")";
            }
            break;
        }
        case KKind::Pow:
            os << "(" << print_expr(sp, *k.sub) << ")";
            break;
        case KKind::Nli:
            os << "Dxinv(" << print_expr(sp, *k.sub) << ")";
            break;
    }
    return os.str();
}

inline std::string mono_str(const VarSpace& sp, const Monomial& m, bool lead) {
    std::ostringstream os;
    Rat c = m.coeff;
    bool neg = c < 0;
    if (neg) c = -c;
    if (!lead)
        os << (neg ? " - " : " + ");
    else if (neg)
        os << "-";
    std::ostringstream body;
    bool emitted = false;
    std::vector<std::string> negs;
    for (auto& [k, e] : m.factors) {
        bool down = e.is_rational() && e.c < 0;
        std::string piece;
        if (k.kind == KKind::Pow)
            piece = kernel_str(sp, k) + power_suffix(sp, e);
        else if (down)
            piece = kernel_str(sp, k) + power_suffix(sp, Exponent(-e.c)).substr(0);
        else
            piece = kernel_str(sp, k) + power_suffix(sp, e);
        if (down && k.kind != KKind::Pow) {
            negs.push_back(piece);
        } else {
            if (emitted) body << "*";
            body << piece;
            emitted = true;
        }
    }
    std::string bs = body.str();
    if (c == 1 && emitted)
        os << bs;
    else if (rat_is_int(c))
        os << rat_str(c) << (emitted ? "*" + bs : "");
    else
        os << "(" << rat_str(c) << ")" << (emitted ? "*" + bs : "");
    for (auto& n : negs) os << "/" << n;
    return os.str();
}

}  // namespace printdetail

inline std::string print_expr(const VarSpace& sp, const Expr& e) {
    using namespace printdetail;
    if (e.is_zero()) return "0";
    std::ostringstream num;
    for (std::size_t i = 0; i < e.num.terms.size(); ++i)
        num << mono_str(sp, e.num.terms[i], i == 0);
    if (e.den.empty()) return num.str();
    std::ostringstream os;
    os << "(" << num.str() << ")/(";
    for (std::size_t i = 0; i < e.den.size(); ++i) {
        if (i) os << "*";
        std::ostringstream b;
        for (std::size_t j = 0; j < e.den[i].base.terms.size(); ++j)
            b << mono_str(sp, e.den[i].base.terms[j], j == 0);
        os << "(" << b.str() << ")";
        if (e.den[i].exp != 1) os << "^" << e.den[i].exp;
    }
    os << ")";
    return os.str();
}

inline std::string print_operator(const VarSpace& sp, const TotalOperator& op) {
    using namespace printdetail;
    if (op.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& w : op.words) {
        // the lead coefficient decides the sign
        Expr lead = expr_rat(Rat(1));
        std::size_t start = 0;
        if (!w.empty() && w[0].kind == OpFactor::Coeff) {
            lead = w[0].c;
            start = 1;
        }
        bool neg = false;
        Expr pl = lead;
        if (lead.num.terms.size() >= 1 && lead.num.terms[0].coeff < 0) {
            neg = true;
            pl = expr_neg(lead);
        }
        os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
        first = false;
        std::vector<std::string> pieces;
        bool unit_lead = expr_is_one(pl);
        if (!unit_lead) {
            std::string ls = print_expr(sp, pl);
            bool needs_paren = pl.num.terms.size() > 1 || !pl.den.empty() ||
                               (pl.num.terms.size() == 1 && !rat_is_int(pl.num.terms[0].coeff));
            pieces.push_back(needs_paren ? "(" + ls + ")" : ls);
        }
        std::size_t i = start;
        while (i < w.size()) {
            if (w[i].kind == OpFactor::Coeff) {
                pieces.push_back("(" + print_expr(sp, w[i].c) + ")");
                ++i;
                continue;
            }
            // collapse runs
            std::size_t j = i;
            while (j < w.size() && w[j].kind == w[i].kind &&
                   (w[i].kind != OpFactor::Deriv || w[j].var == w[i].var))
                ++j;
            std::string sym = w[i].kind == OpFactor::Inv ? "Dxinv" : "D" + sp.indep[w[i].var];
            if (j - i > 1) sym += "^" + std::to_string(j - i);
            pieces.push_back(sym);
            i = j;
        }
        if (pieces.empty()) pieces.push_back("1");
        for (std::size_t p = 0; p < pieces.size(); ++p) os << (p ? "*" : "") << pieces[p];
    }
    return os.str();
}

}  // namespace jetops

#endif
