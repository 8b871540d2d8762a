#ifndef JETOPS_EVAL_HPP
#define JETOPS_EVAL_HPP

#include "jetops/print.hpp"

#include <cmath>
#include <map>

namespace jetops {

// numeric point: bindings for jets, independents, parameters, and
// function-symbol derivatives
struct EvalPoint {
    std::map<std::pair<int, MultiIndex>, double> jets;  // (field, J) -> value
    std::map<int, double> indeps;
    std::map<int, double> params;
    std::map<std::pair<int, MultiIndex>, double> funcs;  // (func id, slot derivs) -> value

    double jet(int field, const MultiIndex& j) const {
        auto it = jets.find({field, j});
        if (it == jets.end()) throw std::domain_error("missing binding");
        return it->second;
    }
};

inline double eval_numeric(const VarSpace& sp, const Expr& e, const EvalPoint& pt);

namespace evaldetail {

inline double eval_exponent(const Exponent& ex, const EvalPoint& pt) {
    double v = rat_double(ex.c);
    for (auto& [id, co] : ex.params) {
        auto it = pt.params.find(id);
        if (it == pt.params.end()) throw std::domain_error("missing binding");
        v += rat_double(co) * it->second;
    }
    return v;
}

inline double eval_kernel(const VarSpace& sp, const Kernel& k, const EvalPoint& pt) {
    switch (k.kind) {
        case KKind::Indep: {
            auto it = pt.indeps.find(k.id);
            if (it == pt.indeps.end()) throw std::domain_error("missing binding");
            return it->second;
        }
        case KKind::Param: {
            auto it = pt.params.find(k.id);
            if (it == pt.params.end()) throw std::domain_error("missing binding");
            return it->second;
        }
        case KKind::Jet:
            return pt.jet(k.id, k.idx);
        case KKind::Func: {
            auto it = pt.funcs.find({k.id, k.idx});
            if (it == pt.funcs.end()) throw std::domain_error("missing binding");
            return it->second;
        }
        case KKind::Pow:
            return eval_numeric(sp, *k.sub, pt);
        case KKind::Nli:
            throw std::domain_error("nonlocal term not numerically evaluable");
    }
    return 0;
}

inline double powc(double base, double e) {
    if (base < 0) {
        double r = std::round(e);
        if (std::abs(e - r) > 1e-9) throw std::domain_error("negative base with non-integer exponent");
        return std::pow(base, r);
    }
    return std::pow(base, e);
}

}  // namespace evaldetail

inline double eval_numeric(const VarSpace& sp, const Expr& e, const EvalPoint& pt) {
    using namespace evaldetail;
    double num = 0;
    for (auto& m : e.num.terms) {
        double v = rat_double(m.coeff);
        for (auto& [k, ex] : m.factors) v *= powc(eval_kernel(sp, k, pt), eval_exponent(ex, pt));
        num += v;
    }
    for (auto& f : e.den) {
        double d = 0;
        for (auto& m : f.base.terms) {
            double v = rat_double(m.coeff);
            for (auto& [k, ex] : m.factors) v *= powc(eval_kernel(sp, k, pt), eval_exponent(ex, pt));
            d += v;
        }
        if (d == 0) throw std::domain_error("zero denominator");
        num /= std::pow(d, static_cast<double>(f.exp));
    }
    return num;
}

// central difference (F(u+hw) - F(u-hw)) / (2h); the direction w shifts every
// jet of the dependent variable by h D_J w
inline double finite_difference_directional(const VarSpace& sp, const Expr& f, const Expr& w,
                                            const EvalPoint& pt, double h) {
    if (!is_local(f) || !is_local(w)) throw std::domain_error("nonlocal term not numerically evaluable");
    std::set<JetRef> jets;
    collect_jets(sp, f, true, jets);
    for (auto& j : jets)
        if (j.field != 0) throw std::domain_error("finite differences need potential-free input");
    EvalPoint plus = pt, minus = pt;
    for (auto& j : jets) {
        double dw = eval_numeric(sp, total_derivative_multi(sp, w, j.idx), pt);
        plus.jets[{0, j.idx}] = pt.jet(0, j.idx) + h * dw;
        minus.jets[{0, j.idx}] = pt.jet(0, j.idx) - h * dw;
    }
    return (eval_numeric(sp, f, plus) - eval_numeric(sp, f, minus)) / (2 * h);
}

}  // namespace jetops

#endif
