#ifndef JETOPS_TESTS_HELPERS_HPP
#define JETOPS_TESTS_HELPERS_HPP

#include "jetops/eval.hpp"
#include "jetops/parse.hpp"

#include <random>

namespace jt {

using namespace jetops;

// t, x; dependent u; parameters p (nonzero), k, a, b, c
inline VarSpace space_ux() {
    VarSpace sp;
    sp.indep = {"t", "x"};
    sp.x_index = 1;
    sp.fields.push_back({"u", 0, {}});
    sp.params = {{"p", true}, {"k", false}, {"a", true}, {"b", false}, {"c", false}};
    return sp;
}

// potential-KdV style space: dependent v
inline VarSpace space_v() {
    VarSpace sp;
    sp.indep = {"t", "x"};
    sp.x_index = 1;
    sp.fields.push_back({"v", 0, {}});
    return sp;
}

// u with potential v, u = v_x
inline VarSpace space_pot(int order = 1) {
    VarSpace sp = space_ux();
    sp.fields.push_back({"v", order, {}});
    return sp;
}

// Airy space: u; function symbol a(x) nonzero
inline VarSpace space_airy() {
    VarSpace sp;
    sp.indep = {"t", "x"};
    sp.x_index = 1;
    sp.fields.push_back({"u", 0, {}});
    FuncSpec a;
    a.name = "a";
    a.nonzero = true;
    FuncArg arg;
    arg.is_indep = true;
    arg.indep = 1;
    a.args.push_back(arg);
    sp.funcs.push_back(a);
    return sp;
}

inline Expr P(const VarSpace& sp, const std::string& s) { return parse_expression(s, sp); }
inline TotalOperator OP(const VarSpace& sp, const std::string& s) { return parse_operator(s, sp); }

// random polynomial-ish expressions over t, x, u, u_t, u_x, u_xx
struct Rng {
    std::mt19937 g;
    explicit Rng(unsigned seed) : g(seed) {}
    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

    Expr leaf(const VarSpace& sp) {
        switch (uniform(0, 6)) {
            case 0: return expr_rat(Rat(uniform(-4, 4)));
            case 1: return make_indep(sp, 0);
            case 2: return make_indep(sp, 1);
            case 3: return make_jet(sp, 0, MultiIndex(2));
            case 4: return make_jet(sp, 0, MultiIndex(2).plus(1));
            case 5: return make_jet(sp, 0, MultiIndex(2).plus(0));
            default: return make_jet(sp, 0, MultiIndex(2).plus(1).plus(1));
        }
    }

    Expr expr(const VarSpace& sp, int depth) {
        if (depth <= 0) return leaf(sp);
        switch (uniform(0, 5)) {
            case 0: return expr_add(expr(sp, depth - 1), expr(sp, depth - 1));
            case 1: return expr_sub(expr(sp, depth - 1), expr(sp, depth - 1));
            case 2: return expr_mul(expr(sp, depth - 1), expr(sp, depth - 1));
            case 3: return expr_pow_int(expr(sp, depth - 1), uniform(1, 2));
            case 4: return expr_neg(expr(sp, depth - 1));
            default: return leaf(sp);
        }
    }

    EvalPoint point(const VarSpace& sp) {
        EvalPoint pt;
        auto val = [&] { return uniform(1, 9) / static_cast<double>(uniform(1, 5)); };
        pt.indeps[0] = val();
        pt.indeps[1] = val();
        for (int dt = 0; dt <= 3; ++dt)
            for (int dx = 0; dx <= 5; ++dx) {
                MultiIndex j(2);
                j.bump(0, dt);
                j.bump(1, dx);
                pt.jets[{0, j}] = val();
            }
        for (std::size_t i = 0; i < sp.params.size(); ++i) pt.params[static_cast<int>(i)] = val();
        return pt;
    }
};

}  // namespace jt

#endif
