#ifndef JETOPS_SPACE_HPP
#define JETOPS_SPACE_HPP

#include "jetops/expr.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace jetops {

// A function-symbol argument: either an independent variable or a jet of a field.
struct FuncArg {
    bool is_indep = true;
    int indep = -1;
    int field = -1;
    MultiIndex jet;
};

struct FuncSpec {
    std::string name;
    std::vector<FuncArg> args;
    bool nonzero = false;
    // optional closure rules: total derivative of the bare symbol w.r.t. an
    // independent variable, e.g. E(t) with d/dt E = -b*E
    std::map<int, Expr> diff_rules;
};

struct ParamSpec {
    std::string name;
    bool nonzero = false;
};

// fields[0] is the dependent variable; further entries are potentials with
// u = D_x^m v.  `rules` holds PDE-derived reductions of low jets (e.g.
// v_t = ...) used only when restricting to the solution space.
struct FieldSpec {
    std::string name;
    int order = 0;  // m, 0 for the dependent itself
    std::vector<std::pair<MultiIndex, Expr>> rules;
};

struct VarSpace {
    std::vector<std::string> indep;
    int x_index = -1;  // distinguished spatial variable (admits D_x^{-1})
    std::vector<FieldSpec> fields;
    std::vector<ParamSpec> params;
    std::vector<FuncSpec> funcs;

    int n() const { return static_cast<int>(indep.size()); }

    int indep_id(const std::string& s) const {
        for (std::size_t i = 0; i < indep.size(); ++i)
            if (indep[i] == s) return static_cast<int>(i);
        return -1;
    }
    int field_id(const std::string& s) const {
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (fields[i].name == s) return static_cast<int>(i);
        return -1;
    }
    int param_id(const std::string& s) const {
        for (std::size_t i = 0; i < params.size(); ++i)
            if (params[i].name == s) return static_cast<int>(i);
        return -1;
    }
    int func_id(const std::string& s) const {
        for (std::size_t i = 0; i < funcs.size(); ++i)
            if (funcs[i].name == s) return static_cast<int>(i);
        return -1;
    }
};

// canonical jet: a potential jet with at least m x-derivatives reduces to the
// dependent variable (u = D_x^m v is the definition of the potential)
inline Expr make_jet(const VarSpace& sp, int field, const MultiIndex& j) {
    if (field > 0) {
        int m = sp.fields[field].order;
        if (sp.x_index >= 0 && j.count(sp.x_index) >= m) {
            MultiIndex r = j;
            r.bump(sp.x_index, -m);
            return make_jet(sp, 0, r);
        }
    }
    return expr_kernel(make_jet_kernel_raw(field, j));
}

inline Expr make_indep(const VarSpace&, int id) { return expr_kernel(make_indep_kernel(id)); }
inline Expr make_param(const VarSpace&, int id) { return expr_kernel(make_param_kernel(id)); }
inline Expr make_func(const VarSpace&, int id, MultiIndex slots) {
    return expr_kernel(make_func_kernel(id, std::move(slots)));
}

}  // namespace jetops

#endif
