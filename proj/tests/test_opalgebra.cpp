#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace jt;

namespace {

TotalOperator random_op(Rng& rng, const VarSpace& sp, bool with_inv) {
    std::vector<OpWord> raw;
    int words = rng.uniform(1, 3);
    for (int w = 0; w < words; ++w) {
        OpWord word;
        word.push_back(OpFactor::coeff(rng.expr(sp, 2)));
        if (with_inv && rng.uniform(0, 2) == 0) {
            int invs = rng.uniform(1, 2);
            for (int i = 0; i < invs; ++i) {
                word.push_back(OpFactor::inv());
                if (rng.uniform(0, 1)) word.push_back(OpFactor::coeff(rng.expr(sp, 1)));
            }
        }
        int order = rng.uniform(0, with_inv ? 2 : 4);
        for (int d = 0; d < order; ++d) word.push_back(OpFactor::deriv(rng.uniform(0, 1)));
        raw.push_back(std::move(word));
    }
    return op_canon(sp, std::move(raw));
}

}  // namespace

TEST_CASE("operator addition and scaling") {
    VarSpace sp = space_ux();
    CHECK(op_eq(sp, op_add(sp, OP(sp, "Dx"), OP(sp, "Dx")), OP(sp, "2*Dx")));
    CHECK(op_eq(sp, OP(sp, "Dt^2 + Dt^2"), OP(sp, "2*Dt^2")));
    VarSpace spv = space_v();
    TotalOperator r = OP(spv, "-4*(Dx^2 + (1/3)*v[x] + (1/3)*Dxinv*v[x]*Dx)");
    CHECK(op_eq(spv, r, op_scale(spv, expr_rat(Rat(-4)),
                                 OP(spv, "Dx^2 + (1/3)*v[x] + (1/3)*Dxinv*v[x]*Dx"))));
}

TEST_CASE("composition pushes derivatives right") {
    VarSpace sp = space_ux();
    CHECK(op_eq(sp, op_compose(sp, OP(sp, "Dx"), OP(sp, "u[]")), OP(sp, "u[]*Dx + u[x]")));
    CHECK(op_eq(sp, op_compose(sp, OP(sp, "Dx"), OP(sp, "Dxinv")), op_identity(sp)));
    CHECK(op_eq(sp, OP(sp, "Dx*Dxinv"), OP(sp, "1")));
    CHECK(op_eq(sp, OP(sp, "Dxinv*Dx"), OP(sp, "1")));
}

TEST_CASE("KdV recursion operator transforms to potential form") {
    VarSpace spv = space_v();
    TotalOperator lhs = OP(spv, "Dxinv*(Dx^2 + (1/3)*v[x] + (1/3)*Dx*v[x]*Dxinv)*Dx");
    TotalOperator rhs = OP(spv, "Dx^2 + (1/3)*v[x] + (1/3)*Dxinv*v[x]*Dx");
    CHECK(op_eq(spv, lhs, rhs));
}

TEST_CASE("integration-by-parts rewrite in canonical form") {
    VarSpace spv = space_v();
    // Dxinv c Dx = c - Dxinv (Dx c)
    CHECK(op_eq(spv, OP(spv, "Dxinv*v[x]*Dx"), OP(spv, "v[x] - Dxinv*v[x,x]")));
    // applying both sides agrees on random expressions
    Rng rng(31);
    VarSpace sp = space_ux();
    Expr c = P(sp, "u[]*u[x]");
    for (int i = 0; i < 50; ++i) {
        Expr e = rng.expr(sp, 3);
        OpWord lhs_word{OpFactor::inv(), OpFactor::coeff(c), OpFactor::deriv(1)};
        Expr lhs = op_apply_word(sp, lhs_word, e);
        OpWord ibp{OpFactor::inv(), OpFactor::coeff(total_derivative(sp, c, 1))};
        Expr rhs = expr_sub(expr_mul(c, e), op_apply_word(sp, ibp, e));
        CHECK(expr_eq_struct(lhs, rhs));
    }
}

TEST_CASE("adjoint examples") {
    VarSpace spv = space_v();
    CHECK(op_eq(spv, op_adjoint(spv, OP(spv, "v[x]*Dx^2")),
                OP(spv, "v[x]*Dx^2 + 2*v[x,x]*Dx + v[x,x,x]")));
    CHECK(op_eq(spv, op_adjoint(spv, op_identity(spv)), op_identity(spv)));
    VarSpace sp = space_ux();
    CHECK(op_eq(sp, OP(sp, "Dx"), op_scale(sp, expr_rat(Rat(-1)), op_adjoint(sp, OP(sp, "Dx")))));
    CHECK(op_eq(sp, op_adjoint(sp, OP(sp, "Dxinv")), OP(sp, "-Dxinv")));
    // gKdV factor operator and its adjoint
    TotalOperator rq = OP(sp, "-3*t*Dx^2 - 3*t*u[]^p + x - (1-2/p)*Dxinv");
    CHECK(op_eq(sp, op_adjoint(sp, rq), OP(sp, "-3*t*Dx^2 - 3*t*u[]^p + x + (1-2/p)*Dxinv")));
}

TEST_CASE("adjoint involution and anti-homomorphism") {
    VarSpace sp = space_ux();
    Rng rng(37);
    for (int i = 0; i < 120; ++i) {
        TotalOperator a = random_op(rng, sp, true);
        CHECK(op_eq(sp, op_adjoint(sp, op_adjoint(sp, a)), a));
    }
    for (int i = 0; i < 60; ++i) {
        TotalOperator a = random_op(rng, sp, false);
        TotalOperator b = random_op(rng, sp, false);
        CHECK(op_eq(sp, op_adjoint(sp, op_compose(sp, a, b)),
                    op_compose(sp, op_adjoint(sp, b), op_adjoint(sp, a))));
    }
}

TEST_CASE("frechet adjoint consistency") {
    VarSpace sp = space_ux();
    Rng rng(41);
    for (int i = 0; i < 200; ++i) {
        Expr f = rng.expr(sp, 3);
        CHECK(op_eq(sp, frechet_adjoint(sp, f), op_adjoint(sp, frechet(sp, f))));
    }
}

TEST_CASE("operator application") {
    VarSpace spa = space_airy();
    MultiIndex j2t(2);
    j2t.bump(0, 2);
    Expr img = op_apply(spa, OP(spa, "2/a(x)*Dt"), make_jet(spa, 0, j2t));
    MultiIndex j3t(2);
    j3t.bump(0, 3);
    CHECK(expr_equal(img, expr_div(expr_scale(make_jet(spa, 0, j3t), Rat(2)),
                                   make_func(spa, 0, MultiIndex(1)))));
    VarSpace spp = space_pot();
    CHECK(expr_equal(op_apply(spp, OP(spp, "-2*Dxinv"), P(spp, "-u[x]")), P(spp, "2*u[]")));
    CHECK(op_apply(spp, op_zero(), P(spp, "u[t,x]")).is_zero());
    // linearity and composition
    VarSpace sp = space_ux();
    Rng rng(43);
    for (int i = 0; i < 40; ++i) {
        TotalOperator a = random_op(rng, sp, false);
        TotalOperator b = random_op(rng, sp, false);
        Expr e = rng.expr(sp, 2);
        CHECK(expr_eq_struct(op_apply(sp, op_compose(sp, a, b), e),
                             op_apply(sp, a, op_apply(sp, b, e))));
    }
}

TEST_CASE("operator printing round trips") {
    VarSpace spv = space_v();
    Rng rng(47);
    for (int i = 0; i < 60; ++i) {
        TotalOperator a = random_op(rng, spv, true);
        TotalOperator back = OP(spv, print_operator(spv, a));
        CHECK(op_eq(spv, a, back));
    }
    CHECK(print_operator(spv, op_zero()) == "0");
}
