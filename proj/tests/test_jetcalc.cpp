#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace jt;

TEST_CASE("total derivatives") {
    VarSpace sp = space_ux();
    CHECK(expr_equal(total_derivative(sp, P(sp, "u[]^2"), 1), P(sp, "2*u[]*u[x]")));
    VarSpace spv = space_v();
    CHECK(expr_equal(total_derivative(spv, P(spv, "Dxinv(v[x]^2)"), 1), P(spv, "v[x]^2")));
    // multi-index composition is order independent
    Rng rng(11);
    for (int i = 0; i < 40; ++i) {
        Expr e = rng.expr(sp, 3);
        Expr dtx = total_derivative(sp, total_derivative(sp, e, 0), 1);
        Expr dxt = total_derivative(sp, total_derivative(sp, e, 1), 0);
        CHECK(expr_eq_struct(dtx, dxt));
    }
    MultiIndex tx(2);
    tx.bump(0);
    tx.bump(1);
    CHECK(expr_equal(total_derivative_multi(sp, P(sp, "u[]"), tx), P(sp, "u[t,x]")));
}

TEST_CASE("product rule with multinomial coefficients") {
    VarSpace sp = space_ux();
    Rng rng(13);
    std::vector<MultiIndex> js;
    for (int dt = 0; dt <= 3; ++dt)
        for (int dx = 0; dt + dx <= 3; ++dx) {
            MultiIndex j(2);
            j.bump(0, dt);
            j.bump(1, dx);
            if (j.order() >= 1) js.push_back(j);
        }
    for (int i = 0; i < 8; ++i) {
        Expr f = rng.expr(sp, 2), g = rng.expr(sp, 2);
        for (auto& j : js) {
            Expr lhs = total_derivative_multi(sp, expr_mul(f, g), j);
            Expr rhs = expr_zero();
            for (auto& k : j.subsets()) {
                Rat b = multi_binom(j, k);
                CHECK(b == multi_binom(j, j.minus(k)));
                rhs = expr_add(rhs, expr_scale(expr_mul(total_derivative_multi(sp, f, j.minus(k)),
                                                        total_derivative_multi(sp, g, k)),
                                               b));
            }
            CHECK(expr_eq_struct(lhs, rhs));
        }
    }
}

TEST_CASE("frechet derivative of the potential KdV equation") {
    VarSpace sp = space_v();
    Expr g = P(sp, "v[t,x] + v[x]*v[x,x] + v[x,x,x,x]");
    TotalOperator gp = frechet(sp, g);
    CHECK(op_eq(sp, gp, OP(sp, "Dt*Dx + v[x,x]*Dx + v[x]*Dx^2 + Dx^4")));
    // self-adjoint: the equation is Euler-Lagrange
    CHECK(op_eq(sp, gp, frechet_adjoint(sp, g)));
}

TEST_CASE("frechet of nonlocal and potential expressions") {
    VarSpace sp = space_pot();
    // peakon scaling adjoint-symmetry: Q' = -(k+1) t Dt Dxinv - Dxinv
    Expr q = P(sp, "-v[] - (k+1)*t*v[t]");
    CHECK(op_eq(sp, frechet(sp, q), OP(sp, "-(k+1)*t*Dt*Dxinv - Dxinv")));
    // gKdV scaling adjoint-symmetry
    Expr q2 = P(sp, "(1-2/p)*v[] - x*u[] + 3*t*(u[]^(p+1)/(p+1) + u[x,x])");
    CHECK(op_eq(sp, frechet(sp, q2),
                OP(sp, "3*t*Dx^2 + 3*t*u[]^p - x + (1-2/p)*Dxinv")));
    // identity operator
    CHECK(op_eq(sp, frechet(sp, P(sp, "u[]")), OP(sp, "1")));
}

TEST_CASE("frechet adjoint examples") {
    VarSpace sp = space_ux();
    CHECK(op_eq(sp, frechet_adjoint(sp, P(sp, "u[x]")), OP(sp, "-Dx")));
    CHECK(op_eq(sp, frechet_adjoint(sp, P(sp, "u[]*u[x,x]")),
                OP(sp, "2*u[x,x] + u[]*Dx^2 + 2*u[x]*Dx")));
    VarSpace spa = space_airy();
    Expr g = P(spa, "u[t] + a(x)*u[x,x,x]");
    CHECK(op_eq(spa, frechet(spa, g), OP(spa, "Dt + a(x)*Dx^3")));
    CHECK(op_eq(spa, frechet_adjoint(spa, g),
                OP(spa, "-Dt - a(x)*Dx^3 - 3*a'(x)*Dx^2 - 3*a''(x)*Dx - a'''(x)")));
}

TEST_CASE("frechet against central finite differences") {
    VarSpace sp = space_ux();
    Rng rng(2024);
    int done = 0;
    for (int i = 0; done < 200 && i < 400; ++i) {
        Expr f = rng.expr(sp, 3), w = rng.expr(sp, 2);
        EvalPoint pt = rng.point(sp);
        double sym, fd;
        try {
            sym = eval_numeric(sp, op_apply(sp, frechet(sp, f), w), pt);
            fd = finite_difference_directional(sp, f, w, pt, 1e-5);
        } catch (const std::domain_error&) {
            continue;
        }
        ++done;
        CHECK(std::abs(sym - fd) <= 1e-6 * (1 + std::abs(sym)));
    }
    CHECK(done == 200);
    // hand-checked: F = u^3, w = u_x at u=2, u_x=5: 3*4*5 = 60
    EvalPoint pt;
    pt.jets[{0, MultiIndex(2)}] = 2;
    pt.jets[{0, MultiIndex(2).plus(1)}] = 5;
    CHECK(finite_difference_directional(sp, P(sp, "u[]^3"), P(sp, "u[x]"), pt, 1e-5) ==
          Catch::Approx(60.0).epsilon(1e-6));
    // F = u^2, w = 1 at u = 3
    pt.jets[{0, MultiIndex(2)}] = 3;
    CHECK(finite_difference_directional(sp, P(sp, "u[]^2"), P(sp, "1"), pt, 1e-5) ==
          Catch::Approx(6.0).margin(1e-8));
}

TEST_CASE("euler operator") {
    VarSpace spv = space_v();
    Expr lagr = P(spv, "-(1/2)*v[t]*v[x] - (1/6)*v[x]^3 + (1/2)*v[x,x]^2");
    CHECK(expr_equal(euler_op(spv, lagr), P(spv, "v[t,x] + v[x]*v[x,x] + v[x,x,x,x]")));
    VarSpace sp = space_ux();
    CHECK(expr_equal(euler_op(sp, P(sp, "(1/2)*u[]^2")), P(sp, "u[]")));
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        Expr a = rng.expr(sp, 3);
        CHECK(euler_op(sp, total_derivative(sp, a, 0)).is_zero());
        CHECK(euler_op(sp, total_derivative(sp, a, 1)).is_zero());
    }
    CHECK_THROWS_AS(euler_op(spv, P(spv, "Dxinv(v[x]^2)")), std::domain_error);
}

TEST_CASE("euler product rule") {
    VarSpace sp = space_ux();
    Rng rng(17);
    for (int i = 0; i < 60; ++i) {
        Expr f = rng.expr(sp, 2), g = rng.expr(sp, 2);
        Expr lhs = euler_op(sp, expr_mul(f, g));
        Expr rhs = expr_add(op_apply(sp, frechet_adjoint(sp, f), g),
                            op_apply(sp, frechet_adjoint(sp, g), f));
        CHECK(expr_eq_struct(lhs, rhs));
    }
}

TEST_CASE("helmholtz: frechet of an Euler-Lagrange expression is self-adjoint") {
    VarSpace sp = space_ux();
    Rng rng(23);
    for (int i = 0; i < 60; ++i) {
        Expr lagr = rng.expr(sp, 3);
        Expr g = euler_op(sp, lagr);
        TotalOperator gp = frechet(sp, g);
        CHECK(op_eq(sp, gp, op_adjoint(sp, gp)));
        CHECK(op_eq(sp, gp, frechet_adjoint(sp, g)));
    }
}

TEST_CASE("higher euler operators") {
    VarSpace sp = space_ux();
    MultiIndex jx(2);
    jx.bump(1);
    MultiIndex jxx(2);
    jxx.bump(1, 2);
    MultiIndex jt(2);
    jt.bump(0);
    Expr f = P(sp, "u[]*u[x,x]");
    CHECK(expr_equal(higher_euler(sp, f, jx), P(sp, "-2*u[x]")));
    CHECK(expr_equal(higher_euler(sp, f, jxx), P(sp, "u[]")));
    // eq-style check: for Euler-Lagrange G, G_{u_t} = -E^{(t)}(G)
    Expr g = P(sp, "u[]^2*u[t,t] + 2*u[]*u[t,x] + u[x,x] + u[]*u[t]^2 + u[x]*u[t]");
    Expr gut = partial_jet(sp, g, 0, jt);
    CHECK(expr_equal(gut, expr_neg(higher_euler(sp, g, jt))));
    Expr wave = P(sp, "u[t,t] - u[x,x]");
    CHECK(higher_euler(sp, wave, jt).is_zero());
    CHECK(partial_jet(sp, wave, 0, jt).is_zero());
}

TEST_CASE("prolonged action") {
    VarSpace sp = space_ux();
    CHECK(expr_equal(prolonged_action(sp, P(sp, "u[x]"), P(sp, "u[]^2")), P(sp, "2*u[]*u[x]")));
}

TEST_CASE("exact x-antidifferentiation") {
    VarSpace spv = space_v();
    // integration by parts chain
    CHECK(expr_equal(make_nonlocal(spv, P(spv, "v[x]*v[x,x,x,x]")),
                     P(spv, "v[x]*v[x,x,x] - (1/2)*v[x,x]^2")));
    // joint cancellation u_x^2 + u u_xx -> u u_x
    VarSpace sp = space_ux();
    CHECK(expr_equal(make_nonlocal(sp, P(sp, "u[x]^2 + u[]*u[x,x]")), P(sp, "u[]*u[x]")));
    // genuinely nonlocal terms stay wrapped
    Expr n = make_nonlocal(spv, P(spv, "v[x]^2"));
    CHECK(!is_local(n));
    CHECK(expr_equal(total_derivative(spv, n, 1), P(spv, "v[x]^2")));
    // x-free integrands pick up a factor of x
    CHECK(expr_equal(make_nonlocal(sp, P(sp, "t^2")), P(sp, "t^2*x")));
    CHECK(expr_equal(make_nonlocal(sp, P(sp, "x^2*t")), P(sp, "(1/3)*x^3*t")));
    // potential shift: D_x^{-1} u_t = v_t
    VarSpace spp = space_pot();
    CHECK(expr_equal(make_nonlocal(spp, P(spp, "u[t]")), P(spp, "v[t]")));
    CHECK(expr_equal(make_nonlocal(spp, P(spp, "u[]")), P(spp, "v[]")));
    // power-chain through a fractional sum kernel
    Expr chain = P(sp, "(u[]^2-u[x]^2)^(k/2)*(u[]*u[x] - u[x]*u[x,x])");
    Expr expect = expr_div(P(sp, "(u[]^2-u[x]^2)^(k/2+1)"), P(sp, "k+2"));
    CHECK(expr_equal(make_nonlocal(sp, chain), expect));
    // idempotent: renormalizing the wrapped remainder changes nothing
    Expr again = make_nonlocal(spv, P(spv, "v[x]^2"));
    CHECK(expr_eq_struct(n, again));
}

TEST_CASE("t-derivatives pass through the antiderivative") {
    VarSpace spv = space_v();
    Expr n = make_nonlocal(spv, P(spv, "v[x]^2"));
    Expr dt = total_derivative(spv, n, 0);
    CHECK(expr_equal(total_derivative(spv, dt, 1), P(spv, "2*v[x]*v[t,x]")));
}
