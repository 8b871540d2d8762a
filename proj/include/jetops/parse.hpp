#ifndef JETOPS_PARSE_HPP
#define JETOPS_PARSE_HPP

// Recursive-descent parser for the expression grammar
//   name[i1,i2,...]   jet variables ("name[]" for the bare variable)
//   + - * / ^         with standard precedence, unary minus
//   Dxinv(expr)       formal antiderivative
//   a(x), a'(x), diff(f,(u,2))   function symbols and their derivatives
//   p/q               rationals
// plus, input-only, Dt(...)/Dx(...)/Dy(...) total-derivative calls, and the
// operator syntax (words joined by *, symbols Dt, Dx, Dy, Dxinv).

#include "jetops/frechet.hpp"

#include <cctype>
#include <string>

namespace jetops {

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(const std::string& msg, int l, int c)
        : std::runtime_error("parse error at line " + std::to_string(l) + ", col " +
                             std::to_string(c) + ": " + msg),
          line(l),
          col(c) {}
};

namespace parsedetail {

struct Token {
    enum Kind { End, Int, Ident, Punct } kind = End;
    std::string text;
    int primes = 0;  // trailing ' marks after an identifier
    int line = 1, col = 1;
};

class Lexer {
  public:
    explicit Lexer(const std::string& s) : src_(s) { advance(); }
    const Token& peek() const { return tok_; }
    Token next() {
        Token t = tok_;
        advance();
        return t;
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, tok_.line, tok_.col); }

  private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) return;
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            tok_.kind = Token::Int;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                tok_.text += src_[pos_];
                bump();
            }
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            tok_.kind = Token::Ident;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                tok_.text += src_[pos_];
                bump();
            }
            while (pos_ < src_.size() && src_[pos_] == '\'') {
                ++tok_.primes;
                bump();
            }
            return;
        }
        tok_.kind = Token::Punct;
        tok_.text = std::string(1, c);
        bump();
    }
    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    std::string src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class Parser {
  public:
    Parser(const std::string& s, const VarSpace& sp) : lex_(s), sp_(sp) {}

    Expr parse_expr_all() {
        Expr e = expr();
        expect_end();
        return e;
    }

    TotalOperator parse_op_all() {
        TotalOperator t = op_expr();
        expect_end();
        return t;
    }

  private:
    Lexer lex_;
    const VarSpace& sp_;

    bool punct(const char* p) const {
        return lex_.peek().kind == Token::Punct && lex_.peek().text == p;
    }
    void eat(const char* p) {
        if (!punct(p)) lex_.fail(std::string("expected '") + p + "'");
        lex_.next();
    }
    void expect_end() {
        if (lex_.peek().kind != Token::End) lex_.fail("unexpected token '" + lex_.peek().text + "'");
    }

    // ---- expressions ------------------------------------------------------

    Expr expr() {
        Expr e = punct("-") ? (lex_.next(), expr_neg(term())) : term();
        while (punct("+") || punct("-")) {
            bool plus = lex_.peek().text == "+";
            lex_.next();
            Expr r = term();
            e = plus ? expr_add(e, r) : expr_sub(e, r);
        }
        return e;
    }

    Expr term() {
        Expr e = unary();
        while (punct("*") || punct("/")) {
            bool mul = lex_.peek().text == "*";
            lex_.next();
            Expr r = unary();
            if (mul)
                e = expr_mul(e, r);
            else {
                if (r.is_zero()) lex_.fail("zero denominator");
                e = expr_div(e, r);
            }
        }
        return e;
    }

    Expr unary() {
        if (punct("-")) {
            lex_.next();
            return expr_neg(unary());
        }
        return postfix();
    }

    Expr postfix() {
        Expr e = primary();
        if (punct("^")) {
            lex_.next();
            Exponent ex = exponent();
            e = expr_pow(e, ex);
        }
        return e;
    }

    Exponent exponent() {
        Expr raw;
        bool neg = false;
        if (punct("-")) {
            lex_.next();
            neg = true;
        }
        if (lex_.peek().kind == Token::Int) {
            raw = expr_rat(Rat(lex_.next().text));
        } else if (punct("(")) {
            lex_.next();
            raw = expr();
            eat(")");
        } else if (lex_.peek().kind == Token::Ident) {
            raw = primary();
        } else {
            lex_.fail("expected exponent");
        }
        if (neg) raw = expr_neg(raw);
        return to_exponent(raw);
    }

    Exponent to_exponent(const Expr& e) {
        Exponent out;
        if (!e.den.empty()) lex_.fail("unsupported exponent");
        for (auto& m : e.num.terms) {
            if (m.factors.empty()) {
                out.c += m.coeff;
            } else if (m.factors.size() == 1 && m.factors[0].first.kind == KKind::Param &&
                       m.factors[0].second == Exponent(1)) {
                out += Exponent::param(m.factors[0].first.id, m.coeff);
            } else {
                lex_.fail("unsupported exponent");
            }
        }
        return out;
    }

    Expr primary() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Int) {
            return expr_rat(Rat(lex_.next().text));
        }
        if (punct("(")) {
            lex_.next();
            Expr e = expr();
            eat(")");
            return e;
        }
        if (t.kind != Token::Ident) lex_.fail("expected expression");
        Token id = lex_.next();
        // jet variable
        if (punct("[")) {
            int field = sp_.field_id(id.text);
            if (field < 0) lex_.fail("unknown symbol '" + id.text + "'");
            lex_.next();
            MultiIndex j(sp_.indep.size());
            while (!punct("]")) {
                if (lex_.peek().kind != Token::Ident) lex_.fail("expected independent variable");
                Token v = lex_.next();
                int vi = sp_.indep_id(v.text);
                if (vi < 0) lex_.fail("unknown symbol '" + v.text + "'");
                j.bump(vi);
                if (punct(",")) lex_.next();
            }
            eat("]");
            return make_jet(sp_, field, j);
        }
        // Dxinv(...) and total-derivative sugar Dt/Dx/Dy(...)
        if (id.text == "Dxinv" && id.primes == 0 && punct("(")) {
            lex_.next();
            Expr e = expr();
            eat(")");
            return make_nonlocal(sp_, e);
        }
        if (id.text.size() > 1 && id.text[0] == 'D' && sp_.indep_id(id.text.substr(1)) >= 0 &&
            punct("(")) {
            int v = sp_.indep_id(id.text.substr(1));
            lex_.next();
            Expr e = expr();
            eat(")");
            return total_derivative(sp_, e, v);
        }
        if (id.text == "diff" && punct("(")) return diff_call();
        // function symbol
        if (punct("(")) {
            int fid = sp_.func_id(id.text);
            if (fid < 0) lex_.fail("unknown symbol '" + id.text + "'");
            const FuncSpec& f = sp_.funcs[fid];
            lex_.next();
            std::size_t argn = 0;
            while (!punct(")")) {
                Expr a = expr();
                if (argn >= f.args.size()) lex_.fail("too many arguments to '" + id.text + "'");
                if (!expr_equal(a, arg_expr(f.args[argn])))
                    lex_.fail("argument mismatch for '" + id.text + "'");
                ++argn;
                if (punct(",")) lex_.next();
            }
            eat(")");
            if (argn != f.args.size()) lex_.fail("missing arguments to '" + id.text + "'");
            MultiIndex slots(f.args.size());
            if (id.primes > 0) {
                if (f.args.size() != 1) lex_.fail("prime derivative needs a unary function");
                slots.bump(0, id.primes);
            }
            return make_func(sp_, fid, slots);
        }
        if (id.primes > 0) lex_.fail("unknown symbol '" + id.text + "'");
        int vi = sp_.indep_id(id.text);
        if (vi >= 0) return make_indep(sp_, vi);
        int pi = sp_.param_id(id.text);
        if (pi >= 0) return make_param(sp_, pi);
        lex_.fail("unknown symbol '" + id.text + "'");
    }

    Expr arg_expr(const FuncArg& a) {
        if (a.is_indep) return make_indep(sp_, a.indep);
        return make_jet(sp_, a.field, a.jet);
    }

    Expr diff_call() {
        eat("(");
        if (lex_.peek().kind != Token::Ident) lex_.fail("expected function name in diff");
        Token fn = lex_.next();
        int fid = sp_.func_id(fn.text);
        if (fid < 0) lex_.fail("unknown symbol '" + fn.text + "'");
        const FuncSpec& f = sp_.funcs[fid];
        MultiIndex slots(f.args.size());
        while (punct(",")) {
            lex_.next();
            eat("(");
            Expr a = expr();
            eat(",");
            if (lex_.peek().kind != Token::Int) lex_.fail("expected derivative count");
            long n = std::stol(lex_.next().text);
            eat(")");
            bool found = false;
            for (std::size_t s = 0; s < f.args.size(); ++s)
                if (expr_equal(a, arg_expr(f.args[s]))) {
                    slots.bump(s, static_cast<int>(n));
                    found = true;
                    break;
                }
            if (!found) lex_.fail("diff argument does not match '" + fn.text + "'");
        }
        eat(")");
        return make_func(sp_, fid, slots);
    }

    // ---- operators --------------------------------------------------------

    TotalOperator op_expr() {
        TotalOperator t = punct("-")
                              ? (lex_.next(), op_scale(sp_, expr_rat(Rat(-1)), op_term()))
                              : op_term();
        while (punct("+") || punct("-")) {
            bool plus = lex_.peek().text == "+";
            lex_.next();
            TotalOperator r = op_term();
            t = plus ? op_add(sp_, t, r) : op_sub(sp_, t, r);
        }
        return t;
    }

    TotalOperator op_term() {
        TotalOperator t = op_factor();
        while (punct("*") || punct("/")) {
            bool mul = lex_.peek().text == "*";
            lex_.next();
            TotalOperator r = op_factor();
            if (mul) {
                t = op_compose(sp_, t, r);
            } else {
                // division only by a pure coefficient
                if (r.words.size() != 1 || r.words[0].size() != 1 ||
                    r.words[0][0].kind != OpFactor::Coeff)
                    lex_.fail("operator division requires a scalar");
                t = op_scale(sp_, expr_inv(r.words[0][0].c), t);
            }
        }
        return t;
    }

    TotalOperator op_factor() {
        if (punct("-")) {
            lex_.next();
            return op_scale(sp_, expr_rat(Rat(-1)), op_factor());
        }
        TotalOperator base;
        if (punct("(")) {
            lex_.next();
            base = op_expr();
            eat(")");
        } else if (lex_.peek().kind == Token::Ident && lex_.peek().text == "Dxinv" &&
                   lex_.peek().primes == 0) {
            lex_.next();
            base = op_inv_pow(sp_, 1);
        } else if (lex_.peek().kind == Token::Ident && lex_.peek().text.size() > 1 &&
                   lex_.peek().text[0] == 'D' &&
                   sp_.indep_id(lex_.peek().text.substr(1)) >= 0) {
            int v = sp_.indep_id(lex_.next().text.substr(1));
            base = op_deriv(sp_, v, 1);
        } else {
            // a scalar coefficient atom (identifier, jet, number, function)
            Expr e = postfix();
            return op_from_coeff(sp_, e);
        }
        if (punct("^")) {
            lex_.next();
            if (lex_.peek().kind != Token::Int) lex_.fail("operator power must be a positive integer");
            long n = std::stol(lex_.next().text);
            if (n < 1) lex_.fail("operator power must be a positive integer");
            TotalOperator acc = base;
            for (long i = 1; i < n; ++i) acc = op_compose(sp_, acc, base);
            return acc;
        }
        return base;
    }
};

}  // namespace parsedetail

inline Expr parse_expression(const std::string& text, const VarSpace& sp) {
    parsedetail::Parser p(text, sp);
    return p.parse_expr_all();
}

inline TotalOperator parse_operator(const std::string& text, const VarSpace& sp) {
    parsedetail::Parser p(text, sp);
    return p.parse_op_all();
}

}  // namespace jetops

#endif
