#ifndef JETOPS_EXPONENT_HPP
#define JETOPS_EXPONENT_HPP

#include "jetops/rational.hpp"

#include <compare>
#include <utility>
#include <vector>

namespace jetops {

// Exponent of a kernel factor: an exact rational plus a linear combination
// of parameter symbols with rational coefficients (covers u^p, (.)^(k/2),
// (.)^((k+1)/2) and their derivative-generated shifts).
struct Exponent {
    Rat c;
    std::vector<std::pair<int, Rat>> params;  // sorted by param id, coeffs nonzero

    Exponent() : c(0) {}
    explicit Exponent(Rat r) : c(std::move(r)) {}
    explicit Exponent(long n) : c(n) {}

    static Exponent param(int id, Rat coef = Rat(1)) {
        Exponent e;
        if (coef != 0) e.params.push_back({id, std::move(coef)});
        return e;
    }

    bool is_zero() const { return c == 0 && params.empty(); }
    bool is_rational() const { return params.empty(); }
    bool is_integer() const { return params.empty() && rat_is_int(c); }
    long as_integer() const { return rat_to_long(c); }

    Exponent& operator+=(const Exponent& o) {
        c += o.c;
        for (auto& [id, co] : o.params) add_param(id, co);
        return *this;
    }
    Exponent& operator-=(const Exponent& o) {
        c -= o.c;
        for (auto& [id, co] : o.params) add_param(id, -co);
        return *this;
    }
    friend Exponent operator+(Exponent a, const Exponent& b) { return a += b; }
    friend Exponent operator-(Exponent a, const Exponent& b) { return a -= b; }

    Exponent scaled(const Rat& s) const {
        Exponent e;
        e.c = c * s;
        if (s != 0)
            for (auto& [id, co] : params) e.params.push_back({id, co * s});
        return e;
    }

    friend bool operator==(const Exponent& a, const Exponent& b) {
        return a.c == b.c && a.params == b.params;
    }
    friend std::strong_ordering operator<=>(const Exponent& a, const Exponent& b) {
        std::size_t n = std::min(a.params.size(), b.params.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (a.params[i].first != b.params[i].first)
                return a.params[i].first <=> b.params[i].first;
            if (a.params[i].second != b.params[i].second)
                return a.params[i].second < b.params[i].second ? std::strong_ordering::less
                                                               : std::strong_ordering::greater;
        }
        if (a.params.size() != b.params.size()) return a.params.size() <=> b.params.size();
        if (a.c != b.c) return a.c < b.c ? std::strong_ordering::less : std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    std::size_t hash() const {
        std::size_t h = rat_hash(c);
        for (auto& [id, co] : params) h = h * 1099511628211ull + (rat_hash(co) ^ (std::size_t)id);
        return h;
    }

    // substitute a parameter by a rational value
    Exponent subst_param(int id, const Rat& val) const {
        Exponent e;
        e.c = c;
        for (auto& [pid, co] : params) {
            if (pid == id)
                e.c += co * val;
            else
                e.params.push_back({pid, co});
        }
        return e;
    }

  private:
    void add_param(int id, const Rat& co) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (params[i].first == id) {
                params[i].second += co;
                if (params[i].second == 0) params.erase(params.begin() + i);
                return;
            }
            if (params[i].first > id) {
                if (co != 0) params.insert(params.begin() + i, {id, co});
                return;
            }
        }
        if (co != 0) params.push_back({id, co});
    }
};

}  // namespace jetops

#endif
