#ifndef JETOPS_RATIONAL_HPP
#define JETOPS_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace jetops {

// Exact rational scalar. mpq_class keeps values canonical (gcd-reduced,
// positive denominator) after every arithmetic operation.
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
    if (den == 0) throw std::domain_error("zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline bool rat_is_int(const Rat& r) { return r.get_den() == 1; }

inline long rat_to_long(const Rat& r) {
    if (!rat_is_int(r)) throw std::domain_error("rational is not an integer");
    if (!r.get_num().fits_slong_p()) throw std::overflow_error("rational exceeds long");
    return r.get_num().get_si();
}

inline Rat rat_pow(const Rat& base, long e) {
    if (e == 0) return Rat(1);
    Rat b = base;
    bool inv = e < 0;
    unsigned long n = inv ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
    if (inv) {
        if (b == 0) throw std::domain_error("zero denominator");
        b = Rat(1) / b;
    }
    Rat acc(1);
    while (n) {
        if (n & 1) acc *= b;
        b *= b;
        n >>= 1;
    }
    return acc;
}

// floor of a rational
inline long rat_floor(const Rat& r) {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
    if (!q.fits_slong_p()) throw std::overflow_error("rational exceeds long");
    return q.get_si();
}

inline std::string rat_str(const Rat& r) { return r.get_str(); }

inline double rat_double(const Rat& r) { return r.get_d(); }

inline std::size_t rat_hash(const Rat& r) {
    // cheap but stable: fold limb data of num/den
    auto fold = [](const mpz_class& z) {
        std::size_t h = 1469598103934665603ull;
        auto n = mpz_size(z.get_mpz_t());
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<std::size_t>(mpz_getlimbn(z.get_mpz_t(), i));
            h *= 1099511628211ull;
        }
        if (mpz_sgn(z.get_mpz_t()) < 0) h ^= 0x9e3779b97f4a7c15ull;
        return h;
    };
    return fold(r.get_num()) * 31 + fold(r.get_den());
}

}  // namespace jetops

#endif
