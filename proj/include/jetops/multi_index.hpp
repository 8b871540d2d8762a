#ifndef JETOPS_MULTI_INDEX_HPP
#define JETOPS_MULTI_INDEX_HPP

#include "jetops/rational.hpp"

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <vector>

namespace jetops {

// Unordered multiset of differentiation indices, stored as a multiplicity
// vector over the independent variables (or over argument slots for
// function-symbol derivatives).
struct MultiIndex {
    std::vector<int> mult;  // mult[i] = number of occurrences of index i

    MultiIndex() = default;
    explicit MultiIndex(std::size_t n) : mult(n, 0) {}

    int order() const { return std::accumulate(mult.begin(), mult.end(), 0); }
    bool empty() const { return order() == 0; }
    int count(std::size_t i) const { return i < mult.size() ? mult[i] : 0; }

    MultiIndex& bump(std::size_t i, int by = 1) {
        if (mult.size() <= i) mult.resize(i + 1, 0);
        mult[i] += by;
        return *this;
    }

    MultiIndex plus(std::size_t i, int by = 1) const {
        MultiIndex r = *this;
        r.bump(i, by);
        return r;
    }

    // J - K (requires K subset of J)
    MultiIndex minus(const MultiIndex& k) const {
        MultiIndex r = *this;
        for (std::size_t i = 0; i < k.mult.size(); ++i) {
            if (r.count(i) < k.mult[i]) throw std::domain_error("multi-index subtraction underflow");
            r.mult[i] -= k.mult[i];
        }
        return r;
    }

    MultiIndex plus(const MultiIndex& k) const {
        MultiIndex r = *this;
        for (std::size_t i = 0; i < k.mult.size(); ++i) r.bump(i, k.mult[i]);
        return r;
    }

    bool contains(const MultiIndex& k) const {
        for (std::size_t i = 0; i < k.mult.size(); ++i)
            if (count(i) < k.mult[i]) return false;
        return true;
    }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
        std::size_t n = std::max(a.mult.size(), b.mult.size());
        for (std::size_t i = 0; i < n; ++i)
            if (a.count(i) != b.count(i)) return false;
        return true;
    }

    // lexicographic on multiplicities (ties broken by padding with zeros)
    friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
        std::size_t n = std::max(a.mult.size(), b.mult.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (a.count(i) != b.count(i)) return a.count(i) <=> b.count(i);
        }
        return std::strong_ordering::equal;
    }

    std::size_t hash() const {
        std::size_t h = 0x811c9dc5;
        for (std::size_t i = 0; i < mult.size(); ++i) {
            if (mult[i] == 0) continue;
            h ^= (i + 1) * 0x9e3779b9 + static_cast<std::size_t>(mult[i]);
            h *= 16777619u;
        }
        return h;
    }

    // all K with K subset of J, in a deterministic order
    std::vector<MultiIndex> subsets() const {
        std::vector<MultiIndex> out;
        MultiIndex cur(mult.size());
        enumerate(0, cur, out);
        return out;
    }

  private:
    void enumerate(std::size_t i, MultiIndex& cur, std::vector<MultiIndex>& out) const {
        if (i == mult.size()) {
            out.push_back(cur);
            return;
        }
        for (int c = 0; c <= mult[i]; ++c) {
            cur.mult[i] = c;
            enumerate(i + 1, cur, out);
        }
        cur.mult[i] = 0;
    }
};

inline Rat factorial(int n) {
    Rat r(1);
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// binom(J, K) = (#J)! / ((#K)! (#(J/K))!)  componentwise (Appendix convention)
inline Rat multi_binom(const MultiIndex& j, const MultiIndex& k) {
    Rat r(1);
    for (std::size_t i = 0; i < j.mult.size(); ++i) {
        int ji = j.mult[i], ki = k.count(i);
        if (ki > ji) return Rat(0);
        r *= factorial(ji) / (factorial(ki) * factorial(ji - ki));
    }
    return r;
}

}  // namespace jetops

#endif
