#ifndef FORMSIEVE_IDEALS_HPP
#define FORMSIEVE_IDEALS_HPP

#include <functional>
#include <vector>

#include "formsieve/common.hpp"
#include "formsieve/qfield.hpp"

namespace formsieve {

enum class split_kind { split, inert, ramified };

// Prime ideal of the maximal order of Q(sqrt(d)), identified by the rational
// prime below it and, for split primes, by which square root of d mod 4p the
// ideal corresponds to (root 0 = the smaller canonical b, root 1 = 2p - b).
struct prime_ideal {
    i64 p = 0;
    split_kind kind = split_kind::split;
    int root = 0;       // 0 or 1 when split; always 0 for inert/ramified
    i64 norm = 0;       // p for split/ramified, p^2 for inert
    int cls = 0;        // form-class index in the parent class_group

    friend bool operator==(const prime_ideal&, const prime_ideal&) = default;
};

// Total order on prime ideals.  Norms only tie between the two conjugates
// over the same split prime, so the two orderings coincide on actual prime
// lists; both are provided because downstream bounds must not depend on the
// choice, and tests exercise both.
enum class prime_order { by_p_then_root, by_root_then_p };

inline bool prime_less(const prime_ideal& x, const prime_ideal& y, prime_order o) {
    if (x.norm != y.norm) return x.norm < y.norm;
    if (o == prime_order::by_p_then_root) {
        if (x.p != y.p) return x.p < y.p;
        return x.root < y.root;
    }
    if (x.root != y.root) return x.root < y.root;
    return x.p < y.p;
}

split_kind split_type(i64 d, i64 p);

// Smaller square root of a mod p (odd prime, a a residue); 0 <= r <= p/2.
i64 sqrt_mod(i64 a, i64 p);

// The prime ideal above p, with its form class computed by reducing
// (p, b, (b^2-d)/4p) for the canonical root-b.  Requires fundamental d.
prime_ideal prime_above(const class_group& G, i64 p, int root);

// All prime ideals of norm <= X, sorted by `ord`.
std::vector<prime_ideal> primes_up_to(const class_group& G, i64 X,
                                      prime_order ord = prime_order::by_p_then_root);

// Integral ideal in factored form.  factors hold distinct primes with
// exponents >= 1, sorted ascending by (norm, p, root); norm and class are
// maintained alongside.
struct ideal_fact {
    std::vector<std::pair<prime_ideal, int>> factors;
    i64 norm = 1;
    int cls = 0;

    bool is_unit() const { return factors.empty(); }
    bool squarefree() const {
        for (auto& [q, e] : factors)
            if (e > 1) return false;
        return true;
    }
    int num_primes() const { return static_cast<int>(factors.size()); }
    bool divisible_by(const prime_ideal& q) const {
        for (auto& [r, e] : factors)
            if (r.p == q.p && r.root == q.root) return true;
        return false;
    }
};

// 1 on the unit, (-1)^r on squarefree with r primes, 0 otherwise.
int mobius(const ideal_fact& n);

// All divisors of n (exponent sub-vectors), classes via the group table.
std::vector<ideal_fact> divisors(const class_group& G, const ideal_fact& n);

// Depth-first multiplicative enumeration of all ideals of norm <= X built
// from `primes` (which must be sorted ascending by norm and contain every
// prime of norm <= X).  Visits each ideal exactly once, unit included.
template <typename Fn>
void for_each_ideal(const class_group& G, const std::vector<prime_ideal>& primes,
                    i64 X, Fn&& fn) {
    ideal_fact cur;
    fn(static_cast<const ideal_fact&>(cur));
    if (X < 2) return;
    const size_t np = primes.size();
    // recursion depth is at most log2(X)
    auto rec = [&](auto&& self, size_t start) -> void {
        for (size_t i = start; i < np; ++i) {
            const prime_ideal& q = primes[i];
            if (q.norm > X / cur.norm) break;
            i64 saved_norm = cur.norm;
            int saved_cls = cur.cls;
            cur.factors.push_back({q, 0});
            while (cur.norm <= X / q.norm) {
                cur.norm *= q.norm;
                cur.cls = G.mul(cur.cls, q.cls);
                cur.factors.back().second += 1;
                fn(static_cast<const ideal_fact&>(cur));
                self(self, i + 1);
            }
            cur.factors.pop_back();
            cur.norm = saved_norm;
            cur.cls = saved_cls;
        }
    };
    rec(rec, 0);
}

// Materializing wrapper; throws errc::too_large past `cap` ideals.
std::vector<ideal_fact> enumerate_ideals(const class_group& G, i64 X,
                                         i64 cap = 20'000'000);

} // namespace formsieve

#endif
