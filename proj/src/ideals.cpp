#include "formsieve/ideals.hpp"

#include <algorithm>

namespace formsieve {

split_kind split_type(i64 d, i64 p) {
    require(is_discriminant(d), errc::bad_input, "split_type needs a discriminant");
    require(p >= 2, errc::bad_input, "split_type needs a prime");
    int k = kronecker(d, p);
    if (k == 1) return split_kind::split;
    if (k == -1) return split_kind::inert;
    return split_kind::ramified;
}

namespace {

i64 mulmod(i64 a, i64 b, i64 m) {
    return static_cast<i64>(static_cast<i128>(a) * b % m);
}

i64 powmod(i64 b, i64 e, i64 m) {
    i64 r = 1 % m;
    b %= m;
    while (e > 0) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

} // namespace

// Tonelli-Shanks, returning the root in [0, p/2] so callers get a
// deterministic choice independent of the internal nonresidue search.
i64 sqrt_mod(i64 a, i64 p) {
    a = ((a % p) + p) % p;
    if (a == 0) return 0;
    require(p % 2 == 1 && p > 2, errc::bad_input, "sqrt_mod needs an odd prime");
    require(powmod(a, (p - 1) / 2, p) == 1, errc::bad_input,
            "sqrt_mod of a nonresidue");
    i64 r;
    if (p % 4 == 3) {
        r = powmod(a, (p + 1) / 4, p);
    } else {
        // write p-1 = q * 2^s with q odd
        i64 q = p - 1, s = 0;
        while (q % 2 == 0) { q /= 2; ++s; }
        i64 z = 2;
        while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
        i64 m = s;
        i64 c = powmod(z, q, p);
        i64 t = powmod(a, q, p);
        r = powmod(a, (q + 1) / 2, p);
        while (t != 1) {
            i64 i = 0, tt = t;
            while (tt != 1) { tt = mulmod(tt, tt, p); ++i; }
            i64 b = powmod(c, i64(1) << (m - i - 1), p);
            m = i;
            c = mulmod(b, b, p);
            t = mulmod(t, c, p);
            r = mulmod(r, b, p);
        }
    }
    return std::min(r, p - r);
}

prime_ideal prime_above(const class_group& G, i64 p, int root) {
    require(G.fundamental(), errc::not_fundamental,
            "prime decomposition needs a fundamental discriminant");
    const i64 d = G.d;
    split_kind kind = split_type(d, p);
    require(root == 0 || (root == 1 && kind == split_kind::split), errc::bad_input,
            "root 1 only distinguishes conjugates of a split prime");

    if (kind == split_kind::inert)
        return {p, kind, 0, p * p, G.identity()};

    // pick b with b^2 = d (mod 4p), 0 <= b < 2p, b = d (mod 2); root 0 takes
    // the smaller solution, root 1 its conjugate 2p - b
    i64 b;
    if (p == 2) {
        if (kind == split_kind::ramified) {
            // fundamental even d: d/4 = 2 or 3 mod 4
            b = (((d % 8) + 8) % 8 == 0) ? 0 : 2;
        } else {
            b = 1; // d = 1 mod 8; conjugate is 3
            if (root == 1) b = 3;
        }
    } else if (kind == split_kind::ramified) {
        b = (d % 2 == 0) ? 0 : p;
    } else {
        i64 r = sqrt_mod(d, p); // smaller root, 1 <= r <= p/2
        i64 cand = (r % 2 == ((d % 2 + 2) % 2)) ? r : r + p; // fix parity
        b = (root == 0) ? cand : 2 * p - cand;
    }
    quad_form f{p, b, static_cast<i64>((static_cast<i128>(b) * b - d) / (4 * p))};
    return {p, kind, root, p, G.index_of(f)};
}

std::vector<prime_ideal> primes_up_to(const class_group& G, i64 X, prime_order ord) {
    require(G.fundamental(), errc::not_fundamental,
            "prime decomposition needs a fundamental discriminant");
    std::vector<prime_ideal> out;
    if (X < 2) return out;
    std::vector<char> composite(static_cast<size_t>(X) + 1, 0);
    for (i64 p = 2; p <= X; ++p) {
        if (composite[static_cast<size_t>(p)]) continue;
        for (i64 q = p * p; q <= X; q += p) composite[static_cast<size_t>(q)] = 1;
        switch (split_type(G.d, p)) {
        case split_kind::split:
            out.push_back(prime_above(G, p, 0));
            out.push_back(prime_above(G, p, 1));
            break;
        case split_kind::ramified:
            out.push_back(prime_above(G, p, 0));
            break;
        case split_kind::inert:
            if (p <= X / p) out.push_back(prime_above(G, p, 0));
            break;
        }
    }
    std::sort(out.begin(), out.end(),
              [ord](const prime_ideal& a, const prime_ideal& b) {
                  return prime_less(a, b, ord);
              });
    return out;
}

int mobius(const ideal_fact& n) {
    if (!n.squarefree()) return 0;
    return n.num_primes() % 2 == 0 ? 1 : -1;
}

std::vector<ideal_fact> divisors(const class_group& G, const ideal_fact& n) {
    std::vector<ideal_fact> out;
    out.push_back({});
    for (auto& [q, e] : n.factors) {
        size_t base = out.size();
        ideal_fact powq;
        for (int j = 1; j <= e; ++j) {
            powq.factors = {{q, j}};
            powq.norm = (j == 1) ? q.norm : powq.norm * q.norm;
            powq.cls = G.power(q.cls, j);
            for (size_t i = 0; i < base; ++i) {
                ideal_fact d = out[i];
                d.factors.push_back({q, j});
                d.norm *= powq.norm;
                d.cls = G.mul(d.cls, powq.cls);
                out.push_back(std::move(d));
            }
        }
    }
    return out;
}

std::vector<ideal_fact> enumerate_ideals(const class_group& G, i64 X, i64 cap) {
    std::vector<ideal_fact> out;
    auto primes = primes_up_to(G, X);
    for_each_ideal(G, primes, X, [&](const ideal_fact& n) {
        require(static_cast<i64>(out.size()) < cap, errc::too_large,
                "ideal enumeration exceeded the work guard");
        out.push_back(n);
    });
    return out;
}

} // namespace formsieve
