#include "formsieve/qfield.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>

namespace formsieve {

std::ostream& operator<<(std::ostream& os, const quad_form& f) {
    return os << "(" << f.a << "," << f.b << "," << f.c << ")";
}

i64 gcd3(i64 a, i64 b, i64 c) {
    return std::gcd(std::gcd(std::abs(a), std::abs(b)), std::abs(c));
}

// ---------------------------------------------------------------------------
// Kronecker symbol.  Jacobi core with the usual extensions: (a/2) via a mod 8,
// (a/-1) = sign of a, (a/0) = [|a| = 1].
int kronecker(i64 a, i64 n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    int result = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) result = -result;
    }
    while (n % 2 == 0) {
        n /= 2;
        if (a % 2 == 0) return 0;
        i64 r = ((a % 8) + 8) % 8;
        if (r == 3 || r == 5) result = -result;
    }
    // n odd and positive: Jacobi symbol, periodic in a mod n
    a %= n;
    if (a < 0) a += n;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            i64 r = n % 8;
            if (r == 3 || r == 5) result = -result;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) result = -result;
        a %= n;
    }
    return n == 1 ? result : 0;
}

bool is_discriminant(i64 d) {
    if (d >= 0) return false;
    i64 r = ((d % 4) + 4) % 4;
    return r == 0 || r == 1;
}

namespace {

bool squarefree(i64 n) {
    n = std::abs(n);
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            n /= p;
            if (n % p == 0) return false;
        }
    }
    return true;
}

} // namespace

bool is_fundamental(i64 d) {
    if (!is_discriminant(d)) return false;
    i64 r = ((d % 4) + 4) % 4;
    if (r == 1) return squarefree(d);
    i64 m = d / 4;
    i64 rm = ((m % 4) + 4) % 4;
    return (rm == 2 || rm == 3) && squarefree(m);
}

void check_form(const quad_form& f) {
    require(f.a > 0 && f.c > 0, errc::invalid_form,
            "form is not positive definite");
    require(f.disc() < 0, errc::invalid_form, "form has nonnegative discriminant");
    require(gcd3(f.a, f.b, f.c) == 1, errc::invalid_form, "form is not primitive");
}

bool is_reduced(const quad_form& f) {
    if (!(std::abs(f.b) <= f.a && f.a <= f.c)) return false;
    if (f.b < 0 && (std::abs(f.b) == f.a || f.a == f.c)) return false;
    return true;
}

quad_form reduce(quad_form f) {
    check_form(f);
    const i64 d = f.disc();
    while (true) {
        // normalize: bring b into (-a, a], recompute c from the discriminant
        i64 twoa = 2 * f.a;
        i64 r = f.b % twoa;
        if (r > f.a) r -= twoa;
        if (r <= -f.a) r += twoa;
        f.b = r;
        f.c = static_cast<i64>((static_cast<i128>(f.b) * f.b - d) / (4 * f.a));
        if (f.a > f.c) {
            f = {f.c, -f.b, f.a};
            continue;
        }
        if (f.a == f.c && f.b < 0) f.b = -f.b;
        break;
    }
    return f;
}

quad_form principal_form(i64 d) {
    require(is_discriminant(d), errc::bad_input, "not a negative discriminant");
    i64 b0 = (((d % 2) + 2) % 2);
    return {1, b0, (b0 * b0 - d) / 4};
}

namespace {

// g = gcd(a,b) = x a + y b
i64 ext_gcd(i64 a, i64 b, i64& x, i64& y) {
    i64 x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        i64 q = a / b;
        a -= q * b;   std::swap(a, b);
        x0 -= q * x1; std::swap(x0, x1);
        y0 -= q * y1; std::swap(y0, y1);
    }
    if (a < 0) { a = -a; x0 = -x0; y0 = -y0; }
    x = x0; y = y0;
    return a;
}

} // namespace

quad_form compose(const quad_form& f, const quad_form& g) {
    require(f.disc() == g.disc(), errc::mismatch,
            "cannot compose forms of different discriminants");
    // Reduce first: composition is a class operation and small coefficients
    // keep every intermediate below 2^63 even at the discriminant guard.
    quad_form u = reduce(f), v = reduce(g);
    const i64 d = u.disc();

    i64 a1 = u.a, b1 = u.b, a2 = v.a, b2 = v.b;
    i64 x, w;
    i64 d1 = ext_gcd(a1, a2, x, w); // x*a1 + w*a2 = d1
    i128 b3 = static_cast<i128>(x) * a1 * (b2 - b1);
    i128 a3 = static_cast<i128>(a1) * a2;
    if (d1 != 1) {
        i64 s = (b1 + b2) / 2; // b1, b2 share the parity of d
        i64 x2, w2;
        i64 dd = ext_gcd(d1, s, x2, w2); // x2*d1 + w2*s = dd
        b3 = (b3 * x2 + static_cast<i128>(w2) * ((d - b1 * b1) / 2)) / dd;
        a3 /= static_cast<i128>(dd) * dd;
    }
    i64 a3i = static_cast<i64>(a3);
    i128 m = static_cast<i128>(2) * a3i;
    b3 = (b3 + b1) % m;
    if (b3 < 0) b3 += m;
    i64 b3i = static_cast<i64>(b3);
    i64 c3i = static_cast<i64>((static_cast<i128>(b3i) * b3i - d) / (4 * a3i));
    return reduce({a3i, b3i, c3i});
}

// ---------------------------------------------------------------------------
// class_group

int class_group::index_of(const quad_form& f) const {
    require(f.disc() == d, errc::mismatch, "form has a different discriminant");
    quad_form r = reduce(f);
    auto it = std::lower_bound(forms.begin(), forms.end(), r);
    require(it != forms.end() && *it == r, errc::inconsistent,
            "reduced form missing from class list");
    return static_cast<int>(it - forms.begin());
}

int class_group::inverse(int i) const {
    // opposite form (a, -b, c), reduced
    quad_form f = forms[static_cast<size_t>(i)];
    return index_of({f.a, -f.b, f.c});
}

int class_group::power(int i, i64 e) const {
    int acc = identity();
    if (e < 0) { i = inverse(i); e = -e; }
    int base = i;
    while (e > 0) {
        if (e & 1) acc = mul(acc, base);
        base = mul(base, base);
        e >>= 1;
    }
    return acc;
}

i64 class_group::order_of(int i) const {
    i64 k = 1;
    int x = i;
    while (x != identity()) {
        x = mul(x, i);
        ++k;
    }
    return k;
}

namespace {

std::vector<quad_form> reduced_forms(i64 d) {
    std::vector<quad_form> out;
    i64 absd = -d;
    i64 parity = ((d % 2) + 2) % 2;
    for (i64 b = parity; 3 * b * b <= absd; b += 2) {
        i64 m = (b * b + absd) / 4; // = a*c
        for (i64 a = std::max<i64>(b, 1); a * a <= m; ++a) {
            if (m % a != 0) continue;
            i64 c = m / a;
            if (gcd3(a, b, c) != 1) continue;
            out.push_back({a, b, c});
            // (a,-b,c) is reduced only when neither boundary case applies
            if (b > 0 && b < a && a < c) out.push_back({a, -b, c});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Invariant factors of an abelian group given by its multiplication table.
// For each prime p | h the counts N_k = #{x : x^(p^k) = e} = p^(sum min(k,e_i))
// recover the p-part exponents e_i by partition conjugation.
std::vector<i64> invariant_factors(const class_group& g) {
    i64 h = g.h();
    std::vector<std::pair<i64, std::vector<int>>> parts; // p -> exponents, descending
    i64 rest = h;
    for (i64 p = 2; p * p <= rest; ++p) {
        if (rest % p == 0) {
            while (rest % p == 0) rest /= p;
            parts.push_back({p, {}});
        }
    }
    if (rest > 1) parts.push_back({rest, {}});
    for (auto& [p, es] : parts) {
        std::vector<i64> dlog; // dlog[k-1] = #{i : e_i >= k}
        i64 prev = 0;
        for (i64 pk = p;; pk *= p) {
            i64 cnt = 0;
            for (int x = 0; x < g.h(); ++x)
                if (g.power(x, pk) == g.identity()) ++cnt;
            i64 lg = 0;
            while (cnt > 1) { cnt /= p; ++lg; }
            i64 diff = lg - prev;
            if (diff == 0) break;
            dlog.push_back(diff);
            prev = lg;
            if (pk > h) break;
        }
        for (i64 i = 1; !dlog.empty() && i <= dlog[0]; ++i) {
            int e = 0;
            for (i64 dk : dlog)
                if (dk >= i) ++e;
            es.push_back(e);
        }
    }
    size_t t = 0;
    for (auto& [p, es] : parts) t = std::max(t, es.size());
    std::vector<i64> inv(t, 1);
    for (auto& [p, es] : parts)
        for (size_t j = 0; j < es.size(); ++j) {
            i64 q = 1;
            for (int k = 0; k < es[j]; ++k) q *= p;
            inv[j] *= q; // es descending -> inv descending
        }
    std::reverse(inv.begin(), inv.end()); // ascending divisibility chain
    return inv;
}

// Greedy generating set: repeatedly adjoin an element of maximal order in the
// quotient by what is generated so far.  For abelian groups this yields one
// generator per invariant factor.
std::vector<int> generating_set(const class_group& g) {
    int h = g.h();
    std::vector<int> gens;
    std::vector<char> in(static_cast<size_t>(h), 0);
    in[static_cast<size_t>(g.identity())] = 1;
    std::vector<int> members{g.identity()};
    while (static_cast<int>(members.size()) < h) {
        int best = -1;
        i64 best_ord = 0;
        for (int x = 0; x < h; ++x) {
            if (in[static_cast<size_t>(x)]) continue;
            i64 k = 1;
            int y = x;
            while (!in[static_cast<size_t>(y)]) { y = g.mul(y, x); ++k; }
            if (k > best_ord) { best_ord = k; best = x; }
        }
        gens.push_back(best);
        std::vector<int> grown = members;
        int pw = best;
        for (i64 j = 1; j < best_ord; ++j) {
            for (int s : members) grown.push_back(g.mul(s, pw));
            pw = g.mul(pw, best);
        }
        members = std::move(grown);
        for (int m : members) in[static_cast<size_t>(m)] = 1;
    }
    return gens;
}

} // namespace

class_group make_class_group(i64 d, i64 max_abs_disc) {
    require(is_discriminant(d), errc::bad_input,
            "class group needs a negative discriminant = 0,1 mod 4");
    require(-d <= max_abs_disc, errc::too_large,
            "discriminant magnitude above the work guard");
    class_group g;
    g.d = d;
    g.forms = reduced_forms(d);
    int h = g.h();
    g.table.assign(static_cast<size_t>(h) * h, -1);
    for (int i = 0; i < h; ++i)
        for (int j = i; j < h; ++j) {
            quad_form p = compose(g.forms[static_cast<size_t>(i)],
                                  g.forms[static_cast<size_t>(j)]);
            auto it = std::lower_bound(g.forms.begin(), g.forms.end(), p);
            require(it != g.forms.end() && *it == p, errc::inconsistent,
                    "composition left the reduced class list");
            int k = static_cast<int>(it - g.forms.begin());
            g.table[static_cast<size_t>(i) * h + j] = k;
            g.table[static_cast<size_t>(j) * h + i] = k;
        }
    g.structure = invariant_factors(g);
    g.generators = generating_set(g);
    return g;
}

} // namespace formsieve
