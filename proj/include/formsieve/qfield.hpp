#ifndef FORMSIEVE_QFIELD_HPP
#define FORMSIEVE_QFIELD_HPP

#include <iosfwd>
#include <vector>

#include "formsieve/common.hpp"

namespace formsieve {

// Integral binary quadratic form a x^2 + b xy + c y^2.  Throughout we work
// with positive definite forms (a > 0, discriminant < 0); primitivity
// (gcd(a,b,c) = 1) is checked at the operation entry points, not stored.
struct quad_form {
    i64 a = 0, b = 0, c = 0;

    i64 disc() const { return b * b - 4 * a * c; }
    i64 eval(i64 x, i64 y) const { return a * x * x + b * x * y + c * y * y; }

    friend bool operator==(const quad_form&, const quad_form&) = default;
    // lexicographic on (a, b, c); used as the canonical class-list order
    friend auto operator<=>(const quad_form&, const quad_form&) = default;
};

std::ostream& operator<<(std::ostream&, const quad_form&);

// Kronecker symbol (a/n), totally defined (n may be 0, negative, even).
int kronecker(i64 a, i64 n);

i64 gcd3(i64 a, i64 b, i64 c);

// D < 0 and D = 0,1 mod 4.
bool is_discriminant(i64 d);
// Field discriminant: D = 1 mod 4 squarefree, or D = 4m with m = 2,3 mod 4
// squarefree.
bool is_fundamental(i64 d);

// Throws errc::invalid_form unless f is primitive and positive definite.
void check_form(const quad_form& f);

// Gauss reduction.  Result satisfies |b| <= a <= c with b >= 0 whenever
// |b| = a or a = c; it is the unique reduced representative of f's class.
quad_form reduce(quad_form f);

bool is_reduced(const quad_form& f);

// Dirichlet composition of two primitive forms of the same discriminant,
// returned reduced.  Throws errc::mismatch on discriminant disagreement.
quad_form compose(const quad_form& f, const quad_form& g);

// The class of forms equivalent to (1, b0, ...), b0 = D mod 2.
quad_form principal_form(i64 d);

struct class_group {
    i64 d = 0;                      // discriminant
    std::vector<quad_form> forms;   // all reduced forms, sorted by (a,b,c)
    std::vector<int> table;         // h*h composition table, row-major
    std::vector<i64> structure;     // invariant factors d1 | d2 | ... , product = h
    std::vector<int> generators;    // indices into forms, one per invariant factor

    int h() const { return static_cast<int>(forms.size()); }
    int mul(int i, int j) const { return table[static_cast<size_t>(i) * forms.size() + j]; }
    int identity() const { return 0; } // principal form sorts first (a = 1 is unique)
    int inverse(int i) const;
    int power(int i, i64 e) const;
    i64 order_of(int i) const;
    // index of the reduced form equal to reduce(f); errc::mismatch if the
    // discriminant differs
    int index_of(const quad_form& f) const;

    bool fundamental() const { return is_fundamental(d); }
};

// Enumerate all reduced forms of discriminant d, build the composition
// table and the invariant-factor decomposition.  d must be a negative
// discriminant; |d| above the guard limit throws errc::too_large.
class_group make_class_group(i64 d, i64 max_abs_disc = 100'000'000);

} // namespace formsieve

#endif
