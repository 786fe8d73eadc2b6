#ifndef FORMSIEVE_TESTS_REPR_ORACLE_HPP
#define FORMSIEVE_TESTS_REPR_ORACLE_HPP

// Test-only oracle: counts lattice representations n = Q(x,y) directly, with
// no ideal arithmetic involved.  Classical fact used by the tests: for a
// fundamental discriminant the number of ideals of norm n in a class equals
// (lattice representation count of n by that class's reduced form) / w,
// where w counts the units (6 for d = -3, 4 for d = -4, else 2).

#include <vector>

#include "formsieve/qfield.hpp"

namespace formsieve::testing {

struct repr_counts {
    i64 X = 0;
    int w = 2;
    // raw lattice counts, indexed n (0..X) and n*h + cls
    std::vector<i64> per_norm;
    std::vector<i64> per_class;

    i64 raw(i64 n) const { return per_norm[static_cast<size_t>(n)]; }
    i64 raw(i64 n, int cls, int h) const {
        return per_class[static_cast<size_t>(n) * h + cls];
    }
};

int unit_count(i64 d);

repr_counts count_representations(const class_group& G, i64 X);

// (x, y) with Q(x,y) = n, or nullopt-ish flag via return
bool find_representation(const quad_form& Q, i64 n, i64& x, i64& y);

std::vector<char> composite_table(i64 X); // [n] = 1 iff n is 0, 1 or composite

// Least prime represented by Q (all primes, or skipping ramified p | disc),
// -1 if none below `bound`.
i64 least_represented_prime(const quad_form& Q, i64 bound, bool skip_ramified);

} // namespace formsieve::testing

#endif
