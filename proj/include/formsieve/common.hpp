#ifndef FORMSIEVE_COMMON_HPP
#define FORMSIEVE_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace formsieve {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

// Every precondition failure surfaces as one of these codes so callers (and
// the CLI exit-code mapping) can react without string matching.
enum class errc {
    invalid_form,       // non-primitive / indefinite / inconsistent (a,b,c)
    not_fundamental,    // pipeline requires a fundamental discriminant
    mismatch,           // operands live in different groups / discriminants
    too_large,          // work or memory guard tripped
    too_small,          // a cutoff is too small for the requested accuracy
    inconsistent,       // internal cross-check failed (cache, group table)
    wrong_kind,         // op needs a quadratic (or principal) character
    unstable,           // numerical estimate failed its stability check
    bad_window,         // malformed smoothing window (y2 < 3*y1 etc.)
    hypothesis_violated,// hard parameter constraint (eta >= 20) violated
    non_residue_class,  // target class has psi(C) = -1
    not_found_below,    // bounded search exhausted
    bad_input,          // malformed user input (CLI)
    io_error,           // cache / file trouble
};

struct error : std::runtime_error {
    errc code;
    error(errc c, const std::string& what) : std::runtime_error(what), code(c) {}
};

[[noreturn]] inline void fail(errc c, const std::string& what) { throw error(c, what); }

inline void require(bool ok, errc c, const std::string& what) {
    if (!ok) fail(c, what);
}

// Neumaier-compensated accumulator.  All the long statistical sums in the
// sieve run through this; plain doubles lose ~1e-12 relative accuracy on the
// 10^7-term sums and several oracle tests pin 1e-9 agreement.
struct kahan_sum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x)) c += (s - t) + x;
        else                            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
    kahan_sum& operator+=(double x) { add(x); return *this; }
};

} // namespace formsieve

#endif
