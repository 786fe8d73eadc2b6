#ifndef FORMSIEVE_SIEVE_HPP
#define FORMSIEVE_SIEVE_HPP

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "formsieve/common.hpp"
#include "formsieve/ideals.hpp"

namespace formsieve {

// Weighted sequence of integral ideals; one entry per ideal, weights >= 0.
struct sieve_sequence {
    std::vector<std::pair<ideal_fact, double>> entries;

    double total() const {
        kahan_sum s;
        for (auto& [n, a] : entries) s += a;
        return s.value();
    }
};

// Density model for the sifting set: g(p) approximates the weight fraction
// of the sequence that p divides, X the expected total mass.  g must land
// in [0,1) on every sifting prime (checked at use; errc::bad_input).
struct density_model {
    std::function<double(const prime_ideal&)> g;
    double X = 1.0;
};

// Truncation parameters.  z bounds the sifting range (primes of norm < z),
// level is the support bound D for the combinatorial weights, ordering fixes
// how equal-norm conjugate primes are ranked.  All downstream identities are
// guaranteed for z <= level (outside that regime the weight-support cut
// N(d) < level can clip single-prime terms the bounds still need).
struct sieve_params {
    double z = 2.0;
    double level = 1.0;
    prime_order ordering = prime_order::by_p_then_root;

    // log(level)/log(z); never cached, so callers can tweak fields freely.
    double tau() const {
        require(z >= 2.0 && level >= 1.0, errc::bad_input, "sieve_params: need z >= 2 and level >= 1");
        return std::log(level) / std::log(z);
    }
};

// Canonical key for a squarefree product of sifting primes: (p, root) pairs
// sorted ascending.  root disambiguates conjugates; inert/ramified use 0.
using divisor_key = std::vector<std::pair<i64, int>>;

// Sifted sum S(A, z): total weight of entries not divisible by any prime of
// P with norm < z.  Direct coprimality scan.
double S_direct(const sieve_sequence& A, const std::vector<prime_ideal>& P, double z);

// Same sum via inclusion-exclusion: sum over squarefree d | P(z) of
// mobius(d) * |A_d|, where |A_d| is the weight of the entries d divides.
// Deliberately shares no code path with S_direct.
double S_mobius(const sieve_sequence& A, const std::vector<prime_ideal>& P, double z);

// Truncated inclusion-exclusion weights lambda(d) in {-1,0,+1}, upper
// (sign = +1) or lower (sign = -1) variant.  d ranges over squarefree
// products p1 > p2 > ... > pl of sifting primes below z, kept while
// N(p1...pm) * N(pm) < level at every odd (upper) resp. even (lower) m,
// and N(d) < level overall; the unit carries weight +1 in both.  Only the
// surviving divisors appear in the map, with value mobius(d).
std::map<divisor_key, int> beta_weights(const std::vector<prime_ideal>& P,
                                        const sieve_params& params, int sign);

// Everything one run of the truncated sieve produces.  S_terms / V_terms
// hold the Buchstab correction sums S_n resp. V_n indexed by n-1; both are
// nonnegative, and V_n = 0 for n <= tau - 1.
struct fl_report {
    double S = 0;        // S(A, z), direct route
    double S_check = 0;  // S(A, z), Moebius route
    double S_plus = 0, S_minus = 0;   // truncated upper/lower sums
    double V = 0;                     // V(z) = prod (1 - g(p)), norm < z
    double V_plus = 0, V_minus = 0;   // truncated density sums
    double R_plus = 0, R_minus = 0;   // remainders: S_pm = X*V_pm + R_pm
    std::vector<double> S_terms;      // S_1, S_2, ...
    std::vector<double> V_terms;      // V_1, V_2, ...
    double tau = 0;
    double C_used = 0;   // dimension constant fed to the E0/E1 bounds
    double E0 = 0, E1 = 0;
    double X = 0;
    bool sandwich_ok = false;   // S_minus <= S <= S_plus
    bool buchstab_ok = false;   // all four exact identities at 1e-9
    bool fl_ok = false;         // X V(z)(1-E0) + R_minus <= S <= X V(z)(1+E1) + R_plus
};

// Truncated sums and remainders in one pass: S_pm = sum lambda_pm(d) |A_d|,
// V_pm = sum lambda_pm(d) g(d), R_pm = sum lambda_pm(d) (|A_d| - g(d) X).
// The three are accumulated per divisor, so S_pm = X V_pm + R_pm holds to
// rounding by construction.
struct bounds_result {
    double S_plus = 0, S_minus = 0;
    double V_plus = 0, V_minus = 0;
    double R_plus = 0, R_minus = 0;
};
bounds_result S_bounds(const sieve_sequence& A, const std::vector<prime_ideal>& P,
                       const sieve_params& params, const density_model& model);

// prod_{norm < z} (1 - g(p)) over the sifting primes.
double V_of_z(const std::vector<prime_ideal>& P, const density_model& model, double z);

// Truncation-error constants of the fundamental lemma, closed form:
//   E1 = (C^2 - 1)/2 - C * sum_{1 <= n < n1, n odd}  (log C)^n / n!
//   E0 = (C^2 + 1)/2 - C * sum_{0 <= n < n0, n even} (log C)^n / n!
// with n1 / n0 the least odd / even integer exceeding tau - 1.  Requires
// C > 1.  Both tend to 0 as tau grows and C stays bounded.
std::pair<double, double> E0_E1(double C, double tau);

// Largest V(w)/V(z) ratio interpretation: prod_{w <= norm < z} (1-g)^{-1}.
double dimension_ratio(const std::vector<prime_ideal>& P, const density_model& model,
                       double w, double z);

// Full consistency run: S both routes, truncated bounds, Buchstab
// decompositions S_pm = S +/- sum S_n and V_pm = V -/+ sum V_n, vanishing
// of V_n below tau - 1, the sandwich, and the two-sided bound with
// C_used = max(dimension ratio over [2, z], 1 + 1e-9).
fl_report buchstab_check(const sieve_sequence& A, const std::vector<prime_ideal>& P,
                         const sieve_params& params, const density_model& model);

} // namespace formsieve

#endif
