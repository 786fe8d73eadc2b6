#ifndef FORMSIEVE_CHARACTERS_HPP
#define FORMSIEVE_CHARACTERS_HPP

#include <cstdint>
#include <vector>

#include "formsieve/common.hpp"
#include "formsieve/ideals.hpp"
#include "formsieve/qfield.hpp"

namespace formsieve {

// Real character of the class group: a homomorphism Cl -> {+-1}, evaluated
// on ideals through their class.  With trivial conductor nothing maps to 0.
struct real_character {
    enum class kind_t { principal, quadratic };
    kind_t kind = kind_t::principal;
    std::vector<std::int8_t> values; // indexed by class

    int operator()(int cls) const { return values[static_cast<size_t>(cls)]; }
    int on(const ideal_fact& n) const { return (*this)(n.cls); }
    bool principal() const { return kind == kind_t::principal; }
};

// All 2^t real characters (t = number of even invariant factors), principal
// first, then in a fixed binary-counting order over a deterministic basis of
// Cl / Cl^2.
std::vector<real_character> real_characters(const class_group& G);

// Divisor-sum weight: for quadratic psi, lambda(n) = sum over divisors m | n
// of psi(m); for the principal character lambda = 1 identically.  Both are
// multiplicative and nonnegative.
i64 lambda(const real_character& psi, const ideal_fact& n);

// rho = mu^2 * lambda: the squarefree restriction.
i64 rho(const real_character& psi, const ideal_fact& n);

// Residue of the Dedekind zeta function: 2*pi*h / (w * sqrt|d|).
double kappa_K(const class_group& G);

struct smoothed_value {
    double value = 0;
    double tail = 0;  // heuristic truncation-error proxy (not a rigorous bound)
    i64 cutoff = 0;
};

// L(1, psi) for quadratic psi: smoothed sums at two scales y and y/2 with a
// Richardson step to kill the O(1/y) term.  tail reports the two-scale gap.
smoothed_value l_one(const real_character& psi, const class_group& G, i64 cutoff);

// Residue of F_psi at s = 1: kappa_K * L(1,psi) for quadratic psi, kappa_K
// for the principal character (trivial conductor).
double kappa_psi(const real_character& psi, const class_group& G, i64 cutoff);

struct euler_products {
    double b_psi = 0;     // local-density product (includes the leading 2 in
                          // the quadratic case)
    double delta_psi = 0; // L(1,psi) * b_psi / 2 quadratic; b_psi principal
    double tail = 0;
};

euler_products local_densities(const real_character& psi, const class_group& G,
                               i64 cutoff);

// sum over ideals of lambda(n) * Nn^-beta * exp(-Nn/y); cutoff >= 40y.
smoothed_value smoothed_lambda_sum(const real_character& psi, const class_group& G,
                                   double beta, double y, i64 cutoff);

// sum of lambda(n)/Nn * (exp(-Nn/y2) - exp(-Nn/y1)), y2 >= 3*y1: every term
// is nonnegative, and the total is comparable to kappa_psi * log(y2/y1).
smoothed_value smoothed_lambda_window(const real_character& psi, const class_group& G,
                                      double y1, double y2, i64 cutoff);

struct zero_hypothesis {
    double eta = 0;
    double beta = 0; // 1 - 1/(eta * log(4|d|))
};

// eta >= 20 enforced (errc::hypothesis_violated below that).
zero_hypothesis beta_from_eta(i64 d, double eta);

} // namespace formsieve

#endif
