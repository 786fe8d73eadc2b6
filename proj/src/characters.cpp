#include "formsieve/characters.hpp"

#include <algorithm>
#include <cmath>

namespace formsieve {

std::vector<real_character> real_characters(const class_group& G) {
    const int h = G.h();
    // subgroup of squares
    std::vector<char> is_sq(static_cast<size_t>(h), 0);
    for (int x = 0; x < h; ++x) is_sq[static_cast<size_t>(G.mul(x, x))] = 1;
    std::vector<int> sq;
    for (int x = 0; x < h; ++x)
        if (is_sq[static_cast<size_t>(x)]) sq.push_back(x);

    // coset of x mod squares: smallest member index is the label
    std::vector<int> coset(static_cast<size_t>(h), -1);
    std::vector<int> reps;
    for (int x = 0; x < h; ++x) {
        if (coset[static_cast<size_t>(x)] >= 0) continue;
        int label = static_cast<int>(reps.size());
        reps.push_back(x);
        for (int s : sq) coset[static_cast<size_t>(G.mul(x, s))] = label;
    }

    // Cl/Cl^2 is an F2 space; find a basis greedily and record coordinates.
    // span: coset label -> coordinate mask over the basis found so far
    std::vector<int> coord(reps.size(), -1);
    coord[static_cast<size_t>(coset[static_cast<size_t>(G.identity())])] = 0;
    std::vector<int> basis; // class indices
    for (size_t r = 0; r < reps.size(); ++r) {
        if (coord[r] >= 0) continue;
        int b = reps[r];
        int bit = 1 << basis.size();
        basis.push_back(b);
        std::vector<int> old = coord;
        for (size_t q = 0; q < reps.size(); ++q) {
            if (old[q] < 0) continue;
            int lbl = coset[static_cast<size_t>(G.mul(reps[q], b))];
            coord[static_cast<size_t>(lbl)] = old[q] | bit;
        }
    }
    const int t = static_cast<int>(basis.size());

    std::vector<real_character> out;
    for (int sigma = 0; sigma < (1 << t); ++sigma) {
        real_character psi;
        psi.kind = sigma == 0 ? real_character::kind_t::principal
                              : real_character::kind_t::quadratic;
        psi.values.resize(static_cast<size_t>(h));
        for (int x = 0; x < h; ++x) {
            int m = coord[static_cast<size_t>(coset[static_cast<size_t>(x)])] & sigma;
            psi.values[static_cast<size_t>(x)] =
                static_cast<std::int8_t>(__builtin_popcount(static_cast<unsigned>(m)) % 2 ? -1 : 1);
        }
        out.push_back(std::move(psi));
    }
    return out;
}

i64 lambda(const real_character& psi, const ideal_fact& n) {
    if (psi.principal()) return 1;
    i64 out = 1;
    for (auto& [q, e] : n.factors) {
        if (psi(q.cls) == 1) out *= e + 1;
        else if (e % 2 == 1) return 0;
        // psi(q) = -1 with even exponent contributes a factor 1
    }
    return out;
}

i64 rho(const real_character& psi, const ideal_fact& n) {
    if (!n.squarefree()) return 0;
    return lambda(psi, n);
}

double kappa_K(const class_group& G) {
    int w = (G.d == -3) ? 6 : (G.d == -4) ? 4 : 2;
    return 2.0 * M_PI * G.h() / (w * std::sqrt(static_cast<double>(-G.d)));
}

namespace {

// one enumeration pass accumulating sum of lambda-type weights against a
// family of exponential kernels
template <typename Weight>
void smoothed_pass(const class_group& G, i64 cutoff, Weight&& w) {
    auto primes = primes_up_to(G, cutoff);
    for_each_ideal(G, primes, cutoff, std::forward<Weight>(w));
}

} // namespace

smoothed_value l_one(const real_character& psi, const class_group& G, i64 cutoff) {
    require(!psi.principal(), errc::wrong_kind,
            "L(1,psi) is for quadratic characters; the principal residue is kappa_K");
    require(cutoff >= 1000, errc::too_small, "cutoff too small for L(1,psi)");
    const double y1 = cutoff / 40.0, y2 = y1 / 2;
    kahan_sum s1, s2;
    smoothed_pass(G, cutoff, [&](const ideal_fact& n) {
        double base = psi.on(n) / static_cast<double>(n.norm);
        s1.add(base * std::exp(-n.norm / y1));
        s2.add(base * std::exp(-n.norm / y2));
    });
    // error model c/y: the y1/y2 = 2 Richardson step cancels c
    smoothed_value out;
    out.value = 2 * s1.value() - s2.value();
    out.tail = std::abs(s1.value() - s2.value());
    out.cutoff = cutoff;
    return out;
}

double kappa_psi(const real_character& psi, const class_group& G, i64 cutoff) {
    if (psi.principal()) return kappa_K(G);
    return kappa_K(G) * l_one(psi, G, cutoff).value;
}

euler_products local_densities(const real_character& psi, const class_group& G,
                               i64 cutoff) {
    require(cutoff >= 100, errc::too_small, "cutoff too small for local densities");
    euler_products out;
    double prod = 1.0;
    for (const prime_ideal& q : primes_up_to(G, cutoff)) {
        double N = static_cast<double>(q.norm);
        if (psi.principal() || psi(q.cls) == -1) {
            prod *= 1.0 - 1.0 / (N * N);
        } else {
            prod *= 1.0 - 3.0 / (N * N) + 2.0 / (N * N * N);
        }
    }
    if (psi.principal()) {
        out.b_psi = prod;
        out.delta_psi = prod;
    } else {
        out.b_psi = 2.0 * prod;
        out.delta_psi = l_one(psi, G, cutoff).value * out.b_psi / 2.0;
    }
    out.tail = out.b_psi * 6.0 / static_cast<double>(cutoff);
    return out;
}

smoothed_value smoothed_lambda_sum(const real_character& psi, const class_group& G,
                                   double beta, double y, i64 cutoff) {
    require(beta > 0 && beta < 1, errc::bad_input, "beta must lie in (0,1)");
    require(y > 0, errc::bad_input, "smoothing scale must be positive");
    require(static_cast<double>(cutoff) >= 40.0 * y, errc::too_small,
            "cutoff below 40y: truncation would dominate");
    kahan_sum s;
    smoothed_pass(G, cutoff, [&](const ideal_fact& n) {
        double lam = static_cast<double>(lambda(psi, n));
        if (lam == 0) return;
        s.add(lam * std::pow(static_cast<double>(n.norm), -beta) *
              std::exp(-n.norm / y));
    });
    smoothed_value out;
    out.value = s.value();
    out.tail = 2.0 * std::pow(static_cast<double>(cutoff), 1.5) *
               std::exp(-static_cast<double>(cutoff) / y);
    out.cutoff = cutoff;
    return out;
}

smoothed_value smoothed_lambda_window(const real_character& psi, const class_group& G,
                                      double y1, double y2, i64 cutoff) {
    require(y1 > 0 && y2 >= 3.0 * y1, errc::bad_window,
            "window needs y2 >= 3*y1");
    require(static_cast<double>(cutoff) >= 40.0 * y2, errc::too_small,
            "cutoff below 40*y2");
    kahan_sum s;
    smoothed_pass(G, cutoff, [&](const ideal_fact& n) {
        double lam = static_cast<double>(lambda(psi, n));
        if (lam == 0) return;
        s.add(lam / static_cast<double>(n.norm) *
              (std::exp(-n.norm / y2) - std::exp(-n.norm / y1)));
    });
    smoothed_value out;
    out.value = s.value();
    out.tail = 2.0 * std::pow(static_cast<double>(cutoff), 0.5) *
               std::exp(-static_cast<double>(cutoff) / y2);
    out.cutoff = cutoff;
    return out;
}

zero_hypothesis beta_from_eta(i64 d, double eta) {
    require(is_discriminant(d), errc::bad_input, "needs a negative discriminant");
    require(eta >= 20.0, errc::hypothesis_violated,
            "eta below 20 leaves the admissible range");
    zero_hypothesis z;
    z.eta = eta;
    z.beta = 1.0 - 1.0 / (eta * std::log(4.0 * static_cast<double>(-d)));
    return z;
}

} // namespace formsieve
