#include "formsieve/sieve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace formsieve {

namespace {

constexpr double kRelTol = 1e-9;
constexpr i64 kNodeCap = 20'000'000;
constexpr i64 kSubsetCap = 50'000'000;
constexpr size_t kMapCap = 5'000'000;
// 2^24 subsets of one entry's support would already blow the subset budget
constexpr size_t kMaxSupport = 24;

bool close_rel(double a, double b) {
    return std::abs(a - b) <= kRelTol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Sifting primes of norm < z, deduplicated, sorted ascending in `ord`.
std::vector<prime_ideal> sift_primes(const std::vector<prime_ideal>& P, double z,
                                     prime_order ord) {
    std::vector<prime_ideal> out;
    for (const auto& q : P)
        if (static_cast<double>(q.norm) < z) out.push_back(q);
    std::sort(out.begin(), out.end(), [&](const prime_ideal& a, const prime_ideal& b) {
        return prime_less(a, b, ord);
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::pair<i64, int>> key_list(const std::vector<prime_ideal>& ps) {
    std::vector<std::pair<i64, int>> keys;
    keys.reserve(ps.size());
    for (const auto& q : ps) keys.emplace_back(q.p, q.root);
    std::sort(keys.begin(), keys.end());
    return keys;
}

bool key_member(const std::vector<std::pair<i64, int>>& keys, const prime_ideal& q) {
    return std::binary_search(keys.begin(), keys.end(), std::pair<i64, int>{q.p, q.root});
}

std::vector<double> eval_g(const std::vector<prime_ideal>& ps, const density_model& model) {
    require(static_cast<bool>(model.g), errc::bad_input, "density_model: g is not set");
    std::vector<double> gv(ps.size());
    for (size_t i = 0; i < ps.size(); ++i) {
        double v = model.g(ps[i]);
        require(v >= 0.0 && v < 1.0, errc::bad_input,
                "density_model: g(p) must lie in [0,1)");
        gv[i] = v;
    }
    return gv;
}

// Sifting-prime part of an entry's support, as ascending (p, root) keys.
divisor_key entry_support(const ideal_fact& n, const std::vector<std::pair<i64, int>>& keys) {
    divisor_key supp;
    for (const auto& [q, e] : n.factors)
        if (key_member(keys, q)) supp.emplace_back(q.p, q.root);
    std::sort(supp.begin(), supp.end());
    return supp;
}

// |A_d| for every squarefree product d of sifting primes that divides at
// least one entry; keys absent from the map have zero mass.
std::map<divisor_key, double> build_masses(const sieve_sequence& A,
                                           const std::vector<prime_ideal>& ps,
                                           const char* who) {
    auto keys = key_list(ps);
    std::map<divisor_key, kahan_sum> acc;
    i64 work = 0;
    for (const auto& [n, a] : A.entries) {
        divisor_key supp = entry_support(n, keys);
        require(supp.size() <= kMaxSupport, errc::too_large,
                std::string(who) + ": an entry touches too many sifting primes");
        unsigned full = 1u << supp.size();
        work += full;
        require(work <= kSubsetCap, errc::too_large,
                std::string(who) + ": divisor subset budget exceeded");
        for (unsigned mask = 0; mask < full; ++mask) {
            divisor_key d;
            for (size_t b = 0; b < supp.size(); ++b)
                if (mask & (1u << b)) d.push_back(supp[b]);
            acc[std::move(d)] += a;
        }
        require(acc.size() <= kMapCap, errc::too_large,
                std::string(who) + ": divisor table exceeded cap");
    }
    std::map<divisor_key, double> out;
    for (const auto& [d, s] : acc) out.emplace(d, s.value());
    return out;
}

// Depth-first scan of the chains p1 > p2 > ... (strictly decreasing in the
// chosen order) over the sifting primes.  Maintains the two truncation
// condition flags: okO / okE mean every odd / even position m so far
// satisfied N(p1...pm) * N(pm) < level.  Chains whose running norm reaches
// `level`, or which fail both parities, are never extended: in the z <= level
// regime neither kind can lead back to a surviving divisor or an unseen
// boundary chain.  The visitor sees every surviving node, unit included.
template <typename Fn>
void walk_chains(const std::vector<prime_ideal>& asc, const std::vector<double>& gv,
                 double level, Fn&& visit) {
    std::vector<int> chain;
    i64 nodes = 0;
    auto rec = [&](auto&& self, size_t t, int depth, double norm, double gp, bool okO,
                   bool okE) -> void {
        require(++nodes <= kNodeCap, errc::too_large, "sieve walk exceeded its node cap");
        visit(static_cast<const std::vector<int>&>(chain), t, depth, norm, gp, okO, okE);
        for (size_t j = t; j-- > 0;) {
            double nn = norm * static_cast<double>(asc[j].norm);
            if (nn >= level) continue;
            bool o = okO, e = okE;
            bool cond = nn * static_cast<double>(asc[j].norm) < level;
            if ((depth + 1) % 2 == 1) {
                if (!cond) o = false;
            } else {
                if (!cond) e = false;
            }
            if (!o && !e) continue;
            chain.push_back(static_cast<int>(j));
            self(self, j, depth + 1, nn, gp * gv[j], o, e);
            chain.pop_back();
        }
    };
    rec(rec, asc.size(), 0, 1.0, 1.0, true, true);
}

divisor_key chain_key(const std::vector<int>& chain, const std::vector<prime_ideal>& asc) {
    divisor_key key;
    key.reserve(chain.size());
    for (int idx : chain) key.emplace_back(asc[idx].p, asc[idx].root);
    std::sort(key.begin(), key.end());
    return key;
}

} // namespace

double S_direct(const sieve_sequence& A, const std::vector<prime_ideal>& P, double z) {
    auto keys = key_list(sift_primes(P, z, prime_order::by_p_then_root));
    kahan_sum s;
    for (const auto& [n, a] : A.entries) {
        bool hit = false;
        for (const auto& [q, e] : n.factors)
            if (key_member(keys, q)) {
                hit = true;
                break;
            }
        if (!hit) s += a;
    }
    return s.value();
}

double S_mobius(const sieve_sequence& A, const std::vector<prime_ideal>& P, double z) {
    auto ps = sift_primes(P, z, prime_order::by_p_then_root);
    auto masses = build_masses(A, ps, "S_mobius");
    kahan_sum s;
    for (const auto& [d, m] : masses) s += (d.size() % 2 ? -m : m);
    return s.value();
}

std::map<divisor_key, int> beta_weights(const std::vector<prime_ideal>& P,
                                        const sieve_params& params, int sign) {
    require(sign == 1 || sign == -1, errc::bad_input, "beta_weights: sign must be +1 or -1");
    params.tau();
    auto asc = sift_primes(P, params.z, params.ordering);
    std::map<divisor_key, int> out;
    out.emplace(divisor_key{}, 1); // the unit survives in both variants
    std::vector<int> chain;
    i64 nodes = 0;
    auto rec = [&](auto&& self, size_t t, double norm) -> void {
        require(++nodes <= kNodeCap, errc::too_large, "beta_weights: walk exceeded its node cap");
        for (size_t j = t; j-- > 0;) {
            double nn = norm * static_cast<double>(asc[j].norm);
            if (nn >= params.level) continue;
            int m = static_cast<int>(chain.size()) + 1;
            bool matching = (sign > 0) ? (m % 2 == 1) : (m % 2 == 0);
            bool cond = nn * static_cast<double>(asc[j].norm) < params.level;
            if (matching && !cond) continue;
            chain.push_back(static_cast<int>(j));
            out.emplace(chain_key(chain, asc), chain.size() % 2 ? -1 : 1);
            require(out.size() <= kMapCap, errc::too_large,
                    "beta_weights: weight count exceeded cap");
            self(self, j, nn);
            chain.pop_back();
        }
    };
    rec(rec, asc.size(), 1.0);
    return out;
}

bounds_result S_bounds(const sieve_sequence& A, const std::vector<prime_ideal>& P,
                       const sieve_params& params, const density_model& model) {
    params.tau();
    auto asc = sift_primes(P, params.z, params.ordering);
    auto gv = eval_g(asc, model);
    auto masses = build_masses(A, asc, "S_bounds");
    kahan_sum Sp, Sm, Vp, Vm, Rp, Rm;
    walk_chains(asc, gv, params.level,
                [&](const std::vector<int>& chain, size_t, int depth, double, double gp,
                    bool okO, bool okE) {
                    auto it = masses.find(chain_key(chain, asc));
                    double mass = it == masses.end() ? 0.0 : it->second;
                    double mu = depth % 2 ? -1.0 : 1.0;
                    double rem = mass - gp * model.X;
                    if (okO) {
                        Sp += mu * mass;
                        Vp += mu * gp;
                        Rp += mu * rem;
                    }
                    if (okE) {
                        Sm += mu * mass;
                        Vm += mu * gp;
                        Rm += mu * rem;
                    }
                });
    bounds_result r;
    r.S_plus = Sp.value();
    r.S_minus = Sm.value();
    r.V_plus = Vp.value();
    r.V_minus = Vm.value();
    r.R_plus = Rp.value();
    r.R_minus = Rm.value();
    return r;
}

double V_of_z(const std::vector<prime_ideal>& P, const density_model& model, double z) {
    auto ps = sift_primes(P, z, prime_order::by_p_then_root);
    auto gv = eval_g(ps, model);
    double v = 1.0;
    for (double g : gv) v *= 1.0 - g;
    return v;
}

std::pair<double, double> E0_E1(double C, double tau) {
    require(C > 1.0, errc::bad_input, "E0_E1: need C > 1");
    auto least_with_parity = [](double t, long parity) {
        long n = static_cast<long>(std::floor(t)) + 1; // least integer > t
        if (n < parity) n = parity;
        if (n % 2 != parity) ++n;
        return n;
    };
    long n1 = least_with_parity(tau - 1.0, 1);
    long n0 = least_with_parity(tau - 1.0, 0);
    double lc = std::log(C);
    auto head = [&](long first, long stop) {
        // sum of (log C)^n / n! over n = first, first+2, ... below stop
        kahan_sum h;
        double term = 1.0;
        for (long n = 1; n <= first; ++n) term *= lc / n;
        if (first == 0) term = 1.0;
        for (long n = first; n < stop; n += 2) {
            h += term;
            term *= lc / (n + 1);
            term *= lc / (n + 2);
        }
        return h.value();
    };
    double E1 = (C * C - 1.0) / 2.0 - C * head(1, n1);
    double E0 = (C * C + 1.0) / 2.0 - C * head(0, n0);
    return {E0, E1};
}

double dimension_ratio(const std::vector<prime_ideal>& P, const density_model& model,
                       double w, double z) {
    require(w >= 2.0 && z >= w, errc::bad_input, "dimension_ratio: need 2 <= w <= z");
    auto ps = sift_primes(P, z, prime_order::by_p_then_root);
    double r = 1.0;
    for (const auto& q : ps) {
        if (static_cast<double>(q.norm) < w) continue;
        double g = model.g(q);
        require(g >= 0.0 && g < 1.0, errc::bad_input, "density_model: g(p) must lie in [0,1)");
        r /= 1.0 - g;
    }
    return r;
}

fl_report buchstab_check(const sieve_sequence& A, const std::vector<prime_ideal>& P,
                         const sieve_params& params, const density_model& model) {
    fl_report rep;
    rep.tau = params.tau();
    rep.X = model.X;
    auto asc = sift_primes(P, params.z, params.ordering);
    auto gv = eval_g(asc, model);

    rep.S = S_direct(A, P, params.z);
    rep.S_check = S_mobius(A, P, params.z);
    auto b = S_bounds(A, P, params, model);
    rep.S_plus = b.S_plus;
    rep.S_minus = b.S_minus;
    rep.V_plus = b.V_plus;
    rep.V_minus = b.V_minus;
    rep.R_plus = b.R_plus;
    rep.R_minus = b.R_minus;
    rep.V = V_of_z(P, model, params.z);

    // V_n: for each surviving chain prefix whose parity-n conditions all
    // hold, the chains failing exactly at position n extend it by one prime
    // q with N(prefix)*Nq^2 >= level.  Their total g(prefix)g(q)V(q) is a
    // contiguous tail in the prefix-product table, so aggregate it from
    // suffix sums instead of visiting each failing extension.
    size_t K = asc.size();
    std::vector<double> Vat(K + 1), W(K + 1);
    Vat[0] = 1.0;
    for (size_t i = 0; i < K; ++i) Vat[i + 1] = Vat[i] * (1.0 - gv[i]);
    W[K] = 0.0;
    for (size_t i = K; i-- > 0;) W[i] = W[i + 1] + gv[i] * Vat[i];

    std::vector<kahan_sum> Vterms;
    walk_chains(asc, gv, params.level,
                [&](const std::vector<int>&, size_t t, int depth, double norm, double gp,
                    bool okO, bool okE) {
                    int n = depth + 1;
                    if (!((n % 2 == 1) ? okO : okE)) return;
                    // same expression shape as the walk's own condition, so
                    // boundary decisions agree bit for bit
                    auto holds = [&](const prime_ideal& q) {
                        return (norm * static_cast<double>(q.norm)) *
                                   static_cast<double>(q.norm) <
                               params.level;
                    };
                    size_t lo = static_cast<size_t>(
                        std::partition_point(asc.begin(), asc.begin() + t, holds) -
                        asc.begin());
                    if (lo >= t) return;
                    if (Vterms.size() < static_cast<size_t>(n)) Vterms.resize(n);
                    Vterms[n - 1] += gp * (W[lo] - W[t]);
                });

    // S_n: element-driven.  An entry lands in S(A_{p1...pn}, pn) only when
    // pn is the least sifting prime dividing it, and p1...p_{n-1} is a
    // decreasing arrangement of some subset of its remaining support.
    auto keys = key_list(asc);
    std::vector<size_t> pos(keys.size());
    for (size_t i = 0; i < K; ++i) {
        auto it = std::lower_bound(keys.begin(), keys.end(),
                                   std::pair<i64, int>{asc[i].p, asc[i].root});
        pos[static_cast<size_t>(it - keys.begin())] = i;
    }
    std::vector<kahan_sum> Sterms;
    i64 work = 0;
    for (const auto& [nid, a] : A.entries) {
        std::vector<size_t> idx; // ascending positions in asc
        for (const auto& [q, e] : nid.factors) {
            auto it = std::lower_bound(keys.begin(), keys.end(), std::pair<i64, int>{q.p, q.root});
            if (it != keys.end() && *it == std::pair<i64, int>{q.p, q.root})
                idx.push_back(pos[static_cast<size_t>(it - keys.begin())]);
        }
        if (idx.empty()) continue;
        std::sort(idx.begin(), idx.end());
        require(idx.size() <= kMaxSupport, errc::too_large,
                "buchstab_check: an entry touches too many sifting primes");
        unsigned rest = static_cast<unsigned>(idx.size()) - 1;
        work += 1u << rest;
        require(work <= kSubsetCap, errc::too_large,
                "buchstab_check: boundary chain budget exceeded");
        for (unsigned mask = 0; mask < (1u << rest); ++mask) {
            int n = std::popcount(mask) + 1;
            double prefix = 1.0;
            int m = 0;
            bool ok = true;
            for (int bit = static_cast<int>(rest) - 1; bit >= 0; --bit) {
                if (!(mask & (1u << bit))) continue;
                const prime_ideal& q = asc[idx[static_cast<size_t>(bit) + 1]];
                ++m;
                double nn = prefix * static_cast<double>(q.norm);
                bool cond = nn * static_cast<double>(q.norm) < params.level;
                if (m % 2 == n % 2 && !cond) {
                    ok = false;
                    break;
                }
                prefix = nn;
            }
            if (!ok) continue;
            const prime_ideal& qn = asc[idx[0]];
            double nn = prefix * static_cast<double>(qn.norm);
            if (nn * static_cast<double>(qn.norm) < params.level) continue;
            if (Sterms.size() < static_cast<size_t>(n)) Sterms.resize(n);
            Sterms[n - 1] += a;
        }
    }

    size_t len = std::max(Sterms.size(), Vterms.size());
    rep.S_terms.assign(len, 0.0);
    rep.V_terms.assign(len, 0.0);
    for (size_t i = 0; i < Sterms.size(); ++i) rep.S_terms[i] = Sterms[i].value();
    for (size_t i = 0; i < Vterms.size(); ++i) rep.V_terms[i] = Vterms[i].value();

    kahan_sum sOdd, sEven, vOdd, vEven;
    for (size_t i = 0; i < len; ++i) {
        if (i % 2 == 0) { // n = i+1 odd
            sOdd += rep.S_terms[i];
            vOdd += rep.V_terms[i];
        } else {
            sEven += rep.S_terms[i];
            vEven += rep.V_terms[i];
        }
    }

    rep.buchstab_ok = close_rel(rep.S_plus, rep.S + sOdd.value()) &&
                      close_rel(rep.S_minus, rep.S - sEven.value()) &&
                      close_rel(rep.V_plus, rep.V + vOdd.value()) &&
                      close_rel(rep.V_minus, rep.V - vEven.value()) &&
                      close_rel(rep.S, rep.S_check);
    for (size_t i = 0; i < len; ++i) {
        double n = static_cast<double>(i) + 1.0;
        if (rep.S_terms[i] < -1e-12 || rep.V_terms[i] < -1e-12) rep.buchstab_ok = false;
        if (n <= rep.tau - 1.0 && std::abs(rep.V_terms[i]) > 1e-12) rep.buchstab_ok = false;
    }

    double tolS = kRelTol * std::max({1.0, std::abs(rep.S), std::abs(rep.S_plus),
                                      std::abs(rep.S_minus)});
    rep.sandwich_ok = rep.S_minus <= rep.S + tolS && rep.S <= rep.S_plus + tolS;

    rep.C_used = std::max(dimension_ratio(P, model, 2.0, params.z), 1.0 + 1e-9);
    auto [e0, e1] = E0_E1(rep.C_used, rep.tau);
    rep.E0 = e0;
    rep.E1 = e1;
    double lower = rep.X * rep.V * (1.0 - rep.E0) + rep.R_minus;
    double upper = rep.X * rep.V * (1.0 + rep.E1) + rep.R_plus;
    double tolF = kRelTol * std::max({1.0, std::abs(rep.S), std::abs(lower), std::abs(upper)});
    rep.fl_ok = lower <= rep.S + tolF && rep.S <= upper + tolF;
    return rep;
}

} // namespace formsieve
