// Acceptance gate: one [PASS]/[FAIL] line per criterion, exit code = number
// of failures.  Everything runs through the public headers plus the lattice
// oracle in repr_oracle.{hpp,cpp}, which shares no code with the ideal
// machinery it is checking.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "formsieve/characters.hpp"
#include "formsieve/common.hpp"
#include "formsieve/exceptional.hpp"
#include "formsieve/ideals.hpp"
#include "formsieve/qfield.hpp"
#include "formsieve/sieve.hpp"

#include "repr_oracle.hpp"

using namespace formsieve;
namespace fto = formsieve::testing;

namespace {

struct timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double secs() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct gate {
    int failures = 0;
    void line(int n, bool ok, const std::string& text, double secs) {
        std::printf("[%s] criterion %2d: %s  (%.1f s)\n", ok ? "PASS" : "FAIL", n, text.c_str(), secs);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    void detail(const std::string& text) {
        std::printf("                 %s\n", text.c_str());
        std::fflush(stdout);
    }
};

bool close_rel(double a, double b, double tol = 1e-9) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Independent reduced-form count: direct (a, b, c) lattice walk with the
// textbook reduction conditions, no library calls except gcd3.
int reduced_form_count(i64 d) {
    int count = 0;
    for (i64 a = 1; 3 * a * a <= -d; ++a)
        for (i64 b = -a + 1; b <= a; ++b) {
            if (((b - d) & 1) != 0) continue; // b = d mod 2
            i64 num = b * b - d;
            if (num % (4 * a) != 0) continue;
            i64 c = num / (4 * a);
            if (c < a) continue;
            if (a == c && b < 0) continue;
            if (gcd3(a, b, c) != 1) continue;
            ++count;
        }
    return count;
}

// Prime ideals of norm < x in one class, counted through the lattice oracle:
// split/ramified from representation counts of p, inert from p^2 < x in the
// principal class.
i64 oracle_prime_count(const class_group& G, int cls, i64 x, bool count_ramified) {
    auto R = fto::count_representations(G, x - 1);
    auto comp = fto::composite_table(x - 1);
    const int w = R.w, h = G.h();
    i64 total = 0;
    for (i64 p = 2; p < x; ++p) {
        if (comp[static_cast<size_t>(p)]) continue;
        int k = static_cast<int>(kronecker(G.d, p));
        if (k == -1) {
            if (cls == G.identity() && p <= (x - 1) / p) ++total;
        } else {
            if (k == 0 && !count_ramified) continue;
            total += R.raw(p, cls, h) / w;
        }
    }
    return total;
}

// --------------------------------------------------------------------------
// 1. class groups for all fundamental |D| <= 2000: axioms + independent count

bool criterion1(gate& g) {
    timer t;
    int n_disc = 0;
    bool ok = true;
    std::string why = "group axioms and independent form counts all confirmed";
    for (i64 d = -3; d >= -2000 && ok; --d) {
        if (!is_fundamental(d)) continue;
        ++n_disc;
        class_group G = make_class_group(d);
        const int h = G.h();
        if (reduced_form_count(d) != h) {
            ok = false;
            why = fmt("independent reduced-form count != h at d=%lld", static_cast<long long>(d));
            break;
        }
        for (int v : G.table)
            if (v < 0 || v >= h) ok = false;
        for (int i = 0; i < h && ok; ++i) {
            if (G.mul(0, i) != i || G.mul(i, 0) != i) ok = false;
            if (G.mul(i, G.inverse(i)) != 0) ok = false;
            for (int j = i; j < h && ok; ++j) {
                if (G.mul(i, j) != G.mul(j, i)) ok = false;
                for (int k = j; k < h && ok; ++k)
                    if (G.mul(G.mul(i, j), k) != G.mul(i, G.mul(j, k))) ok = false;
            }
        }
        if (!ok) why = fmt("group axiom violated at d=%lld", static_cast<long long>(d));
    }
    class_group g20 = make_class_group(-20), g84 = make_class_group(-84);
    if (g20.h() != 2 || g84.h() != 4 || g84.structure != std::vector<i64>{2, 2}) {
        ok = false;
        why = "pinned values h(-20)=2, h(-84)=4 with structure [2,2] not reproduced";
    }
    bool in_time = t.secs() < 30.0;
    g.line(1, ok && in_time,
           fmt("class groups, %d fundamental discriminants with |D| <= 2000: %s; h(-20)=2, h(-84)=4 [2,2]",
               n_disc, why.c_str()),
           t.secs());
    return ok && in_time;
}

// --------------------------------------------------------------------------
// 2. per-norm ideal counts to 1e4 equal the lattice oracle exactly

bool criterion2(gate& g) {
    timer t;
    const i64 X = 10'000;
    bool ok = true;
    std::string why = "per-norm counts exactly equal w * oracle on all three fields";
    for (i64 d : {-20, -84, -163}) {
        class_group G = make_class_group(d);
        std::vector<i64> counts(static_cast<size_t>(X) + 1, 0);
        for (const auto& n : enumerate_ideals(G, X)) ++counts[static_cast<size_t>(n.norm)];
        auto R = fto::count_representations(G, X);
        for (i64 n = 1; n <= X && ok; ++n)
            if (counts[static_cast<size_t>(n)] * R.w != R.raw(n)) {
                ok = false;
                why = fmt("count mismatch at d=%lld, norm %lld", static_cast<long long>(d),
                          static_cast<long long>(n));
            }
    }
    bool in_time = t.secs() < 60.0;
    g.line(2, ok && in_time, fmt("ideal enumeration vs lattice oracle, norms to 1e4, D in {-20,-84,-163}: %s", why.c_str()),
           t.secs());
    return ok && in_time;
}

// --------------------------------------------------------------------------
// 3. divisor Moebius identity, exact on every non-unit ideal to 1e4

bool criterion3(gate& g) {
    timer t;
    bool ok = true;
    i64 checked = 0;
    std::string why;
    for (i64 d : {-20, -84, -163}) {
        class_group G = make_class_group(d);
        for (const auto& n : enumerate_ideals(G, 10'000)) {
            if (n.is_unit()) continue;
            // walk every exponent tuple below n's factorization
            i64 sum = 0;
            ideal_fact div;
            auto rec = [&](auto&& self, size_t i) -> void {
                if (i == n.factors.size()) {
                    sum += mobius(div);
                    return;
                }
                self(self, i + 1); // exponent 0
                auto [q, e] = n.factors[i];
                div.factors.push_back({q, 0});
                for (int k = 1; k <= e; ++k) {
                    div.factors.back().second = k;
                    div.norm *= q.norm;
                    div.cls = G.mul(div.cls, q.cls);
                    self(self, i + 1);
                }
                for (int k = 1; k <= e; ++k) div.norm /= q.norm;
                div.factors.pop_back();
                div.cls = 0; // recompute lazily: cls does not affect mobius
                return;
            };
            rec(rec, 0);
            ++checked;
            if (sum != 0) {
                ok = false;
                why = fmt(" first violation: d=%lld, norm %lld", static_cast<long long>(d),
                          static_cast<long long>(n.norm));
                break;
            }
        }
        if (!ok) break;
    }
    g.line(3, ok,
           fmt("sum of mu over ideal divisors = 0 for all %lld non-unit ideals, three fields, exact%s",
               static_cast<long long>(checked), why.c_str()),
           t.secs());
    return ok;
}

// --------------------------------------------------------------------------
// 4-7 share one grid: D in {-20,-84} x real characters x classes with
// psi = +1 x x in {1e3,1e4} x y in {1,4.54,7.37}; z in {10,30,100} for the
// route equality, further crossed with level in {1e2,1e3,1e4} and both
// orderings for the truncated-bound checks.

struct grid_result {
    int eq_instances = 0;
    double worst_eq_rel = 0;
    int bc_runs = 0;
    int sandwich_viol = 0;
    int ident_viol = 0;
    int vterm_viol = 0;
    int fl_viol = 0;
};

grid_result run_grid() {
    grid_result r;
    const double xs[] = {1e3, 1e4};
    const double ys[] = {1.0, 4.54, 7.37};
    const double zs[] = {10, 30, 100};
    const double levels[] = {1e2, 1e3, 1e4};
    const prime_order ords[] = {prime_order::by_p_then_root, prime_order::by_root_then_p};

    for (i64 d : {-20, -84}) {
        class_group G = make_class_group(d);
        auto chars = real_characters(G);
        for (size_t ci = 0; ci < chars.size(); ++ci)
            for (int cls = 0; cls < G.h(); ++cls) {
                if (chars[ci](cls) != 1) continue;
                for (double x : xs)
                    for (double y : ys) {
                        field_setup s = make_field_setup(d, ci, cls);
                        s.x = x;
                        s.y = y;
                        sieve_sequence A = build_sequence(s);
                        density_model model = make_model(s, true);
                        for (double z : zs) {
                            auto pool = sieve_pool(s, z);
                            double Sd = S_direct(A, pool, z);
                            double Sm = S_mobius(A, pool, z);
                            double rel = std::abs(Sd - Sm) / std::max(1.0, std::abs(Sd));
                            r.worst_eq_rel = std::max(r.worst_eq_rel, rel);
                            ++r.eq_instances;

                            for (double level : levels)
                                for (prime_order po : ords) {
                                    s.ordering = po;
                                    auto pool2 = sieve_pool(s, z);
                                    sieve_params sp;
                                    sp.z = z;
                                    sp.level = level;
                                    sp.ordering = po;
                                    fl_report rep = buchstab_check(A, pool2, sp, model);
                                    ++r.bc_runs;

                                    double slack = 1e-9 * std::max(1.0, std::abs(rep.S));
                                    if (!(rep.S_minus <= rep.S + slack && rep.S <= rep.S_plus + slack))
                                        ++r.sandwich_viol;

                                    // recompute the four Buchstab identities from the
                                    // reported pieces with independent accumulation
                                    kahan_sum s_odd, s_even, v_odd, v_even;
                                    for (size_t i = 0; i < rep.S_terms.size(); ++i)
                                        (i % 2 == 0 ? s_odd : s_even) += rep.S_terms[i];
                                    for (size_t i = 0; i < rep.V_terms.size(); ++i)
                                        (i % 2 == 0 ? v_odd : v_even) += rep.V_terms[i];
                                    bool ident = close_rel(rep.S_plus, rep.S + s_odd.value()) &&
                                                 close_rel(rep.S_minus, rep.S - s_even.value()) &&
                                                 close_rel(rep.V_plus, rep.V + v_odd.value()) &&
                                                 close_rel(rep.V_minus, rep.V - v_even.value()) &&
                                                 close_rel(rep.S, rep.S_check) && rep.buchstab_ok;
                                    if (!ident) ++r.ident_viol;

                                    for (size_t i = 0; i < rep.V_terms.size(); ++i) {
                                        double n = static_cast<double>(i) + 1.0;
                                        if (n <= rep.tau - 1.0 + 1e-12 && rep.V_terms[i] != 0.0)
                                            ++r.vterm_viol;
                                    }

                                    double lo = rep.X * rep.V * (1.0 - rep.E0) + rep.R_minus;
                                    double hi = rep.X * rep.V * (1.0 + rep.E1) + rep.R_plus;
                                    if (!rep.fl_ok || !(lo <= rep.S + slack && rep.S <= hi + slack))
                                        ++r.fl_viol;
                                }
                        }
                    }
            }
    }
    return r;
}

// --------------------------------------------------------------------------
// 8. remainder decay at the ten smallest sieve primes, x = 1e4 vs 1e6

bool criterion8(gate& g) {
    timer t;
    bool ok = true;
    std::string note;
    for (size_t ci : {0u, 1u}) {
        field_setup s = make_field_setup(-20, ci, 0);
        s.x = 1e4;
        auto p4 = remainder_profile(s, 10);
        s.x = 1e6;
        auto p6 = remainder_profile(s, 10);
        int better = 0;
        for (size_t i = 0; i < 10; ++i)
            if (p6[i].rel < p4[i].rel) ++better;
        note += fmt("%s%s character %d/10 improved", note.empty() ? "" : ", ",
                    ci == 0 ? "principal" : "quadratic", better);
        if (better < 9) ok = false;
    }
    bool in_time = t.secs() < 180.0;
    g.line(8, ok && in_time,
           fmt("relative remainder decay at x=1e6 vs 1e4, D=-20, 10 smallest sieve primes: %s", note.c_str()),
           t.secs());
    return ok && in_time;
}

// --------------------------------------------------------------------------
// 9. the lower-bound pipeline at desk scale, exact count vs oracle

bool criterion9(gate& g) {
    timer t;
    field_setup s = make_field_setup(-20, 0, 0);
    s.x = 1e4;
    auto t1 = theorem1_report(s);
    i64 oracle = oracle_prime_count(s.G, 0, static_cast<i64>(s.x), s.count_ramified);

    bool count_ok = t1.lhs_count == oracle;
    bool c_ok = std::abs(t1.c_psi - 0.0557) < 1e-12;
    double rhs_expect = t1.c_psi * t1.consts.delta_psi * t1.consts.kappa_K_v * s.x / t1.consts.h;
    bool rhs_ok = close_rel(t1.rhs_bound, rhs_expect, 1e-12);
    const hypothesis_checks& H = t1.hypothesis;
    const hyp_check* checks[] = {&H.x_upper, &H.x_lower_1, &H.x_lower_2,
                                 &H.z_window, &H.small_prime_sum, &H.eta_min};
    bool margins_ok = true;
    for (const hyp_check* c : checks)
        if (!std::isfinite(c->margin)) margins_ok = false;

    bool ok = count_ok && c_ok && rhs_ok && margins_ok;
    g.line(9, ok,
           fmt("lower-bound pipeline D=-20 principal/principal x=1e4: lhs_count=%lld == oracle %lld, "
               "c_psi=0.0557, rhs=%.4f from dual-checked constants",
               static_cast<long long>(t1.lhs_count), static_cast<long long>(oracle), t1.rhs_bound),
           t.secs());
    g.detail(fmt("margins: x_upper=%.3g x_lower_1=%.3g x_lower_2=%.3g z_window=%.3g small_prime_sum=%.3g eta_min=%.3g",
                 H.x_upper.margin, H.x_lower_1.margin, H.x_lower_2.margin, H.z_window.margin,
                 H.small_prime_sum.margin, H.eta_min.margin));
    g.detail(fmt("inequality lhs >= rhs %s at this scale (recorded, not asserted: conditional theorem)",
                 t1.lhs_ok ? "holds" : "fails"));
    return ok;
}

// --------------------------------------------------------------------------
// 10. least-prime scan over -400 <= D <= -3, every prime oracle-confirmed

bool criterion10(gate& g) {
    timer t;
    auto rows = scan_least_primes(-3, -400, 1'000'000, 0);

    std::set<i64> seen, expected;
    for (i64 d = -3; d >= -400; --d)
        if (is_fundamental(d)) expected.insert(d);

    bool ok = true;
    std::string why;
    std::map<i64, class_group> groups;
    double max_q = 0, max_p = 0;
    int confirmed = 0;
    for (const auto& row : rows) {
        seen.insert(row.d);
        if (!row.ok) {
            ok = false;
            why = fmt(" unresolved row at d=%lld (%s)", static_cast<long long>(row.d), row.note.c_str());
            break;
        }
        auto it = groups.find(row.d);
        if (it == groups.end()) it = groups.emplace(row.d, make_class_group(row.d)).first;
        const quad_form& Q = it->second.forms[static_cast<size_t>(row.cls)];
        if (fto::least_represented_prime(Q, row.p_all + 1, false) != row.p_all ||
            fto::least_represented_prime(Q, row.p_split + 1, true) != row.p_split) {
            ok = false;
            why = fmt(" oracle disagrees at d=%lld class %d", static_cast<long long>(row.d), row.cls);
            break;
        }
        ++confirmed;
        double m = std::max(row.ratio_all, row.ratio_split);
        (row.quadratic ? max_q : max_p) = std::max(row.quadratic ? max_q : max_p, m);
    }
    if (ok && seen != expected) {
        ok = false;
        why = " some fundamental discriminant missing from the scan";
    }
    bool in_time = t.secs() < 120.0;
    g.line(10, ok && in_time,
           fmt("least-prime scan -400 <= D <= -3: %d rows oracle-confirmed%s", confirmed, why.c_str()),
           t.secs());
    g.detail(fmt("max log(p)/log|D| = %.4f over quadratic characters (reference exponent 9.5), "
                 "%.4f over the principal character (reference exponent 6)",
                 max_q, max_p));
    return ok && in_time;
}

// --------------------------------------------------------------------------
// 11. smoothed-sum stability and the initial-sum bracket

bool criterion11(gate& g) {
    timer t;
    bool stab_ok = true;
    double worst_gap = 0;
    bool bracket_ok = true;
    std::vector<std::string> ratios;

    for (i64 d : {-20, -84}) {
        class_group G = make_class_group(d);
        auto chars = real_characters(G);
        zero_hypothesis zh = beta_from_eta(d, 1e4);

        for (const auto& psi : chars) {
            double s1 = smoothed_lambda_sum(psi, G, zh.beta, 1e3, 40'000).value;
            double s2 = smoothed_lambda_sum(psi, G, zh.beta, 1e3, 80'000).value;
            double gap = std::abs(s1 - s2) / std::abs(s1);
            worst_gap = std::max(worst_gap, gap);
            if (gap > 0.01) stab_ok = false;

            if (psi.principal()) continue;
            double l1 = l_one(psi, G, 40'000).value;
            double l2 = l_one(psi, G, 80'000).value;
            gap = std::abs(l1 - l2) / std::abs(l1);
            worst_gap = std::max(worst_gap, gap);
            if (gap > 0.01) stab_ok = false;

            // initial-sum bracket at eta = 1e4: sum lambda(n) Nn^-beta e^{-Nn/y}
            // against kappa_psi * Gamma(1-beta), y = 1e4 inside the lemma window
            double y = 1e4;
            double S = smoothed_lambda_sum(psi, G, zh.beta, y, 400'000).value;
            double main = kappa_psi(psi, G, 1'000'000) * std::tgamma(1.0 - zh.beta);
            double ratio = S / main;
            if (!(ratio >= 0.5 && ratio <= 2.0)) bracket_ok = false;
            ratios.push_back(fmt("d=%lld: %.3g", static_cast<long long>(d), ratio));
        }
    }

    bool ok = stab_ok && bracket_ok;
    g.line(11, ok,
           fmt("smoothed-sum stability under cutoff doubling (worst gap %.2e, need <= 1%%) "
               "and initial-sum ratio in [0.5, 2.0] at eta=1e4: %s",
               worst_gap, bracket_ok ? "bracket holds" : "bracket FAILS"),
           t.secs());
    std::string all;
    for (const auto& r : ratios) all += (all.empty() ? "" : ", ") + r;
    g.detail(fmt("measured initial-sum ratios vs kappa_psi*Gamma(1-beta): %s", all.c_str()));
    if (!bracket_ok) {
        g.detail("diagnosis: these fields have no real zero at beta = 1 - 1/(eta log 4|d|), so");
        g.detail("Gamma(1-beta) ~ eta log(4|d|) ~ 4e4 has no zero-induced mass to match; the");
        g.detail("measured sum sits near kappa_psi * log y, a factor ~Gamma(1-beta)/log(y) below");
        g.detail("the bracket.  The lemma is conditional on that zero; at desk scale the bracket");
        g.detail("is unattainable and this line stays red by design.");
    }
    return ok;
}

} // namespace

int main() {
    std::printf("formsieve acceptance gate\n");
    gate g;

    criterion1(g);
    criterion2(g);
    criterion3(g);

    timer tg;
    grid_result r = run_grid();
    double grid_secs = tg.secs();
    // the four criteria share the grid; split the measured time across them
    g.line(4, r.eq_instances >= 200 && r.worst_eq_rel <= 1e-9,
           fmt("direct vs Moebius sifted sum on %d instances, worst relative gap %.2e (need <= 1e-9)",
               r.eq_instances, r.worst_eq_rel),
           grid_secs);
    g.line(5, r.sandwich_viol == 0,
           fmt("sandwich S- <= S <= S+ on %d truncated-bound runs (3 levels x 2 orderings): %d violations",
               r.bc_runs, r.sandwich_viol),
           0.0);
    g.line(6, r.ident_viol == 0 && r.vterm_viol == 0,
           fmt("Buchstab S-side and V-side identities to 1e-9 on %d runs (%d violations); "
               "V_n = 0 for n <= tau-1 (%d violations)",
               r.bc_runs, r.ident_viol, r.vterm_viol),
           0.0);

    double e = std::exp(1.0), e2 = e * e;
    auto [E0a, E1a] = E0_E1(e2, 5.0);
    auto [E0b, E1b] = E0_E1(e, 3.0);
    double err = std::max({std::abs(E0a - (0.5 * e2 * e2 - (11.0 / 3.0) * e2 + 0.5)),
                           std::abs(E1a - (0.5 * e2 * e2 - (10.0 / 3.0) * e2 - 0.5)),
                           std::abs(E0b - (0.5 * e2 - 1.5 * e + 0.5))});
    g.line(7, err <= 1e-12 && r.fl_viol == 0,
           fmt("closed-form E0(e^2,5), E1(e^2,5), E0(e,3) to 1e-12 (worst err %.2e); "
               "two-sided truncation bound with measured C on %d runs: %d violations",
               err, r.bc_runs, r.fl_viol),
           0.0);

    criterion8(g);
    criterion9(g);
    criterion10(g);
    criterion11(g);

    std::printf("%d of 11 criteria passed%s\n", 11 - g.failures,
                g.failures ? fmt(" (%d red: see lines above)", g.failures).c_str() : "");
    return g.failures;
}
