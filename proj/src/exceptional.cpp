#include "formsieve/exceptional.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <optional>
#include <thread>

namespace formsieve {

namespace {

constexpr i64 kWalkCap = 60'000'000;

void check_setup(const field_setup& s) {
    require(s.G.d == s.d, errc::mismatch, "field_setup: class group does not match d");
    require(s.psi.values.size() == static_cast<size_t>(s.G.h()), errc::mismatch,
            "field_setup: character table does not match the group");
    require(s.cls >= 0 && s.cls < s.G.h(), errc::bad_input,
            "field_setup: class index out of range");
    require(s.x >= 100.0, errc::bad_input, "field_setup: x below the working range");
    require(s.y >= 1.0 && s.y <= 40.0, errc::bad_input, "field_setup: need 1 <= y <= 40");
    require(s.z >= 2.0, errc::bad_input, "field_setup: need z >= 2");
    require(s.delta > 0.0 && s.delta < 0.25, errc::bad_input,
            "field_setup: delta outside (0, 0.25)");
    require(s.eta > 0.0 && s.M_delta > 0.0, errc::bad_input,
            "field_setup: eta and M_delta must be positive");
    require(s.density_cutoff >= 1000, errc::too_small,
            "field_setup: density cutoff below 1000");
}

i64 resolved_cutoff(const field_setup& s, double y_eff) {
    i64 need = static_cast<i64>(std::ceil(40.0 * s.x / y_eff));
    if (s.cutoff == 0) return need;
    require(s.cutoff >= need, errc::too_small,
            "field_setup: cutoff below 40 x / y, the dropped tail would matter");
    return s.cutoff;
}

// Depth-first scan of the squarefree products of the given psi=+1 primes
// (the support of rho), cheapest form: norm, class, rho value and a bitmask
// marking which of the first 32 pool primes divide the product.
template <typename Fn>
void rho_walk(const class_group& G, const std::vector<prime_ideal>& plus, i64 X,
              double rho_prime, Fn&& fn) {
    i64 nodes = 0;
    auto rec = [&](auto&& self, size_t start, i64 norm, int cls, double rho_n,
                   unsigned mask) -> void {
        require(++nodes <= kWalkCap, errc::too_large, "support walk exceeded its node cap");
        fn(norm, cls, rho_n, mask);
        for (size_t i = start; i < plus.size(); ++i) {
            const prime_ideal& q = plus[i];
            if (q.norm > X / norm) break;
            unsigned m2 = i < 32 ? (mask | (1u << i)) : mask;
            self(self, i + 1, norm * q.norm, G.mul(cls, q.cls), rho_n * rho_prime, m2);
        }
    };
    rec(rec, 0, 1, 0, 1.0, 0u);
}

hyp_check make_check(double lhs, double rhs, bool lower_bound) {
    hyp_check h;
    h.lhs = lhs;
    h.rhs = rhs;
    h.holds = lower_bound ? lhs >= rhs : lhs <= rhs;
    h.margin = lower_bound ? lhs / rhs : rhs / lhs;
    return h;
}

} // namespace

field_setup make_field_setup(i64 d, size_t char_index, int cls) {
    field_setup s;
    s.d = d;
    s.G = make_class_group(d);
    auto chars = real_characters(s.G);
    require(char_index < chars.size(), errc::bad_input,
            "make_field_setup: character index out of range");
    require(cls >= 0 && cls < s.G.h(), errc::bad_input,
            "make_field_setup: class index out of range");
    s.psi = chars[char_index];
    s.cls = cls;
    s.y = s.psi.principal() ? 4.54 : 7.37;
    return s;
}

field_constants compute_constants(const field_setup& s) {
    check_setup(s);
    field_constants c;
    c.h = s.G.h();
    c.kappa_K_v = kappa_K(s.G);
    auto ep = local_densities(s.psi, s.G, s.density_cutoff);
    c.b_psi = ep.b_psi;
    c.delta_psi = ep.delta_psi;
    c.L1 = s.psi.principal() ? 1.0 : l_one(s.psi, s.G, s.density_cutoff).value;
    c.kappa_psi_v = c.kappa_K_v * c.L1;
    return c;
}

double local_g(const real_character& psi, const prime_ideal& p) {
    if (psi(p.cls) != 1) return 0.0;
    double n = static_cast<double>(p.norm);
    return psi.principal() ? 1.0 / (n + 1.0) : 2.0 / (n + 2.0);
}

std::vector<prime_ideal> sieve_pool(const field_setup& s, double bound) {
    check_setup(s);
    require(bound >= 2.0, errc::bad_input, "sieve_pool: bound below 2");
    i64 X = static_cast<i64>(std::ceil(bound)) - 1; // norms < bound
    std::vector<prime_ideal> pool;
    for (const auto& q : primes_up_to(s.G, X, s.ordering))
        if (static_cast<double>(q.norm) < bound && s.psi(q.cls) == 1) pool.push_back(q);
    return pool;
}

sieve_sequence build_sequence(const field_setup& s, double y_override) {
    check_setup(s);
    double ye = y_override > 0 ? y_override : s.y;
    require(ye >= 1.0 && ye <= 40.0, errc::bad_input, "build_sequence: need 1 <= y <= 40");
    i64 cut = resolved_cutoff(s, ye);
    auto plus = sieve_pool(s, static_cast<double>(cut) + 0.5);
    // per-prime weight on the support: 2 for quadratic psi (the divisor-sum
    // function on its psi=+1 support), 1 for principal (plain squarefree
    // indicator) -- the choice that keeps the generating series at a simple
    // pole and matches local_g
    double rp = s.psi.principal() ? 1.0 : 2.0;
    sieve_sequence A;
    ideal_fact cur;
    i64 nodes = 0;
    auto rec = [&](auto&& self, size_t start, double rho_n) -> void {
        require(++nodes <= kWalkCap, errc::too_large, "build_sequence: walk exceeded its cap");
        if (cur.cls == s.cls) {
            A.entries.push_back(
                {cur, rho_n * std::exp(-ye * static_cast<double>(cur.norm) / s.x)});
            require(A.entries.size() <= 5'000'000, errc::too_large,
                    "build_sequence: sequence would not fit in memory");
        }
        for (size_t i = start; i < plus.size(); ++i) {
            const prime_ideal& q = plus[i];
            if (q.norm > cut / cur.norm) break;
            i64 saved_norm = cur.norm;
            int saved_cls = cur.cls;
            cur.factors.push_back({q, 1});
            cur.norm *= q.norm;
            cur.cls = s.G.mul(cur.cls, q.cls);
            self(self, i + 1, rho_n * rp);
            cur.factors.pop_back();
            cur.norm = saved_norm;
            cur.cls = saved_cls;
        }
    };
    rec(rec, 0, 1.0);
    return A;
}

double X_value(const field_setup& s, bool y_weighted) {
    auto c = compute_constants(s);
    return c.b_psi * c.kappa_psi_v * (y_weighted ? s.x / s.y : s.x) / c.h;
}

density_model make_model(const field_setup& s, bool y_weighted) {
    density_model m;
    real_character psi = s.psi;
    m.g = [psi](const prime_ideal& q) { return local_g(psi, q); };
    m.X = X_value(s, y_weighted);
    return m;
}

std::vector<remainder_row> remainder_profile(const field_setup& s, int nprimes) {
    check_setup(s);
    require(nprimes >= 1 && nprimes <= 32, errc::bad_input,
            "remainder_profile: nprimes must lie in [1, 32]");
    i64 cut = resolved_cutoff(s, s.y);
    auto plus = sieve_pool(s, static_cast<double>(cut) + 0.5);
    require(plus.size() >= static_cast<size_t>(nprimes), errc::too_small,
            "remainder_profile: pool has fewer primes than requested");
    double Xy = X_value(s, true);
    double rp = s.psi.principal() ? 1.0 : 2.0;
    unsigned want = nprimes == 32 ? ~0u : (1u << nprimes) - 1;
    std::vector<kahan_sum> acc(static_cast<size_t>(nprimes));
    rho_walk(s.G, plus, cut, rp, [&](i64 norm, int cls, double rho_n, unsigned mask) {
        if (cls != s.cls) return;
        unsigned m = mask & want;
        if (!m) return;
        double w = rho_n * std::exp(-s.y * static_cast<double>(norm) / s.x);
        while (m) {
            acc[static_cast<size_t>(std::countr_zero(m))] += w;
            m &= m - 1;
        }
    });
    std::vector<remainder_row> rows(static_cast<size_t>(nprimes));
    for (int i = 0; i < nprimes; ++i) {
        auto& row = rows[static_cast<size_t>(i)];
        row.p = plus[static_cast<size_t>(i)];
        row.mass = acc[static_cast<size_t>(i)].value();
        row.gX = local_g(s.psi, row.p) * Xy;
        row.r = row.mass - row.gX;
        row.rel = std::abs(row.r) / row.gX;
    }
    return rows;
}

double remainder_single(const field_setup& s, const std::vector<prime_ideal>& d_primes) {
    check_setup(s);
    require(!d_primes.empty(), errc::bad_input, "remainder_single: empty divisor");
    i64 cut = resolved_cutoff(s, s.y);
    i64 dn = 1;
    int dcls = 0;
    double gd = 1.0;
    for (const auto& q : d_primes) {
        // a psi = -1 factor kills every multiple (rho vanishes) and g alike,
        // so the remainder is exactly zero
        if (s.psi(q.cls) != 1) return 0.0;
        dn *= q.norm;
        dcls = s.G.mul(dcls, q.cls);
        gd *= local_g(s.psi, q);
    }
    require(dn <= cut, errc::bad_input, "remainder_single: divisor norm exceeds the cutoff");
    auto plus = sieve_pool(s, static_cast<double>(cut) + 0.5);
    std::erase_if(plus, [&](const prime_ideal& q) {
        for (const auto& r : d_primes)
            if (r.p == q.p && r.root == q.root) return true;
        return false;
    });
    require(plus.size() + d_primes.size() ==
                sieve_pool(s, static_cast<double>(cut) + 0.5).size(),
            errc::bad_input, "remainder_single: divisor primes must be distinct");
    double rp = s.psi.principal() ? 1.0 : 2.0;
    double rho_d = std::pow(rp, static_cast<double>(d_primes.size()));
    kahan_sum mass;
    rho_walk(s.G, plus, cut / dn, rp, [&](i64 norm, int cls, double rho_n, unsigned) {
        if (s.G.mul(dcls, cls) != s.cls) return;
        mass += rho_d * rho_n *
                std::exp(-s.y * static_cast<double>(dn) * static_cast<double>(norm) / s.x);
    });
    return mass.value() - gd * X_value(s, true);
}

remainder_batch_result remainder_batch(const field_setup& s, double level) {
    check_setup(s);
    require(level >= 2.0 && level <= 1e6, errc::bad_input,
            "remainder_batch: level outside [2, 1e6]");
    i64 cut = resolved_cutoff(s, s.y);
    require(level <= static_cast<double>(cut), errc::bad_input,
            "remainder_batch: level beyond the sequence cutoff");
    auto plus = sieve_pool(s, static_cast<double>(cut) + 0.5);
    double Xy = X_value(s, true);
    double rp = s.psi.principal() ? 1.0 : 2.0;

    // one streaming pass: masses of every squarefree pool product below
    // `level` that divides some support element
    std::map<divisor_key, kahan_sum> mass;
    ideal_fact cur;
    std::vector<std::pair<std::pair<i64, int>, i64>> small; // (key, norm) of chain part < level
    i64 nodes = 0;
    auto rec = [&](auto&& self, size_t start, i64 norm, int cls, double rho_n) -> void {
        require(++nodes <= kWalkCap, errc::too_large, "remainder_batch: walk exceeded its cap");
        if (cls == s.cls) {
            double w = rho_n * std::exp(-s.y * static_cast<double>(norm) / s.x);
            // subsets of the small support with product below level
            auto sub = [&](auto&& sf, size_t i, i64 dn, divisor_key& key) -> void {
                mass[key] += w;
                for (size_t j = i; j < small.size(); ++j) {
                    if (static_cast<double>(dn) * static_cast<double>(small[j].second) >= level)
                        continue;
                    key.push_back(small[j].first);
                    sf(sf, j + 1, dn * small[j].second, key);
                    key.pop_back();
                }
            };
            divisor_key key;
            sub(sub, 0, 1, key);
            require(mass.size() <= 5'000'000, errc::too_large,
                    "remainder_batch: divisor table exceeded cap");
        }
        for (size_t i = start; i < plus.size(); ++i) {
            const prime_ideal& q = plus[i];
            if (q.norm > cut / norm) break;
            bool is_small = static_cast<double>(q.norm) < level;
            if (is_small) small.push_back({{q.p, q.root}, q.norm});
            self(self, i + 1, norm * q.norm, s.G.mul(cls, q.cls), rho_n * rp);
            if (is_small) small.pop_back();
        }
    };
    rec(rec, 0, 1, 0, 1.0);

    // every candidate divisor below level, hit or not
    remainder_batch_result out;
    std::vector<prime_ideal> cand;
    for (const auto& q : plus)
        if (static_cast<double>(q.norm) < level) cand.push_back(q);
    divisor_key key;
    std::vector<double> gstack{1.0};
    auto walk = [&](auto&& self, size_t start, i64 dn) -> void {
        ++out.divisors;
        require(out.divisors <= 5'000'000, errc::too_large,
                "remainder_batch: candidate count exceeded cap");
        auto it = mass.find(key);
        double m = it == mass.end() ? 0.0 : it->second.value();
        double r = m - gstack.back() * Xy;
        double scaled = std::abs(r) * std::sqrt(static_cast<double>(dn));
        if (scaled > out.max_scaled) {
            out.max_scaled = scaled;
            out.argmax = key;
        }
        for (size_t i = start; i < cand.size(); ++i) {
            if (static_cast<double>(dn) * static_cast<double>(cand[i].norm) >= level) continue;
            key.emplace_back(cand[i].p, cand[i].root);
            gstack.push_back(gstack.back() * local_g(s.psi, cand[i]));
            self(self, i + 1, dn * cand[i].norm);
            gstack.pop_back();
            key.pop_back();
        }
    };
    walk(walk, 0, 1);
    return out;
}

structural_constants_t structural_constants(const field_setup& s) {
    check_setup(s);
    structural_constants_t c;
    double dk = static_cast<double>(-s.d);
    if (!s.psi.principal()) {
        c.W_psi = 16.0 * dk * dk;
        c.Q_psi = std::sqrt(4.0 * dk);
        c.d_psi = dk * dk;
        c.C_psi = std::exp(2.0 + s.delta);
        c.A = 16.0;
        c.B = 6.0 + 5.0 / 2.0;
        c.C = 5.0 + 2.0 / 2.0;
        c.A2 = 16.0;
        c.B2 = 7.0 + 5.0 / 2.0;
        c.C2 = 7.0 + 2.0 / 2.0;
    } else {
        c.W_psi = 4.0 * dk;
        c.Q_psi = std::pow(4.0 * dk, 0.25);
        c.d_psi = dk;
        c.C_psi = std::exp(1.0 + s.delta);
        c.A = 6.0;
        c.B = 3.0 + 4.0 / 2.0;
        c.C = 3.0;
        c.A2 = 6.0;
        c.B2 = 4.0 + 4.0 / 2.0;
        c.C2 = 5.0;
    }
    c.h_bound = std::exp(2.0) * std::sqrt(dk);
    return c;
}

hypothesis_checks hypothesis_report(const field_setup& s) {
    check_setup(s);
    auto st = structural_constants(s);
    auto fc = compute_constants(s);
    double E = std::exp(2.0 * s.M_delta);
    double P0 = 4.0 * static_cast<double>(-s.d);
    // every margin is reported, so overflow to inf is not acceptable; clamp
    // the astronomically large right-hand sides at e^700 instead
    auto poww = [](double base, double e) {
        return std::exp(std::min(e * std::log(base), 700.0));
    };
    double cap = std::min(poww(P0, 100.0) * E, std::exp(700.0));
    double kk = 1.0 / fc.kappa_psi_v + 1.0;
    double h = static_cast<double>(fc.h);
    double e50 = 1.0 + 50.0 * s.delta;

    hypothesis_checks H;
    H.x_upper = make_check(s.x, cap, false);
    H.x_lower_1 = make_check(
        s.x,
        poww(std::pow(kk, 4.0) * st.W_psi * std::pow(st.Q_psi, 4.0) * std::pow(h, 4.0), e50) * E,
        true);
    double inner = s.psi.principal()
                       ? std::pow(kk, 3.0) * std::pow(st.W_psi, 1.5) * st.Q_psi * st.Q_psi * h * h
                       : std::pow(kk, 5.0) * std::pow(st.W_psi, 2.5) * st.Q_psi * st.Q_psi * h * h;
    H.x_lower_2 = make_check(s.x, poww(inner, e50) * E, true);

    H.z_low = std::pow(kk, 1.0 + s.delta) * std::pow(st.W_psi, 0.5 + s.delta) * E;
    H.z_cap = cap;
    H.z_window.lhs = H.z_low;
    H.z_window.rhs = H.z_cap;
    H.z_window.holds = H.z_low <= s.z && s.z <= H.z_cap;
    H.z_window.margin = std::min(s.z / H.z_low, H.z_cap / s.z);

    kahan_sum ps;
    for (const auto& q : sieve_pool(s, s.z)) ps += 1.0 / static_cast<double>(q.norm);
    H.small_prime_sum = make_check(ps.value(), 1.0 + s.delta, false);

    H.eta_min = make_check(s.eta, 20.0, true);
    H.beta = s.eta >= 20.0 ? beta_from_eta(s.d, s.eta).beta
                           : 1.0 - 1.0 / (s.eta * std::log(P0));
    return H;
}

double c_psi_reference(bool quadratic, double delta) {
    require(delta >= 0.0 && delta < 0.25, errc::bad_input,
            "c_psi_reference: delta outside [0, 0.25)");
    double y = quadratic ? 7.37 : 4.54;
    double tau = quadratic ? 5.5 : 3.5; // pins (n0, n1) = (6, 5) resp. (4, 3)
    double C = std::exp((quadratic ? 2.0 : 1.0) + delta);
    auto [E0, E1] = E0_E1(C, tau);
    return ((1.0 - E0) / y - std::exp(1.0 - y) * (1.0 + E1)) / C;
}

theorem1_result theorem1_report(const field_setup& s) {
    check_setup(s);
    require(s.psi(s.cls) == 1, errc::non_residue_class,
            "theorem1_report: psi is -1 on the target class");
    require(s.z * s.z <= s.x, errc::bad_input, "theorem1_report: need z <= sqrt x");

    theorem1_result r;
    r.consts = compute_constants(s);
    bool quad = !s.psi.principal();
    r.c_psi = quad ? 0.00466 : 0.0557;

    auto allp = primes_up_to(s.G, static_cast<i64>(std::ceil(s.x)), s.ordering);
    i64 cnt = 0;
    kahan_sum s1;
    double rhoP = quad ? 2.0 : 1.0;
    for (const auto& q : allp) {
        if (static_cast<double>(q.norm) >= s.x || q.cls != s.cls) continue;
        s1 += rhoP * std::exp(-s.y * static_cast<double>(q.norm) / s.x);
        if (q.kind == split_kind::ramified && !s.count_ramified) continue;
        ++cnt;
    }
    r.lhs_count = cnt;
    r.S1 = s1.value();
    r.rhs_bound = r.c_psi * r.consts.delta_psi * r.consts.kappa_K_v * s.x / r.consts.h;
    r.lhs_ok = static_cast<double>(r.lhs_count) >= r.rhs_bound;

    auto A = build_sequence(s);
    auto A1 = build_sequence(s, 1.0);
    double rx = std::sqrt(s.x);
    auto pool = sieve_pool(s, rx);
    auto model = make_model(s, true);
    r.X_y = model.X;
    r.V_z = V_of_z(pool, model, s.z);
    r.S_z = S_direct(A, pool, s.z);
    r.S_sqrtx = S_direct(A, pool, rx);
    r.unit_term = s.cls == s.G.identity() ? std::exp(-s.y / s.x) : 0.0;
    r.S2 = r.S_sqrtx - r.S1 - r.unit_term;
    r.S2_bound = std::exp(1.0 - s.y) * S_direct(A1, pool, s.z);
    r.tail_ok = r.S2 <= r.S2_bound + 1e-9 * std::max(1.0, std::abs(r.S2_bound));

    // Buchstab over the large sifting primes: bucket each entry by its least
    // pool prime; entries whose least prime has norm >= z are exactly the
    // ones subtracted between S(A, z) and S(A, sqrt x).
    kahan_sum lps;
    for (const auto& [n, a] : A.entries) {
        const prime_ideal* best = nullptr;
        for (const auto& [q, e] : n.factors) {
            if (static_cast<double>(q.norm) >= rx) continue;
            if (!best || prime_less(q, *best, s.ordering)) best = &q;
        }
        if (best && static_cast<double>(best->norm) >= s.z) lps += a;
    }
    r.large_prime_sum = lps.value();
    r.buchstab_gap = r.S_z - r.large_prime_sum - r.S_sqrtx;
    r.buchstab_exact =
        std::abs(r.buchstab_gap) <= 1e-9 * std::max({1.0, r.S_z, r.S_sqrtx});
    r.hypothesis = hypothesis_report(s);
    return r;
}

large_prime_result large_prime_profile(const field_setup& s) {
    check_setup(s);
    // z >= sqrt x leaves no room between the thresholds: the result is
    // degenerate but well formed (no rows, both sides zero)
    auto A = build_sequence(s);
    double rx = std::sqrt(s.x);
    auto pool = sieve_pool(s, rx);

    large_prime_result out;
    std::vector<size_t> slot(pool.size(), SIZE_MAX);
    for (size_t i = 0; i < pool.size(); ++i) {
        if (static_cast<double>(pool[i].norm) < s.z) continue;
        slot[i] = out.rows.size();
        out.rows.push_back({pool[i], 0.0, 1.0 / static_cast<double>(pool[i].norm)});
    }
    std::vector<kahan_sum> acc(out.rows.size());
    auto pos_of = [&](const prime_ideal& q) -> size_t {
        for (size_t i = 0; i < pool.size(); ++i)
            if (pool[i].p == q.p && pool[i].root == q.root) return i;
        return SIZE_MAX;
    };
    for (const auto& [n, a] : A.entries) {
        const prime_ideal* best = nullptr;
        for (const auto& [q, e] : n.factors) {
            if (static_cast<double>(q.norm) >= rx) continue;
            if (!best || prime_less(q, *best, s.ordering)) best = &q;
        }
        if (!best || static_cast<double>(best->norm) < s.z) continue;
        size_t i = pos_of(*best);
        require(i != SIZE_MAX && slot[i] != SIZE_MAX, errc::inconsistent,
                "large_prime_profile: bucket prime missing from the pool");
        acc[slot[i]] += a;
    }
    kahan_sum sum, res;
    for (size_t i = 0; i < out.rows.size(); ++i) {
        out.rows[i].S_term = acc[i].value();
        sum += out.rows[i].S_term;
        res += out.rows[i].inv_norm;
    }
    out.sum = sum.value();
    out.residue_sum = res.value();
    out.lhs = S_direct(A, pool, s.z) - S_direct(A, pool, rx);
    out.exact = std::abs(out.lhs - out.sum) <=
                1e-9 * std::max({1.0, std::abs(out.lhs), std::abs(out.sum)});
    return out;
}

least_prime_result least_prime(const class_group& G, int cls, i64 bound) {
    require(cls >= 0 && cls < G.h(), errc::bad_input, "least_prime: class index out of range");
    require(bound >= 2, errc::bad_input, "least_prime: bound below 2");

    auto is_prime = [](i64 n) {
        if (n < 2) return false;
        for (i64 q = 2; q * q <= n; ++q)
            if (n % q == 0) return false;
        return true;
    };
    // Q_cls(u, v) = p has a solution iff some ideal of norm p sits in the
    // class or its inverse; the match test below guarantees one exists.
    auto witness = [&](i64 p) -> std::pair<i64, i64> {
        const quad_form& Q = G.forms[static_cast<size_t>(cls)];
        i64 absd = -G.d;
        for (i64 v = 0;; ++v) {
            i128 rem = i128(4) * Q.a * p - i128(absd) * v * v;
            if (rem < 0) break;
            i64 sq = static_cast<i64>(std::sqrt(static_cast<double>(rem)));
            while (i128(sq) * sq > rem) --sq;
            while (i128(sq + 1) * (sq + 1) <= rem) ++sq;
            if (i128(sq) * sq != rem) continue;
            for (i64 sg : {sq, -sq}) {
                i64 num = -Q.b * v + sg;
                if (num % (2 * Q.a) == 0) return {num / (2 * Q.a), v};
                if (sq == 0) break;
            }
        }
        fail(errc::inconsistent, "least_prime: no witness for a matched prime");
    };
    auto matches = [&](i64 p) {
        int c = prime_above(G, p, 0).cls;
        return c == cls || G.inverse(c) == cls;
    };

    least_prime_result r;
    i64 best_norm = 0;
    bool norm_done = false;
    for (i64 p = 2; p <= bound; ++p) {
        if (!is_prime(p)) continue;
        split_kind k = split_type(G.d, p);
        if (k == split_kind::inert) {
            if (cls == G.identity() && (best_norm == 0 || p * p < best_norm) &&
                p <= bound / p)
                best_norm = p * p;
        } else if (matches(p)) {
            if (r.p_all == 0) {
                r.p_all = p;
                std::tie(r.u_all, r.v_all) = witness(p);
            }
            if (k == split_kind::split && r.p_split == 0) {
                r.p_split = p;
                std::tie(r.u_split, r.v_split) = witness(p);
            }
            if (best_norm == 0 || p < best_norm) best_norm = p;
        }
        if (best_norm != 0 && p >= best_norm) norm_done = true;
        if (r.p_all != 0 && r.p_split != 0 && norm_done) break;
    }
    require(r.p_all != 0, errc::not_found_below,
            "least_prime: no represented prime below the bound");
    require(r.p_split != 0, errc::not_found_below,
            "least_prime: no represented split prime below the bound");
    require(best_norm != 0, errc::not_found_below,
            "least_prime: no prime-ideal norm found below the bound");
    r.least_norm = best_norm;
    return r;
}

std::vector<scan_row> scan_least_primes(i64 d_from, i64 d_to, i64 bound, int threads) {
    require(d_from <= -3 && d_to <= d_from, errc::bad_input,
            "scan_least_primes: need d_to <= d_from <= -3");
    std::vector<i64> ds;
    for (i64 d = d_from; d >= d_to; --d)
        if (is_fundamental(d)) ds.push_back(d);

    unsigned n = threads > 0 ? static_cast<unsigned>(threads)
                             : std::min(std::thread::hardware_concurrency(), 8u);
    if (n == 0) n = 1;
    if (n > ds.size() && !ds.empty()) n = static_cast<unsigned>(ds.size());

    std::vector<std::vector<scan_row>> slots(ds.size());
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= ds.size()) return;
            i64 d = ds[i];
            auto& rows = slots[i];
            try {
                class_group G = make_class_group(d);
                auto chars = real_characters(G);
                std::vector<std::optional<least_prime_result>> cache(
                    static_cast<size_t>(G.h()));
                double logd = std::log(static_cast<double>(-d));
                for (size_t ci = 0; ci < chars.size(); ++ci) {
                    for (int cls = 0; cls < G.h(); ++cls) {
                        if (chars[ci](cls) != 1) continue;
                        auto& lp = cache[static_cast<size_t>(cls)];
                        if (!lp) lp = least_prime(G, cls, bound);
                        scan_row row;
                        row.d = d;
                        row.h = G.h();
                        row.char_index = static_cast<int>(ci);
                        row.quadratic = !chars[ci].principal();
                        row.cls = cls;
                        row.p_all = lp->p_all;
                        row.p_split = lp->p_split;
                        row.least_norm = lp->least_norm;
                        row.u_all = lp->u_all;
                        row.v_all = lp->v_all;
                        row.u_split = lp->u_split;
                        row.v_split = lp->v_split;
                        row.ratio_all = std::log(static_cast<double>(lp->p_all)) / logd;
                        row.ratio_split = std::log(static_cast<double>(lp->p_split)) / logd;
                        row.ok = true;
                        rows.push_back(std::move(row));
                    }
                }
            } catch (const error& e) {
                scan_row row;
                row.d = d;
                row.ok = false;
                row.note = e.what();
                rows.push_back(std::move(row));
            }
        }
    };
    std::vector<std::thread> tv;
    for (unsigned t = 0; t < n; ++t) tv.emplace_back(work);
    for (auto& t : tv) t.join();

    std::vector<scan_row> out;
    for (auto& rows : slots)
        for (auto& row : rows) out.push_back(std::move(row));
    return out;
}

} // namespace formsieve
