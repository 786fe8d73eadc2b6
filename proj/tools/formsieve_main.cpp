// formsieve -- command-line front end.
//
// Subcommands:
//   classgroup   reduced forms and group structure of one discriminant (JSON)
//   sieve        truncated-sieve report for one sifting problem (JSON)
//   scan         least represented primes over a discriminant range (TSV or JSON)
//
// Every numeric field is rounded to 12 significant digits before printing, so
// repeated runs -- and cache hits vs. cold recomputation -- are byte-identical.
// Exit codes: 0 success; 1 analytic refusal (wrong character sign on the
// target class, violated hypothesis); 2 usage errors and bad input.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "formsieve/characters.hpp"
#include "formsieve/common.hpp"
#include "formsieve/exceptional.hpp"
#include "formsieve/ideals.hpp"
#include "formsieve/qfield.hpp"
#include "formsieve/sieve.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace formsieve;

namespace {

// --------------------------------------------------------------------------
// shared configuration, echoed in every report

struct cli_config {
    double delta = 0.1;
    double eta = 1e4;
    double M_delta = 1.0;
    i64 cutoff = 0; // 0 = smallest admissible (40 x / y)
    i64 density_cutoff = 1'000'000;
    std::string cache_dir = ".formsieve-cache";
    bool ramified = true;
    std::string tie_break = "p-root";
};

prime_order ordering_of(const std::string& s) {
    if (s == "p-root") return prime_order::by_p_then_root;
    if (s == "root-p") return prime_order::by_root_then_p;
    fail(errc::bad_input, "tie-break must be p-root or root-p");
}

void add_config_options(CLI::App* sub, cli_config& c) {
    sub->add_option("--delta", c.delta, "window slack delta")->capture_default_str();
    sub->add_option("--eta", c.eta, "smoothing parameter eta")->capture_default_str();
    sub->add_option("--mdelta", c.M_delta, "hypothesis margin constant M_delta")->capture_default_str();
    sub->add_option("--cutoff", c.cutoff, "sequence cutoff (0 = smallest admissible)")->capture_default_str();
    sub->add_option("--density-cutoff", c.density_cutoff, "Euler-product / L(1) truncation")->capture_default_str();
    sub->add_option("--cache-dir", c.cache_dir, "class-group cache directory (env SIEGEL_SIEVE_CACHE overrides)")->capture_default_str();
    sub->add_flag("--ramified,!--no-ramified", c.ramified, "include ramified primes in point counts")->capture_default_str();
    sub->add_option("--tie-break", c.tie_break, "conjugate-prime order")->capture_default_str()->check(CLI::IsMember({"p-root", "root-p"}));
}

// 12 significant digits -- the printing precision of every float in a report.
std::string num12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Round through the printed form so the JSON serializer (shortest round-trip)
// emits exactly the 12-digit value.
double round12(double v) { return std::strtod(num12(v).c_str(), nullptr); }

std::string effective_cache_dir(const cli_config& c) {
    const char* env = std::getenv("SIEGEL_SIEVE_CACHE");
    return (env && *env) ? std::string(env) : c.cache_dir;
}

json config_json(const cli_config& c) {
    json j;
    j["delta"] = round12(c.delta);
    j["eta"] = round12(c.eta);
    j["m_delta"] = round12(c.M_delta);
    j["cutoff"] = c.cutoff;
    j["density_cutoff"] = c.density_cutoff;
    j["cache_dir"] = effective_cache_dir(c);
    j["ramified_included"] = c.ramified;
    j["tie_break"] = c.tie_break;
    return j;
}

// --------------------------------------------------------------------------
// class-group cache: one JSON file per discriminant, validated on read.
// A cached group is trusted only after passing the checks a fresh computation
// satisfies by construction; anything off silently falls back to recomputing.

constexpr int kCacheVersion = 1;

fs::path cache_path(const cli_config& c, i64 d) {
    return fs::path(effective_cache_dir(c)) / ("classgroup_" + std::to_string(d) + ".json");
}

bool group_valid(const class_group& G, i64 d) {
    if (G.d != d || G.forms.empty()) return false;
    const int h = G.h();
    if (G.table.size() != static_cast<size_t>(h) * h) return false;
    for (int v : G.table)
        if (v < 0 || v >= h) return false;
    for (int i = 0; i < h; ++i) {
        const quad_form& f = G.forms[i];
        if (f.disc() != d || !is_reduced(f) || gcd3(f.a, f.b, f.c) != 1) return false;
        if (i > 0) {
            const quad_form& e = G.forms[i - 1];
            if (std::tie(e.a, e.b, e.c) >= std::tie(f.a, f.b, f.c)) return false;
        }
    }
    if (G.forms[0] != principal_form(d)) return false;
    for (int i = 0; i < h; ++i)
        if (G.mul(0, i) != i || G.mul(i, 0) != i || G.mul(i, G.inverse(i)) != 0) return false;
    // associativity: exhaustive for small tables, a deterministic stride above
    auto assoc = [&](int i, int j, int k) { return G.mul(G.mul(i, j), k) == G.mul(i, G.mul(j, k)); };
    if (h <= 24) {
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < h; ++j)
                for (int k = 0; k < h; ++k)
                    if (!assoc(i, j, k)) return false;
    } else {
        for (int t = 0; t < 20000; ++t)
            if (!assoc((t * 7) % h, (t * 13 + 1) % h, (t * 31 + 2) % h)) return false;
    }
    if (G.generators.size() != G.structure.size()) return false;
    i64 prod = 1;
    for (size_t t = 0; t < G.structure.size(); ++t) {
        if (G.structure[t] < 2) return false;
        if (t > 0 && G.structure[t] % G.structure[t - 1] != 0) return false;
        int g = G.generators[t];
        if (g < 0 || g >= h || G.order_of(g) != G.structure[t]) return false;
        prod *= G.structure[t];
    }
    return prod == h;
}

std::optional<class_group> cache_load(const cli_config& c, i64 d) {
    std::ifstream in(cache_path(c, d));
    if (!in) return std::nullopt;
    json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) return std::nullopt;
    try {
        if (j.at("version").get<int>() != kCacheVersion) return std::nullopt;
        if (j.at("disc").get<i64>() != d) return std::nullopt;
        class_group G;
        G.d = d;
        for (const auto& row : j.at("forms"))
            G.forms.push_back({row.at(0).get<i64>(), row.at(1).get<i64>(), row.at(2).get<i64>()});
        G.table = j.at("table").get<std::vector<int>>();
        G.structure = j.at("structure").get<std::vector<i64>>();
        G.generators = j.at("generators").get<std::vector<int>>();
        if (!group_valid(G, d)) return std::nullopt;
        return G;
    } catch (...) {
        return std::nullopt;
    }
}

void cache_store(const cli_config& c, const class_group& G) {
    std::error_code ec;
    fs::create_directories(effective_cache_dir(c), ec);
    if (ec) return; // the cache is best effort, never fatal
    json j;
    j["version"] = kCacheVersion;
    j["disc"] = G.d;
    json forms = json::array();
    for (const auto& f : G.forms) forms.push_back({f.a, f.b, f.c});
    j["forms"] = std::move(forms);
    j["table"] = G.table;
    j["structure"] = G.structure;
    j["generators"] = G.generators;
    fs::path target = cache_path(c, G.d);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    std::ofstream out(tmp);
    if (!out) return;
    out << j.dump() << '\n';
    out.close();
    if (!out) {
        fs::remove(tmp, ec);
        return;
    }
    fs::rename(tmp, target, ec); // atomic replace
    if (ec) fs::remove(tmp, ec);
}

class_group load_group(const cli_config& c, i64 d) {
    if (auto g = cache_load(c, d)) return std::move(*g);
    class_group G = make_class_group(d);
    cache_store(c, G);
    return G;
}

field_setup make_setup(const cli_config& c, i64 d, int char_index, int cls) {
    field_setup s;
    s.d = d;
    s.G = load_group(c, d);
    auto chars = real_characters(s.G);
    require(char_index >= 0 && static_cast<size_t>(char_index) < chars.size(), errc::bad_input,
            "character index out of range (this field has " + std::to_string(chars.size()) + " real characters)");
    require(cls >= 0 && cls < s.G.h(), errc::bad_input,
            "class index out of range (h = " + std::to_string(s.G.h()) + ")");
    s.psi = chars[char_index];
    s.cls = cls;
    s.y = s.psi.principal() ? 4.54 : 7.37;
    s.delta = c.delta;
    s.eta = c.eta;
    s.M_delta = c.M_delta;
    s.cutoff = c.cutoff;
    s.density_cutoff = c.density_cutoff;
    s.count_ramified = c.ramified;
    s.ordering = ordering_of(c.tie_break);
    return s;
}

// --------------------------------------------------------------------------
// classgroup

int cmd_classgroup(const cli_config& c, i64 d) {
    class_group G = load_group(c, d);
    json j;
    j["command"] = "classgroup";
    j["disc"] = d;
    j["h"] = G.h();
    j["structure"] = G.structure;
    json forms = json::array();
    for (const auto& f : G.forms) forms.push_back({f.a, f.b, f.c});
    j["reduced_forms"] = std::move(forms);
    json gens = json::array();
    for (int g : G.generators) gens.push_back({G.forms[g].a, G.forms[g].b, G.forms[g].c});
    j["generators"] = std::move(gens);
    j["fundamental"] = G.fundamental();
    j["config"] = config_json(c);
    std::cout << j.dump(2) << '\n';
    return 0;
}

// --------------------------------------------------------------------------
// sieve

struct sieve_args {
    i64 d = -20;
    int char_index = 0;
    int cls = 0;
    double x = 1000;
    double y = 0; // 0 = per-character default (4.54 principal, 7.37 quadratic)
    double z = 10;
    double level = 100;
    bool theorem1 = false;
};

json check_json(const hyp_check& h) {
    json j;
    j["holds"] = h.holds;
    j["lhs"] = round12(h.lhs);
    j["rhs"] = round12(h.rhs);
    j["margin"] = round12(h.margin);
    return j;
}

json hypothesis_json(const hypothesis_checks& H) {
    json j;
    j["x_upper"] = check_json(H.x_upper);
    j["x_lower_1"] = check_json(H.x_lower_1);
    j["x_lower_2"] = check_json(H.x_lower_2);
    j["z_window"] = check_json(H.z_window);
    j["small_prime_sum"] = check_json(H.small_prime_sum);
    j["eta_min"] = check_json(H.eta_min);
    j["z_low"] = round12(H.z_low);
    j["z_cap"] = round12(H.z_cap);
    j["beta"] = round12(H.beta);
    return j;
}

json constants_json(const field_constants& k) {
    json j;
    j["h"] = k.h;
    j["kappa_K"] = round12(k.kappa_K_v);
    j["L1"] = round12(k.L1);
    j["kappa_psi"] = round12(k.kappa_psi_v);
    j["b_psi"] = round12(k.b_psi);
    j["delta_psi"] = round12(k.delta_psi);
    return j;
}

json fl_json(const fl_report& r) {
    json j;
    j["S"] = round12(r.S);
    j["S_check"] = round12(r.S_check);
    j["S_plus"] = round12(r.S_plus);
    j["S_minus"] = round12(r.S_minus);
    j["V"] = round12(r.V);
    j["V_plus"] = round12(r.V_plus);
    j["V_minus"] = round12(r.V_minus);
    j["R_plus"] = round12(r.R_plus);
    j["R_minus"] = round12(r.R_minus);
    json st = json::array(), vt = json::array();
    for (double v : r.S_terms) st.push_back(round12(v));
    for (double v : r.V_terms) vt.push_back(round12(v));
    j["S_terms"] = std::move(st);
    j["V_terms"] = std::move(vt);
    j["tau"] = round12(r.tau);
    j["C_used"] = round12(r.C_used);
    j["E0"] = round12(r.E0);
    j["E1"] = round12(r.E1);
    j["X"] = round12(r.X);
    j["sandwich_ok"] = r.sandwich_ok;
    j["buchstab_ok"] = r.buchstab_ok;
    j["fl_ok"] = r.fl_ok;
    return j;
}

json theorem1_json(const theorem1_result& t) {
    json j;
    j["constants"] = constants_json(t.consts);
    j["c_psi"] = round12(t.c_psi);
    j["lhs_count"] = t.lhs_count;
    j["rhs_bound"] = round12(t.rhs_bound);
    j["lhs_ok"] = t.lhs_ok;
    j["X_y"] = round12(t.X_y);
    j["V_z"] = round12(t.V_z);
    j["S_z"] = round12(t.S_z);
    j["S_sqrtx"] = round12(t.S_sqrtx);
    j["S1"] = round12(t.S1);
    j["unit_term"] = round12(t.unit_term);
    j["S2"] = round12(t.S2);
    j["S2_bound"] = round12(t.S2_bound);
    j["tail_ok"] = t.tail_ok;
    j["large_prime_sum"] = round12(t.large_prime_sum);
    j["buchstab_gap"] = round12(t.buchstab_gap);
    j["buchstab_exact"] = t.buchstab_exact;
    j["hypothesis"] = hypothesis_json(t.hypothesis);
    return j;
}

int cmd_sieve(const cli_config& c, const sieve_args& a) {
    field_setup s = make_setup(c, a.d, a.char_index, a.cls);
    s.x = a.x;
    if (a.y != 0) s.y = a.y;
    s.z = a.z;
    require(a.level >= 1.0, errc::bad_input, "level must be >= 1");

    sieve_sequence A = build_sequence(s);
    std::vector<prime_ideal> pool = sieve_pool(s, s.z);
    density_model model = make_model(s, /*y_weighted=*/true);
    sieve_params sp;
    sp.z = s.z;
    sp.level = a.level;
    sp.ordering = s.ordering;
    fl_report rep = buchstab_check(A, pool, sp, model);

    json j;
    j["command"] = "sieve";
    json setup;
    setup["disc"] = s.d;
    setup["char_index"] = a.char_index;
    setup["char_kind"] = s.psi.principal() ? "principal" : "quadratic";
    setup["class"] = s.cls;
    setup["x"] = round12(s.x);
    setup["y"] = round12(s.y);
    setup["z"] = round12(s.z);
    setup["level"] = round12(a.level);
    setup["tau"] = round12(sp.tau());
    setup["entries"] = static_cast<i64>(A.entries.size());
    setup["pool_primes"] = static_cast<i64>(pool.size());
    j["setup"] = std::move(setup);
    j["constants"] = constants_json(compute_constants(s));
    j["report"] = fl_json(rep);
    if (a.theorem1) j["theorem1"] = theorem1_json(theorem1_report(s));
    j["config"] = config_json(c);
    std::cout << j.dump(2) << '\n';
    return 0;
}

// --------------------------------------------------------------------------
// scan

struct scan_args {
    i64 dmin = 0; // most negative end
    i64 dmax = 0; // closest to 0
    i64 bound = 1'000'000;
    int threads = 0;
    bool as_json = false;
};

int cmd_scan(const cli_config& c, const scan_args& a) {
    // scan_least_primes takes (d_from, d_to) with d_from nearest 0
    auto rows = scan_least_primes(a.dmax, a.dmin, a.bound, a.threads);

    size_t failures = 0;
    double max_q = 0, max_p = 0;
    bool any_q = false, any_p = false;
    for (const auto& r : rows) {
        if (!r.ok) {
            ++failures;
            continue;
        }
        double m = std::max(r.ratio_all, r.ratio_split);
        if (r.quadratic) {
            max_q = std::max(max_q, m);
            any_q = true;
        } else {
            max_p = std::max(max_p, m);
            any_p = true;
        }
    }

    if (a.as_json) {
        json j;
        j["command"] = "scan";
        j["dmin"] = a.dmin;
        j["dmax"] = a.dmax;
        j["bound"] = a.bound;
        json arr = json::array();
        for (const auto& r : rows) {
            json o;
            o["D"] = r.d;
            o["h"] = r.h;
            o["char_kind"] = r.ok ? (r.quadratic ? "quadratic" : "principal") : "-";
            o["char_index"] = r.char_index;
            o["class"] = r.cls;
            o["p_all"] = r.p_all;
            o["p_split"] = r.p_split;
            o["least_norm"] = r.least_norm;
            o["witness_all"] = {r.u_all, r.v_all};
            o["witness_split"] = {r.u_split, r.v_split};
            o["ratio_all"] = round12(r.ratio_all);
            o["ratio_split"] = round12(r.ratio_split);
            o["ok"] = r.ok;
            o["note"] = r.note;
            arr.push_back(std::move(o));
        }
        j["rows"] = std::move(arr);
        j["failures"] = static_cast<i64>(failures);
        j["max_ratio_quadratic"] = any_q ? json(round12(max_q)) : json(nullptr);
        j["max_ratio_principal"] = any_p ? json(round12(max_p)) : json(nullptr);
        json ref;
        ref["quadratic"] = 9.5;
        ref["principal"] = 6.0;
        j["reference_exponents"] = std::move(ref);
        j["config"] = config_json(c);
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "D\th\tchar_kind\tclass\tp_all\tp_split\tleast_norm\tratio_all\tratio_split\tok\tnote\n";
        for (const auto& r : rows) {
            std::cout << r.d << '\t' << r.h << '\t'
                      << (r.ok ? (r.quadratic ? "quadratic" : "principal") : "-") << '\t'
                      << r.cls << '\t' << r.p_all << '\t' << r.p_split << '\t' << r.least_norm << '\t'
                      << num12(r.ratio_all) << '\t' << num12(r.ratio_split) << '\t'
                      << (r.ok ? 1 : 0) << '\t' << r.note << '\n';
        }
        if (!rows.empty()) {
            std::cout << "# rows: " << rows.size() << "  failures: " << failures << '\n';
            if (any_q)
                std::cout << "# max log(p)/log|D|, quadratic characters: " << num12(max_q)
                          << "  (reference exponent 9.5)\n";
            if (any_p)
                std::cout << "# max log(p)/log|D|, principal character: " << num12(max_p)
                          << "  (reference exponent 6)\n";
            std::cout << "# config: delta=" << num12(c.delta) << " eta=" << num12(c.eta)
                      << " mdelta=" << num12(c.M_delta) << " bound=" << a.bound
                      << " ramified=" << (c.ramified ? 1 : 0) << " tie_break=" << c.tie_break << '\n';
        }
    }
    bool total_failure = !rows.empty() && failures == rows.size();
    return total_failure ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"zero-dimensional beta sieve over imaginary quadratic fields"};
    app.require_subcommand(1);
    cli_config cfg;

    auto* cg = app.add_subcommand("classgroup", "reduced forms and group structure of one discriminant");
    i64 cg_disc = -20;
    cg->add_option("--disc", cg_disc, "negative discriminant, = 0 or 1 mod 4")->required();
    add_config_options(cg, cfg);

    auto* sv = app.add_subcommand("sieve", "truncated-sieve report for one class and character");
    sieve_args sa;
    sv->add_option("--disc", sa.d, "fundamental discriminant")->capture_default_str();
    sv->add_option("--char", sa.char_index, "real-character index")->capture_default_str();
    sv->add_option("--class", sa.cls, "target form-class index")->capture_default_str();
    sv->add_option("--x", sa.x, "smoothing scale")->capture_default_str();
    sv->add_option("--y", sa.y, "decay weight (0 = per-character default)")->capture_default_str();
    sv->add_option("--z", sa.z, "sifting bound")->capture_default_str();
    sv->add_option("--level", sa.level, "truncation support bound")->capture_default_str();
    sv->add_flag("--theorem1", sa.theorem1, "append the lower-bound pipeline report");
    add_config_options(sv, cfg);

    auto* sc = app.add_subcommand("scan", "least represented primes over a discriminant range");
    scan_args ca;
    sc->add_option("--dmin", ca.dmin, "most negative discriminant of the range")->required();
    sc->add_option("--dmax", ca.dmax, "least negative discriminant of the range")->required();
    sc->add_option("--bound", ca.bound, "search bound per prime")->capture_default_str();
    sc->add_option("--threads", ca.threads, "worker threads (0 = hardware default)")->capture_default_str();
    sc->add_flag("--json", ca.as_json, "emit JSON instead of TSV");
    add_config_options(sc, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        app.exit(e);
        return 2;
    }

    try {
        if (cg->parsed()) return cmd_classgroup(cfg, cg_disc);
        if (sv->parsed()) return cmd_sieve(cfg, sa);
        return cmd_scan(cfg, ca);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << '\n';
        bool analytic = e.code == errc::non_residue_class || e.code == errc::hypothesis_violated;
        return analytic ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
