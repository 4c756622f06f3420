#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtrace/catalog.hpp"
#include "mtrace/ecurve.hpp"
#include "mtrace/errors.hpp"
#include "mtrace/ltconst.hpp"
#include "mtrace/modcurve.hpp"
#include "mtrace/mtclassify.hpp"

using nlohmann::json;
using namespace mtrace;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 2;
constexpr int kInputError = 3;

struct Globals {
    std::string out;
    bool compact = false;
    u64 cap = kDefaultClosureCap;
    unsigned threads = 1;
    std::string data_dir = default_data_dir();
};

json mat_json(const Mat& x) { return json::array({json::array({x.a, x.b}), json::array({x.c, x.d})}); }

json gens_json(const std::vector<Mat>& gens) {
    json a = json::array();
    for (const auto& g : gens) a.push_back(mat_json(g));
    return a;
}

json fingerprint_json(const Fingerprint& f) {
    json td = json::array();
    for (const auto& [k, n] : f.trace_det) td.push_back(json::array({k.first, k.second, n}));
    return {{"order", f.order}, {"minus_I", f.minus_identity}, {"trace_det", td}};
}

json genus_json(const GenusReport& g) {
    return {{"index", g.mu}, {"nu2", g.nu2}, {"nu3", g.nu3}, {"cusps", g.cusps}, {"genus", g.genus}};
}

json report_json(const Report& r) {
    json checks = json::array();
    for (const auto& c : r.checks) {
        json e = {{"subject", c.subject}, {"check", c.name}, {"ok", c.ok}};
        if (!c.detail.empty()) e["detail"] = c.detail;
        checks.push_back(e);
    }
    return {{"ok", r.ok()}, {"failures", r.failures()}, {"checks", checks}};
}

json rat_json(const Rat& q) { return q.get_str(); }

void emit(const Globals& g, const json& doc) {
    std::string text = g.compact ? doc.dump() : doc.dump(2);
    if (!g.out.empty()) {
        std::ofstream f(g.out);
        if (!f) throw CatalogError("cannot write " + g.out);
        f << doc.dump(2) << "\n";
    }
    if (g.out.empty() || g.compact) std::cout << text << "\n";
}

std::vector<GroupRecord> catalog_groups(const Globals& g, const std::string& path) {
    return load_groups(path.empty() ? g.data_dir + "/groups.json" : path);
}

// A catalog label, or a JSON file holding {"m": ..., "gens": [...]} or a groups file with one entry.
std::pair<std::string, Group> resolve_group(const Globals& g, const std::string& spec) {
    auto groups = catalog_groups(g, "");
    if (const GroupRecord* r = find_group(groups, spec)) return {r->label, r->group(g.cap)};
    std::ifstream in(spec);
    if (!in) throw CatalogError("'" + spec + "' is neither a catalog label nor a readable file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw CatalogError(spec + ": " + e.what());
    }
    if (doc.contains("groups")) {
        auto recs = load_groups(spec);
        if (recs.size() != 1) throw CatalogError(spec + ": expected exactly one group");
        return {recs[0].label, recs[0].group(g.cap)};
    }
    if (!doc.contains("m") || !doc.contains("gens")) throw CatalogError(spec + ": expected fields m and gens");
    u32 m = doc["m"].get<u32>();
    std::vector<Mat> gens;
    for (const auto& x : doc["gens"]) gens.push_back(parse_matrix(x.dump(), m));
    return {spec, Group::close(gens, m, g.cap)};
}

Rat parse_rat(const std::string& s) {
    Rat q;
    if (q.set_str(s, 10) != 0) throw CatalogError("not a rational number: " + s);
    q.canonicalize();
    return q;
}

LongModel parse_long(const std::string& s) {
    LongModel w;
    std::stringstream ss(s);
    std::string item;
    std::size_t i = 0;
    while (std::getline(ss, item, ',')) {
        if (i >= 5) throw CatalogError("--long takes five coefficients a1,a2,a3,a4,a6");
        w[i++] = parse_rat(item);
    }
    if (i != 5) throw CatalogError("--long takes five coefficients a1,a2,a3,a4,a6");
    return w;
}

int cmd_classify(const Globals& g, u32 level, i64 genus_bound, bool deep) {
    ClassifyOptions opts;
    opts.genus = genus_bound;
    opts.deep_levels = deep;
    opts.cap = g.cap;
    opts.threads = g.threads;
    auto found = classify(level, opts);
    std::vector<GroupRecord> groups;
    if (genus_bound == 0) groups = catalog_groups(g, "");
    json list = json::array();
    for (const auto& h : found) {
        json e = {{"modulus", h.modulus()},
                  {"order", h.order()},
                  {"gens", gens_json(small_generating_set(h))},
                  {"gl2_level", h.gl2_level()},
                  {"sl2_level", h.sl2_level()},
                  {"minus_I", h.contains_minus_identity()},
                  {"missing", missing_traces(h, level)},
                  {"genus", genus_json(genus(adjoin_minus_identity(h)))},
                  {"fingerprint", fingerprint_json(fingerprint(h))}};
        for (const auto& r : groups) {
            if (r.m != level) continue;
            Group c = r.group(g.cap);
            if (c.order() == h.order() && conjugacy(h, c, ConjMode::equal).holds) e["catalog_label"] = r.label;
        }
        list.push_back(e);
    }
    emit(g, {{"level", level}, {"genus", genus_bound}, {"count", found.size()}, {"groups", list}});
    return kOk;
}

int cmd_verify_catalog(const Globals& g, const std::string& groups_path, const std::string& families_path,
                       bool census, unsigned samples, u64 pmax) {
    auto groups = catalog_groups(g, groups_path);
    Report rep = verify_catalog(groups, g.cap);
    json doc = {{"groups", report_json(rep)}};
    bool ok = rep.ok();
    if (!families_path.empty() || census) {
        FamilyCatalog fams = load_families(families_path.empty() ? g.data_dir + "/families.json" : families_path);
        Report deg = verify_family_degrees(fams, groups);
        doc["families"] = report_json(deg);
        ok = ok && deg.ok();
        if (census) {
            CensusOptions opts;
            opts.samples = samples;
            opts.bound = pmax;
            opts.threads = g.threads;
            json list = json::array();
            for (const auto& f : fams.families) {
                const GroupRecord* r = find_group(groups, f.label);
                if (!r) continue;
                FamilyCensus c = family_census(f, *r, opts);
                json ss = json::array();
                for (const auto& s : c.samples)
                    ss.push_back({{"t", rat_json(s.t)}, {"d", rat_json(s.d)}, {"primes", s.primes}, {"hit", s.hit}});
                list.push_back({{"label", f.label}, {"m", c.m}, {"missing", c.missing}, {"ok", c.ok()}, {"samples", ss}});
                ok = ok && c.ok();
            }
            doc["census"] = list;
        }
    }
    doc["ok"] = ok;
    emit(g, doc);
    return ok ? kOk : kVerifyFailed;
}

int cmd_identities(const Globals& g, const std::string& families_path) {
    FamilyCatalog fams = load_families(families_path.empty() ? g.data_dir + "/families.json" : families_path);
    Report rep = run_identity_suite(fams);
    emit(g, report_json(rep));
    return rep.ok() ? kOk : kVerifyFailed;
}

int cmd_ap_scan(const Globals& g, const std::string& family, const std::string& t, const std::string& d, unsigned mod,
                u64 pmax, const std::string& long_model) {
    std::optional<Curve> e;
    bool skip_small = true;
    if (!long_model.empty()) {
        e.emplace(Curve::from_long(parse_long(long_model)));
        skip_small = false;
    } else {
        if (family.empty()) throw CatalogError("ap-scan needs --family or --long");
        FamilyCatalog fams = load_families(g.data_dir + "/families.json");
        const FamilyRecord* f = fams.find(family);
        if (!f) throw CatalogError("unknown family " + family);
        e.emplace(specialize(f->j, f->d, parse_rat(t), parse_rat(d)));
    }
    TraceCensus c = trace_census(*e, mod, pmax, skip_small, g.threads);
    json counts = json::object();
    for (const auto& [r, n] : c.counts) counts[std::to_string(r)] = n;
    emit(g, {{"modulus", mod},
             {"pmax", pmax},
             {"primes", c.primes},
             {"sequence", c.sequence},
             {"counts", counts},
             {"missing", c.missing()},
             {"A", rat_json(e->A())},
             {"B", rat_json(e->B())},
             {"j", rat_json(e->j())}});
    return kOk;
}

int cmd_genus(const Globals& g, const std::string& spec) {
    auto [label, grp] = resolve_group(g, spec);
    GenusReport r = genus(adjoin_minus_identity(grp));
    json doc = genus_json(r);
    doc["group"] = label;
    doc["gl2_level"] = grp.gl2_level();
    if (is_prime_power(grp.gl2_level())) doc["rational_point_test"] = sz_rational_point_test(grp);
    emit(g, doc);
    return kOk;
}

int cmd_lt(const Globals& g, const std::string& spec, i64 r, u32 bound) {
    auto [label, grp] = resolve_group(g, spec);
    LTFactorization f = lt_truncated(grp, r, bound);
    json factors = json::array();
    for (const auto& [l, v] : f.euler_factors) factors.push_back({{"l", l}, {"factor", rat_json(v)}});
    emit(g, {{"group", label},
             {"m_E", f.m_e},
             {"r", f.r},
             {"L", f.bound},
             {"group_ratio", rat_json(f.group_ratio)},
             {"euler_factors", factors},
             {"truncated_product", rat_json(f.truncated_product)},
             {"truncated_value", f.truncated_value},
             {"zero_flag", f.zero_flag}});
    return kOk;
}

int cmd_goursat(const Globals& g, const std::string& spec, u32 split) {
    auto [label, grp] = resolve_group(g, spec);
    u32 m = grp.modulus();
    if (split == 0) {
        auto f = factorize(m);
        if (f.size() < 2) throw UnsupportedLevel("goursat: modulus " + std::to_string(m) + " is a prime power");
        split = 1;
        for (u32 i = 0; i < f[0].second; ++i) split *= f[0].first;
    }
    FiberedProduct fp = goursat_decompose(grp, split, m / split);
    Group back = fibered_product(fp.g1, fp.k1, fp.g2, fp.k2, fp.pairing);
    bool round_trip = back.order() == grp.order() && conjugacy(back, grp, ConjMode::equal).holds;
    json pairing = json::array();
    for (const auto& [a, b] : fp.pairing) pairing.push_back(json::array({mat_json(a), mat_json(b)}));
    emit(g, {{"group", label},
             {"m1", split},
             {"m2", m / split},
             {"G1", {{"order", fp.g1.order()}, {"gens", gens_json(small_generating_set(fp.g1))}}},
             {"K1", {{"order", fp.k1.order()}, {"gens", gens_json(small_generating_set(fp.k1))}}},
             {"G2", {{"order", fp.g2.order()}, {"gens", gens_json(small_generating_set(fp.g2))}}},
             {"K2", {{"order", fp.k2.order()}, {"gens", gens_json(small_generating_set(fp.k2))}}},
             {"quotient_order", fp.quotient_order},
             {"pairing", pairing},
             {"round_trip", round_trip}});
    return round_trip ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Missing-trace groups of genus zero: classification and catalog verification"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--out", g.out, "Write the JSON result to this file");
    app.add_flag("--json", g.compact, "Single-line JSON on stdout");
    app.add_option("--cap", g.cap, "Closure size cap");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 256u));
    app.add_option("--data", g.data_dir, "Directory with groups.json and families.json");

    std::function<int()> run;

    auto* classify_cmd = app.add_subcommand("classify", "Maximal genus-g missing-trace groups at one level");
    u32 level = 0;
    i64 genus_bound = 0;
    bool deep = false;
    classify_cmd->add_option("--level", level, "GL2-level m")->required();
    classify_cmd->add_option("--genus", genus_bound, "Genus bound");
    classify_cmd->add_flag("--deep-levels", deep, "Allow levels divisible by 16, 25, 27 or above 60");
    classify_cmd->callback([&] { run = [&] { return cmd_classify(g, level, genus_bound, deep); }; });

    auto* verify_cmd = app.add_subcommand("verify-catalog", "Re-derive every recorded property of the group catalog");
    std::string groups_path, families_path;
    bool census = false;
    unsigned samples = 5;
    u64 pmax = 1000;
    verify_cmd->add_option("--groups", groups_path, "Group catalog file");
    verify_cmd->add_option("--families", families_path, "Family catalog file (enables family checks)");
    verify_cmd->add_flag("--census", census, "Census random specializations of every family");
    verify_cmd->add_option("--samples", samples, "Specializations per family");
    verify_cmd->add_option("--pmax", pmax, "Prime bound for the census");
    verify_cmd->callback([&] { run = [&] { return cmd_verify_catalog(g, groups_path, families_path, census, samples, pmax); }; });

    auto* ident_cmd = app.add_subcommand("identities", "Composition and substitution identities between catalog entries");
    std::string ident_families;
    ident_cmd->add_option("--families", ident_families, "Family catalog file");
    ident_cmd->callback([&] { run = [&] { return cmd_identities(g, ident_families); }; });

    auto* scan_cmd = app.add_subcommand("ap-scan", "Frobenius traces mod m of a specialized family or a long model");
    std::string family, t_str = "1", d_str = "1", long_model;
    unsigned mod = 0;
    u64 scan_pmax = 1000;
    scan_cmd->add_option("--family", family, "Family label m,i,k");
    scan_cmd->add_option("--t", t_str, "Parameter value");
    scan_cmd->add_option("--D", d_str, "Twist value for families with a free twist");
    scan_cmd->add_option("--mod", mod, "Modulus")->required()->check(CLI::Range(2u, 1u << 20));
    scan_cmd->add_option("--pmax", scan_pmax, "Prime bound");
    scan_cmd->add_option("--long", long_model, "Long Weierstrass model a1,a2,a3,a4,a6");
    scan_cmd->callback([&] { run = [&] { return cmd_ap_scan(g, family, t_str, d_str, mod, scan_pmax, long_model); }; });

    auto* genus_cmd = app.add_subcommand("genus", "Genus of X_G for a catalog label or group file");
    std::string genus_group;
    genus_cmd->add_option("--group", genus_group, "Label or file")->required();
    genus_cmd->callback([&] { run = [&] { return cmd_genus(g, genus_group); }; });

    auto* lt_cmd = app.add_subcommand("lt", "Truncated Lang-Trotter Euler product");
    std::string lt_group;
    i64 lt_r = 0;
    u32 lt_bound = 100;
    lt_cmd->add_option("--group", lt_group, "Label or file")->required();
    lt_cmd->add_option("--r", lt_r, "Residue")->required();
    lt_cmd->add_option("--L", lt_bound, "Prime bound");
    lt_cmd->callback([&] { run = [&] { return cmd_lt(g, lt_group, lt_r, lt_bound); }; });

    auto* goursat_cmd = app.add_subcommand("goursat", "Fibered-product decomposition of a composite-level group");
    std::string goursat_group;
    u32 split = 0;
    goursat_cmd->add_option("--group", goursat_group, "Label or file")->required();
    goursat_cmd->add_option("--split", split, "Coprime factor m1 of the modulus");
    goursat_cmd->callback([&] { run = [&] { return cmd_goursat(g, goursat_group, split); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }
    try {
        return run();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
