#include "mtrace/catalog.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "mtrace/errors.hpp"
#include "mtrace/modarith.hpp"
#include "mtrace/modcurve.hpp"
#include "mtrace/mtclassify.hpp"

#ifndef MTRACE_DATA_DIR
#define MTRACE_DATA_DIR "data"
#endif

namespace mtrace {

using nlohmann::json;

namespace {

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CatalogError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw CatalogError(path + ": " + e.what());
    }
}

template <class T>
T field(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw CatalogError(where + ": missing field '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw CatalogError(where + ": field '" + key + "': " + e.what());
    }
}

Mat matrix_from_json(const json& v, u32 m, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_array() || !v[1].is_array() || v[0].size() != 2 || v[1].size() != 2)
        throw CatalogError(where + ": matrix must be [[a,b],[c,d]]");
    try {
        return Mat::make(v[0][0].get<i64>(), v[0][1].get<i64>(), v[1][0].get<i64>(), v[1][1].get<i64>(), m);
    } catch (const json::exception& e) {
        throw CatalogError(where + ": " + e.what());
    }
}

// A table entry is either an expression string or {"compose": [outer, ..., inner], "scale": c}
// naming auxiliary functions.
std::pair<RatExpr, std::string> read_expr(const json& v, const std::map<std::string, RatExpr>& aux,
                                          const std::string& where) {
    if (v.is_string()) {
        try {
            return {parse_expr(v.get<std::string>()), v.get<std::string>()};
        } catch (const SyntaxError& e) {
            throw CatalogError(where + ": " + e.what());
        }
    }
    if (!v.is_object() || !v.contains("compose") || !v["compose"].is_array() || v["compose"].empty())
        throw CatalogError(where + ": expected an expression string or a composition");
    std::vector<std::string> names = v["compose"].get<std::vector<std::string>>();
    std::string text = "t";
    RatExpr acc = RatExpr::t();
    for (auto it = names.rbegin(); it != names.rend(); ++it) {
        auto f = aux.find(*it);
        if (f == aux.end()) throw CatalogError(where + ": unknown auxiliary function " + *it);
        acc = compose(f->second, acc);
        text = *it + "(" + text + ")";
    }
    if (v.contains("scale")) {
        i64 s = v["scale"].get<i64>();
        acc = RatExpr::constant(Rat(static_cast<long>(s))) * acc;
        text = std::to_string(s) + "*" + text;
    }
    return {acc, text};
}

}  // namespace

Group GroupRecord::group(u64 cap) const { return Group::close(gens, m, cap); }

const FamilyRecord* FamilyCatalog::find(const std::string& label) const {
    for (const auto& f : families)
        if (f.label == label) return &f;
    return nullptr;
}

Mat parse_matrix(const std::string& text, u32 m) {
    json v;
    try {
        v = json::parse(text);
    } catch (const json::parse_error&) {
        throw CatalogError("bad matrix literal: " + text);
    }
    return matrix_from_json(v, m, "matrix " + text);
}

std::string matrix_literal(const Mat& x) {
    std::ostringstream os;
    os << "[[" << x.a << "," << x.b << "],[" << x.c << "," << x.d << "]]";
    return os.str();
}

std::vector<GroupRecord> load_groups(const std::string& path) {
    json doc = read_json(path);
    if (!doc.is_object() || !doc.contains("groups") || !doc["groups"].is_array())
        throw CatalogError(path + ": expected {\"groups\": [...]}");
    std::vector<GroupRecord> out;
    for (const auto& e : doc["groups"]) {
        GroupRecord r;
        r.label = field<std::string>(e, "label", path);
        std::string where = path + " [" + r.label + "]";
        r.m = field<u32>(e, "m", where);
        if (r.m < 2) throw CatalogError(where + ": modulus must be at least 2");
        r.order = e.value("order", u64{0});
        if (!e.contains("gens") || !e["gens"].is_array() || e["gens"].empty())
            throw CatalogError(where + ": missing generators");
        for (const auto& g : e["gens"]) r.gens.push_back(matrix_from_json(g, r.m, where));
        r.minus_I = field<bool>(e, "minus_I", where);
        r.missing = field<std::vector<u32>>(e, "missing", where);
        if (e.contains("rational_points")) r.rational_points = e["rational_points"].get<bool>();
        r.notes = e.value("notes", std::string());
        for (const auto& o : out)
            if (o.label == r.label) throw CatalogError(where + ": duplicate label");
        out.push_back(std::move(r));
    }
    return out;
}

FamilyCatalog load_families(const std::string& path) {
    json doc = read_json(path);
    if (!doc.is_object() || !doc.contains("families") || !doc["families"].is_array())
        throw CatalogError(path + ": expected {\"aux\": {...}, \"families\": [...]}");
    FamilyCatalog cat;
    if (doc.contains("aux")) {
        for (const auto& [name, v] : doc["aux"].items()) cat.aux[name] = read_expr(v, {}, path + " aux " + name).first;
    }
    for (const auto& e : doc["families"]) {
        FamilyRecord f;
        f.label = field<std::string>(e, "label", path);
        std::string where = path + " [" + f.label + "]";
        if (!e.contains("j") || !e.contains("d")) throw CatalogError(where + ": missing j or d");
        std::tie(f.j, f.j_text) = read_expr(e["j"], cat.aux, where + " j");
        std::tie(f.d, f.d_text) = read_expr(e["d"], cat.aux, where + " d");
        if (f.j.has_d()) throw CatalogError(where + ": j must not involve D");
        f.minus_I = field<bool>(e, "minus_I", where);
        f.notes = e.value("notes", std::string());
        if (cat.find(f.label)) throw CatalogError(where + ": duplicate label");
        cat.families.push_back(std::move(f));
    }
    return cat;
}

const GroupRecord* find_group(const std::vector<GroupRecord>& groups, const std::string& label) {
    for (const auto& g : groups)
        if (g.label == label) return &g;
    return nullptr;
}

std::string default_data_dir() {
    if (const char* env = std::getenv("MTRACE_DATA_DIR")) return env;
    return MTRACE_DATA_DIR;
}

void Report::add(std::string subject, std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(subject), std::move(name), ok, std::move(detail)});
}

bool Report::ok() const { return failures() == 0; }

std::size_t Report::failures() const {
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.ok; }));
}

namespace {

std::string join(const std::vector<u32>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

// G1 is contained in a conjugate of G2 as open subgroups of GL2(Z^), each the full preimage of its
// reduction at its own modulus.
bool open_contained(const Group& g1, const Group& g2, u64 cap) {
    u32 m1 = g1.modulus(), m2 = g2.modulus();
    u32 g = static_cast<u32>(std::gcd(m1, m2));
    Group h = preimage(reduce_group(g1, g), m2, cap);
    if (h.order() > g2.order()) return false;
    return conjugacy(h, g2, ConjMode::contained).holds;
}

}  // namespace

Report verify_catalog(const std::vector<GroupRecord>& groups, u64 cap) {
    Report rep;
    std::vector<Group> gs;
    for (const auto& r : groups) {
        Group g = r.group(cap);
        gs.push_back(g);
        if (r.order) rep.add(r.label, "order", g.order() == r.order, std::to_string(g.order()));
        rep.add(r.label, "gl2_level", g.gl2_level() == r.m, std::to_string(g.gl2_level()));
        rep.add(r.label, "det_surjective", det_surjective(g));
        rep.add(r.label, "minus_I", g.contains_minus_identity() == r.minus_I);
        GenusReport gr = genus(adjoin_minus_identity(g));
        rep.add(r.label, "genus_zero", gr.genus == 0, std::to_string(gr.genus));
        std::vector<u32> miss = missing_traces(g, r.m);
        rep.add(r.label, "missing_traces", miss == r.missing && !miss.empty(), join(miss));
        rep.add(r.label, "new_missing_trace", is_new_missing_trace(g));
        u64 dg = d_of_group(g);
        u64 bound = dg * g.sl2_level();
        rep.add(r.label, "level_bound", bound % g.gl2_level() == 0,
                "d_G=" + std::to_string(dg) + " sl2_level=" + std::to_string(g.sl2_level()));
        if (r.rational_points) {
            if (is_prime_power(r.m)) {
                bool sz = sz_rational_point_test(g);
                rep.add(r.label, "rational_points", sz == *r.rational_points, sz ? "true" : "false");
            } else {
                rep.add(r.label, "rational_points", false, "recorded for a composite level");
            }
        }
    }
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            if (groups[i].m != groups[j].m || gs[i].order() != gs[j].order()) continue;
            if (!(fingerprint(gs[i]) == fingerprint(gs[j]))) continue;
            if (conjugacy(gs[i], gs[j], ConjMode::equal).holds)
                rep.add(groups[i].label, "distinct", false, "conjugate to " + groups[j].label);
        }
    }
    for (std::size_t i = 0; i < groups.size(); ++i) {
        std::string over;
        for (std::size_t j = 0; j < groups.size() && over.empty(); ++j) {
            if (i == j) continue;
            if (groups[i].m == groups[j].m && gs[i].order() == gs[j].order()) continue;
            // A conjugate of G_i inside G_j needs index(G_i) >= index(G_j) in GL2(Z^).
            if (gs[i].order() * gl2_order(groups[j].m) > gs[j].order() * gl2_order(groups[i].m)) continue;
            if (open_contained(gs[i], gs[j], cap)) over = groups[j].label;
        }
        rep.add(groups[i].label, "maximal", over.empty(), over.empty() ? "" : "contained in " + over);
    }
    return rep;
}

Report verify_family_degrees(const FamilyCatalog& fams, const std::vector<GroupRecord>& groups) {
    Report rep;
    for (const auto& f : fams.families) {
        const GroupRecord* r = find_group(groups, f.label);
        if (!r) {
            rep.add(f.label, "group_record", false, "no group with this label");
            continue;
        }
        Group g = r->group();
        rep.add(f.label, "minus_I", g.contains_minus_identity() == f.minus_I);
        rep.add(f.label, "twist_parameter", f.minus_I == f.d.has_d(),
                f.minus_I ? "families with -I in G twist by D" : "families without -I carry a fixed twist");
        u64 mu = genus(adjoin_minus_identity(g)).mu;
        int deg = std::max(f.j.num().deg_t(), f.j.den().deg_t());
        rep.add(f.label, "j_degree", static_cast<u64>(deg) == mu,
                "deg j=" + std::to_string(deg) + " index=" + std::to_string(mu));
    }
    return rep;
}

bool FamilyCensus::ok() const {
    return std::all_of(samples.begin(), samples.end(), [](const FamilySample& s) { return s.hit.empty(); });
}

FamilyCensus family_census(const FamilyRecord& fam, const GroupRecord& grp, const CensusOptions& opts,
                           const Rat& twist_scale) {
    FamilyCensus out;
    out.label = fam.label;
    out.m = grp.m;
    for (u32 r : grp.missing) out.missing.push_back(r);
    std::uint64_t seed = opts.seed;
    for (char ch : fam.label) seed = (seed ^ static_cast<unsigned char>(ch)) * 1099511628211ULL;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> num(-60, 60), den(1, 12), dd(-40, 40);
    RatExpr d = RatExpr::constant(twist_scale) * fam.d;
    unsigned attempts = 0;
    while (out.samples.size() < opts.samples) {
        if (++attempts > 1000 * opts.samples) throw SingularSpecialization(fam.label + ": no usable specializations");
        Rat t0(num(rng), den(rng));
        t0.canonicalize();
        Rat d0(dd(rng));
        if (d0 == 0) continue;
        std::optional<Curve> e;
        try {
            e.emplace(specialize(fam.j, d, t0, d0));
        } catch (const PoleError&) {
            continue;
        } catch (const SingularSpecialization&) {
            continue;
        }
        TraceCensus c = trace_census(*e, grp.m, opts.bound, true, opts.threads);
        FamilySample s{t0, eval_expr(d, t0, d0), {}, 0};
        std::vector<bool> seen(grp.m, false);
        for (std::size_t i = 0; i < c.primes.size(); ++i) {
            if (grp.m % c.primes[i] == 0) continue;
            ++s.primes;
            seen[c.sequence[i]] = true;
        }
        for (u32 r : grp.missing)
            if (seen[r]) s.hit.push_back(r);
        out.samples.push_back(std::move(s));
    }
    return out;
}

}  // namespace mtrace
