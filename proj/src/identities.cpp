#include <algorithm>
#include <functional>
#include <string>

#include "mtrace/catalog.hpp"
#include "mtrace/errors.hpp"

namespace mtrace {

namespace {

int rdeg(const RatExpr& e) { return std::max(e.num().deg_t(), e.den().deg_t()); }

RatExpr p(const char* text) { return parse_expr(text); }

const char* kJ74 = "(t^2+245*t+2401)^3*(t^2+13*t+49)/t^7";

struct Suite {
    const FamilyCatalog& fams;
    Report rep;

    RatExpr j(const std::string& label) {
        const FamilyRecord* f = fams.find(label);
        if (!f) throw CatalogError("identity suite: no family " + label);
        return f->j;
    }
    RatExpr aux(const std::string& name) {
        auto it = fams.aux.find(name);
        if (it == fams.aux.end()) throw CatalogError("identity suite: no auxiliary function " + name);
        return it->second;
    }
    void identity(const std::string& name, const std::function<RatExpr()>& lhs, const std::function<RatExpr()>& rhs) {
        try {
            rep.add(name, "identity", identity_check(lhs(), rhs()));
        } catch (const Error& e) {
            rep.add(name, "identity", false, e.what());
        }
    }
    // Expands the composition of the named auxiliaries and checks it against the catalog entry and
    // the multiplicativity of degrees.
    void composition(const std::string& label, const std::vector<std::string>& names) {
        try {
            RatExpr acc = RatExpr::t();
            long expect = 1;
            for (auto it = names.rbegin(); it != names.rend(); ++it) {
                acc = compose(aux(*it), acc);
                expect *= rdeg(aux(*it));
            }
            bool ok = identity_check(acc, j(label)) && rdeg(acc) == expect;
            rep.add("j" + label + " composition", "expands", ok,
                    "degree " + std::to_string(rdeg(acc)) + ", expected " + std::to_string(expect));
        } catch (const Error& e) {
            rep.add("j" + label + " composition", "expands", false, e.what());
        }
    }
};

}  // namespace

Report run_identity_suite(const FamilyCatalog& fams) {
    Suite s{fams, {}};
    const RatExpr j31 = p("27*(t+1)*(t+9)^3/t^3");
    const RatExpr j74 = p(kJ74);

    s.identity("j6,2(t) = j3,1(-t^2)", [&] { return s.j("6,2,1"); }, [&] { return compose(j31, p("-t^2")); });
    s.identity("j6,3 = j3,1", [&] { return s.j("6,3,1"); }, [&] { return s.j("3,1,1"); });
    s.identity("j8,1(t) = f8,1(g8,1(t))", [&] { return s.j("8,1,1"); },
               [&] { return compose(p("4*t^3*(8-t)"), p("-(t^2+2*t-2)/t")); });

    for (const char* i : {"1", "2", "3"}) {
        std::string lab = std::string("9,") + i + ",1";
        s.composition(lab, {"f9_1", std::string("g9_") + i, std::string("h9_") + i});
    }
    s.composition("10,3,1", {"f10_3", "g10_3"});
    s.identity("j10,1 = j5,1", [&] { return s.j("10,1,1"); }, [&] { return s.j("5,1,1"); });
    s.identity("j10,2 = j5,2", [&] { return s.j("10,2,1"); }, [&] { return s.j("5,2,1"); });

    s.identity("j12,1(u) = j3,1(-27/u^2)", [&] { return s.j("12,1,1"); }, [&] { return compose(j31, p("-27/t^2")); });
    s.identity("j12,4(u) = j3,1(1/(27u^2))", [&] { return s.j("12,4,1"); }, [&] { return compose(j31, p("1/(27*t^2)")); });
    s.identity("j12,2(v) = j12,1(6v^2)", [&] { return s.j("12,2,1"); }, [&] { return compose(s.j("12,1,1"), p("6*t^2")); });
    s.identity("j12,3(v) = j12,1(-2v^2)", [&] { return s.j("12,3,1"); }, [&] { return compose(s.j("12,1,1"), p("-2*t^2")); });

    s.identity("j7,1(t) = j7,4(u1(t))", [&] { return s.j("7,1,1"); },
               [&] { return compose(j74, p("49*t*(t-1)/(t^3-8*t^2+5*t+1)")); });
    s.identity("j7,2(t) = j7,4(u2(t))", [&] { return s.j("7,2,1"); },
               [&] { return compose(j74, p("(t^3-8*t^2+5*t+1)/(t*(t-1))")); });
    s.identity("j7,3(t) = j7,4(u3(t))", [&] { return s.j("7,3,1"); },
               [&] { return compose(j74, p("-7*(t^3-t^2-2*t+1)/(t^3-2*t^2-t+1)")); });
    for (const char* i : {"1", "2", "3"})
        s.identity(std::string("j14,") + i + " = j7," + i, [&s, i] { return s.j(std::string("14,") + i + ",1"); },
                   [&s, i] { return s.j(std::string("7,") + i + ",1"); });
    s.identity("j14,4(u) = j7,4(-7u^2)", [&] { return s.j("14,4,1"); }, [&] { return compose(j74, p("-7*t^2")); });
    s.identity("f14,1(u) = j7,4(1/u^2)", [&] { return s.aux("f14_1"); }, [&] { return compose(j74, p("1/t^2")); });
    s.identity("f14,2(u) = d7,1'(1/u^2)", [&] { return s.aux("f14_2"); }, [&] {
        return compose(p("(t^4-490*t^3-21609*t^2-235298*t-823543)*(t^2+13*t+49)/(14*(t^2+245*t+2401))"), p("1/t^2"));
    });
    for (const char* i : {"5", "6", "7"})
        s.composition(std::string("14,") + i + ",1", {"f14_1", std::string("g14_") + i});

    s.identity("j28,1(u) = j7,4(-1/u^2)", [&] { return s.j("28,1,1"); }, [&] { return compose(j74, p("-1/t^2")); });
    s.identity("j28,2 = j14,6", [&] { return s.j("28,2,1"); }, [&] { return s.j("14,6,1"); });
    s.identity("j28,3 = j14,7", [&] { return s.j("28,3,1"); }, [&] { return s.j("14,7,1"); });
    s.composition("28,2,1", {"f14_1", "g14_6"});
    s.composition("28,3,1", {"f14_1", "g14_7"});

    // s^2 + 1728 = j7,4(t) at t = 1/u^2, and -s^2 + 1728 = j7,4(t) at t = -1/u^2.
    s.identity("conic s^2 + 1728 = j7,4(1/u^2)",
               [&] {
                   RatExpr sv = p("(823543*t^8+235298*t^6+21609*t^4+490*t^2-1)/t");
                   return sv * sv + RatExpr::constant(1728);
               },
               [&] { return compose(j74, p("1/t^2")); });
    s.identity("conic -s^2 + 1728 = j7,4(-1/u^2)",
               [&] {
                   RatExpr sv = p("(823543*t^8-235298*t^6+21609*t^4-490*t^2-1)/t");
                   return RatExpr::constant(1728) - sv * sv;
               },
               [&] { return compose(j74, p("-1/t^2")); });

    // A sign-flipped substitution must not verify.
    bool flipped = identity_check(s.j("12,4,1"), compose(j31, p("-1/(27*t^2)")));
    s.rep.add("j12,4(u) = j3,1(-1/(27u^2))", "negative_control", !flipped, "expected to fail");
    return s.rep;
}

}  // namespace mtrace
