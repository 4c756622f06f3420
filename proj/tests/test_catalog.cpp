#include <algorithm>
#include <set>

#include "doctest.h"
#include "mtrace/catalog.hpp"
#include "mtrace/errors.hpp"
#include "mtrace/modcurve.hpp"

using namespace mtrace;

namespace {

const std::vector<GroupRecord>& groups() {
    static const auto g = load_groups(default_data_dir() + "/groups.json");
    return g;
}

const FamilyCatalog& families() {
    static const auto f = load_families(default_data_dir() + "/families.json");
    return f;
}

bool failed(const Report& r, const std::string& subject, const std::string& name) {
    return std::any_of(r.checks.begin(), r.checks.end(),
                       [&](const Check& c) { return c.subject == subject && c.name == name && !c.ok; });
}

}  // namespace

TEST_CASE("catalog shape") {
    CHECK(groups().size() == 52);
    CHECK(families().families.size() == 50);
    std::map<u32, int> per_level;
    for (const auto& g : groups()) ++per_level[g.m];
    CHECK(per_level == std::map<u32, int>{{2, 1}, {3, 2}, {4, 1}, {5, 4}, {6, 4}, {7, 6},
                                          {8, 2}, {9, 5}, {10, 5}, {12, 5}, {14, 12}, {28, 5}});
    std::set<std::string> labels;
    for (const auto& g : groups()) labels.insert(g.label);
    for (const auto& f : families().families) {
        // A family label m,i,k belongs to the group m,i,k.
        CHECK(labels.count(f.label) == 1);
    }
}

TEST_CASE("matrix literals") {
    Mat x = parse_matrix("[[1,2],[-1,5]]", 7);
    CHECK(matrix_literal(x) == "[[1,2],[6,5]]");
    CHECK(parse_matrix(matrix_literal(x), 7) == x);
    CHECK_THROWS_AS(parse_matrix("[[1,2],[3]]", 7), Error);
}

TEST_CASE("recorded rational-point verdicts") {
    for (const char* label : {"8,2,1", "9,5,1"}) {
        const GroupRecord* r = find_group(groups(), label);
        REQUIRE(r);
        REQUIRE(r->rational_points.has_value());
        CHECK_FALSE(*r->rational_points);
        CHECK(families().find(label) == nullptr);
    }
    const GroupRecord* r = find_group(groups(), "8,1,1");
    REQUIRE(r);
    CHECK(r->rational_points == std::optional<bool>(true));
    CHECK(sz_rational_point_test(adjoin_minus_identity(r->group())));
}

TEST_CASE("the catalog verifies") {
    Report r = verify_catalog(groups());
    for (const auto& c : r.checks)
        if (!c.ok) MESSAGE(c.subject << " " << c.name << " " << c.detail);
    CHECK(r.ok());
    CHECK(verify_family_degrees(families(), groups()).ok());
    CHECK(run_identity_suite(families()).ok());
}

TEST_CASE("a duplicated record is caught") {
    std::vector<GroupRecord> sub;
    for (const auto& g : groups())
        if (g.m == 3) sub.push_back(g);
    GroupRecord copy = sub.front();
    copy.label = "3,9,1";
    // Conjugate the generators so the duplicate is not a literal copy.
    Mat c = Mat::make(0, 1, 1, 0, 3);
    for (auto& x : copy.gens) x = conjugate(c, x);
    sub.push_back(copy);
    Report r = verify_catalog(sub);
    CHECK_FALSE(r.ok());
    CHECK(failed(r, sub.front().label, "distinct"));
}

TEST_CASE("a wrong missing set is caught") {
    std::vector<GroupRecord> sub{*find_group(groups(), "5,1,1")};
    sub[0].missing = {2};
    CHECK(failed(verify_catalog(sub), "5,1,1", "missing_traces"));
}

TEST_CASE("family census and its negative control") {
    const FamilyRecord* f = families().find("3,1,1");
    const GroupRecord* g = find_group(groups(), "3,1,1");
    REQUIRE(f);
    REQUIRE(g);
    CensusOptions opts;
    opts.samples = 5;
    FamilyCensus good = family_census(*f, *g, opts);
    CHECK(good.ok());
    CHECK(good.samples.size() == 5);
    FamilyCensus bad = family_census(*f, *g, opts, Rat(2));
    CHECK_FALSE(bad.ok());
}
