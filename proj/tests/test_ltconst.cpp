#include "doctest.h"
#include "mtrace/catalog.hpp"
#include "mtrace/errors.hpp"
#include "mtrace/ltconst.hpp"
#include "mtrace/mtclassify.hpp"

using namespace mtrace;

TEST_CASE("trace counts against enumeration") {
    for (u32 l : {2u, 3u, 5u, 7u, 11u, 13u}) {
        u64 total = 0;
        for (i64 r = 0; r < l; ++r) {
            CHECK(gl2_trace_count(l, r) == gl2_trace_count_enumerated(l, r));
            total += gl2_trace_count(l, r);
        }
        u64 ll = l;
        CHECK(total == (ll * ll - 1) * (ll * ll - ll));
    }
    CHECK(gl2_trace_count(2, 0) == 4);
    CHECK_THROWS_AS(gl2_trace_count_enumerated(101, 0), PrimeTooLarge);
}

TEST_CASE("Euler factors") {
    CHECK(euler_factor(2, 0) == Rat(4, 3));
    CHECK(euler_factor(2, 1) == Rat(2, 3));
    for (u32 l : {3u, 5u, 7u, 97u}) {
        Rat sum = 0;
        for (i64 r = 0; r < l; ++r) {
            CHECK(euler_factor(l, r) > 0);
            sum += euler_factor(l, r);
        }
        CHECK(sum == Rat(l));
        CHECK(euler_factor(l, 3) == euler_factor(l, 3 + static_cast<i64>(l)));
    }
}

TEST_CASE("truncated constant and the zero flag") {
    auto groups = load_groups(default_data_dir() + "/groups.json");
    const GroupRecord* r = find_group(groups, "3,1,1");
    REQUIRE(r);
    Group g = r->group();
    LTFactorization miss = lt_truncated(g, 1, 50);
    CHECK(miss.zero_flag);
    CHECK(miss.truncated_product == 0);
    LTFactorization hit = lt_truncated(g, 0, 50);
    CHECK_FALSE(hit.zero_flag);
    CHECK(hit.truncated_product > 0);
    CHECK(hit.m_e == 3);
    for (const auto& [l, f] : hit.euler_factors) CHECK((l == 3 || f == euler_factor(l, 0)));
    CHECK(lt_truncated(Group::full(2), 0, 30).group_ratio > 0);
}
