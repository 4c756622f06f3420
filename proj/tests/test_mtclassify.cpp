#include "doctest.h"
#include "mtrace/errors.hpp"
#include "mtrace/mtclassify.hpp"

using namespace mtrace;

namespace {

Group g311() { return Group::close({Mat::make(1, 1, 0, 1, 3), Mat::make(1, 0, 0, 2, 3)}, 3); }

Group borel(u32 m) {
    std::vector<Mat> gens{Mat::make(1, 1, 0, 1, m)};
    for (u32 u : unit_generators(m)) {
        gens.push_back(Mat::make(u, 0, 0, 1, m));
        gens.push_back(Mat::make(1, 0, 0, u, m));
    }
    return Group::close(gens, m);
}

}  // namespace

TEST_CASE("trace fibers of GL2 over a prime field") {
    for (u32 l : {2u, 3u, 5u, 7u}) {
        auto f = trace_fibers(Group::full(l), l);
        u64 total = 0;
        for (u32 r = 0; r < l; ++r) {
            u64 want = static_cast<u64>(l) * l * l - static_cast<u64>(l) * l - (r == 0 ? 0 : l);
            CHECK(f[r] == want);
            total += f[r];
        }
        CHECK(total == gl2_order(l));
    }
}

TEST_CASE("missing traces") {
    Group g = g311();
    CHECK(missing_traces(g, 3) == std::vector<u32>{1});
    CHECK(trace_set(g, 3) == std::vector<u32>{0, 2});
    CHECK(is_missing_trace(g));
    CHECK(is_new_missing_trace(g));
    CHECK(missing_traces(Group::full(4), 4).empty());
    CHECK_FALSE(is_missing_trace(borel(5)));
    Group lifted = preimage(g, 6);
    CHECK(missing_traces(lifted, 6) == std::vector<u32>{1, 4});
}

TEST_CASE("quotients and normal subgroups") {
    Group s3 = Group::full(2);
    CHECK(normal_subgroups(s3).size() == 3);
    Quotient q = make_quotient(Group::full(3), sl2_part(Group::full(3)));
    CHECK(q.n == 2);
    Quotient qs = make_quotient(s3, Group::trivial(2));
    CHECK(qs.n == 6);
    CHECK(quotient_isomorphisms(qs, qs).size() == 6);
}

TEST_CASE("goursat round trip on a direct product") {
    Group b6 = Group::close({Mat::make(1, 1, 0, 1, 6), Mat::make(5, 0, 0, 1, 6), Mat::make(1, 0, 0, 5, 6)}, 6);
    FiberedProduct fp = goursat_decompose(b6, 2, 3);
    CHECK(fp.quotient_order == 1);
    Group back = fibered_product(fp.g1, fp.k1, fp.g2, fp.k2, fp.pairing);
    CHECK(back.codes() == b6.codes());
    CHECK_THROWS(goursat_decompose(b6, 2, 2));
}

TEST_CASE("dedupe and maximal filter") {
    Group b = borel(7);
    Mat c = Mat::make(0, 1, 1, 0, 7);
    std::vector<Mat> gens;
    for (const auto& x : b.gens()) gens.push_back(conjugate(c, x));
    Group lower = Group::close(gens, 7);
    CHECK(dedupe({b, lower}).size() == 1);
    Group split = Group::close({Mat::make(3, 0, 0, 1, 7), Mat::make(1, 0, 0, 3, 7)}, 7);
    auto kept = maximal_filter({split, lower});
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].order() == b.order());
}

TEST_CASE("classify small prime levels") {
    CHECK(classify(2).size() == 1);
    CHECK(classify(3).size() == 2);
    CHECK(classify(5).size() == 4);
    CHECK(classify(7).size() == 6);
    for (const auto& g : classify(5)) {
        CHECK(g.gl2_level() == 5);
        CHECK(det_surjective(g));
        CHECK(is_new_missing_trace(g));
        CHECK(genus(adjoin_minus_identity(g)).genus == 0);
    }
}

TEST_CASE("level gate") {
    CHECK(level_supported(28));
    CHECK_FALSE(level_supported(17));
    CHECK_THROWS_AS(classify(17), UnsupportedLevel);
    CHECK_THROWS_AS(classify(16), UnsupportedLevel);
}
