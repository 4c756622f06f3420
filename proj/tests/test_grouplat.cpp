#include <random>

#include "doctest.h"
#include "mtrace/errors.hpp"
#include "mtrace/grouplat.hpp"

using namespace mtrace;

namespace {

Group borel(u32 m) {
    std::vector<Mat> gens{Mat::make(1, 1, 0, 1, m)};
    for (u32 u : unit_generators(m)) {
        gens.push_back(Mat::make(u, 0, 0, 1, m));
        gens.push_back(Mat::make(1, 0, 0, u, m));
    }
    return Group::close(gens, m);
}

Mat random_unit_matrix(std::mt19937& rng, u32 m) {
    std::uniform_int_distribution<u32> u(0, m - 1);
    for (;;) {
        Mat x = Mat::make(u(rng), u(rng), u(rng), u(rng), m);
        if (mod_inverse(x.det(), m) != 0 || m == 1) return x;
    }
}

}  // namespace

TEST_CASE("closure orders") {
    for (u32 p : {2u, 3u, 5u, 7u}) CHECK(borel(p).order() == p * (p - 1) * (p - 1));
    for (u32 m : {2u, 3u, 4u, 6u, 10u}) CHECK(Group::full(m).order() == gl2_order(m));
    CHECK(Group::trivial(5).order() == 1);
    CHECK_THROWS_AS(Group::close({Mat::make(1, 1, 0, 1, 7), Mat::make(3, 0, 0, 1, 7)}, 7, 10), ClosureCapExceeded);
}

TEST_CASE("levels and preimages") {
    Group b5 = borel(5);
    Group lifted = preimage(b5, 20);
    CHECK(lifted.order() == b5.order() * gl2_order(20) / gl2_order(5));
    CHECK(lifted.gl2_level() == 5);
    CHECK(reduce_group(lifted, 5).codes() == b5.codes());
    CHECK(Group::full(12).gl2_level() == 1);
    CHECK(borel(4).gl2_level() == 4);
}

TEST_CASE("det image and derived subgroups") {
    CHECK(det_surjective(borel(9)));
    Group s3 = sl2_part(Group::full(3));
    CHECK(s3.order() == 24);
    CHECK(commutator_subgroup(Group::full(3)).codes() == s3.codes());
    CHECK(commutator_subgroup(Group::full(2)).order() == 3);
    Group g = Group::close({Mat::make(1, 1, 0, 1, 5)}, 5);
    CHECK(det_image(g) == std::vector<u32>{1});
    CHECK_FALSE(det_surjective(g));
    CHECK(normal_closure(Group::full(5), {Mat::make(1, 1, 0, 1, 5)}).order() == sl2_order(5));
}

TEST_CASE("conjugacy finds a witness") {
    std::mt19937 rng(7);
    for (u32 m : {5u, 8u, 9u, 12u}) {
        Group b = borel(m);
        Mat c = random_unit_matrix(rng, m);
        std::vector<Mat> gens;
        for (const auto& x : b.gens()) gens.push_back(conjugate(c, x));
        Group bc = Group::close(gens, m);
        CHECK(fingerprint(b) == fingerprint(bc));
        ConjVerdict v = conjugacy(b, bc, ConjMode::equal);
        REQUIRE(v.holds);
        REQUIRE(v.witness);
        for (const auto& x : b.elements()) CHECK(bc.contains(conjugate(*v.witness, x)));
    }
}

TEST_CASE("containment up to conjugacy") {
    u32 m = 7;
    Group split = Group::close({Mat::make(3, 0, 0, 1, m), Mat::make(1, 0, 0, 3, m)}, m);
    Group lower = Group::close({Mat::make(1, 0, 1, 1, m), Mat::make(3, 0, 0, 1, m), Mat::make(1, 0, 0, 3, m)}, m);
    CHECK(is_subgroup(split, borel(m)));
    CHECK(conjugacy(lower, borel(m), ConjMode::equal).holds);
    CHECK(conjugacy(split, lower, ConjMode::contained).holds);
    CHECK_FALSE(conjugacy(borel(m), split, ConjMode::contained).holds);
    CHECK(intersect(borel(m), lower).order() == split.order());
}

TEST_CASE("minus identity") {
    Group b = Group::close({Mat::make(1, 1, 0, 1, 5), Mat::make(2, 0, 0, 1, 5)}, 5);
    CHECK_FALSE(b.contains_minus_identity());
    Group bt = adjoin_minus_identity(b);
    CHECK(bt.contains_minus_identity());
    CHECK(bt.order() == 2 * b.order());
    CHECK(small_generating_set(bt).size() <= 3);
}
