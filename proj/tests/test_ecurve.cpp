#include <cmath>
#include <random>

#include "doctest.h"
#include "mtrace/catalog.hpp"
#include "mtrace/ecurve.hpp"
#include "mtrace/errors.hpp"

using namespace mtrace;

namespace {

const LongModel kE3{Rat(1), Rat(-1), Rat(1), Rat(-56), Rat(163)};

long mod(const Rat& q, long p) {
    Int n = q.get_num() % p, d = q.get_den() % p;
    long nv = (n.get_si() + p) % p, dv = (d.get_si() + p) % p;
    long inv = 1;
    for (long e = p - 2, b = dv; e > 0; e >>= 1, b = b * b % p)
        if (e & 1) inv = inv * b % p;
    return nv * inv % p;
}

// #E(F_p) by checking every pair (x, y).
long brute_points(const Curve& e, long p) {
    long a = mod(e.A(), p), b = mod(e.B(), p), n = 1;
    for (long x = 0; x < p; ++x)
        for (long y = 0; y < p; ++y)
            if ((y * y - (x * x % p * x + a * x + b)) % p == 0) ++n;
    return n;
}

bool is_prime(long n) {
    if (n < 2) return false;
    for (long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace

TEST_CASE("a_p agrees with a brute-force point count") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<long> coef(-50, 50);
    for (int i = 0; i < 20; ++i) {
        Curve e(Rat(coef(rng)), Rat(coef(rng)));
        if (e.disc() == 0) continue;
        for (long p = 5; p < 90; ++p) {
            if (!is_prime(p) || !e.is_good(p)) continue;
            long a = ap(e, p);
            CHECK(a == p + 1 - brute_points(e, p));
            CHECK(std::abs(a) <= 2 * std::sqrt(static_cast<double>(p)));
        }
    }
}

TEST_CASE("a_p is unchanged under change of model") {
    Curve e(Rat(-7), Rat(10)), f(Rat(-7 * 16), Rat(10 * 64));
    Curve g(Rat(-7, 81), Rat(10, 729));
    for (long p = 5; p < 300; ++p) {
        if (!is_prime(p) || !e.is_good(p)) continue;
        CHECK(ap(e, p) == ap(f, p));
        CHECK(ap(e, p) == ap(g, p));
    }
    CHECK(is_isomorphic(e, f));
    CHECK(is_isomorphic(e, g));
    CHECK_FALSE(is_isomorphic(e, Curve(Rat(-7 * 4), Rat(-10 * 8))));
}

TEST_CASE("long models") {
    Curve e = Curve::from_long(kE3);
    REQUIRE(e.long_model().has_value());
    for (std::uint64_t p : {5, 11, 13, 17, 101}) CHECK(e.is_good(p));
    // Rational 3-torsion: 3 divides #E(F_p).
    TraceCensus c = trace_census(e, 3, 1000);
    REQUIRE(c.primes.size() > 100);
    for (std::size_t i = 0; i < c.primes.size(); ++i) CHECK((c.primes[i] + 1 - c.sequence[i]) % 3 == 0);
    CHECK(c.missing() == std::vector<unsigned>{1});
}

TEST_CASE("catalog specializations recover the example curves") {
    FamilyCatalog fams = load_families(default_data_dir() + "/families.json");
    const FamilyRecord* f3 = fams.find("3,1,1");
    const FamilyRecord* f6 = fams.find("6,1,1");
    const FamilyRecord* f28 = fams.find("28,1,1");
    REQUIRE((f3 && f6 && f28));
    // The level 3 curve sits over t = 2 in this parametrization.
    Curve e3 = specialize(f3->j, f3->d, Rat(2), Rat(1));
    CHECK(is_isomorphic(e3, Curve::from_long(kE3)));
    CHECK_FALSE(is_isomorphic(specialize(f3->j, f3->d, Rat(1), Rat(1)), Curve::from_long(kE3)));
    CHECK(is_isomorphic(specialize(f6->j, f6->d, Rat(1), Rat(1)), Curve(Rat(-15876), Rat(-777924))));
    Curve e28(Rat(-7138223372), Rat(232131092574192));
    CHECK(is_isomorphic(specialize(f28->j, f28->d, Rat(1), Rat(1)), e28));
    CHECK_FALSE(is_isomorphic(specialize(f28->j, f28->d, Rat(-1), Rat(1)), e28));
    CHECK_THROWS_AS(specialize(f3->j, f3->d, Rat(0), Rat(1)), Error);
}

TEST_CASE("division polynomials") {
    std::mt19937 rng(9);
    std::uniform_int_distribution<long> coef(-20, 20);
    for (int i = 0; i < 10; ++i) {
        Rat a(coef(rng)), b(coef(rng));
        if (4 * a * a * a + 27 * b * b == 0) continue;
        Curve e(a, b);
        UPoly x = UPoly::x();
        CHECK(division_poly(e, 2) == UPoly::constant(Rat(2)));
        CHECK(division_poly(e, 3) ==
              Rat(3) * x * x * x * x + Rat(6) * a * x * x + Rat(12) * b * x - UPoly::constant(a * a));
        CHECK(division_poly(e, 5).degree() == 12);
        CHECK(division_poly(e, 7).degree() == 24);
        for (std::uint64_t p : {101, 103}) {
            UPoly f = division_poly(e, 5);
            auto red = division_poly_mod(e, 5, p);
            REQUIRE(red.size() == f.c.size());
            for (std::size_t k = 0; k < red.size(); ++k) CHECK(static_cast<long>(red[k]) == mod(f.c[k], p));
        }
    }
    // The abscissa of a rational 3-torsion point is a root of f_3.
    Curve e = Curve::from_long(kE3);
    UPoly f3 = division_poly(e, 3);
    bool rational_root = false;
    for (long n = -400; n <= 400 && !rational_root; ++n)
        for (long d : {1, 2, 3, 4, 6, 9, 12, 36})
            if (f3.eval(Rat(n, d)) == 0) rational_root = true;
    CHECK(rational_root);
}

TEST_CASE("quadratic subfields") {
    Curve e(Rat(0), Rat(1));  // y^2 = x^3 + 1
    CHECK(quad_subfield_of_point(e, Rat(2)) == 1);
    CHECK(quad_subfield_of_point(e, Rat(1)) == 2);
    CHECK_THROWS_AS(quad_subfield_of_point(e, Rat(-1)), TwoTorsionPoint);
    CHECK(delta_field_checks(Curve(Rat(-1), Rat(0))).sqrt_disc_field == 1);
    CHECK(delta_field_checks(e).sqrt_disc_field == -3);
}
