#include <random>

#include "doctest.h"
#include "mtrace/catalog.hpp"
#include "mtrace/errors.hpp"
#include "mtrace/qpoly.hpp"

using namespace mtrace;

namespace {

// Cubic subfield of Q(zeta_p) for p = 1 mod 3: the Gaussian period polynomial
// x^3 + x^2 - (p-1)/3 x - (p(a+3) - 1)/27 with 4p = a^2 + 27 b^2, a = 1 mod 3.
Cubic period_cubic(long p) {
    for (long b = 1; 27 * b * b <= 4 * p; ++b) {
        long rest = 4 * p - 27 * b * b;
        for (long a = -200; a <= 200; ++a) {
            if (a * a != rest || ((a % 3) + 3) % 3 != 1) continue;
            return Cubic{Rat(-1), Rat(-(p - 1) / 3), Rat((p * (a + 3) - 1) / 27)};
        }
    }
    FAIL("no representation 4p = a^2 + 27b^2");
    return {};
}

Rat random_rat(std::mt19937& rng) {
    std::uniform_int_distribution<long> n(-30, 30), d(1, 9);
    Rat q(n(rng), d(rng));
    q.canonicalize();
    return q;
}

}  // namespace

TEST_CASE("arithmetic agrees with evaluation") {
    std::mt19937 rng(11);
    RatExpr a = parse_expr("(t^2+D*t-3)/(2*t+1)"), b = parse_expr("D^2/(t-5)+7");
    for (int i = 0; i < 40; ++i) {
        Rat t0 = random_rat(rng), d0 = random_rat(rng);
        if (t0 == 5 || 2 * t0 + 1 == 0) continue;
        Rat av = eval_expr(a, t0, d0), bv = eval_expr(b, t0, d0);
        CHECK(eval_expr(a + b, t0, d0) == av + bv);
        CHECK(eval_expr(a - b, t0, d0) == av - bv);
        CHECK(eval_expr(a * b, t0, d0) == av * bv);
        if (bv != 0) CHECK(eval_expr(a / b, t0, d0) == av / bv);
        CHECK(eval_expr(pow(a, 3), t0, d0) == av * av * av);
    }
}

TEST_CASE("canonical printing round trips") {
    for (const char* s : {"t", "-t^2+1728", "(t+1)/2", "D", "256*(t+1)^3/t", "-(t^2-27)*(t^2-3)^3/t^2", "6*D^2*t/(t^2+1)"}) {
        RatExpr e = parse_expr(s);
        CHECK(parse_expr(to_string(e)) == e);
    }
    FamilyCatalog fams = load_families(default_data_dir() + "/families.json");
    for (const auto& f : fams.families) {
        CHECK(parse_expr(to_string(f.j)) == f.j);
        CHECK(parse_expr(to_string(f.d)) == f.d);
    }
}

TEST_CASE("canonical form") {
    CHECK(parse_expr("(2*t+2)/(4*t^2-4)") == parse_expr("1/(2*t-2)"));
    CHECK(identity_check(parse_expr("(t^2-1)/(t-1)"), parse_expr("t+1")));
    CHECK_FALSE(identity_check(parse_expr("t+1"), parse_expr("t-1")));
}

TEST_CASE("parser errors carry positions") {
    try {
        parse_expr("t+*2");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.position() == 2);
    }
    CHECK_THROWS_AS(parse_expr("(t+1"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("x"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("t/0"), Error);
}

TEST_CASE("evaluation and composition") {
    CHECK_THROWS_AS(eval_expr(parse_expr("1/t"), Rat(0), Rat(1)), PoleError);
    CHECK(to_string(compose(parse_expr("t^2+1"), parse_expr("1/t"))) == to_string(parse_expr("(t^2+1)/t^2")));
    CHECK_THROWS_AS(compose(parse_expr("1/t"), parse_expr("0")), DegenerateComposition);
    RatExpr f = parse_expr("(t+3)^3*(t+27)/t");
    CHECK(identity_check(compose(f, parse_expr("27/t")), parse_expr("27*(t+1)*(t+9)^3/t^3")));
}

TEST_CASE("univariate resultant and discriminant") {
    UPoly x = UPoly::x();
    auto lin = [&](long c) { return x - UPoly::constant(Rat(c)); };
    CHECK(resultant(lin(2) * lin(-3), lin(5)) == Rat((2 - 5) * (-3 - 5)));
    for (long p = -4; p <= 4; ++p)
        for (long q = -4; q <= 4; ++q) {
            UPoly f = x * x * x + Rat(p) * x + UPoly::constant(Rat(q));
            CHECK(discriminant(f) == Rat(-4 * p * p * p - 27 * q * q));
            Cubic c{Rat(0), Rat(p), Rat(-q)};
            CHECK(cubic_disc(c) == discriminant(c.poly()));
        }
    UPoly a = lin(1) * lin(2), b = lin(1) * lin(3);
    CHECK(gcd(a, b) == lin(1));
    auto [qq, rr] = divmod(a * b + lin(7), b);
    CHECK(rr == lin(7));
    CHECK(qq == a);
}

TEST_CASE("integer helpers") {
    Int n("1000036000099");  // 1000003 * 1000033
    auto f = factor_integer(n);
    REQUIRE(f.size() == 2);
    CHECK(f[0].first == 1000003);
    CHECK(f[1].first == 1000033);
    Int prod = 1;
    for (const auto& [p, e] : factor_integer(Int(-720))) for (unsigned i = 0; i < e; ++i) prod *= p;
    CHECK(prod == 720);
    CHECK(squarefree_part(Rat(-12)) == -3);
    CHECK(squarefree_part(Rat(50, 3)) == 6);
    CHECK(same_square_class(Rat(2), Rat(8, 9)));
    CHECK_FALSE(same_square_class(Rat(2), Rat(-2)));
    CHECK(is_rational_square(Rat(49, 4)));
    CHECK(rational_sqrt(Rat(49, 4)) == Rat(7, 2));
    CHECK_FALSE(is_rational_square(Rat(-4)));
}

TEST_CASE("rational roots of cubics") {
    CHECK(cubic_has_rational_root(Cubic{Rat(2), Rat(1), Rat(2)}));   // (x-2)(x^2+1)
    CHECK_FALSE(cubic_has_rational_root(Cubic{Rat(0), Rat(0), Rat(2)}));  // x^3 - 2
    CHECK(cubic_has_rational_root(Cubic{Rat(1, 2), Rat(0), Rat(0)}));
    CHECK_FALSE(cubic_has_rational_root(period_cubic(7)));
}

TEST_CASE("companion cubics of cyclic cubic pairs") {
    std::vector<long> primes{7, 13, 19, 31, 37, 43, 61, 67, 73, 79, 97};
    std::mt19937 rng(3);
    std::uniform_int_distribution<std::size_t> pick(0, primes.size() - 1);
    for (int i = 0; i < 12; ++i) {
        long p = primes[pick(rng)], q = primes[pick(rng)];
        if (p == q) continue;
        Cubic fs = period_cubic(p), ft = period_cubic(q);
        REQUIRE(is_rational_square(cubic_disc(fs)));
        auto [r, r2] = companion_cubics(fs, ft);
        CHECK(is_rational_square(cubic_disc(r)));
        CHECK(is_rational_square(cubic_disc(r2)));
        CHECK(same_splitting_field(fs, ft, 300) == FieldVerdict::distinct);
        CHECK(same_splitting_field(ft, fs, 300) == FieldVerdict::distinct);
    }
    Cubic f7 = period_cubic(7);
    CHECK(same_splitting_field(f7, f7, 400) == FieldVerdict::equal);
    CHECK_THROWS_AS(companion_cubics(Cubic{Rat(0), Rat(0), Rat(2)}, f7), NonSquareDiscriminant);
    CHECK_THROWS_AS(same_splitting_field(Cubic{Rat(2), Rat(1), Rat(2)}, f7, 100), ReducibleCubic);
}
