#include <numeric>

#include "doctest.h"
#include "mtrace/modcurve.hpp"

using namespace mtrace;

namespace {

// (a/p) for odd p by Euler's criterion.
i64 legendre(i64 a, u32 p) {
    i64 r = static_cast<i64>(mod_pow(mod_reduce(a, p), (p - 1) / 2, p));
    return r == 1 ? 1 : (r == 0 ? 0 : -1);
}

// Classical invariants of X_0(N).
GenusReport x0_formula(u32 n) {
    GenusReport r;
    u64 mu = n;
    for (u32 p : prime_divisors(n)) mu = mu / p * (p + 1);
    r.mu = mu;
    i64 nu2 = n % 4 == 0 ? 0 : 1, nu3 = n % 9 == 0 ? 0 : 1;
    for (u32 p : prime_divisors(n)) {
        if (p != 2) nu2 *= 1 + legendre(-1, p);
        if (p != 3) nu3 *= 1 + (p == 2 ? -1 : legendre(-3, p));
    }
    r.nu2 = static_cast<u64>(nu2);
    r.nu3 = static_cast<u64>(nu3);
    u64 cusps = 0;
    for (u32 d : divisors(n)) cusps += euler_phi(std::gcd(d, n / d));
    r.cusps = cusps;
    // 12 g = 12 + mu - 3 nu2 - 4 nu3 - 6 c
    r.genus = (12 + static_cast<i64>(mu) - 3 * nu2 - 4 * nu3 - 6 * static_cast<i64>(cusps)) / 12;
    return r;
}

Group gamma0(u32 n) {
    std::vector<Mat> gens{Mat::make(1, 1, 0, 1, n)};
    for (u32 u : unit_generators(n)) {
        gens.push_back(Mat::make(u, 0, 0, 1, n));
        gens.push_back(Mat::make(1, 0, 0, u, n));
    }
    return Group::close(gens, n);
}

}  // namespace

TEST_CASE("X_0(N) matches the classical formulas") {
    for (u32 n = 2; n <= 30; ++n) {
        CAPTURE(n);
        GenusReport want = x0_formula(n), got = genus(gamma0(n));
        CHECK(got.mu == want.mu);
        CHECK(got.nu2 == want.nu2);
        CHECK(got.nu3 == want.nu3);
        CHECK(got.cusps == want.cusps);
        CHECK(got.genus == want.genus);
    }
}

TEST_CASE("X(N) genus formula") {
    for (u32 n = 3; n <= 12; ++n) {
        CAPTURE(n);
        // g = 1 + (N - 6) N^2 prod(1 - p^-2) / 24
        i64 num = static_cast<i64>(n) * n * (static_cast<i64>(n) - 6);
        i64 den = 24;
        for (u32 p : prime_divisors(n)) {
            num *= static_cast<i64>(p) * p - 1;
            den *= static_cast<i64>(p) * p;
        }
        CHECK(genus(Group::trivial(n)).genus == 1 + num / den);
    }
}

TEST_CASE("genus of the full group") {
    GenusReport r = genus(Group::full(6));
    CHECK(r.mu == 1);
    CHECK(r.genus == 0);
    CHECK(r.cusps == 1);
}

TEST_CASE("rational point test on Borel groups") {
    for (u32 q : {2u, 3u, 4u, 5u, 7u, 8u, 9u}) CHECK(sz_rational_point_test(gamma0(q)));
}
