#include <numeric>

#include "doctest.h"
#include "mtrace/modarith.hpp"

using namespace mtrace;

namespace {

// Counts invertible matrices by brute force.
u64 count_gl2(u32 m) {
    u64 n = 0;
    for (u32 a = 0; a < m; ++a)
        for (u32 b = 0; b < m; ++b)
            for (u32 c = 0; c < m; ++c)
                for (u32 d = 0; d < m; ++d) {
                    i64 det = (static_cast<i64>(a) * d - static_cast<i64>(b) * c) % m;
                    if (std::gcd<i64, i64>((det + m) % m, m) == 1) ++n;
                }
    return n;
}

}  // namespace

TEST_CASE("gl2 and sl2 orders agree with enumeration") {
    for (u32 m : {2u, 3u, 4u, 5u, 6u, 8u, 9u, 10u, 12u}) {
        CHECK(gl2_order(m) == count_gl2(m));
        CHECK(sl2_order(m) * euler_phi(m) == gl2_order(m));
    }
}

TEST_CASE("matrix arithmetic") {
    Mat x = Mat::make(2, 3, 5, 7, 12), y = Mat::make(-1, 4, 9, 1, 12);
    CHECK(x.det() == 11);
    CHECK(mat_mul(x, mat_inv(x)).is_identity());
    CHECK(mat_mul(mat_mul(x, y), mat_inv(y)) == x);
    CHECK(mat_pow(x, 0).is_identity());
    CHECK(mat_pow(x, 3) == mat_mul(x, mat_mul(x, x)));
    CHECK(Mat::from_code(x.code(), 12) == x);
    CHECK(mat_neg(Mat::identity(12)) == Mat::minus_identity(12));
    CHECK(conjugate(y, Mat::minus_identity(12)) == Mat::minus_identity(12));
}

TEST_CASE("crt split and join are inverse") {
    for (i64 a = 0; a < 28; a += 3) {
        Mat x = Mat::make(a, 5, 7, a + 1, 28);
        auto [x4, x7] = crt_split(x, 4, 7);
        CHECK(x4.m == 4);
        CHECK(x7.m == 7);
        CHECK(crt_join(x4, x7) == x);
        CHECK(reduce(x, 4) == x4);
    }
}

TEST_CASE("number theory helpers") {
    CHECK(mod_inverse(3, 28) == 19);
    CHECK(mod_inverse(7, 28) == 0);
    CHECK(mod_pow(3, 6, 7) == 1);
    CHECK(radical(72) == 6);
    CHECK(euler_phi(28) == 12);
    CHECK(is_prime_power(27));
    CHECK_FALSE(is_prime_power(12));
    CHECK(divisors(12) == std::vector<u32>{1, 2, 3, 4, 6, 12});
    CHECK(prime_divisors(28) == std::vector<u32>{2, 7});
    CHECK(is_prime_u64(1000000007ULL));
    CHECK_FALSE(is_prime_u64(1000000007ULL * 3));
    for (u32 m : {5u, 8u, 9u, 28u}) CHECK(units(m).size() == euler_phi(m));
}
