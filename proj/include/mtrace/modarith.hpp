#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mtrace {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

struct Mat {
    u32 m = 1;
    u32 a = 0, b = 0, c = 0, d = 0;

    static Mat make(i64 a, i64 b, i64 c, i64 d, u32 m);
    static Mat identity(u32 m);
    static Mat minus_identity(u32 m);

    u32 det() const;
    u32 trace() const;
    bool is_identity() const;
    bool is_scalar() const;

    // Dense encoding inside a fixed modulus: ((a*m + b)*m + c)*m + d.
    u64 code() const;
    static Mat from_code(u64 code, u32 m);

    bool operator==(const Mat& o) const = default;
    std::string str() const;
};

u32 mod_reduce(i64 x, u32 m);
u32 mod_pow(u32 base, u64 e, u32 m);
u64 gcd_u64(u64 a, u64 b);
// Inverse of x mod m; returns 0 when gcd(x, m) > 1 and m > 1.
u32 mod_inverse(u32 x, u32 m);

Mat mat_mul(const Mat& x, const Mat& y);
Mat mat_inv(const Mat& x);
Mat mat_pow(const Mat& x, u64 e);
Mat mat_neg(const Mat& x);
Mat conjugate(const Mat& g, const Mat& x);  // g x g^-1

std::pair<Mat, Mat> crt_split(const Mat& x, u32 m1, u32 m2);
Mat crt_join(const Mat& x1, const Mat& x2);
Mat reduce(const Mat& x, u32 d);
Mat lift(const Mat& x, u32 m);  // entrywise lift of representatives, no reduction

// Number theory helpers on machine integers.
std::vector<std::pair<u32, u32>> factorize(u32 n);
std::vector<u32> prime_divisors(u32 n);
std::vector<u32> divisors(u32 n);
u32 radical(u32 n);
bool is_prime_u64(u64 n);
bool is_prime_power(u32 n);
u32 euler_phi(u32 n);
u64 gl2_order(u32 m);
u64 sl2_order(u32 m);
std::vector<u32> unit_generators(u32 m);  // small generating set of (Z/m)^x
std::vector<u32> units(u32 m);

}  // namespace mtrace
