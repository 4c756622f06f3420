#include "mtrace/modarith.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mtrace/errors.hpp"

namespace mtrace {

u32 mod_reduce(i64 x, u32 m) {
    i64 r = x % static_cast<i64>(m);
    if (r < 0) r += m;
    return static_cast<u32>(r);
}

u32 mod_pow(u32 base, u64 e, u32 m) {
    u64 r = 1 % m, b = base % m;
    while (e) {
        if (e & 1) r = r * b % m;
        b = b * b % m;
        e >>= 1;
    }
    return static_cast<u32>(r);
}

u64 gcd_u64(u64 a, u64 b) { return std::gcd(a, b); }

u32 mod_inverse(u32 x, u32 m) {
    if (m == 1) return 0;
    i64 g = m, ng = x % m, s = 0, ns = 1;
    while (ng) {
        i64 q = g / ng;
        std::tie(g, ng) = std::make_pair(ng, g - q * ng);
        std::tie(s, ns) = std::make_pair(ns, s - q * ns);
    }
    if (g != 1) return 0;
    return mod_reduce(s, m);
}

Mat Mat::make(i64 a, i64 b, i64 c, i64 d, u32 m) {
    return Mat{m, mod_reduce(a, m), mod_reduce(b, m), mod_reduce(c, m), mod_reduce(d, m)};
}

Mat Mat::identity(u32 m) { return make(1, 0, 0, 1, m); }
Mat Mat::minus_identity(u32 m) { return make(-1, 0, 0, -1, m); }

u32 Mat::det() const {
    u64 ad = static_cast<u64>(a) * d % m, bc = static_cast<u64>(b) * c % m;
    return static_cast<u32>((ad + m - bc) % m);
}

u32 Mat::trace() const { return static_cast<u32>((static_cast<u64>(a) + d) % m); }

bool Mat::is_identity() const { return *this == identity(m); }

bool Mat::is_scalar() const { return b == 0 && c == 0 && a == d; }

u64 Mat::code() const {
    u64 mm = m;
    return ((static_cast<u64>(a) * mm + b) * mm + c) * mm + d;
}

Mat Mat::from_code(u64 code, u32 m) {
    Mat x;
    x.m = m;
    x.d = static_cast<u32>(code % m);
    code /= m;
    x.c = static_cast<u32>(code % m);
    code /= m;
    x.b = static_cast<u32>(code % m);
    code /= m;
    x.a = static_cast<u32>(code % m);
    return x;
}

std::string Mat::str() const {
    std::ostringstream os;
    os << "[[" << a << "," << b << "],[" << c << "," << d << "]]";
    return os.str();
}

Mat mat_mul(const Mat& x, const Mat& y) {
    if (x.m != y.m) throw ModulusMismatch("mat_mul: moduli differ");
    u64 m = x.m;
    Mat r;
    r.m = x.m;
    r.a = static_cast<u32>((static_cast<u64>(x.a) * y.a % m + static_cast<u64>(x.b) * y.c % m) % m);
    r.b = static_cast<u32>((static_cast<u64>(x.a) * y.b % m + static_cast<u64>(x.b) * y.d % m) % m);
    r.c = static_cast<u32>((static_cast<u64>(x.c) * y.a % m + static_cast<u64>(x.d) * y.c % m) % m);
    r.d = static_cast<u32>((static_cast<u64>(x.c) * y.b % m + static_cast<u64>(x.d) * y.d % m) % m);
    return r;
}

Mat mat_inv(const Mat& x) {
    u32 di = mod_inverse(x.det(), x.m);
    if (x.m > 1 && di == 0) throw NonUnitDeterminant("mat_inv: determinant " + std::to_string(x.det()) + " is not a unit mod " + std::to_string(x.m));
    u64 m = x.m;
    return Mat{x.m, static_cast<u32>(static_cast<u64>(x.d) * di % m),
               static_cast<u32>(static_cast<u64>((m - x.b) % m) * di % m),
               static_cast<u32>(static_cast<u64>((m - x.c) % m) * di % m),
               static_cast<u32>(static_cast<u64>(x.a) * di % m)};
}

Mat mat_pow(const Mat& x, u64 e) {
    Mat r = Mat::identity(x.m), b = x;
    while (e) {
        if (e & 1) r = mat_mul(r, b);
        b = mat_mul(b, b);
        e >>= 1;
    }
    return r;
}

Mat mat_neg(const Mat& x) {
    return Mat{x.m, (x.m - x.a) % x.m, (x.m - x.b) % x.m, (x.m - x.c) % x.m, (x.m - x.d) % x.m};
}

Mat conjugate(const Mat& g, const Mat& x) { return mat_mul(mat_mul(g, x), mat_inv(g)); }

std::pair<Mat, Mat> crt_split(const Mat& x, u32 m1, u32 m2) {
    if (static_cast<u64>(m1) * m2 != x.m || std::gcd(m1, m2) != 1)
        throw BadFactorization("crt_split: " + std::to_string(x.m) + " != " + std::to_string(m1) + "*" +
                               std::to_string(m2) + " with coprime factors");
    return {reduce(x, m1), reduce(x, m2)};
}

Mat crt_join(const Mat& x1, const Mat& x2) {
    u32 m1 = x1.m, m2 = x2.m;
    if (std::gcd(m1, m2) != 1) throw BadFactorization("crt_join: moduli not coprime");
    u64 m = static_cast<u64>(m1) * m2;
    if (m > 0xffffffffULL) throw BadFactorization("crt_join: modulus exceeds 2^32");
    // e1 = 1 mod m1, 0 mod m2; e2 = 0 mod m1, 1 mod m2
    u64 e1 = static_cast<u64>(m2) * mod_inverse(m2 % m1, m1) % m;
    u64 e2 = static_cast<u64>(m1) * mod_inverse(m1 % m2, m2) % m;
    if (m1 == 1) e1 = 0, e2 = 1 % m;
    if (m2 == 1) e1 = 1 % m, e2 = 0;
    auto join = [&](u32 r1, u32 r2) {
        return static_cast<u32>((static_cast<unsigned __int128>(r1) * e1 + static_cast<unsigned __int128>(r2) * e2) % m);
    };
    return Mat{static_cast<u32>(m), join(x1.a, x2.a), join(x1.b, x2.b), join(x1.c, x2.c), join(x1.d, x2.d)};
}

Mat reduce(const Mat& x, u32 d) {
    if (d == 0 || x.m % d != 0) throw NotDivisor("reduce: " + std::to_string(d) + " does not divide " + std::to_string(x.m));
    return Mat{d, x.a % d, x.b % d, x.c % d, x.d % d};
}

Mat lift(const Mat& x, u32 m) { return Mat::make(x.a, x.b, x.c, x.d, m); }

std::vector<std::pair<u32, u32>> factorize(u32 n) {
    std::vector<std::pair<u32, u32>> out;
    for (u32 p = 2; static_cast<u64>(p) * p <= n; ++p) {
        if (n % p) continue;
        u32 e = 0;
        while (n % p == 0) n /= p, ++e;
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

std::vector<u32> prime_divisors(u32 n) {
    std::vector<u32> out;
    for (auto [p, e] : factorize(n)) out.push_back(p);
    return out;
}

std::vector<u32> divisors(u32 n) {
    std::vector<u32> out{1};
    for (auto [p, e] : factorize(n)) {
        std::size_t k = out.size();
        u32 pk = 1;
        for (u32 i = 1; i <= e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < k; ++j) out.push_back(out[j] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

u32 radical(u32 n) {
    u32 r = 1;
    for (u32 p : prime_divisors(n)) r *= p;
    return r;
}

bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) d >>= 1, ++s;
    auto mulmod = [n](u64 x, u64 y) { return static_cast<u64>(static_cast<unsigned __int128>(x) * y % n); };
    for (u64 a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        u64 x = 1, b = a % n, e = d;
        while (e) {
            if (e & 1) x = mulmod(x, b);
            b = mulmod(b, b);
            e >>= 1;
        }
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

bool is_prime_power(u32 n) { return n > 1 && factorize(n).size() == 1; }

u32 euler_phi(u32 n) {
    u32 r = n;
    for (u32 p : prime_divisors(n)) r = r / p * (p - 1);
    return r;
}

u64 gl2_order(u32 m) {
    u64 r = 1;
    for (auto [p, e] : factorize(m)) {
        u64 pe = 1;
        for (u32 i = 0; i < e; ++i) pe *= p;
        u64 q = pe / p;
        r *= (q * q * q * q) * (static_cast<u64>(p) * p - 1) * (static_cast<u64>(p) * p - p);
    }
    return r;
}

u64 sl2_order(u32 m) { return gl2_order(m) / euler_phi(m); }

std::vector<u32> units(u32 m) {
    std::vector<u32> out;
    if (m == 1) return {0};
    for (u32 x = 1; x < m; ++x)
        if (std::gcd(x, m) == 1) out.push_back(x);
    return out;
}

std::vector<u32> unit_generators(u32 m) {
    std::vector<u32> gens;
    if (m <= 2) return gens;
    std::vector<char> in(m, 0);
    std::vector<u32> sub{1};
    in[1] = 1;
    for (u32 u : units(m)) {
        if (in[u]) continue;
        gens.push_back(u);
        // sub := <sub, u>
        std::vector<u32> next = sub;
        for (std::size_t i = 0; i < next.size(); ++i) {
            for (u32 g : gens) {
                u32 y = static_cast<u32>(static_cast<u64>(next[i]) * g % m);
                if (!in[y]) in[y] = 1, next.push_back(y);
            }
        }
        sub = std::move(next);
    }
    return gens;
}

}  // namespace mtrace
