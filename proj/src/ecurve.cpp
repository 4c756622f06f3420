#include "mtrace/ecurve.hpp"

#include <cmath>
#include <functional>
#include <thread>

#include "mtrace/errors.hpp"
#include "mtrace/modarith.hpp"

namespace mtrace {

namespace {

bool divides_rat(const Rat& q, std::uint64_t p) {
    return mpz_divisible_ui_p(q.get_num_mpz_t(), p) || mpz_divisible_ui_p(q.get_den_mpz_t(), p);
}

bool divides_den(const Rat& q, std::uint64_t p) { return mpz_divisible_ui_p(q.get_den_mpz_t(), p); }

std::uint64_t reduce_mod(const Rat& q, std::uint64_t p) {
    if (divides_den(q, p)) throw BadPrime("denominator divisible by " + std::to_string(p));
    std::uint64_t n = mpz_fdiv_ui(q.get_num_mpz_t(), p);
    std::uint64_t d = mpz_fdiv_ui(q.get_den_mpz_t(), p);
    return n * mod_inverse(static_cast<u32>(d), static_cast<u32>(p)) % p;
}

Rat short_disc(const Rat& a, const Rat& b) { return -16 * (4 * a * a * a + 27 * b * b); }

struct LongInvariants {
    Rat b2, b4, b6, b8, c4, c6, disc;
};

LongInvariants long_invariants(const LongModel& w) {
    const Rat &a1 = w[0], &a2 = w[1], &a3 = w[2], &a4 = w[3], &a6 = w[4];
    LongInvariants r;
    r.b2 = a1 * a1 + 4 * a2;
    r.b4 = 2 * a4 + a1 * a3;
    r.b6 = a3 * a3 + 4 * a6;
    r.b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    r.c4 = r.b2 * r.b2 - 24 * r.b4;
    r.c6 = -r.b2 * r.b2 * r.b2 + 36 * r.b2 * r.b4 - 216 * r.b6;
    r.disc = -r.b2 * r.b2 * r.b8 - 8 * r.b4 * r.b4 * r.b4 - 27 * r.b6 * r.b6 + 9 * r.b2 * r.b4 * r.b6;
    return r;
}

// chi[x] is the Legendre symbol (x/p).
std::vector<std::int8_t> legendre_table(std::uint64_t p) {
    std::vector<std::int8_t> chi(p, -1);
    chi[0] = 0;
    for (std::uint64_t y = 1; y <= p / 2; ++y) chi[y * y % p] = 1;
    return chi;
}

}  // namespace

Curve::Curve(Rat a, Rat b) : a_(std::move(a)), b_(std::move(b)) {
    disc_ = short_disc(a_, b_);
    if (disc_ == 0) throw SingularSpecialization("singular curve: discriminant is zero");
    j_ = -1728 * (4 * a_) * (4 * a_) * (4 * a_) / disc_;
}

Curve Curve::from_long(const LongModel& w) {
    LongInvariants inv = long_invariants(w);
    if (inv.disc == 0) throw SingularSpecialization("singular long model");
    Curve e(-27 * inv.c4, -54 * inv.c6);
    e.long_ = w;
    e.long_disc_ = inv.disc;
    return e;
}

bool Curve::is_good(std::uint64_t p) const {
    if (long_) {
        for (const Rat& a : *long_)
            if (divides_den(a, p)) return false;
        return !divides_rat(long_disc_, p);
    }
    return !divides_den(a_, p) && !divides_den(b_, p) && !divides_rat(disc_, p);
}

std::vector<std::uint64_t> Curve::bad_primes_upto(std::uint64_t bound) const {
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 2; p <= bound; ++p)
        if (is_prime_u64(p) && !is_good(p)) out.push_back(p);
    return out;
}

std::pair<RatExpr, RatExpr> weierstrass_coeffs(const RatExpr& j) {
    RatExpr k = j / (RatExpr::constant(1728) - j);
    return {RatExpr::constant(108) * k, RatExpr::constant(432) * k};
}

Curve specialize(const RatExpr& j, const RatExpr& d, const Rat& t0, const Rat& d0) {
    Rat jv = eval_expr(j, t0, d0);
    if (jv == 0 || jv == 1728) throw SingularSpecialization("j-invariant is " + jv.get_str() + " at t=" + t0.get_str());
    Rat dv = eval_expr(d, t0, d0);
    if (dv == 0) throw SingularSpecialization("twist parameter vanishes at t=" + t0.get_str());
    Rat k = jv / (1728 - jv);
    return Curve(dv * dv * 108 * k, dv * dv * dv * 432 * k);
}

std::int64_t ap(const Curve& e, std::uint64_t p) {
    if (!is_prime_u64(p)) throw BadPrime(std::to_string(p) + " is not prime");
    if (!e.is_good(p)) throw BadPrime("bad prime " + std::to_string(p));
    std::uint64_t points = 1;
    if (e.long_model()) {
        const LongModel& w = *e.long_model();
        if (p == 2) {
            std::uint64_t c[5];
            for (int i = 0; i < 5; ++i) c[i] = reduce_mod(w[i], 2);
            for (std::uint64_t x = 0; x < 2; ++x)
                for (std::uint64_t y = 0; y < 2; ++y) {
                    std::uint64_t lhs = (y * y + c[0] * x * y + c[2] * y) % 2;
                    std::uint64_t rhs = (x * x * x + c[1] * x * x + c[3] * x + c[4]) % 2;
                    if (lhs == rhs) ++points;
                }
        } else {
            LongInvariants inv = long_invariants(w);
            std::uint64_t b2 = reduce_mod(inv.b2, p), b4 = reduce_mod(inv.b4, p), b6 = reduce_mod(inv.b6, p);
            auto chi = legendre_table(p);
            for (std::uint64_t x = 0; x < p; ++x) {
                std::uint64_t x2 = x * x % p;
                std::uint64_t v = (4 * x2 % p * x + b2 * x2 + 2 * b4 % p * x + b6) % p;
                points += 1 + chi[v];
            }
        }
    } else {
        if (p == 2) throw BadPrime("short model at p = 2");
        std::uint64_t a = reduce_mod(e.A(), p), b = reduce_mod(e.B(), p);
        auto chi = legendre_table(p);
        for (std::uint64_t x = 0; x < p; ++x) {
            std::uint64_t v = ((x * x % p + a) * x + b) % p;
            points += 1 + chi[v];
        }
    }
    std::int64_t t = static_cast<std::int64_t>(p + 1) - static_cast<std::int64_t>(points);
    if (static_cast<double>(t) * t > 4.0 * static_cast<double>(p)) throw Error("Hasse bound violated at p = " + std::to_string(p));
    return t;
}

std::vector<unsigned> TraceCensus::missing() const {
    std::vector<unsigned> out;
    for (unsigned r = 0; r < m; ++r) {
        auto it = counts.find(r);
        if (it == counts.end() || it->second == 0) out.push_back(r);
    }
    return out;
}

TraceCensus trace_census(const Curve& e, unsigned m, std::uint64_t bound, bool skip_small, unsigned threads) {
    if (m < 2) throw ZeroInput("trace_census: modulus must be at least 2");
    TraceCensus c;
    c.m = m;
    c.bound = bound;
    for (std::uint64_t p = skip_small ? 5 : 2; p <= bound; ++p)
        if (is_prime_u64(p) && e.is_good(p)) c.primes.push_back(p);
    c.sequence.resize(c.primes.size());
    threads = std::max(1u, threads);
    auto work = [&](unsigned tid) {
        for (std::size_t i = tid; i < c.primes.size(); i += threads) {
            std::int64_t a = ap(e, c.primes[i]);
            c.sequence[i] = static_cast<unsigned>(((a % static_cast<std::int64_t>(m)) + m) % m);
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (unsigned r = 0; r < m; ++r) c.counts[r] = 0;
    for (unsigned r : c.sequence) ++c.counts[r];
    return c;
}

namespace {

template <class T>
struct PolyOps {
    // Arithmetic on coefficient vectors; T supplies + - * and equality with zero.
    std::function<T(long)> from_int;
    std::function<T(const T&)> half;
    std::function<bool(const T&)> is_zero;

    void trim(std::vector<T>& a) const {
        while (!a.empty() && is_zero(a.back())) a.pop_back();
    }
    std::vector<T> add(const std::vector<T>& a, const std::vector<T>& b, bool negate_b) const {
        std::vector<T> r(std::max(a.size(), b.size()), from_int(0));
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = r[i] + a[i];
        for (std::size_t i = 0; i < b.size(); ++i) r[i] = negate_b ? T(r[i] - b[i]) : T(r[i] + b[i]);
        trim(r);
        return r;
    }
    std::vector<T> mul(const std::vector<T>& a, const std::vector<T>& b) const {
        if (a.empty() || b.empty()) return {};
        std::vector<T> r(a.size() + b.size() - 1, from_int(0));
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = r[i + j] + a[i] * b[j];
        trim(r);
        return r;
    }
    std::vector<T> cube(const std::vector<T>& a) const { return mul(a, mul(a, a)); }
    std::vector<T> sq(const std::vector<T>& a) const { return mul(a, a); }
};

template <class T>
std::vector<T> division_poly_generic(unsigned n, const T& a, const T& b, const PolyOps<T>& ops) {
    auto I = [&](long v) { return ops.from_int(v); };
    std::vector<std::vector<T>> f(std::max(5u, n + 1));
    f[0] = {};
    f[1] = {I(1)};
    f[2] = {I(2)};
    f[3] = {I(0) - a * a, I(12) * b, I(6) * a, I(0), I(3)};
    f[4] = {I(-4) * (I(8) * b * b + a * a * a), I(-16) * a * b, I(-20) * a * a, I(80) * b, I(20) * a, I(0), I(4)};
    for (auto& v : f) ops.trim(v);
    std::vector<T> big_f = {b, a, I(0), I(1)};
    std::vector<T> f2 = ops.sq(big_f);
    for (unsigned idx = 5; idx <= n; ++idx) {
        unsigned k = idx / 2;
        if (idx % 2) {
            std::vector<T> u = ops.mul(f[k + 2], ops.cube(f[k]));
            std::vector<T> v = ops.mul(f[k - 1], ops.cube(f[k + 1]));
            if (k % 2 == 0)
                u = ops.mul(f2, u);
            else
                v = ops.mul(f2, v);
            f[idx] = ops.add(u, v, true);
        } else {
            std::vector<T> u = ops.mul(f[k + 2], ops.sq(f[k - 1]));
            std::vector<T> v = ops.mul(f[k - 2], ops.sq(f[k + 1]));
            std::vector<T> w = ops.mul(f[k], ops.add(u, v, true));
            for (T& c : w) c = ops.half(c);
            f[idx] = w;
        }
    }
    return f[n];
}

struct Fp {
    std::uint64_t v;
    std::uint64_t p;
    Fp operator+(const Fp& o) const { return {(v + o.v) % p, p}; }
    Fp operator-(const Fp& o) const { return {(v + p - o.v) % p, p}; }
    Fp operator*(const Fp& o) const { return {static_cast<std::uint64_t>(static_cast<unsigned __int128>(v) * o.v % p), p}; }
};

}  // namespace

UPoly division_poly(const Curve& e, unsigned n) {
    if (n < 1 || n > 16) throw Error("division_poly: n must lie in 1..16");
    PolyOps<Rat> ops{[](long v) { return Rat(v); }, [](const Rat& x) { return x / 2; }, [](const Rat& x) { return x == 0; }};
    return UPoly(division_poly_generic<Rat>(n, e.A(), e.B(), ops));
}

std::vector<std::uint64_t> division_poly_mod(const Curve& e, unsigned n, std::uint64_t p) {
    if (n < 1 || n > 16) throw Error("division_poly: n must lie in 1..16");
    if (n % p == 0) throw CharacteristicDividesN("characteristic " + std::to_string(p) + " divides " + std::to_string(n));
    if (p == 2 || divides_den(e.A(), p) || divides_den(e.B(), p) || divides_rat(e.disc(), p))
        throw BadPrime("short model is singular mod " + std::to_string(p));
    std::uint64_t inv2 = (p + 1) / 2;
    PolyOps<Fp> ops{[p](long v) { return Fp{static_cast<std::uint64_t>(((v % static_cast<long>(p)) + static_cast<long>(p)) % static_cast<long>(p)), p}; },
                    [inv2](const Fp& x) { return x * Fp{inv2, x.p}; }, [](const Fp& x) { return x.v == 0; }};
    auto f = division_poly_generic<Fp>(n, Fp{reduce_mod(e.A(), p), p}, Fp{reduce_mod(e.B(), p), p}, ops);
    std::vector<std::uint64_t> out;
    for (const Fp& c : f) out.push_back(c.v);
    return out;
}

bool verify_torsion_factor(const RatExpr& j, const RatExpr& d, unsigned n, const std::vector<RatExpr>& factor,
                           const std::vector<Specialization>& samples) {
    for (const Specialization& s : samples) {
        Curve e = specialize(j, d, s.t, s.d);
        UPoly fac = specialize_coeffs(factor, s.t, s.d);
        if (fac.degree() < 1) return false;
        if (!divmod(division_poly(e, n), fac).second.is_zero()) return false;
    }
    return true;
}

Int quad_subfield_of_point(const Curve& e, const Rat& x0) {
    Rat v = x0 * x0 * x0 + e.A() * x0 + e.B();
    if (v == 0) throw TwoTorsionPoint("x0 = " + x0.get_str() + " is the abscissa of a 2-torsion point");
    return squarefree_part(v);
}

DeltaFieldReport delta_field_checks(const Curve& e) { return {squarefree_part(e.disc())}; }

bool is_isomorphic(const Curve& e1, const Curve& e2) {
    if (e1.j() != e2.j()) return false;
    if (e1.A() == 0) {
        // j = 0: B1/B2 must be a sixth power.
        Rat q = e1.B() / e2.B();
        if (q < 0) return false;
        Int n, d;
        return mpz_root(n.get_mpz_t(), q.get_num_mpz_t(), 6) && mpz_root(d.get_mpz_t(), q.get_den_mpz_t(), 6);
    }
    if (e1.B() == 0) {
        // j = 1728: A1/A2 must be a fourth power.
        Rat q = e1.A() / e2.A();
        if (q < 0) return false;
        Int n, d;
        return mpz_root(n.get_mpz_t(), q.get_num_mpz_t(), 4) && mpz_root(d.get_mpz_t(), q.get_den_mpz_t(), 4);
    }
    return is_rational_square((e1.B() * e2.A()) / (e1.A() * e2.B()));
}

}  // namespace mtrace
