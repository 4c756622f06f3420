#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "mtrace/qpoly.hpp"

namespace mtrace {

// Long Weierstrass coefficients a1, a2, a3, a4, a6.
using LongModel = std::array<Rat, 5>;

// y^2 = x^3 + A x + B over Q, optionally remembering the long model it came from.
class Curve {
public:
    Curve(Rat a, Rat b);
    static Curve from_long(const LongModel& w);

    const Rat& A() const { return a_; }
    const Rat& B() const { return b_; }
    const Rat& disc() const { return disc_; }
    const Rat& j() const { return j_; }
    const std::optional<LongModel>& long_model() const { return long_; }

    // Good reduction of the model in use: the long model when present, else the short one.
    bool is_good(std::uint64_t p) const;
    std::vector<std::uint64_t> bad_primes_upto(std::uint64_t bound) const;

private:
    Rat a_, b_, disc_, j_;
    std::optional<LongModel> long_;
    Rat long_disc_;
};

// d y^2 = x^3 + a4 x + a6 with a4 = 108 j/(1728 - j), a6 = 432 j/(1728 - j), as y^2 = x^3 + d^2 a4 x + d^3 a6.
Curve specialize(const RatExpr& j, const RatExpr& d, const Rat& t0, const Rat& d0);
std::pair<RatExpr, RatExpr> weierstrass_coeffs(const RatExpr& j);

std::int64_t ap(const Curve& e, std::uint64_t p);

struct TraceCensus {
    unsigned m = 0;
    std::uint64_t bound = 0;
    std::vector<std::uint64_t> primes;
    std::vector<unsigned> sequence;
    std::map<unsigned, std::uint64_t> counts;

    std::vector<unsigned> missing() const;
};

// With skip_small, p = 2 and p = 3 are left out even when good.
TraceCensus trace_census(const Curve& e, unsigned m, std::uint64_t bound, bool skip_small = true, unsigned threads = 1);

// f_n with f_n = psi_n for odd n and f_n = psi_n / y for even n.
UPoly division_poly(const Curve& e, unsigned n);
std::vector<std::uint64_t> division_poly_mod(const Curve& e, unsigned n, std::uint64_t p);

struct Specialization {
    Rat t, d;
};

// True iff the claimed factor (coefficients of x^0, x^1, ...) divides f_n at every sample.
bool verify_torsion_factor(const RatExpr& j, const RatExpr& d, unsigned n, const std::vector<RatExpr>& factor,
                           const std::vector<Specialization>& samples);

Int quad_subfield_of_point(const Curve& e, const Rat& x0);

struct DeltaFieldReport {
    Int sqrt_disc_field;
};
DeltaFieldReport delta_field_checks(const Curve& e);

bool is_isomorphic(const Curve& e1, const Curve& e2);

}  // namespace mtrace
