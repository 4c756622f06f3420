#pragma once

#include <gmpxx.h>

#include <string>
#include <utility>
#include <vector>

namespace mtrace {

using Int = mpz_class;
using Rat = mpq_class;

// Univariate polynomial over Q, c[i] is the coefficient of x^i; no trailing zeros.
struct UPoly {
    std::vector<Rat> c;

    UPoly() = default;
    explicit UPoly(std::vector<Rat> coeffs);
    static UPoly constant(const Rat& v);
    static UPoly x();

    int degree() const;  // -1 for zero
    bool is_zero() const { return c.empty(); }
    const Rat& lead() const { return c.back(); }
    Rat eval(const Rat& x) const;
    void trim();
    std::string str(const char* var = "x") const;

    bool operator==(const UPoly& o) const { return c == o.c; }
};

UPoly operator+(const UPoly& a, const UPoly& b);
UPoly operator-(const UPoly& a, const UPoly& b);
UPoly operator*(const UPoly& a, const UPoly& b);
UPoly operator*(const Rat& s, const UPoly& a);
std::pair<UPoly, UPoly> divmod(const UPoly& a, const UPoly& b);
UPoly monic(const UPoly& a);
UPoly gcd(const UPoly& a, const UPoly& b);
Rat resultant(const UPoly& f, const UPoly& g);
Rat discriminant(const UPoly& f);

// Polynomial in Z[t][D]: terms[j] holds the t-coefficients of D^j.
struct Poly {
    std::vector<std::vector<Int>> terms;

    static Poly constant(const Int& v);
    static Poly var_t();
    static Poly var_d();

    bool is_zero() const { return terms.empty(); }
    int deg_d() const { return static_cast<int>(terms.size()) - 1; }
    int deg_t() const;
    void trim();
    Rat eval(const Rat& t, const Rat& d) const;
    // Leading coefficient under the order (D-degree, t-degree).
    Int lead() const;
    Int content() const;

    bool operator==(const Poly& o) const { return terms == o.terms; }
};

Poly operator+(const Poly& a, const Poly& b);
Poly operator-(const Poly& a, const Poly& b);
Poly operator*(const Poly& a, const Poly& b);
Poly operator*(const Int& s, const Poly& a);
Poly poly_gcd(const Poly& a, const Poly& b);
Poly exact_div(const Poly& a, const Poly& b);

// Reduced quotient num/den with gcd(num, den) = 1, coprime integer contents and a positive
// leading denominator coefficient.
class RatExpr {
public:
    RatExpr();
    RatExpr(Poly num, Poly den);
    static RatExpr constant(const Rat& v);
    static RatExpr t();
    static RatExpr d();

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool has_d() const { return num_.deg_d() > 0 || den_.deg_d() > 0; }

    bool operator==(const RatExpr& o) const { return num_ == o.num_ && den_ == o.den_; }

private:
    Poly num_, den_;
};

RatExpr operator+(const RatExpr& a, const RatExpr& b);
RatExpr operator-(const RatExpr& a, const RatExpr& b);
RatExpr operator-(const RatExpr& a);
RatExpr operator*(const RatExpr& a, const RatExpr& b);
RatExpr operator/(const RatExpr& a, const RatExpr& b);
RatExpr pow(const RatExpr& a, unsigned e);

RatExpr parse_expr(const std::string& text);
std::string to_string(const RatExpr& e);
std::string to_string(const Poly& p);
Rat eval_expr(const RatExpr& e, const Rat& t0, const Rat& d0);
// Substitutes inner for t in outer.
RatExpr compose(const RatExpr& outer, const RatExpr& inner);
bool identity_check(const RatExpr& lhs, const RatExpr& rhs);
// Coefficients of a polynomial in x whose coefficients are rational functions, specialized.
UPoly specialize_coeffs(const std::vector<RatExpr>& coeffs, const Rat& t0, const Rat& d0);

// x^3 - s1 x^2 + s2 x - s3
struct Cubic {
    Rat s1, s2, s3;
    UPoly poly() const;
};

Rat cubic_disc(const Cubic& f);
bool is_rational_square(const Rat& q);
Rat rational_sqrt(const Rat& q);  // requires is_rational_square
Int squarefree_part(const Rat& q);
bool same_square_class(const Rat& a, const Rat& b);
std::vector<std::pair<Int, unsigned>> factor_integer(const Int& n);
bool cubic_has_rational_root(const Cubic& f);
std::pair<Cubic, Cubic> companion_cubics(const Cubic& fs, const Cubic& ft);

enum class FieldVerdict { equal, distinct, inconclusive };
const char* to_string(FieldVerdict v);
FieldVerdict same_splitting_field(const Cubic& fs, const Cubic& ft, unsigned prime_budget);

}  // namespace mtrace
