#include "mtrace/qpoly.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "mtrace/errors.hpp"
#include "mtrace/modarith.hpp"

namespace mtrace {

namespace {

Rat pow_rat(const Rat& b, int e) {
    Rat r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace

// ---------------------------------------------------------------- univariate over Q

UPoly::UPoly(std::vector<Rat> coeffs) : c(std::move(coeffs)) { trim(); }

UPoly UPoly::constant(const Rat& v) { return UPoly(std::vector<Rat>{v}); }
UPoly UPoly::x() { return UPoly(std::vector<Rat>{Rat(0), Rat(1)}); }

int UPoly::degree() const { return static_cast<int>(c.size()) - 1; }

void UPoly::trim() {
    while (!c.empty() && c.back() == 0) c.pop_back();
}

Rat UPoly::eval(const Rat& x) const {
    Rat r = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
    return r;
}

std::string UPoly::str(const char* var) const {
    if (c.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
        const Rat& a = c[i];
        if (a == 0) continue;
        Rat mag = abs(a);
        if (a < 0)
            os << (first ? "-" : " - ");
        else if (!first)
            os << " + ";
        if (i == 0 || mag != 1) os << mag.get_str() << (i ? "*" : "");
        if (i >= 1) os << var;
        if (i >= 2) os << "^" << i;
        first = false;
    }
    return os.str();
}

UPoly operator+(const UPoly& a, const UPoly& b) {
    std::vector<Rat> r(std::max(a.c.size(), b.c.size()));
    for (std::size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r[i] += b.c[i];
    return UPoly(std::move(r));
}

UPoly operator-(const UPoly& a, const UPoly& b) { return a + Rat(-1) * b; }

UPoly operator*(const UPoly& a, const UPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rat> r(a.c.size() + b.c.size() - 1);
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
    return UPoly(std::move(r));
}

UPoly operator*(const Rat& s, const UPoly& a) {
    std::vector<Rat> r = a.c;
    for (Rat& x : r) x *= s;
    return UPoly(std::move(r));
}

std::pair<UPoly, UPoly> divmod(const UPoly& a, const UPoly& b) {
    if (b.is_zero()) throw DivisionByZeroPolynomial("divmod: division by the zero polynomial");
    std::vector<Rat> q(std::max(0, a.degree() - b.degree() + 1));
    std::vector<Rat> r = a.c;
    for (int i = a.degree() - b.degree(); i >= 0; --i) {
        Rat f = r[i + b.degree()] / b.lead();
        q[i] = f;
        if (f == 0) continue;
        for (int j = 0; j <= b.degree(); ++j) r[i + j] -= f * b.c[j];
    }
    return {UPoly(std::move(q)), UPoly(std::move(r))};
}

UPoly monic(const UPoly& a) {
    if (a.is_zero()) return a;
    return Rat(1) / a.lead() * a;
}

UPoly gcd(const UPoly& a, const UPoly& b) {
    UPoly x = a, y = b;
    while (!y.is_zero()) {
        UPoly r = divmod(x, y).second;
        x = std::move(y);
        y = std::move(r);
    }
    return monic(x);
}

Rat resultant(const UPoly& f, const UPoly& g) {
    if (f.is_zero() || g.is_zero()) return 0;
    int df = f.degree(), dg = g.degree();
    if (dg == 0) return pow_rat(g.lead(), df);
    if (df == 0) return pow_rat(f.lead(), dg);
    if (df < dg) {
        Rat r = resultant(g, f);
        return (df * dg) % 2 ? Rat(-r) : r;
    }
    UPoly r = divmod(f, g).second;
    if (r.is_zero()) return 0;
    int dr = r.degree();
    Rat s = pow_rat(g.lead(), df - dr) * resultant(g, r);
    return (df * dg) % 2 ? Rat(-s) : s;
}

Rat discriminant(const UPoly& f) {
    int n = f.degree();
    if (n < 1) throw ZeroInput("discriminant: degree < 1");
    std::vector<Rat> dc;
    for (int i = 1; i <= n; ++i) dc.push_back(f.c[i] * i);
    Rat r = resultant(f, UPoly(dc));
    Rat s = (n * (n - 1) / 2) % 2 ? Rat(-1) : Rat(1);
    return s * r / f.lead();
}

// ---------------------------------------------------------------- Z[t] helpers

namespace {

using ZPoly = std::vector<Int>;

void ztrim(ZPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

int zdeg(const ZPoly& a) { return static_cast<int>(a.size()) - 1; }

ZPoly zadd(const ZPoly& a, const ZPoly& b) {
    ZPoly r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    ztrim(r);
    return r;
}

ZPoly zsub(const ZPoly& a, const ZPoly& b) {
    ZPoly r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    ztrim(r);
    return r;
}

ZPoly zmul(const ZPoly& a, const ZPoly& b) {
    if (a.empty() || b.empty()) return {};
    ZPoly r(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) mpz_addmul(r[i + j].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
    }
    ztrim(r);
    return r;
}

Int zcontent(const ZPoly& a) {
    Int g = 0;
    for (const Int& x : a) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
        if (g == 1) break;
    }
    return g;
}

ZPoly zscale_div(const ZPoly& a, const Int& c) {
    ZPoly r = a;
    for (Int& x : r) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), c.get_mpz_t());
    return r;
}

ZPoly zprim(const ZPoly& a) {
    if (a.empty()) return a;
    Int c = zcontent(a);
    if (a.back() < 0) c = -c;
    return zscale_div(a, c);
}

ZPoly zprem(ZPoly a, const ZPoly& b) {
    const Int& lb = b.back();
    while (!a.empty() && zdeg(a) >= zdeg(b)) {
        int k = zdeg(a) - zdeg(b);
        Int la = a.back();
        for (Int& x : a) x *= lb;
        for (std::size_t j = 0; j < b.size(); ++j) a[j + k] -= la * b[j];
        ztrim(a);
        Int c = zcontent(a);
        if (c > 1) a = zscale_div(a, c);
    }
    return a;
}

ZPoly zgcd(const ZPoly& a, const ZPoly& b) {
    if (a.empty() && b.empty()) return {};
    if (a.empty() || b.empty()) {
        ZPoly r = a.empty() ? b : a;
        if (r.back() < 0)
            for (Int& x : r) x = -x;
        return r;
    }
    Int c;
    mpz_gcd(c.get_mpz_t(), zcontent(a).get_mpz_t(), zcontent(b).get_mpz_t());
    ZPoly x = zprim(a), y = zprim(b);
    if (zdeg(x) < zdeg(y)) std::swap(x, y);
    while (!y.empty()) {
        ZPoly r = zprem(x, y);
        x = std::move(y);
        y = zprim(r);
    }
    x = zprim(x);
    for (Int& v : x) v *= c;
    return x;
}

// Exact quotient a / b in Z[t]; b must divide a.
ZPoly zdivexact(const ZPoly& a, const ZPoly& b) {
    if (b.empty()) throw DivisionByZeroPolynomial("zdivexact: zero divisor");
    if (a.empty()) return {};
    ZPoly r = a;
    ZPoly q(std::max(0, zdeg(a) - zdeg(b) + 1));
    for (int i = zdeg(a) - zdeg(b); i >= 0; --i) {
        Int& top = r[i + zdeg(b)];
        if (top == 0) continue;
        if (!mpz_divisible_p(top.get_mpz_t(), b.back().get_mpz_t())) throw Error("zdivexact: inexact division");
        Int f;
        mpz_divexact(f.get_mpz_t(), top.get_mpz_t(), b.back().get_mpz_t());
        q[i] = f;
        for (int j = 0; j <= zdeg(b); ++j) r[i + j] -= f * b[j];
    }
    ztrim(r);
    if (!r.empty()) throw Error("zdivexact: nonzero remainder");
    ztrim(q);
    return q;
}

}  // namespace

// ---------------------------------------------------------------- Z[t][D]

Poly Poly::constant(const Int& v) {
    Poly p;
    if (v != 0) p.terms = {{v}};
    return p;
}

Poly Poly::var_t() {
    Poly p;
    p.terms = {{Int(0), Int(1)}};
    return p;
}

Poly Poly::var_d() {
    Poly p;
    p.terms = {{}, {Int(1)}};
    return p;
}

int Poly::deg_t() const {
    int d = -1;
    for (const auto& t : terms) d = std::max(d, zdeg(t));
    return d;
}

void Poly::trim() {
    for (auto& t : terms) ztrim(t);
    while (!terms.empty() && terms.back().empty()) terms.pop_back();
}

Rat Poly::eval(const Rat& t, const Rat& d) const {
    Rat r = 0;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
        Rat s = 0;
        for (auto jt = it->rbegin(); jt != it->rend(); ++jt) s = s * t + *jt;
        r = r * d + s;
    }
    return r;
}

Int Poly::lead() const { return terms.empty() ? Int(0) : terms.back().back(); }

Int Poly::content() const {
    Int g = 0;
    for (const auto& t : terms) {
        Int c = zcontent(t);
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    }
    return g;
}

Poly operator+(const Poly& a, const Poly& b) {
    Poly r;
    r.terms.resize(std::max(a.terms.size(), b.terms.size()));
    for (std::size_t j = 0; j < r.terms.size(); ++j) {
        static const ZPoly empty;
        r.terms[j] = zadd(j < a.terms.size() ? a.terms[j] : empty, j < b.terms.size() ? b.terms[j] : empty);
    }
    r.trim();
    return r;
}

Poly operator*(const Int& s, const Poly& a) {
    Poly r = a;
    for (auto& t : r.terms)
        for (Int& x : t) x *= s;
    r.trim();
    return r;
}

Poly operator-(const Poly& a, const Poly& b) { return a + Int(-1) * b; }

Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    if (a.is_zero() || b.is_zero()) return r;
    r.terms.resize(a.terms.size() + b.terms.size() - 1);
    for (std::size_t i = 0; i < a.terms.size(); ++i)
        for (std::size_t j = 0; j < b.terms.size(); ++j) r.terms[i + j] = zadd(r.terms[i + j], zmul(a.terms[i], b.terms[j]));
    r.trim();
    return r;
}

namespace {

ZPoly d_content(const Poly& a) {
    ZPoly g;
    for (const auto& t : a.terms) {
        g = zgcd(g, t);
        if (g.size() == 1 && g[0] == 1) break;
    }
    return g;
}

Poly d_prim(const Poly& a) {
    if (a.is_zero()) return a;
    ZPoly c = d_content(a);
    Poly r;
    for (const auto& t : a.terms) r.terms.push_back(zdivexact(t, c));
    r.trim();
    return r;
}

Poly d_prem(Poly a, const Poly& b) {
    const ZPoly& lb = b.terms.back();
    while (!a.is_zero() && a.deg_d() >= b.deg_d()) {
        int k = a.deg_d() - b.deg_d();
        ZPoly la = a.terms.back();
        for (auto& t : a.terms) t = zmul(t, lb);
        for (std::size_t j = 0; j < b.terms.size(); ++j) a.terms[j + k] = zsub(a.terms[j + k], zmul(la, b.terms[j]));
        a.trim();
    }
    return a;
}

Poly from_z(const ZPoly& z) {
    Poly p;
    if (!z.empty()) p.terms = {z};
    return p;
}

}  // namespace

Poly poly_gcd(const Poly& a, const Poly& b) {
    if (a.is_zero() && b.is_zero()) return Poly::constant(1);
    if (a.is_zero()) return poly_gcd(b, a);
    ZPoly c = b.is_zero() ? d_content(a) : zgcd(d_content(a), d_content(b));
    Poly x = d_prim(a), y = d_prim(b);
    if (x.deg_d() < y.deg_d()) std::swap(x, y);
    while (!y.is_zero()) {
        Poly r = d_prem(x, y);
        x = std::move(y);
        y = d_prim(r);
    }
    x = d_prim(x);
    Poly g = from_z(c) * x;
    if (g.lead() < 0) g = Int(-1) * g;
    return g;
}

Poly exact_div(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw DivisionByZeroPolynomial("exact_div: zero divisor");
    Poly r = a;
    Poly q;
    while (!r.is_zero()) {
        int k = r.deg_d() - b.deg_d();
        if (k < 0) throw Error("exact_div: nonzero remainder");
        ZPoly f = zdivexact(r.terms.back(), b.terms.back());
        Poly mono;
        mono.terms.assign(k + 1, ZPoly{});
        mono.terms[k] = f;
        q = q + mono;
        r = r - mono * b;
    }
    return q;
}

// ---------------------------------------------------------------- rational expressions

RatExpr::RatExpr() : num_(), den_(Poly::constant(1)) {}

RatExpr::RatExpr(Poly num, Poly den) {
    num.trim();
    den.trim();
    if (den.is_zero()) throw DivisionByZeroPolynomial("rational expression with zero denominator");
    if (num.is_zero()) {
        num_ = Poly();
        den_ = Poly::constant(1);
        return;
    }
    Poly g = poly_gcd(num, den);
    if (!(g == Poly::constant(1))) {
        num = exact_div(num, g);
        den = exact_div(den, g);
    }
    Int c;
    mpz_gcd(c.get_mpz_t(), num.content().get_mpz_t(), den.content().get_mpz_t());
    if (den.lead() < 0) c = -c;
    if (c != 1) {
        for (auto& t : num.terms)
            for (Int& x : t) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), c.get_mpz_t());
        for (auto& t : den.terms)
            for (Int& x : t) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), c.get_mpz_t());
    }
    num_ = std::move(num);
    den_ = std::move(den);
}

RatExpr RatExpr::constant(const Rat& v) { return RatExpr(Poly::constant(v.get_num()), Poly::constant(v.get_den())); }
RatExpr RatExpr::t() { return RatExpr(Poly::var_t(), Poly::constant(1)); }
RatExpr RatExpr::d() { return RatExpr(Poly::var_d(), Poly::constant(1)); }

RatExpr operator+(const RatExpr& a, const RatExpr& b) {
    if (a.den() == b.den()) return RatExpr(a.num() + b.num(), a.den());
    return RatExpr(a.num() * b.den() + b.num() * a.den(), a.den() * b.den());
}

RatExpr operator-(const RatExpr& a) { return RatExpr(Int(-1) * a.num(), a.den()); }
RatExpr operator-(const RatExpr& a, const RatExpr& b) { return a + (-b); }
RatExpr operator*(const RatExpr& a, const RatExpr& b) { return RatExpr(a.num() * b.num(), a.den() * b.den()); }

RatExpr operator/(const RatExpr& a, const RatExpr& b) {
    if (b.is_zero()) throw DivisionByZeroPolynomial("division by the zero rational function");
    return RatExpr(a.num() * b.den(), a.den() * b.num());
}

RatExpr pow(const RatExpr& a, unsigned e) {
    Poly n = Poly::constant(1), d = Poly::constant(1), bn = a.num(), bd = a.den();
    while (e) {
        if (e & 1) n = n * bn, d = d * bd;
        e >>= 1;
        if (e) bn = bn * bn, bd = bd * bd;
    }
    return RatExpr(n, d);
}

namespace {

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    RatExpr parse() {
        RatExpr e = expr();
        skip();
        if (pos_ != s_.size()) throw SyntaxError(std::string("unexpected '") + s_[pos_] + "'", pos_);
        return e;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }
    RatExpr expr() {
        bool neg = false;
        if (peek('-')) {
            ++pos_;
            neg = true;
        }
        RatExpr e = term();
        if (neg) e = -e;
        while (true) {
            if (peek('+')) {
                ++pos_;
                e = e + term();
            } else if (peek('-')) {
                ++pos_;
                e = e - term();
            } else {
                return e;
            }
        }
    }
    RatExpr term() {
        RatExpr e = factor();
        while (true) {
            if (peek('*')) {
                ++pos_;
                e = e * factor();
            } else if (peek('/')) {
                ++pos_;
                e = e / factor();
            } else {
                return e;
            }
        }
    }
    RatExpr factor() {
        RatExpr b = base();
        if (peek('^')) {
            ++pos_;
            skip();
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) throw SyntaxError("expected exponent", pos_);
            std::string digits = s_.substr(start, pos_ - start);
            if (digits.size() > 4) throw SyntaxError("exponent too large", start);
            b = pow(b, static_cast<unsigned>(std::stoul(digits)));
        }
        return b;
    }
    RatExpr base() {
        skip();
        if (pos_ >= s_.size()) throw SyntaxError("unexpected end of input", pos_);
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return RatExpr::constant(Rat(Int(s_.substr(start, pos_ - start))));
        }
        if (c == 't') {
            ++pos_;
            return RatExpr::t();
        }
        if (c == 'D') {
            ++pos_;
            return RatExpr::d();
        }
        if (c == '(') {
            ++pos_;
            RatExpr e = expr();
            if (!peek(')')) throw SyntaxError("expected ')'", pos_);
            ++pos_;
            return e;
        }
        throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

RatExpr parse_expr(const std::string& text) { return Parser(text).parse(); }

std::string to_string(const Poly& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int j = p.deg_d(); j >= 0; --j) {
        const auto& t = p.terms[j];
        for (int i = zdeg(t); i >= 0; --i) {
            const Int& c = t[i];
            if (c == 0) continue;
            Int mag = abs(c);
            if (c < 0)
                os << "-";
            else if (!first)
                os << "+";
            first = false;
            bool need_star = false;
            if ((i == 0 && j == 0) || mag != 1) {
                os << mag.get_str();
                need_star = true;
            }
            if (i > 0) {
                os << (need_star ? "*" : "") << "t";
                if (i > 1) os << "^" << i;
                need_star = true;
            }
            if (j > 0) {
                os << (need_star ? "*" : "") << "D";
                if (j > 1) os << "^" << j;
            }
        }
    }
    return os.str();
}

std::string to_string(const RatExpr& e) {
    if (e.den() == Poly::constant(1)) return to_string(e.num());
    return "(" + to_string(e.num()) + ")/(" + to_string(e.den()) + ")";
}

Rat eval_expr(const RatExpr& e, const Rat& t0, const Rat& d0) {
    Rat den = e.den().eval(t0, d0);
    if (den == 0) throw PoleError("eval_expr: denominator vanishes at t=" + t0.get_str() + ", D=" + d0.get_str());
    return e.num().eval(t0, d0) / den;
}

RatExpr compose(const RatExpr& outer, const RatExpr& inner) {
    int n = std::max(outer.num().deg_t(), outer.den().deg_t());
    if (n < 0) n = 0;
    const Poly& p = inner.num();
    const Poly& q = inner.den();
    std::vector<Poly> pp{Poly::constant(1)}, qq{Poly::constant(1)};
    for (int i = 1; i <= n; ++i) {
        pp.push_back(pp.back() * p);
        qq.push_back(qq.back() * q);
    }
    auto homogenize = [&](const Poly& f) {
        Poly r;
        for (int j = 0; j <= f.deg_d(); ++j) {
            Poly slice;
            const auto& t = f.terms[j];
            for (int i = 0; i <= zdeg(t); ++i) {
                if (t[i] == 0) continue;
                slice = slice + t[i] * (pp[i] * qq[n - i]);
            }
            Poly dj;
            dj.terms.assign(j + 1, ZPoly{});
            dj.terms[j] = {Int(1)};
            r = r + dj * slice;
        }
        return r;
    };
    Poly den = homogenize(outer.den());
    if (den.is_zero()) throw DegenerateComposition("compose: denominator vanishes identically");
    return RatExpr(homogenize(outer.num()), den);
}

bool identity_check(const RatExpr& lhs, const RatExpr& rhs) {
    return (lhs.num() * rhs.den() - rhs.num() * lhs.den()).is_zero();
}

UPoly specialize_coeffs(const std::vector<RatExpr>& coeffs, const Rat& t0, const Rat& d0) {
    std::vector<Rat> c;
    for (const RatExpr& e : coeffs) c.push_back(eval_expr(e, t0, d0));
    return UPoly(std::move(c));
}

// ---------------------------------------------------------------- cubics and square classes

UPoly Cubic::poly() const { return UPoly(std::vector<Rat>{-s3, s2, -s1, Rat(1)}); }

Rat cubic_disc(const Cubic& f) {
    // disc(x^3 + a x^2 + b x + c) = a^2 b^2 - 4 b^3 - 4 a^3 c - 27 c^2 + 18 a b c
    Rat a = -f.s1, b = f.s2, c = -f.s3;
    return a * a * b * b - 4 * b * b * b - 4 * a * a * a * c - 27 * c * c + 18 * a * b * c;
}

bool is_rational_square(const Rat& q) {
    if (q < 0) return false;
    return mpz_perfect_square_p(q.get_num_mpz_t()) && mpz_perfect_square_p(q.get_den_mpz_t());
}

Rat rational_sqrt(const Rat& q) {
    if (!is_rational_square(q)) throw NonSquareDiscriminant("rational_sqrt: " + q.get_str() + " is not a square");
    Int n, d;
    mpz_sqrt(n.get_mpz_t(), q.get_num_mpz_t());
    mpz_sqrt(d.get_mpz_t(), q.get_den_mpz_t());
    return Rat(n, d);
}

namespace {

bool probable_prime(const Int& n) { return mpz_probab_prime_p(n.get_mpz_t(), 30) > 0; }

Int pollard_brent(const Int& n, unsigned long seed) {
    if (mpz_even_p(n.get_mpz_t())) return 2;
    const Int c = seed;
    auto f = [&](const Int& x) {
        Int y = x * x + c;
        mpz_mod(y.get_mpz_t(), y.get_mpz_t(), n.get_mpz_t());
        return y;
    };
    Int y = seed + 1, x, ys, q = 1, g = 1;
    unsigned long r = 1;
    const unsigned long m = 128;
    do {
        x = y;
        for (unsigned long i = 0; i < r; ++i) y = f(y);
        unsigned long k = 0;
        do {
            ys = y;
            for (unsigned long i = 0; i < std::min(m, r - k); ++i) {
                y = f(y);
                Int diff = abs(x - y);
                q = q * diff % n;
            }
            mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
            k += m;
        } while (k < r && g == 1);
        r *= 2;
        if (r > (1ul << 26)) return n;
    } while (g == 1);
    if (g == n) {
        do {
            ys = f(ys);
            Int diff = abs(x - ys);
            mpz_gcd(g.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
        } while (g == 1);
    }
    return g;
}

void factor_into(Int n, std::vector<Int>& out) {
    if (n == 1) return;
    if (probable_prime(n)) {
        out.push_back(n);
        return;
    }
    for (unsigned long seed = 1; seed < 64; ++seed) {
        Int g = pollard_brent(n, seed);
        if (g != n && g != 1) {
            factor_into(g, out);
            factor_into(n / g, out);
            return;
        }
    }
    throw Error("factor_integer: could not split " + n.get_str());
}

}  // namespace

std::vector<std::pair<Int, unsigned>> factor_integer(const Int& n0) {
    if (n0 == 0) throw ZeroInput("factor_integer: zero");
    Int n = abs(n0);
    std::vector<Int> primes;
    for (unsigned long p = 2; p < 10000 && p * p <= n; ++p) {
        while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            primes.push_back(Int(p));
            mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
        }
    }
    factor_into(n, primes);
    std::sort(primes.begin(), primes.end());
    std::vector<std::pair<Int, unsigned>> out;
    for (const Int& p : primes) {
        if (!out.empty() && out.back().first == p)
            ++out.back().second;
        else
            out.push_back({p, 1});
    }
    return out;
}

Int squarefree_part(const Rat& q) {
    if (q == 0) throw ZeroInput("squarefree_part: zero");
    Int r = q < 0 ? -1 : 1;
    Int nd = abs(q.get_num()) * q.get_den();
    for (const auto& [p, e] : factor_integer(nd))
        if (e % 2) r *= p;
    return r;
}

bool same_square_class(const Rat& a, const Rat& b) {
    if (a == 0 || b == 0) throw ZeroInput("same_square_class: zero");
    return is_rational_square(a * b);
}

namespace {

// Integer cubic y^3 + a y^2 + b y + c with a rational root in x transformed to an integer root.
struct IntCubic {
    Int a, b, c;
    Int operator()(const Int& y) const { return ((y + a) * y + b) * y + c; }
};

bool root_in_monotone(const IntCubic& f, Int lo, Int hi) {
    if (lo > hi) return false;
    Int flo = f(lo), fhi = f(hi);
    if (flo == 0 || fhi == 0) return true;
    if ((flo > 0) == (fhi > 0)) return false;
    bool rising = fhi > 0;
    while (hi - lo > 1) {
        Int mid = (lo + hi) / 2;
        Int fm = f(mid);
        if (fm == 0) return true;
        if ((fm > 0) == rising)
            hi = mid;
        else
            lo = mid;
    }
    return false;
}

}  // namespace

bool cubic_has_rational_root(const Cubic& f) {
    if (f.s3 == 0) return true;
    // Clear denominators: L x^3 + A2 x^2 + A1 x + A0 over Z, then y = L x makes the cubic monic.
    Int l = 1;
    for (const Rat* q : {&f.s1, &f.s2, &f.s3}) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q->get_den_mpz_t());
    Int a2 = Rat(-f.s1 * l).get_num(), a1 = Rat(f.s2 * l).get_num(), a0 = Rat(-f.s3 * l).get_num();
    IntCubic g{a2, a1 * l, a0 * l * l};
    Int bound = 1 + std::max({abs(g.a), abs(g.b), abs(g.c)});
    // Critical points of g are roots of 3y^2 + 2a y + b.
    Int disc = 4 * g.a * g.a - 12 * g.b;
    if (disc < 0) return root_in_monotone(g, -bound, bound);
    Int s;
    mpz_sqrt(s.get_mpz_t(), disc.get_mpz_t());
    Int c1, c2;
    mpz_fdiv_q_ui(c1.get_mpz_t(), Int(-2 * g.a - s).get_mpz_t(), 6);
    mpz_fdiv_q_ui(c2.get_mpz_t(), Int(-2 * g.a + s).get_mpz_t(), 6);
    const int w = 3;
    for (int k = -w; k <= w; ++k)
        if (g(c1 + k) == 0 || g(c2 + k) == 0) return true;
    return root_in_monotone(g, -bound, c1 - w) || root_in_monotone(g, c1 + w, c2 - w) || root_in_monotone(g, c2 + w, bound);
}

std::pair<Cubic, Cubic> companion_cubics(const Cubic& fs, const Cubic& ft) {
    Rat ds = cubic_disc(fs), dt = cubic_disc(ft);
    if (ds == 0 || !is_rational_square(ds)) throw NonSquareDiscriminant("companion_cubics: disc(f_S) = " + ds.get_str());
    if (dt == 0 || !is_rational_square(dt)) throw NonSquareDiscriminant("companion_cubics: disc(f_T) = " + dt.get_str());
    Rat rs = rational_sqrt(ds), rt = rational_sqrt(dt);
    const Rat &s1 = fs.s1, &s2 = fs.s2, &s3 = fs.s3, &t1 = ft.s1, &t2 = ft.s2, &t3 = ft.s3;
    Rat r1 = s1 * t1;
    Rat r2 = s1 * s1 * t2 + t1 * t1 * s2 - 3 * s2 * t2;
    Rat base = s1 * s1 * s1 * t3 + t1 * t1 * t1 * s3 - 3 * s1 * s2 * t3 - 3 * t1 * t2 * s3 + 9 * s3 * t3;
    Rat u = s1 * s2 - 3 * s3, v = t1 * t2 - 3 * t3;
    Rat r3 = base + ((u + rs) * (v + rt) + (u - rs) * (v - rt)) / 4;
    Rat r3p = base + ((u + rs) * (v - rt) + (u - rs) * (v + rt)) / 4;
    return {Cubic{r1, r2, r3}, Cubic{r1, r2, r3p}};
}

const char* to_string(FieldVerdict v) {
    switch (v) {
        case FieldVerdict::equal: return "equal";
        case FieldVerdict::distinct: return "distinct";
        default: return "inconclusive";
    }
}

namespace {

// Number of roots in F_p, or -1 when p is not a good prime for f.
int roots_mod_p(const Cubic& f, unsigned long p) {
    unsigned long c[3];
    const Rat* q[3] = {&f.s3, &f.s2, &f.s1};
    for (int i = 0; i < 3; ++i) {
        if (mpz_divisible_ui_p(q[i]->get_den_mpz_t(), p)) return -1;
        Int n = q[i]->get_num() % Int(p);
        Int d = q[i]->get_den() % Int(p);
        mpz_invert(d.get_mpz_t(), d.get_mpz_t(), Int(p).get_mpz_t());
        Int v = n * d % Int(p);
        if (v < 0) v += p;
        c[i] = v.get_ui();
    }
    Rat dq = cubic_disc(f);
    if (mpz_divisible_ui_p(dq.get_num_mpz_t(), p) || mpz_divisible_ui_p(dq.get_den_mpz_t(), p)) return -1;
    // x^3 - s1 x^2 + s2 x - s3
    int count = 0;
    for (unsigned long x = 0; x < p; ++x) {
        unsigned long x2 = x * x % p;
        unsigned long val = (x2 * x + (p - c[2]) * x2 + c[1] * x + (p - c[0])) % p;
        if (val == 0) ++count;
    }
    return count;
}

void require_cyclic(const Cubic& f, const char* who) {
    if (cubic_has_rational_root(f)) throw ReducibleCubic(std::string(who) + ": cubic has a rational root");
    Rat d = cubic_disc(f);
    if (!is_rational_square(d)) throw NonSquareDiscriminant(std::string(who) + ": discriminant is not a square");
}

}  // namespace

FieldVerdict same_splitting_field(const Cubic& fs, const Cubic& ft, unsigned prime_budget) {
    require_cyclic(fs, "same_splitting_field");
    require_cyclic(ft, "same_splitting_field");
    unsigned agreements = 0;
    for (unsigned long p = 2; p <= prime_budget; ++p) {
        if (!is_prime_u64(p)) continue;
        int a = roots_mod_p(fs, p), b = roots_mod_p(ft, p);
        if (a < 0 || b < 0) continue;
        if ((a == 3) != (b == 3)) return FieldVerdict::distinct;
        ++agreements;
    }
    return agreements >= 50 ? FieldVerdict::equal : FieldVerdict::inconclusive;
}

}  // namespace mtrace
