#include "mtrace/ltconst.hpp"

#include <mpfr.h>

#include <map>
#include <mutex>

#include "mtrace/errors.hpp"
#include "mtrace/modarith.hpp"
#include "mtrace/mtclassify.hpp"

namespace mtrace {

namespace {

const std::vector<u64>& enumerated_fibers(u32 l) {
    static std::mutex mu;
    static std::map<u32, std::vector<u64>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(l);
    if (it != cache.end()) return it->second;
    std::vector<u64> counts(l, 0);
    for (u32 a = 0; a < l; ++a)
        for (u32 d = 0; d < l; ++d) {
            u32 ad = a * d % l;
            u64 units = 0;
            for (u32 b = 0; b < l; ++b)
                for (u32 c = 0; c < l; ++c)
                    if ((ad + l - b * c % l) % l != 0) ++units;
            counts[(a + d) % l] += units;
        }
    return cache.emplace(l, std::move(counts)).first->second;
}

u32 residue(i64 r, u32 l) { return static_cast<u32>(((r % static_cast<i64>(l)) + l) % l); }

}  // namespace

u64 gl2_trace_count_enumerated(u32 l, i64 r) {
    if (!is_prime_u64(l)) throw Error(std::to_string(l) + " is not prime");
    if (l > 97) throw PrimeTooLarge("trace counts are enumerated only for l <= 97");
    return enumerated_fibers(l)[residue(r, l)];
}

u64 gl2_trace_count(u32 l, i64 r) {
    if (l <= 97) return gl2_trace_count_enumerated(l, r);
    if (!is_prime_u64(l)) throw Error(std::to_string(l) + " is not prime");
    u64 L = l;
    return residue(r, l) == 0 ? L * L * L - L * L : L * L * L - L * L - L;
}

Rat euler_factor(u32 l, i64 r) {
    Rat f(Int(static_cast<unsigned long>(l)) * Int(static_cast<unsigned long>(gl2_trace_count(l, r))),
          Int(static_cast<unsigned long>(gl2_order(l))));
    f.canonicalize();
    return f;
}

LTFactorization lt_truncated(const Group& g, i64 r, u32 bound, unsigned digits) {
    LTFactorization out;
    out.m_e = g.gl2_level();
    out.r = r;
    out.bound = bound;
    Group h = reduce_group(g, out.m_e);
    std::vector<u64> fibers = trace_fibers(h, out.m_e);
    u64 hit = fibers[residue(r, out.m_e)];
    out.group_ratio = Rat(Int(static_cast<unsigned long>(out.m_e)) * Int(static_cast<unsigned long>(hit)),
                          Int(static_cast<unsigned long>(h.order())));
    out.group_ratio.canonicalize();
    out.zero_flag = hit == 0;
    out.truncated_product = out.group_ratio;
    for (u32 l = 2; l <= bound; ++l) {
        if (!is_prime_u64(l) || out.m_e % l == 0) continue;
        Rat f = euler_factor(l, r);
        out.euler_factors.emplace_back(l, f);
        out.truncated_product *= f;
    }
    mpfr_prec_t prec = static_cast<mpfr_prec_t>(digits * 4 + 64);
    mpfr_t v, pi;
    mpfr_init2(v, prec);
    mpfr_init2(pi, prec);
    mpfr_set_q(v, out.truncated_product.get_mpq_t(), MPFR_RNDN);
    mpfr_mul_ui(v, v, 2, MPFR_RNDN);
    mpfr_const_pi(pi, MPFR_RNDN);
    mpfr_div(v, v, pi, MPFR_RNDN);
    char* s = nullptr;
    mpfr_asprintf(&s, "%.*Rg", static_cast<int>(digits), v);
    out.truncated_value = s;
    mpfr_free_str(s);
    mpfr_clear(v);
    mpfr_clear(pi);
    return out;
}

}  // namespace mtrace
