#include "mtrace/grouplat.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "mtrace/errors.hpp"

namespace mtrace {

namespace {

constexpr u32 kDenseVisitedMax = 64;
constexpr u32 kDenseMembershipMax = 40;

u64 code_space(u32 m) {
    u64 mm = m;
    return mm * mm * mm * mm;
}

class CodeSet {
public:
    explicit CodeSet(u32 m) : dense_(m <= kDenseVisitedMax) {
        if (dense_) bits_.assign(code_space(m) / 64 + 1, 0);
    }
    bool insert(u64 c) {
        if (dense_) {
            u64& w = bits_[c >> 6];
            u64 bit = u64{1} << (c & 63);
            if (w & bit) return false;
            w |= bit;
            return true;
        }
        return set_.insert(c).second;
    }

private:
    bool dense_;
    std::vector<u64> bits_;
    std::unordered_set<u64> set_;
};

void check_gen(const Mat& g, u32 m) {
    if (g.m != m) throw ModulusMismatch("generator " + g.str() + " has modulus " + std::to_string(g.m) + ", expected " + std::to_string(m));
    if (m > 1 && std::gcd(g.det(), m) != 1) throw NonUnitDeterminant("generator " + g.str() + " has non-unit determinant mod " + std::to_string(m));
}

}  // namespace

struct Group::Impl {
    u32 m = 1;
    std::vector<Mat> gens;
    std::vector<u64> codes;

    std::once_flag bits_once;
    std::vector<u64> bits;

    std::once_flag levels_once;
    u32 gl2_level = 0;
    u32 sl2_level = 0;
};

Group::Group() : impl_(std::make_shared<Impl>()) { impl_->codes = {Mat::identity(1).code()}; }

Group Group::close(const std::vector<Mat>& gens, u32 m, u64 cap) {
    for (const Mat& g : gens) check_gen(g, m);
    std::vector<Mat> seeds;
    for (const Mat& g : gens) {
        if (!g.is_identity()) seeds.push_back(g);
    }
    CodeSet seen(m);
    std::vector<Mat> elems{Mat::identity(m)};
    seen.insert(elems[0].code());
    for (std::size_t i = 0; i < elems.size(); ++i) {
        for (const Mat& g : seeds) {
            Mat y = mat_mul(elems[i], g);
            if (seen.insert(y.code())) {
                elems.push_back(y);
                if (elems.size() > cap) throw ClosureCapExceeded("closure exceeded cap " + std::to_string(cap) + " at modulus " + std::to_string(m));
            }
        }
    }
    std::vector<u64> codes;
    codes.reserve(elems.size());
    for (const Mat& x : elems) codes.push_back(x.code());
    std::sort(codes.begin(), codes.end());
    return from_codes(m, std::move(codes), gens);
}

Group Group::from_codes(u32 m, std::vector<u64> codes, std::vector<Mat> gens) {
    Group g;
    g.impl_ = std::make_shared<Impl>();
    g.impl_->m = m;
    if (!std::is_sorted(codes.begin(), codes.end())) std::sort(codes.begin(), codes.end());
    g.impl_->codes = std::move(codes);
    g.impl_->gens = std::move(gens);
    return g;
}

Group Group::full(u32 m) {
    std::vector<u64> codes;
    for (const auto& e : gl2_elements(m)) codes.push_back(e.x.code());
    std::sort(codes.begin(), codes.end());
    std::vector<Mat> gens;
    Group g = from_codes(m, std::move(codes), {});
    g.impl_->gens = small_generating_set(g);
    return g;
}

Group Group::trivial(u32 m) { return from_codes(m, {Mat::identity(m).code()}, {}); }

u32 Group::modulus() const { return impl_->m; }
const std::vector<Mat>& Group::gens() const { return impl_->gens; }
const std::vector<u64>& Group::codes() const { return impl_->codes; }
std::size_t Group::order() const { return impl_->codes.size(); }
Mat Group::element(std::size_t i) const { return Mat::from_code(impl_->codes[i], impl_->m); }

std::vector<Mat> Group::elements() const {
    std::vector<Mat> out;
    out.reserve(order());
    for (u64 c : impl_->codes) out.push_back(Mat::from_code(c, impl_->m));
    return out;
}

bool Group::contains_code(u64 code) const {
    Impl& im = *impl_;
    if (im.m <= kDenseMembershipMax) {
        std::call_once(im.bits_once, [&im] {
            im.bits.assign(code_space(im.m) / 64 + 1, 0);
            for (u64 c : im.codes) im.bits[c >> 6] |= u64{1} << (c & 63);
        });
        return (im.bits[code >> 6] >> (code & 63)) & 1;
    }
    return std::binary_search(im.codes.begin(), im.codes.end(), code);
}

bool Group::contains(const Mat& x) const { return x.m == impl_->m && contains_code(x.code()); }

bool Group::contains_minus_identity() const { return contains(Mat::minus_identity(impl_->m)); }

std::size_t Group::index_of(u64 code) const {
    auto it = std::lower_bound(impl_->codes.begin(), impl_->codes.end(), code);
    if (it == impl_->codes.end() || *it != code) return npos;
    return static_cast<std::size_t>(it - impl_->codes.begin());
}

namespace {

std::size_t reduced_count(const std::vector<Mat>& xs, u32 d) {
    std::vector<u64> r;
    r.reserve(xs.size());
    for (const Mat& x : xs) r.push_back(reduce(x, d).code());
    std::sort(r.begin(), r.end());
    return static_cast<std::size_t>(std::unique(r.begin(), r.end()) - r.begin());
}

}  // namespace

u32 Group::gl2_level() const {
    Impl& im = *impl_;
    std::call_once(im.levels_once, [this, &im] {
        std::vector<Mat> all = elements();
        std::vector<Mat> sl;
        for (const Mat& x : all)
            if (x.det() == 1 % im.m) sl.push_back(x);
        im.gl2_level = im.m;
        for (u32 d : divisors(im.m)) {
            if (reduced_count(all, d) * (gl2_order(im.m) / gl2_order(d)) == all.size()) {
                im.gl2_level = d;
                break;
            }
        }
        im.sl2_level = im.m;
        for (u32 d : divisors(im.m)) {
            if (reduced_count(sl, d) * (sl2_order(im.m) / sl2_order(d)) == sl.size()) {
                im.sl2_level = d;
                break;
            }
        }
    });
    return im.gl2_level;
}

u32 Group::sl2_level() const {
    gl2_level();
    return impl_->sl2_level;
}

Group adjoin_minus_identity(const Group& g) {
    if (g.contains_minus_identity()) return g;
    u32 m = g.modulus();
    std::vector<u64> codes = g.codes();
    for (u64 c : g.codes()) codes.push_back(mat_neg(Mat::from_code(c, m)).code());
    std::vector<Mat> gens = g.gens();
    gens.push_back(Mat::minus_identity(m));
    return Group::from_codes(m, std::move(codes), std::move(gens));
}

Group sl2_part(const Group& g) {
    u32 m = g.modulus();
    std::vector<u64> codes;
    for (u64 c : g.codes())
        if (Mat::from_code(c, m).det() == 1 % m) codes.push_back(c);
    Group s = Group::from_codes(m, std::move(codes), {});
    return Group::from_codes(m, s.codes(), small_generating_set(s));
}

Group normal_closure(const Group& g, const std::vector<Mat>& xs) {
    u32 m = g.modulus();
    std::vector<Mat> gens = xs;
    Group h = Group::close(gens, m);
    std::vector<Mat> conj = generators(g);
    for (bool changed = true; changed;) {
        changed = false;
        for (const Mat& c : conj) {
            for (std::size_t i = 0; i < gens.size(); ++i) {
                Mat y = conjugate(c, gens[i]);
                if (!h.contains(y)) {
                    gens.push_back(y);
                    h = Group::close(gens, m);
                    changed = true;
                }
            }
        }
    }
    return h;
}

Group commutator_subgroup(const Group& g) {
    std::vector<Mat> gens = generators(g);
    std::vector<Mat> comms;
    for (const Mat& x : gens)
        for (const Mat& y : gens) comms.push_back(mat_mul(mat_mul(x, y), mat_mul(mat_inv(x), mat_inv(y))));
    Group base = Group::from_codes(g.modulus(), g.codes(), gens);
    return normal_closure(base, comms);
}

std::vector<u32> det_image(const Group& g) {
    std::vector<u32> out;
    u32 m = g.modulus();
    for (u64 c : g.codes()) out.push_back(Mat::from_code(c, m).det());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool det_surjective(const Group& g) { return det_image(g).size() == units(g.modulus()).size(); }

Group reduce_group(const Group& g, u32 d) {
    std::vector<u64> codes;
    for (u64 c : g.codes()) codes.push_back(reduce(Mat::from_code(c, g.modulus()), d).code());
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    std::vector<Mat> gens;
    for (const Mat& x : g.gens()) gens.push_back(reduce(x, d));
    return Group::from_codes(d, std::move(codes), std::move(gens));
}

Group preimage(const Group& g, u32 m, u64 cap) {
    u32 d = g.modulus();
    if (m % d != 0) throw NotDivisor("preimage: " + std::to_string(d) + " does not divide " + std::to_string(m));
    u64 total = static_cast<u64>(g.order()) * (gl2_order(m) / gl2_order(d));
    if (total > cap) throw ClosureCapExceeded("preimage order " + std::to_string(total) + " exceeds cap");
    std::vector<u64> codes;
    codes.reserve(total);
    for (const auto& e : gl2_elements(m))
        if (g.contains(reduce(e.x, d))) codes.push_back(e.x.code());
    std::sort(codes.begin(), codes.end());
    // Generators: lifts of the generators of g plus generators of the kernel.
    std::vector<Mat> gens;
    for (const Mat& x : g.gens()) {
        for (const auto& e : gl2_elements(m)) {
            if (reduce(e.x, d) == x) {
                gens.push_back(e.x);
                break;
            }
        }
    }
    Group out = Group::from_codes(m, std::move(codes), gens);
    Group sub = Group::close(gens, m, cap);
    if (sub.order() != out.order()) {
        std::vector<Mat> kernel;
        for (const auto& e : gl2_elements(m))
            if (reduce(e.x, d).is_identity()) kernel.push_back(e.x);
        Group kg = Group::from_codes(m, [&] {
            std::vector<u64> c;
            for (const Mat& x : kernel) c.push_back(x.code());
            return c;
        }(), {});
        for (const Mat& k : small_generating_set(kg)) gens.push_back(k);
        out = Group::from_codes(m, out.codes(), gens);
    }
    return out;
}

Group intersect(const Group& a, const Group& b) {
    if (a.modulus() != b.modulus()) throw ModulusMismatch("intersect: moduli differ");
    std::vector<u64> codes;
    std::set_intersection(a.codes().begin(), a.codes().end(), b.codes().begin(), b.codes().end(), std::back_inserter(codes));
    Group g = Group::from_codes(a.modulus(), std::move(codes), {});
    return Group::from_codes(a.modulus(), g.codes(), small_generating_set(g));
}

bool is_subgroup(const Group& sub, const Group& g) {
    if (sub.modulus() != g.modulus()) return false;
    return std::includes(g.codes().begin(), g.codes().end(), sub.codes().begin(), sub.codes().end());
}

bool normalizes(const Mat& x, const Group& g) {
    Mat xi = mat_inv(x);
    for (const Mat& h : generators(g))
        if (!g.contains(mat_mul(mat_mul(x, h), xi))) return false;
    return true;
}

std::vector<Mat> generators(const Group& g) { return g.gens().empty() && g.order() > 1 ? small_generating_set(g) : g.gens(); }

std::vector<Mat> small_generating_set(const Group& g) {
    u32 m = g.modulus();
    std::vector<Mat> gens;
    if (!g.gens().empty()) {
        Group h = Group::close(g.gens(), m);
        if (h.order() == g.order()) return g.gens();
    }
    Group h = Group::trivial(m);
    // Deterministic scan in a scrambled order so large groups are reached in few steps.
    std::size_t n = g.order();
    std::size_t step = 1;
    for (std::size_t s : {7919ul, 104729ul, 1299709ul, 15485863ul}) {
        if (std::gcd(s, n) == 1) {
            step = s % n == 0 ? 1 : s;
            break;
        }
    }
    for (std::size_t k = 0, i = 0; k < n && h.order() < n; ++k, i = (i + step) % n) {
        Mat x = g.element(i);
        if (h.contains(x)) continue;
        gens.push_back(x);
        h = Group::close(gens, m);
    }
    return gens;
}

namespace {

std::mutex ambient_mutex;
std::unordered_map<u32, std::unique_ptr<std::vector<AmbientElement>>> gl2_cache, sl2_cache;

}  // namespace

const std::vector<AmbientElement>& gl2_elements(u32 m) {
    std::lock_guard<std::mutex> lock(ambient_mutex);
    auto& slot = gl2_cache[m];
    if (!slot) {
        slot = std::make_unique<std::vector<AmbientElement>>();
        slot->reserve(gl2_order(m));
        for (u32 a = 0; a < m; ++a)
            for (u32 b = 0; b < m; ++b)
                for (u32 c = 0; c < m; ++c)
                    for (u32 d = 0; d < m; ++d) {
                        Mat x{m, a, b, c, d};
                        if (m == 1 || std::gcd(x.det(), m) == 1) slot->push_back({x, mat_inv(x)});
                    }
    }
    return *slot;
}

const std::vector<AmbientElement>& sl2_elements(u32 m) {
    const auto& gl = gl2_elements(m);
    std::lock_guard<std::mutex> lock(ambient_mutex);
    auto& slot = sl2_cache[m];
    if (!slot) {
        slot = std::make_unique<std::vector<AmbientElement>>();
        for (const auto& e : gl)
            if (e.x.det() == 1 % m) slot->push_back(e);
    }
    return *slot;
}

Fingerprint fingerprint(const Group& g) {
    Fingerprint f;
    f.order = g.order();
    f.minus_identity = g.contains_minus_identity();
    u32 m = g.modulus();
    for (u64 c : g.codes()) {
        Mat x = Mat::from_code(c, m);
        ++f.trace_det[{x.trace(), x.det()}];
    }
    return f;
}

namespace {

bool dominated(const Fingerprint& small, const Fingerprint& big) {
    for (const auto& [k, v] : small.trace_det) {
        auto it = big.trace_det.find(k);
        if (it == big.trace_det.end() || it->second < v) return false;
    }
    return true;
}

}  // namespace

ConjVerdict conjugacy(const Group& g1, const Group& g2, ConjMode mode) {
    if (g1.modulus() != g2.modulus()) throw ModulusMismatch("conjugacy: moduli differ");
    u32 m = g1.modulus();
    if (mode == ConjMode::equal) {
        if (g1.order() != g2.order()) return {};
        if (g1.contains_minus_identity() != g2.contains_minus_identity()) return {};
    } else {
        if (g1.order() > g2.order() || g2.order() % g1.order() != 0) return {};
        if (g1.contains_minus_identity() && !g2.contains_minus_identity()) return {};
    }
    if (g1.codes() == g2.codes()) return {true, Mat::identity(m)};
    if (mode == ConjMode::contained && is_subgroup(g1, g2)) return {true, Mat::identity(m)};
    Fingerprint f1 = fingerprint(g1), f2 = fingerprint(g2);
    if (mode == ConjMode::equal ? !(f1 == f2) : !dominated(f1, f2)) return {};
    std::vector<Mat> gens = generators(g1);
    for (const auto& e : gl2_elements(m)) {
        bool ok = true;
        for (const Mat& h : gens) {
            if (!g2.contains(mat_mul(mat_mul(e.x, h), e.inv))) {
                ok = false;
                break;
            }
        }
        if (ok) return {true, e.x};
    }
    return {};
}

}  // namespace mtrace
