#include "mtrace/mtclassify.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <numeric>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "mtrace/errors.hpp"

namespace mtrace {

std::vector<u64> trace_fibers(const Group& g, u32 d) {
    if (d == 0 || g.modulus() % d != 0) throw NotDivisor("trace_fibers: " + std::to_string(d) + " does not divide the modulus");
    Group h = reduce_group(g, d);
    std::vector<u64> out(d, 0);
    for (u64 c : h.codes()) ++out[Mat::from_code(c, d).trace() % d];
    return out;
}

std::vector<u32> trace_set(const Group& g, u32 d) {
    std::vector<u32> out;
    std::vector<u64> f = trace_fibers(g, d);
    for (u32 r = 0; r < d; ++r)
        if (f[r]) out.push_back(r);
    return out;
}

std::vector<u32> missing_traces(const Group& g, u32 d) {
    std::vector<u32> out;
    std::vector<u64> f = trace_fibers(g, d);
    for (u32 r = 0; r < d; ++r)
        if (!f[r]) out.push_back(r);
    return out;
}

bool is_missing_trace(const Group& g) { return det_surjective(g) && !missing_traces(g, g.gl2_level()).empty(); }

bool is_new_missing_trace(const Group& g) {
    u32 m = g.gl2_level();
    if (m == 1) return false;
    if (missing_traces(g, m).empty()) return false;
    for (u32 p : prime_divisors(m))
        if (!missing_traces(g, m / p).empty()) return false;
    return true;
}

u64 d_of_group(const Group& g) {
    u32 ms = g.sl2_level();
    if (ms == 1) return 1;
    Group h = reduce_group(g, ms);
    std::size_t s = sl2_part(h).order();
    std::size_t c = commutator_subgroup(h).order();
    u64 q = s / c;
    u64 d = 1;
    for (u32 p : prime_divisors(ms))
        while (q % p == 0) q /= p, d *= p;
    return d;
}

bool is_d_admissible(const Group& g, u32 d) {
    u32 mh = g.gl2_level();
    std::vector<u32> ps = prime_divisors(d);
    for (u32 p : ps)
        if (mh % p != 0) throw NotDivisor("is_d_admissible: " + std::to_string(p) + " does not divide the level " + std::to_string(mh));
    Group h = reduce_group(g, mh);
    std::vector<char> bad(mh, 0);
    for (u64 c : h.codes()) {
        Mat x = Mat::from_code(c, mh);
        for (u32 p : ps) {
            if (!reduce(x, p).is_scalar()) {
                bad[x.trace()] = 1;
                break;
            }
        }
    }
    return std::find(bad.begin(), bad.end(), 0) != bad.end();
}

Quotient make_quotient(const Group& g, const Group& k) {
    Quotient q;
    u32 m = g.modulus();
    std::size_t n = g.order();
    constexpr u32 unset = 0xffffffffu;
    q.coset_of.assign(n, unset);
    std::vector<Mat> kel = k.elements();
    for (std::size_t i = 0; i < n; ++i) {
        if (q.coset_of[i] != unset) continue;
        u32 id = static_cast<u32>(q.rep.size());
        q.rep.push_back(i);
        Mat x = g.element(i);
        for (const Mat& y : kel) {
            std::size_t j = g.index_of(mat_mul(x, y).code());
            if (j == Group::npos) throw InvalidPairing("make_quotient: kernel not contained in group");
            q.coset_of[j] = id;
        }
    }
    q.n = static_cast<u32>(q.rep.size());
    q.table.assign(q.n, std::vector<u32>(q.n));
    for (u32 a = 0; a < q.n; ++a) {
        Mat x = g.element(q.rep[a]);
        for (u32 b = 0; b < q.n; ++b) q.table[a][b] = q.coset_of[g.index_of(mat_mul(x, g.element(q.rep[b])).code())];
    }
    u32 e = q.coset_of[g.index_of(Mat::identity(m).code())];
    q.order.assign(q.n, 0);
    for (u32 a = 0; a < q.n; ++a) {
        u32 x = a, k2 = 1;
        while (x != e) x = q.table[x][a], ++k2;
        q.order[a] = k2;
    }
    return q;
}

namespace {

u32 quotient_identity(const Quotient& q) {
    for (u32 a = 0; a < q.n; ++a)
        if (q.order[a] == 1) return a;
    return 0;
}

std::vector<u32> quotient_generators(const Quotient& q) {
    std::vector<u32> gens;
    std::vector<char> in(q.n, 0);
    u32 e = quotient_identity(q);
    in[e] = 1;
    std::size_t size = 1;
    std::vector<u32> cand(q.n);
    for (u32 a = 0; a < q.n; ++a) cand[a] = a;
    std::stable_sort(cand.begin(), cand.end(), [&](u32 x, u32 y) { return q.order[x] > q.order[y]; });
    for (u32 a : cand) {
        if (size == q.n) break;
        if (in[a]) continue;
        gens.push_back(a);
        std::vector<u32> elems;
        for (u32 x = 0; x < q.n; ++x)
            if (in[x]) elems.push_back(x);
        for (std::size_t i = 0; i < elems.size(); ++i)
            for (u32 s : gens) {
                u32 y = q.table[elems[i]][s];
                if (!in[y]) in[y] = 1, elems.push_back(y);
            }
        size = elems.size();
    }
    return gens;
}

// Extends gens -> images to a map on all of q1, or returns empty when inconsistent or not bijective.
std::vector<u32> extend_hom(const Quotient& q1, const Quotient& q2, const std::vector<u32>& gens, const std::vector<u32>& imgs) {
    constexpr u32 unset = 0xffffffffu;
    std::vector<u32> map(q1.n, unset);
    u32 e1 = quotient_identity(q1), e2 = quotient_identity(q2);
    map[e1] = e2;
    std::vector<u32> queue{e1};
    for (std::size_t i = 0; i < queue.size(); ++i) {
        u32 x = queue[i];
        for (std::size_t s = 0; s < gens.size(); ++s) {
            u32 y = q1.table[x][gens[s]];
            u32 fy = q2.table[map[x]][imgs[s]];
            if (map[y] == unset) {
                map[y] = fy;
                queue.push_back(y);
            } else if (map[y] != fy) {
                return {};
            }
        }
    }
    std::vector<char> hit(q2.n, 0);
    for (u32 v : map) {
        if (v == unset || hit[v]) return {};
        hit[v] = 1;
    }
    // Multiplicativity on all pairs.
    for (u32 a = 0; a < q1.n; ++a)
        for (u32 b = 0; b < q1.n; ++b)
            if (map[q1.table[a][b]] != q2.table[map[a]][map[b]]) return {};
    return map;
}

}  // namespace

std::vector<std::vector<u32>> quotient_isomorphisms(const Quotient& q1, const Quotient& q2, std::size_t limit) {
    std::vector<std::vector<u32>> out;
    if (q1.n != q2.n) return out;
    std::vector<u32> o1 = q1.order, o2 = q2.order;
    std::sort(o1.begin(), o1.end());
    std::sort(o2.begin(), o2.end());
    if (o1 != o2) return out;
    std::vector<u32> gens = quotient_generators(q1);
    std::vector<std::vector<u32>> cands(gens.size());
    for (std::size_t s = 0; s < gens.size(); ++s)
        for (u32 b = 0; b < q2.n; ++b)
            if (q2.order[b] == q1.order[gens[s]]) cands[s].push_back(b);
    std::vector<u32> imgs(gens.size());
    std::function<void(std::size_t)> rec = [&](std::size_t s) {
        if (limit && out.size() >= limit) return;
        if (s == gens.size()) {
            std::vector<u32> map = extend_hom(q1, q2, gens, imgs);
            if (!map.empty()) out.push_back(std::move(map));
            return;
        }
        for (u32 b : cands[s]) {
            imgs[s] = b;
            rec(s + 1);
        }
    };
    rec(0);
    return out;
}

std::vector<Group> normal_subgroups(const Group& g) {
    u32 m = g.modulus();
    std::vector<Mat> ggens = generators(g);
    std::vector<Group> out;
    std::set<std::vector<u64>> seen;
    auto add = [&](const Group& h) {
        if (seen.insert(h.codes()).second) out.push_back(h);
    };
    add(Group::trivial(m));
    std::vector<char> done(g.order(), 0);
    for (std::size_t i = 0; i < g.order(); ++i) {
        if (done[i]) continue;
        // conjugacy class of element i
        std::vector<Mat> cls{g.element(i)};
        done[i] = 1;
        for (std::size_t j = 0; j < cls.size(); ++j) {
            for (const Mat& s : ggens) {
                Mat y = conjugate(s, cls[j]);
                std::size_t idx = g.index_of(y.code());
                if (!done[idx]) done[idx] = 1, cls.push_back(y);
            }
        }
        std::vector<Mat> gens;
        Group h = Group::trivial(m);
        for (const Mat& x : cls) {
            if (h.contains(x)) continue;
            gens.push_back(x);
            h = Group::close(gens, m);
        }
        add(h);
    }
    for (std::size_t a = 0; a < out.size(); ++a) {
        for (std::size_t b = 1; b < a; ++b) {
            if (is_subgroup(out[a], out[b]) || is_subgroup(out[b], out[a])) continue;
            std::vector<Mat> gens = out[a].gens();
            for (const Mat& x : out[b].gens()) gens.push_back(x);
            add(Group::close(gens, m));
        }
    }
    std::sort(out.begin(), out.end(), [](const Group& x, const Group& y) {
        if (x.order() != y.order()) return x.order() < y.order();
        return x.codes() < y.codes();
    });
    return out;
}

namespace {

void check_split(u32 m, u32 m1, u32 m2) {
    if (static_cast<u64>(m1) * m2 != m || std::gcd(m1, m2) != 1)
        throw BadFactorization("goursat: " + std::to_string(m) + " is not " + std::to_string(m1) + "*" + std::to_string(m2) + " with coprime factors");
}

Group subgroup_from_codes(u32 m, std::vector<u64> codes) {
    Group h = Group::from_codes(m, std::move(codes), {});
    return Group::from_codes(m, h.codes(), small_generating_set(h));
}

}  // namespace

FiberedProduct goursat_decompose(const Group& g, u32 m1, u32 m2) {
    u32 m = g.modulus();
    check_split(m, m1, m2);
    FiberedProduct fp;
    fp.g1 = reduce_group(g, m1);
    fp.g2 = reduce_group(g, m2);
    std::vector<u64> k1, k2;
    std::vector<std::pair<Mat, Mat>> parts;
    for (u64 c : g.codes()) {
        auto [x1, x2] = crt_split(Mat::from_code(c, m), m1, m2);
        if (x2.is_identity()) k1.push_back(x1.code());
        if (x1.is_identity()) k2.push_back(x2.code());
        parts.emplace_back(x1, x2);
    }
    fp.k1 = subgroup_from_codes(m1, k1);
    fp.k2 = subgroup_from_codes(m2, k2);
    Quotient q1 = make_quotient(fp.g1, fp.k1), q2 = make_quotient(fp.g2, fp.k2);
    fp.quotient_order = q1.n;
    std::vector<u32> image(q1.n, 0xffffffffu);
    for (const auto& [x1, x2] : parts) image[q1.coset_of[fp.g1.index_of(x1.code())]] = q2.coset_of[fp.g2.index_of(x2.code())];
    for (u32 a = 0; a < q1.n; ++a) fp.pairing.emplace_back(fp.g1.element(q1.rep[a]), fp.g2.element(q2.rep[image[a]]));
    return fp;
}

namespace {

// Builds the fibered product from coset data; phi maps K1-cosets to K2-cosets.
Group build_fibered(const Group& g1, const Group& k1, const Quotient& q1, const Group& g2, const Group& k2, const Quotient& q2,
                    const std::vector<u32>& phi) {
    u32 m1 = g1.modulus(), m2 = g2.modulus(), m = m1 * m2;
    std::vector<std::vector<Mat>> f2(q2.n);
    for (std::size_t j = 0; j < g2.order(); ++j) f2[q2.coset_of[j]].push_back(g2.element(j));
    std::vector<u64> codes;
    codes.reserve(g1.order() * g2.order() / q1.n);
    for (std::size_t i = 0; i < g1.order(); ++i) {
        Mat x = g1.element(i);
        for (const Mat& y : f2[phi[q1.coset_of[i]]]) codes.push_back(crt_join(x, y).code());
    }
    std::vector<Mat> gens;
    for (const Mat& x : generators(k1)) gens.push_back(crt_join(x, Mat::identity(m2)));
    for (const Mat& y : generators(k2)) gens.push_back(crt_join(Mat::identity(m1), y));
    for (const Mat& x : generators(g1)) {
        u32 c = q1.coset_of[g1.index_of(x.code())];
        gens.push_back(crt_join(x, f2[phi[c]].front()));
    }
    (void)m;
    return Group::from_codes(m1 * m2, std::move(codes), std::move(gens));
}

}  // namespace

Group fibered_product(const Group& g1, const Group& k1, const Group& g2, const Group& k2, const std::vector<std::pair<Mat, Mat>>& pairing) {
    if (std::gcd(g1.modulus(), g2.modulus()) != 1) throw BadFactorization("fibered_product: moduli not coprime");
    if (!is_subgroup(k1, g1) || !is_subgroup(k2, g2)) throw InvalidPairing("fibered_product: kernel is not a subgroup");
    for (const Mat& s : generators(g1))
        if (!normalizes(s, k1)) throw InvalidPairing("fibered_product: K1 is not normal in G1");
    for (const Mat& s : generators(g2))
        if (!normalizes(s, k2)) throw InvalidPairing("fibered_product: K2 is not normal in G2");
    Quotient q1 = make_quotient(g1, k1), q2 = make_quotient(g2, k2);
    if (q1.n != q2.n || pairing.size() != q1.n) throw InvalidPairing("fibered_product: quotient orders do not match the pairing");
    constexpr u32 unset = 0xffffffffu;
    std::vector<u32> phi(q1.n, unset);
    for (const auto& [x, y] : pairing) {
        std::size_t i = g1.index_of(x.code()), j = g2.index_of(y.code());
        if (i == Group::npos || j == Group::npos) throw InvalidPairing("fibered_product: pairing representative outside the group");
        u32 a = q1.coset_of[i];
        if (phi[a] != unset) throw InvalidPairing("fibered_product: coset paired twice");
        phi[a] = q2.coset_of[j];
    }
    std::vector<char> hit(q2.n, 0);
    for (u32 v : phi) {
        if (hit[v]) throw InvalidPairing("fibered_product: pairing is not bijective");
        hit[v] = 1;
    }
    for (u32 a = 0; a < q1.n; ++a)
        for (u32 b = 0; b < q1.n; ++b)
            if (phi[q1.table[a][b]] != q2.table[phi[a]][phi[b]]) throw InvalidPairing("fibered_product: pairing is not a homomorphism");
    return build_fibered(g1, k1, q1, g2, k2, q2, phi);
}

InducedVerdict is_gl2_induced(const Group& g, const Group& k, const std::vector<std::pair<Mat, Mat>>& eta) {
    Quotient q = make_quotient(g, k);
    constexpr u32 unset = 0xffffffffu;
    std::vector<u32> map(q.n, unset);
    for (const auto& [x, y] : eta) {
        std::size_t i = g.index_of(x.code()), j = g.index_of(y.code());
        if (i == Group::npos || j == Group::npos) throw InvalidAutomorphism("is_gl2_induced: representative outside the group");
        map[q.coset_of[i]] = q.coset_of[j];
    }
    std::vector<char> hit(q.n, 0);
    for (u32 v : map) {
        if (v == unset || hit[v]) throw InvalidAutomorphism("is_gl2_induced: eta is not a bijection of cosets");
        hit[v] = 1;
    }
    for (u32 a = 0; a < q.n; ++a)
        for (u32 b = 0; b < q.n; ++b)
            if (map[q.table[a][b]] != q.table[map[a]][map[b]]) throw InvalidAutomorphism("is_gl2_induced: eta does not respect the group law");
    std::vector<Mat> ggens = generators(g), kgens = generators(k);
    for (const auto& e : gl2_elements(g.modulus())) {
        bool ok = true;
        for (const Mat& s : ggens)
            if (!g.contains(mat_mul(mat_mul(e.x, s), e.inv))) {
                ok = false;
                break;
            }
        if (!ok) continue;
        for (const Mat& s : kgens)
            if (!k.contains(mat_mul(mat_mul(e.x, s), e.inv))) {
                ok = false;
                break;
            }
        if (!ok) continue;
        for (u32 a = 0; a < q.n && ok; ++a) {
            Mat y = mat_mul(mat_mul(e.x, g.element(q.rep[a])), e.inv);
            if (q.coset_of[g.index_of(y.code())] != map[a]) ok = false;
        }
        if (ok) return {true, e.x};
    }
    return {};
}

const std::vector<u32>& sl2_level_whitelist() {
    static const std::vector<u32> w{1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12, 13, 14, 15, 16, 18, 20, 21, 22,
                                    24, 25, 26, 27, 28, 30, 32, 36, 40, 42, 48, 50, 52, 54, 56, 60, 64, 72, 96};
    return w;
}

bool level_supported(u32 m) {
    u32 r = radical(m);
    for (u32 s : sl2_level_whitelist())
        if (m % s == 0 && s % r == 0) return true;
    return false;
}

std::vector<Group> dedupe(const std::vector<Group>& groups) {
    std::vector<Group> sorted = groups;
    std::sort(sorted.begin(), sorted.end(), [](const Group& a, const Group& b) {
        if (a.order() != b.order()) return a.order() > b.order();
        return a.codes() < b.codes();
    });
    std::vector<Group> out;
    std::vector<Fingerprint> fps;
    for (const Group& g : sorted) {
        Fingerprint f = fingerprint(g);
        bool dup = false;
        for (std::size_t i = 0; i < out.size() && !dup; ++i) {
            if (!(fps[i] == f)) continue;
            dup = conjugacy(g, out[i], ConjMode::equal).holds;
        }
        if (!dup) {
            out.push_back(g);
            fps.push_back(std::move(f));
        }
    }
    return out;
}

std::vector<Group> maximal_filter(const std::vector<Group>& candidates) {
    std::vector<Group> uniq = dedupe(candidates);
    std::vector<Group> out;
    for (std::size_t i = 0; i < uniq.size(); ++i) {
        bool below = false;
        for (std::size_t j = 0; j < uniq.size() && !below; ++j) {
            if (i == j || uniq[j].order() <= uniq[i].order()) continue;
            below = conjugacy(uniq[i], uniq[j], ConjMode::contained).holds;
        }
        if (!below) out.push_back(uniq[i]);
    }
    return out;
}

namespace {

// Registry of subgroups up to GL2-conjugacy.
class ConjRegistry {
public:
    // Returns true when g was new.
    bool add(const Group& g) {
        if (!exact_.insert(g.codes()).second) return false;
        Fingerprint f = fingerprint(g);
        auto& bucket = buckets_[key(f)];
        for (std::size_t idx : bucket) {
            if (fps_[idx] == f && conjugacy(g, groups_[idx], ConjMode::equal).holds) return false;
        }
        bucket.push_back(groups_.size());
        groups_.push_back(g);
        fps_.push_back(std::move(f));
        return true;
    }
    const std::vector<Group>& groups() const { return groups_; }

private:
    static u64 key(const Fingerprint& f) {
        u64 h = f.order * 1000003ULL + f.minus_identity;
        for (const auto& [k, v] : f.trace_det) h = h * 31 + (static_cast<u64>(k.first) << 40) + (static_cast<u64>(k.second) << 20) + v;
        return h;
    }
    struct VecHash {
        std::size_t operator()(const std::vector<u64>& v) const {
            u64 h = v.size();
            for (u64 x : v) h = h * 0x9e3779b97f4a7c15ULL + x;
            return static_cast<std::size_t>(h);
        }
    };
    std::unordered_set<std::vector<u64>, VecHash> exact_;
    std::unordered_map<u64, std::vector<std::size_t>> buckets_;
    std::vector<Group> groups_;
    std::vector<Fingerprint> fps_;
};

u32 order_mod_subgroup(const Mat& x, const Group& u) {
    Mat y = x;
    u32 k = 1;
    while (!u.contains(y)) {
        y = mat_mul(y, x);
        ++k;
    }
    return k;
}

std::vector<Group> perfect_seeds(u32 q) {
    auto fac = factorize(q);
    u32 l = fac[0].first, e = fac[0].second;
    std::vector<Group> seeds;
    seeds.push_back(Group::close({Mat::minus_identity(q)}, q));
    if (l < 5) return seeds;
    seeds.push_back(Group::close({Mat::make(1, 1, 0, 1, q), Mat::make(1, 0, 1, 1, q)}, q));
    if (e == 1 && l != 5 && (l % 10 == 1 || l % 10 == 9)) {
        // binary icosahedral subgroup: s of order 4, t of order 6, st of order 10
        Mat s = Mat::make(0, -1, 1, 0, q);
        for (const auto& t : sl2_elements(q)) {
            if (t.x.trace() != 1) continue;
            Mat st = mat_mul(s, t.x);
            if (mat_pow(st, 10).is_identity() && !mat_pow(st, 5).is_identity() && !mat_pow(st, 2).is_identity()) {
                Group h = Group::close({s, t.x}, q);
                if (h.order() == 120) {
                    seeds.push_back(h);
                    break;
                }
            }
        }
    }
    return seeds;
}

}  // namespace

std::vector<Group> sl2_subgroups(u32 q, i64 max_genus) {
    if (!is_prime_power(q)) throw UnsupportedLevel("sl2_subgroups: " + std::to_string(q) + " is not a prime power");
    const auto& sl = sl2_elements(q);
    ConjRegistry reg;
    for (const Group& s : perfect_seeds(q)) reg.add(s);
    for (std::size_t i = 0; i < reg.groups().size(); ++i) {
        Group u = reg.groups()[i];
        std::vector<Mat> ugens = generators(u);
        std::unordered_set<u64> covered;
        for (const auto& e : sl) {
            if (covered.count(e.x.code())) continue;
            bool norm = true;
            for (const Mat& h : ugens)
                if (!u.contains(mat_mul(mat_mul(e.x, h), e.inv))) {
                    norm = false;
                    break;
                }
            if (!norm) continue;
            for (u64 c : u.codes()) covered.insert(mat_mul(e.x, Mat::from_code(c, q)).code());
            if (u.contains(e.x)) continue;
            u32 k = order_mod_subgroup(e.x, u);
            if (!is_prime_u64(k)) continue;
            std::vector<Mat> vg = ugens;
            vg.push_back(e.x);
            reg.add(Group::close(vg, q));
        }
    }
    std::vector<Group> out;
    for (const Group& g : reg.groups())
        if (genus(g).genus <= max_genus) out.push_back(g);
    return out;
}

namespace {

// Index-2 subgroups of s not containing -I.
std::vector<Group> index_two_without_minus_identity(const Group& s) {
    u32 q = s.modulus();
    std::vector<Mat> squares;
    for (u64 c : s.codes()) {
        Mat x = Mat::from_code(c, q);
        squares.push_back(mat_mul(x, x));
    }
    std::vector<Mat> wg;
    Group w = Group::trivial(q);
    for (const Mat& x : squares) {
        if (w.contains(x)) continue;
        wg.push_back(x);
        w = Group::close(wg, q);
    }
    // basis of s / w over F2
    std::vector<Mat> basis;
    std::vector<Mat> cur = wg;
    Group h = w;
    for (u64 c : s.codes()) {
        Mat x = Mat::from_code(c, q);
        if (h.contains(x)) continue;
        basis.push_back(x);
        cur.push_back(x);
        h = Group::close(cur, q);
    }
    std::vector<Group> out;
    std::size_t r = basis.size();
    if (r == 0 || r > 20) return out;
    for (u64 f = 1; f < (u64{1} << r); ++f) {
        std::vector<Mat> gens = wg;
        std::size_t pivot = r;
        for (std::size_t i = 0; i < r; ++i)
            if ((f >> i) & 1) {
                pivot = i;
                break;
            }
        for (std::size_t i = 0; i < r; ++i) {
            if (((f >> i) & 1) == 0)
                gens.push_back(basis[i]);
            else if (i != pivot)
                gens.push_back(mat_mul(basis[i], basis[pivot]));
        }
        gens.push_back(mat_mul(basis[pivot], basis[pivot]));
        Group k = Group::close(gens, q);
        if (k.order() * 2 == s.order() && !k.contains_minus_identity()) out.push_back(k);
    }
    return out;
}

std::vector<Group> det_extensions(const Group& s) {
    u32 q = s.modulus();
    std::vector<u32> ugens = unit_generators(q);
    u64 phi = euler_phi(q);
    std::vector<Mat> sg = generators(s);
    std::map<u32, std::vector<Mat>> by_det;
    std::unordered_set<u64> covered;
    for (const auto& e : gl2_elements(q)) {
        if (covered.count(e.x.code())) continue;
        bool norm = true;
        for (const Mat& h : sg)
            if (!s.contains(mat_mul(mat_mul(e.x, h), e.inv))) {
                norm = false;
                break;
            }
        if (!norm) continue;
        for (u64 c : s.codes()) covered.insert(mat_mul(e.x, Mat::from_code(c, q)).code());
        by_det[e.x.det()].push_back(e.x);
    }
    std::vector<Group> out;
    if (ugens.empty()) {
        out.push_back(s);
        return out;
    }
    std::vector<std::size_t> idx(ugens.size(), 0);
    for (u32 u : ugens)
        if (by_det[u].empty()) return out;
    while (true) {
        std::vector<Mat> gens = sg;
        for (std::size_t i = 0; i < ugens.size(); ++i) gens.push_back(by_det[ugens[i]][idx[i]]);
        Group g = Group::close(gens, q);
        if (g.order() == s.order() * phi) out.push_back(g);
        std::size_t i = 0;
        while (i < ugens.size() && ++idx[i] == by_det[ugens[i]].size()) idx[i++] = 0;
        if (i == ugens.size()) break;
    }
    return out;
}

std::vector<Group> prime_power_lattice(u32 q, i64 max_genus) {
    ConjRegistry reg;
    for (const Group& s : sl2_subgroups(q, max_genus)) {
        std::vector<Group> variants{s};
        if (q > 2)
            for (const Group& k : index_two_without_minus_identity(s)) variants.push_back(k);
        for (const Group& v : variants)
            for (const Group& g : det_extensions(v)) reg.add(g);
    }
    return reg.groups();
}

// Per-lattice-group data reused across Goursat pairings.
struct FiberSide {
    Group g;
    struct Kernel {
        Group k;
        Quotient q;
        std::vector<std::vector<u64>> sl2;  // det-1 elements per coset
        std::vector<std::vector<char>> dets;
        std::vector<std::vector<std::vector<char>>> traces;  // [level slot][coset][residue]
    };
    std::vector<Kernel> kernels;
    std::vector<u32> trace_levels;  // slot 0 = modulus, then modulus / p
};

FiberSide make_side(const Group& g) {
    FiberSide side;
    side.g = g;
    u32 m = g.modulus();
    side.trace_levels.push_back(m);
    for (u32 p : prime_divisors(m)) side.trace_levels.push_back(m / p);
    for (const Group& k : normal_subgroups(g)) {
        FiberSide::Kernel ker;
        ker.k = k;
        ker.q = make_quotient(g, k);
        u32 n = ker.q.n;
        ker.sl2.assign(n, {});
        ker.dets.assign(n, std::vector<char>(m, 0));
        ker.traces.assign(side.trace_levels.size(), std::vector<std::vector<char>>(n));
        for (std::size_t s = 0; s < side.trace_levels.size(); ++s)
            for (u32 c = 0; c < n; ++c) ker.traces[s][c].assign(side.trace_levels[s], 0);
        for (std::size_t i = 0; i < g.order(); ++i) {
            Mat x = g.element(i);
            u32 c = ker.q.coset_of[i];
            if (x.det() == 1 % m) ker.sl2[c].push_back(x.code());
            ker.dets[c][x.det()] = 1;
            for (std::size_t s = 0; s < side.trace_levels.size(); ++s) {
                u32 d = side.trace_levels[s];
                ker.traces[s][c][x.trace() % d] = 1;
            }
        }
        side.kernels.push_back(std::move(ker));
    }
    return side;
}

// True when every pair (r1, r2) is hit by some coset pairing.
bool pairs_cover(const std::vector<std::vector<char>>& a, const std::vector<std::vector<char>>& b, const std::vector<u32>& phi, u32 n1,
                 u32 n2, const std::vector<char>* mask1 = nullptr, const std::vector<char>* mask2 = nullptr) {
    std::vector<char> hit(static_cast<std::size_t>(n1) * n2, 0);
    for (std::size_t c = 0; c < phi.size(); ++c) {
        const auto& ra = a[c];
        const auto& rb = b[phi[c]];
        for (u32 x = 0; x < n1; ++x) {
            if (!ra[x]) continue;
            for (u32 y = 0; y < n2; ++y)
                if (rb[y]) hit[static_cast<std::size_t>(x) * n2 + y] = 1;
        }
    }
    for (u32 x = 0; x < n1; ++x) {
        if (mask1 && !(*mask1)[x]) continue;
        for (u32 y = 0; y < n2; ++y) {
            if (mask2 && !(*mask2)[y]) continue;
            if (!hit[static_cast<std::size_t>(x) * n2 + y]) return false;
        }
    }
    return true;
}

std::vector<char> unit_mask(u32 m) {
    std::vector<char> mask(m, 0);
    for (u32 u : units(m)) mask[u] = 1;
    return mask;
}

enum class GoursatMode { lattice, classify };

std::vector<Group> goursat_assemble(const std::vector<Group>& l1, const std::vector<Group>& l2, GoursatMode mode, const ClassifyOptions& opts) {
    if (l1.empty() || l2.empty()) return {};
    u32 m1 = l1.front().modulus(), m2 = l2.front().modulus(), m = m1 * m2;
    std::vector<FiberSide> s1, s2;
    auto full_traces = [](const Group& g) { return missing_traces(g, g.modulus()).empty(); };
    for (const Group& g : l1)
        if (mode == GoursatMode::lattice || full_traces(g)) s1.push_back(make_side(g));
    for (const Group& g : l2)
        if (mode == GoursatMode::lattice || full_traces(g)) s2.push_back(make_side(g));
    std::vector<char> umask1 = unit_mask(m1), umask2 = unit_mask(m2);

    struct Found {
        std::size_t i1, i2, k1, k2, iso;
        Group g;
    };
    std::vector<Found> found;
    std::mutex found_mutex;
    std::atomic<std::size_t> next{0};
    std::size_t total = s1.size() * s2.size();

    auto work = [&] {
        while (true) {
            std::size_t job = next++;
            if (job >= total) break;
            std::size_t i1 = job / s2.size(), i2 = job % s2.size();
            const FiberSide& a = s1[i1];
            const FiberSide& b = s2[i2];
            for (std::size_t ka = 0; ka < a.kernels.size(); ++ka) {
                const auto& ker1 = a.kernels[ka];
                for (std::size_t kb = 0; kb < b.kernels.size(); ++kb) {
                    const auto& ker2 = b.kernels[kb];
                    if (ker1.q.n != ker2.q.n) continue;
                    std::vector<std::vector<u32>> isos = quotient_isomorphisms(ker1.q, ker2.q);
                    for (std::size_t t = 0; t < isos.size(); ++t) {
                        const std::vector<u32>& phi = isos[t];
                        if (!pairs_cover(ker1.dets, ker2.dets, phi, m1, m2, &umask1, &umask2)) continue;
                        if (mode == GoursatMode::classify) {
                            if (pairs_cover(ker1.traces[0], ker2.traces[0], phi, m1, m2)) continue;
                            bool fresh = true;
                            for (std::size_t s = 1; s < a.trace_levels.size() && fresh; ++s)
                                fresh = pairs_cover(ker1.traces[s], ker2.traces[0], phi, a.trace_levels[s], m2);
                            for (std::size_t s = 1; s < b.trace_levels.size() && fresh; ++s)
                                fresh = pairs_cover(ker1.traces[0], ker2.traces[s], phi, m1, b.trace_levels[s]);
                            if (!fresh) continue;
                        }
                        std::vector<u64> sl;
                        for (u32 c = 0; c < ker1.q.n; ++c)
                            for (u64 x : ker1.sl2[c])
                                for (u64 y : ker2.sl2[phi[c]]) {
                                    Mat z = crt_join(Mat::from_code(x, m1), Mat::from_code(y, m2));
                                    sl.push_back(z.code());
                                    sl.push_back(mat_neg(z).code());
                                }
                        std::sort(sl.begin(), sl.end());
                        sl.erase(std::unique(sl.begin(), sl.end()), sl.end());
                        i64 gg = genus_from_sl2_codes(m, sl).genus;
                        if (mode == GoursatMode::lattice ? gg > opts.genus : gg != opts.genus) continue;
                        Group g = build_fibered(a.g, ker1.k, ker1.q, b.g, ker2.k, ker2.q, phi);
                        if (g.order() > opts.cap) throw ClosureCapExceeded("fibered product exceeds cap");
                        std::lock_guard<std::mutex> lock(found_mutex);
                        found.push_back({i1, i2, ka, kb, t, std::move(g)});
                    }
                }
            }
        }
    };
    unsigned nt = std::max(1u, opts.threads);
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < nt; ++i) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    std::sort(found.begin(), found.end(), [](const Found& x, const Found& y) {
        return std::tie(x.i1, x.i2, x.k1, x.k2, x.iso) < std::tie(y.i1, y.i2, y.k1, y.k2, y.iso);
    });
    std::vector<Group> out;
    for (auto& f : found) out.push_back(std::move(f.g));
    (void)m;
    return out;
}

std::pair<u32, u32> split_level(u32 m) {
    auto fac = factorize(m);
    u32 q = 1;
    for (u32 i = 0; i < fac.back().second; ++i) q *= fac.back().first;
    return {q, m / q};
}

std::mutex lattice_mutex;
std::map<std::pair<u32, i64>, std::vector<Group>> lattice_cache;

}  // namespace

std::vector<Group> genus_lattice(u32 m, const ClassifyOptions& opts) {
    {
        std::lock_guard<std::mutex> lock(lattice_mutex);
        auto it = lattice_cache.find({m, opts.genus});
        if (it != lattice_cache.end()) return it->second;
    }
    std::vector<Group> out;
    if (m == 1) {
        out.push_back(Group::trivial(1));
    } else if (is_prime_power(m)) {
        out = prime_power_lattice(m, opts.genus);
    } else {
        auto [q, rest] = split_level(m);
        std::vector<Group> lq = genus_lattice(q, opts), lr = genus_lattice(rest, opts);
        ConjRegistry reg;
        for (const Group& g : goursat_assemble(lq, lr, GoursatMode::lattice, opts)) reg.add(g);
        out = reg.groups();
    }
    std::lock_guard<std::mutex> lock(lattice_mutex);
    lattice_cache[{m, opts.genus}] = out;
    return out;
}

std::vector<Group> classify(u32 m, const ClassifyOptions& opts) {
    if (m < 2 || !level_supported(m)) throw UnsupportedLevel("classify: level " + std::to_string(m) + " is outside the SL2-level whitelist closure");
    if (!opts.deep_levels && (m % 16 == 0 || m % 27 == 0 || m % 25 == 0 || m > 60))
        throw UnsupportedLevel("classify: level " + std::to_string(m) + " needs --deep-levels");
    std::vector<Group> cands;
    if (is_prime_power(m)) {
        for (const Group& g : genus_lattice(m, opts))
            if (g.gl2_level() == m && genus(g).genus == opts.genus && is_new_missing_trace(g)) cands.push_back(g);
    } else {
        auto [q, rest] = split_level(m);
        std::vector<Group> lq = genus_lattice(q, opts), lr = genus_lattice(rest, opts);
        cands = goursat_assemble(lq, lr, GoursatMode::classify, opts);
    }
    return maximal_filter(cands);
}

}  // namespace mtrace
