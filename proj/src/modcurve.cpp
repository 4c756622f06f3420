#include "mtrace/modcurve.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_map>

#include "mtrace/errors.hpp"

namespace mtrace {

namespace {

constexpr u32 kDenseClassTableMax = 56;
constexpr u32 kNoClass = 0xffffffffu;

// Conjugacy classes in SL2(Z/m) of the elliptic and parabolic test elements.
struct ClassTable {
    u32 m = 1;
    std::vector<u32> dense;
    std::unordered_map<u64, u32> sparse;
    std::vector<u64> class_size;
    u32 e2 = 0, e3 = 0;
    std::vector<u32> parabolic;  // class id of T^k, k = 0..m-1

    u32 lookup(u64 code) const {
        if (!dense.empty()) return dense[code];
        auto it = sparse.find(code);
        return it == sparse.end() ? kNoClass : it->second;
    }
};

std::mutex table_mutex;
std::unordered_map<u32, std::unique_ptr<ClassTable>> tables;

const ClassTable& class_table(u32 m) {
    const auto& sl = sl2_elements(m);
    std::lock_guard<std::mutex> lock(table_mutex);
    auto& slot = tables[m];
    if (slot) return *slot;
    auto t = std::make_unique<ClassTable>();
    t->m = m;
    if (m <= kDenseClassTableMax) {
        u64 mm = m;
        t->dense.assign(mm * mm * mm * mm, kNoClass);
    }
    auto assign = [&](const Mat& x) -> u32 {
        u32 id = t->lookup(x.code());
        if (id != kNoClass) return id;
        id = static_cast<u32>(t->class_size.size());
        u64 size = 0;
        for (const auto& e : sl) {
            u64 c = mat_mul(mat_mul(e.x, x), e.inv).code();
            if (t->lookup(c) == kNoClass) {
                if (!t->dense.empty())
                    t->dense[c] = id;
                else
                    t->sparse.emplace(c, id);
                ++size;
            }
        }
        t->class_size.push_back(size);
        return id;
    };
    t->e2 = assign(Mat::make(0, -1, 1, 0, m));
    t->e3 = assign(Mat::make(0, -1, 1, 1, m));
    for (u32 k = 0; k < m; ++k) t->parabolic.push_back(assign(Mat::make(1, k, 0, 1, m)));
    slot = std::move(t);
    return *slot;
}

}  // namespace

std::vector<u64> signed_sl2_codes(const Group& g) {
    u32 m = g.modulus();
    std::vector<u64> codes;
    for (u64 c : g.codes()) {
        Mat x = Mat::from_code(c, m);
        if (x.det() != 1 % m) continue;
        codes.push_back(c);
        codes.push_back(mat_neg(x).code());
    }
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    return codes;
}

GenusReport genus_from_sl2_codes(u32 m, const std::vector<u64>& codes) {
    const ClassTable& t = class_table(m);
    std::vector<u64> hits(t.class_size.size(), 0);
    for (u64 c : codes) {
        u32 id = t.lookup(c);
        if (id != kNoClass) ++hits[id];
    }
    u64 n = codes.size();
    u64 sl = sl2_order(m);
    // Fixed cosets of x: |C(x)| * |Cl(x) n S| / |S|, with |C(x)| = |SL2| / |Cl(x)|.
    auto fixed = [&](u32 id) { return (sl / t.class_size[id]) * hits[id] / n; };
    GenusReport r;
    r.mu = sl / n;
    r.nu2 = fixed(t.e2);
    r.nu3 = fixed(t.e3);
    u64 total = 0;
    for (u32 id : t.parabolic) total += fixed(id);
    r.cusps = total / m;
    // 12 g = 12 + mu - 3 nu2 - 4 nu3 - 6 cusps
    i64 twelve_g = 12 + static_cast<i64>(r.mu) - 3 * static_cast<i64>(r.nu2) - 4 * static_cast<i64>(r.nu3) - 6 * static_cast<i64>(r.cusps);
    r.genus = twelve_g / 12;
    if (twelve_g % 12 != 0 || total % m != 0) throw Error("genus: non-integral count at modulus " + std::to_string(m));
    return r;
}

GenusReport genus(const Group& g) { return genus_from_sl2_codes(g.modulus(), signed_sl2_codes(g)); }

bool sz_rational_point_test(const Group& g) {
    u32 level = g.gl2_level();
    if (level > 1 && !is_prime_power(level)) throw NotPrimePowerLevel("sz_rational_point_test: level " + std::to_string(level) + " is not a prime power");
    Group gt = adjoin_minus_identity(g);
    u32 m = g.modulus();
    Mat c1 = Mat::make(1, 0, 0, -1, m), c2 = Mat::make(1, 1, 0, -1, m);
    for (const auto& e : gl2_elements(m)) {
        if (gt.contains(mat_mul(mat_mul(e.x, c1), e.inv))) return true;
        if (gt.contains(mat_mul(mat_mul(e.x, c2), e.inv))) return true;
    }
    return false;
}

}  // namespace mtrace
