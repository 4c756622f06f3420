#pragma once

#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "mtrace/modarith.hpp"

namespace mtrace {

constexpr u64 kDefaultClosureCap = 20000000;

// Subgroup of GL2(Z/m) with its sorted element codes. Immutable after construction;
// derived invariants are computed once on first use.
class Group {
public:
    Group();

    static Group close(const std::vector<Mat>& gens, u32 m, u64 cap = kDefaultClosureCap);
    // Trusted constructor for element sets already known to form a group; gens must be
    // empty or generate the group.
    static Group from_codes(u32 m, std::vector<u64> codes, std::vector<Mat> gens);
    static Group full(u32 m);
    static Group trivial(u32 m);

    u32 modulus() const;
    const std::vector<Mat>& gens() const;
    const std::vector<u64>& codes() const;
    std::size_t order() const;
    Mat element(std::size_t i) const;
    std::vector<Mat> elements() const;

    bool contains(const Mat& x) const;
    bool contains_code(u64 code) const;
    bool contains_minus_identity() const;
    std::size_t index_of(u64 code) const;  // position in codes(), or npos

    u32 gl2_level() const;
    u32 sl2_level() const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

Group adjoin_minus_identity(const Group& g);
Group sl2_part(const Group& g);
Group commutator_subgroup(const Group& g);
Group normal_closure(const Group& g, const std::vector<Mat>& xs);
std::vector<u32> det_image(const Group& g);
bool det_surjective(const Group& g);
Group reduce_group(const Group& g, u32 d);
Group preimage(const Group& g, u32 m, u64 cap = kDefaultClosureCap);
Group intersect(const Group& a, const Group& b);
bool is_subgroup(const Group& sub, const Group& g);
bool normalizes(const Mat& x, const Group& g);
// The stored generators, or a greedily found generating set when none were stored.
std::vector<Mat> generators(const Group& g);
// Small generating set found greedily; keeps the existing generators when they suffice.
std::vector<Mat> small_generating_set(const Group& g);

// Elements of GL2(Z/m) (resp. SL2) with cached inverses, shared per modulus.
struct AmbientElement {
    Mat x;
    Mat inv;
};
const std::vector<AmbientElement>& gl2_elements(u32 m);
const std::vector<AmbientElement>& sl2_elements(u32 m);

struct Fingerprint {
    std::size_t order = 0;
    bool minus_identity = false;
    std::map<std::pair<u32, u32>, std::size_t> trace_det;  // (tr, det) -> count

    bool operator==(const Fingerprint& o) const = default;
};
Fingerprint fingerprint(const Group& g);

enum class ConjMode { equal, contained };

struct ConjVerdict {
    bool holds = false;
    std::optional<Mat> witness;  // c with c G1 c^-1 = G2 (equal) or contained in G2
};

ConjVerdict conjugacy(const Group& g1, const Group& g2, ConjMode mode);

}  // namespace mtrace
