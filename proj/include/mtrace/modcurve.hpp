#pragma once

#include <vector>

#include "mtrace/grouplat.hpp"

namespace mtrace {

struct GenusReport {
    u64 mu = 0;
    u64 nu2 = 0;
    u64 nu3 = 0;
    u64 cusps = 0;
    i64 genus = 0;
};

// Genus of X_{<G,-I>} from the action of SL2(Z/m) on the cosets of <G,-I> n SL2.
GenusReport genus(const Group& g);
// Same, given the sorted codes of a subgroup of SL2(Z/m) that contains -I.
GenusReport genus_from_sl2_codes(u32 m, const std::vector<u64>& codes);
// Sorted codes of <G,-I> n SL2.
std::vector<u64> signed_sl2_codes(const Group& g);

bool sz_rational_point_test(const Group& g);

}  // namespace mtrace
