#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mtrace/grouplat.hpp"
#include "mtrace/qpoly.hpp"

namespace mtrace {

// Number of elements of GL2(Z/lZ) with trace r mod l.
u64 gl2_trace_count(u32 l, i64 r);
// Enumeration only; throws PrimeTooLarge above 97.
u64 gl2_trace_count_enumerated(u32 l, i64 r);

// l |GL2(Z/lZ)_r| / |GL2(Z/lZ)|
Rat euler_factor(u32 l, i64 r);

struct LTFactorization {
    u32 m_e = 1;
    i64 r = 0;
    u32 bound = 0;
    Rat group_ratio;
    std::vector<std::pair<u32, Rat>> euler_factors;
    Rat truncated_product;        // group_ratio times the Euler factors, without 2/pi
    std::string truncated_value;  // 2/pi times truncated_product, 30 significant digits
    bool zero_flag = false;
};

// G plays the role of the image at level m_E = gl2_level(G).
LTFactorization lt_truncated(const Group& g, i64 r, u32 bound, unsigned digits = 30);

}  // namespace mtrace
