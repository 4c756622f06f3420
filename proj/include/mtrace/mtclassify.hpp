#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mtrace/grouplat.hpp"
#include "mtrace/modcurve.hpp"

namespace mtrace {

std::vector<u32> trace_set(const Group& g, u32 d);
std::vector<u32> missing_traces(const Group& g, u32 d);
// Number of elements of G(d) with trace r, for every residue r mod d.
std::vector<u64> trace_fibers(const Group& g, u32 d);
bool is_missing_trace(const Group& g);
bool is_new_missing_trace(const Group& g);

u64 d_of_group(const Group& g);
bool is_d_admissible(const Group& g, u32 d);

// G / K as a multiplication table on coset indices.
struct Quotient {
    u32 n = 1;
    std::vector<u32> coset_of;     // indexed like g.codes()
    std::vector<std::size_t> rep;  // element index of the smallest member of each coset
    std::vector<std::vector<u32>> table;
    std::vector<u32> order;        // element orders in the quotient
};
Quotient make_quotient(const Group& g, const Group& k);
// Every isomorphism q1 -> q2 as an image vector on coset indices.
std::vector<std::vector<u32>> quotient_isomorphisms(const Quotient& q1, const Quotient& q2, std::size_t limit = 0);
// All normal subgroups of g, each with a generating set.
std::vector<Group> normal_subgroups(const Group& g);

struct FiberedProduct {
    Group g1, k1, g2, k2;
    // One entry per K1-coset: (representative in G1, representative of the paired K2-coset).
    std::vector<std::pair<Mat, Mat>> pairing;
    std::size_t quotient_order = 1;
};

FiberedProduct goursat_decompose(const Group& g, u32 m1, u32 m2);
Group fibered_product(const Group& g1, const Group& k1, const Group& g2, const Group& k2,
                      const std::vector<std::pair<Mat, Mat>>& pairing);

struct InducedVerdict {
    bool holds = false;
    std::optional<Mat> witness;
};
// eta lists (coset representative, image representative) for every K-coset of G.
InducedVerdict is_gl2_induced(const Group& g, const Group& k, const std::vector<std::pair<Mat, Mat>>& eta);

struct ClassifyOptions {
    i64 genus = 0;
    bool deep_levels = false;
    u64 cap = kDefaultClosureCap;
    unsigned threads = 1;
};

const std::vector<u32>& sl2_level_whitelist();
bool level_supported(u32 m);

// Subgroups S of SL2(Z/q) with -I in S (q a prime power), up to GL2-conjugacy, of genus <= g.
std::vector<Group> sl2_subgroups(u32 q, i64 max_genus);
// Det-surjective subgroups of GL2(Z/m) of genus <= g up to conjugacy, at modulus m.
std::vector<Group> genus_lattice(u32 m, const ClassifyOptions& opts);
std::vector<Group> classify(u32 m, const ClassifyOptions& opts = {});
std::vector<Group> maximal_filter(const std::vector<Group>& candidates);
// Removes conjugate duplicates, keeping the lexicographically smallest element encoding.
std::vector<Group> dedupe(const std::vector<Group>& groups);

}  // namespace mtrace
