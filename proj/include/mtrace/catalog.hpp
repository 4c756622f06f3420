#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mtrace/ecurve.hpp"
#include "mtrace/grouplat.hpp"
#include "mtrace/qpoly.hpp"

namespace mtrace {

struct GroupRecord {
    std::string label;  // "m,i,k"
    u32 m = 1;
    u64 order = 0;
    std::vector<Mat> gens;
    bool minus_I = false;
    std::vector<u32> missing;
    std::optional<bool> rational_points;  // recorded for prime-power levels only
    std::string notes;

    Group group(u64 cap = kDefaultClosureCap) const;
};

struct FamilyRecord {
    std::string label;
    std::string j_text, d_text;  // as written in the file, compositions spelled out
    RatExpr j, d;
    bool minus_I = false;
    std::string notes;
};

struct FamilyCatalog {
    std::map<std::string, RatExpr> aux;
    std::vector<FamilyRecord> families;

    const FamilyRecord* find(const std::string& label) const;
};

// "[[a,b],[c,d]]" with entries reduced mod m.
Mat parse_matrix(const std::string& text, u32 m);
std::string matrix_literal(const Mat& x);

std::vector<GroupRecord> load_groups(const std::string& path);
FamilyCatalog load_families(const std::string& path);
const GroupRecord* find_group(const std::vector<GroupRecord>& groups, const std::string& label);
// Directory holding groups.json and families.json; MTRACE_DATA_DIR overrides the build-time path.
std::string default_data_dir();

struct Check {
    std::string subject;  // label, identity name, ...
    std::string name;
    bool ok = false;
    std::string detail;
};

struct Report {
    std::vector<Check> checks;

    void add(std::string subject, std::string name, bool ok, std::string detail = {});
    bool ok() const;
    std::size_t failures() const;
};

Report verify_catalog(const std::vector<GroupRecord>& groups, u64 cap = kDefaultClosureCap);

// deg j_{m,i} against the index of the group's SL2 part, for every family with a group record.
Report verify_family_degrees(const FamilyCatalog& fams, const std::vector<GroupRecord>& groups);

Report run_identity_suite(const FamilyCatalog& fams);

struct CensusOptions {
    unsigned samples = 5;
    u64 bound = 1000;
    unsigned threads = 1;
    std::uint64_t seed = 1;
};

struct FamilySample {
    Rat t, d;
    std::vector<unsigned> hit;  // recorded missing residues that did occur
    std::size_t primes = 0;
};

struct FamilyCensus {
    std::string label;
    u32 m = 1;
    std::vector<unsigned> missing;
    std::vector<FamilySample> samples;
    bool ok() const;
};

// Random nonsingular specializations of the family with d scaled by twist_scale, censused over
// good p <= bound with p > 3 and p coprime to m.
FamilyCensus family_census(const FamilyRecord& fam, const GroupRecord& grp, const CensusOptions& opts,
                           const Rat& twist_scale = Rat(1));

}  // namespace mtrace
