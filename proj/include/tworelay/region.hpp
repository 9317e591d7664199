#pragma once
// The achievable-rate region of the two-relay network with receiver feedback.
//
// Two routes to the same region are implemented:
//  * evaluate_region: the closed-form characterization — the message rate
//    I(x0; y0,yh1,yh2,x1,x2 | v1,v2) + I(v1,x1; v2,x2) subject to three
//    quantizer-coverage constraint families, each an upper bound by a minimum
//    of sender-side and receiver-side budgets.
//  * stepwise_system + project_max: the full list of per-decoding-step rate
//    constraints over the nine auxiliary rate variables, projected by exact
//    Fourier-Motzkin elimination.
// cross_check_region runs both and records whether they agree.
//
// joint_decoding_system builds the variant where the compression indices are
// decoded jointly at sender and receiver; compare_modes quantifies how its
// constraints relate to the one-at-a-time ones.

#include <array>
#include <string>
#include <vector>

#include "tworelay/fme.hpp"
#include "tworelay/info.hpp"
#include "tworelay/pmf.hpp"

namespace tworelay {

// ---------------------------------------------------------------------------
// Information terms

enum class InfoTerm : int {
    RateMain = 0,  // I(x0; y0,yh1,yh2,x1,x2 | v1,v2)
    RateCross,     // I(v1,x1; v2,x2)
    Compress1Lhs,  // I(yh1; y1 | v1,x1)
    Compress2Lhs,  // I(yh2; y2 | v2,x2)
    SndS1A,        // I(x1; x0,y0,v2,x2 | v1)
    CrossV1,       // I(v1; v2,x2)
    SndS2A,        // I(x2; x0,y0,v1,x1 | v2)
    CrossV2,       // I(v2; v1,x1)
    SndSSumA,      // I(x1,x2; x0,y0 | v1,v2)
    CrossVV,       // I(v1; v2)
    SndZ1,         // I(yh1; x0,y0 | v1,x1)
    SndZ2,         // I(yh2; x0,y0 | v2,x2)
    RcvW01,        // I(v1; y0,v2)
    RcvW02,        // I(v2; y0,v1)
    RcvW0Sum,      // I(v1,v2; y0)
    RcvS1A,        // I(x1; y0,v2,x2 | v1)
    RcvS2A,        // I(x2; y0,v1,x1 | v2)
    RcvSSumA,      // I(x1,x2; y0 | v1,v2)
    RcvZ1,         // I(yh1; y0 | v1,x1)
    RcvZ2,         // I(yh2; y0 | v2,x2)
    JSndZ1,        // I(yh1; x0,y0,v2,x2 | v1,x1)
    JSndZ2,        // I(yh2; x0,y0,v1,x1,yh1 | v2,x2)
    JSndZSum,      // I(yh1,yh2; x0,y0 | v1,v2,x1,x2)
    JRcvZ1,        // I(yh1; y0,v2,x2,yh2 | v1,x1)
    JRcvZ2,        // I(yh2; y0,v1,x1,yh1 | v2,x2)
    JRcvZSum,      // I(yh1,yh2; y0 | v1,v2,x1,x2)
};
inline constexpr int kNumInfoTerms = 26;

struct TermDef {
    InfoTerm id;
    const char* name;  // short semantic name, e.g. "snd_z1"
    VarGroup a, b, given;
    std::string expression() const;  // "I(a; b | given)" in canonical order
};
const std::array<TermDef, kNumInfoTerms>& term_definitions();

struct InfoTermValues {
    std::array<double, kNumInfoTerms> value{};
    double operator[](InfoTerm t) const { return value[static_cast<std::size_t>(t)]; }
    double& operator[](InfoTerm t) { return value[static_cast<std::size_t>(t)]; }
    std::string to_string() const;  // aligned name/expression/value table
};

InfoTermValues info_vector(const JointPmf& joint);
InfoTermValues info_vector(const NetworkDist& dist);

// ---------------------------------------------------------------------------
// Closed-form region

// Strict constraints are checked closed with this much slack so degenerate
// constructions with both sides identically zero count as feasible.
inline constexpr double kFeasibilityMargin = 1e-9;

struct ConstraintCheck {
    std::string id;  // e.g. "compress1.sender"
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = true;
};

struct RegionVerdict {
    bool feasible = false;
    double achieved_rate = 0.0;
    // One entry per minimum-term of each constraint family (8 total); the
    // family holds iff all of its terms hold, so feasible <=> all ok.
    std::vector<ConstraintCheck> checks;
    std::vector<ConstraintCheck> violations() const;
    // Smallest rhs - lhs over all checks (how far inside the region).
    double min_slack() const;
};

RegionVerdict evaluate_region(const InfoTermValues& t);
RegionVerdict evaluate_region(const NetworkDist& dist);

// ---------------------------------------------------------------------------
// Stepwise constraint systems

// Rate variables, in the fixed system order.
const std::vector<std::string>& rate_variables();
// Elimination order used by projections (all variables except "R").
const std::vector<std::string>& elimination_order();

// Per-decoding-step constraints with one-at-a-time compression decoding:
// sender s-index rows, sender z-index rows, receiver w0 rows, receiver s
// rows, receiver z rows, the two relay coverage lower bounds, the message
// rate row, and nonnegativity of all nine variables.
InequalitySystem stepwise_system(const InfoTermValues& t);
InequalitySystem stepwise_system(const NetworkDist& dist);

// Which reading of the joint-compression-decoding bounds to build: the
// asymmetric one keeps each bound's bin-rate credit tied to one relay's
// s-index (two blocks of rows, one per relay); the symmetric one credits
// each relay's own bin rate in its own bound.
enum class Reading { Asymmetric, Symmetric };

InequalitySystem joint_decoding_system(const InfoTermValues& t,
                                       Reading reading = Reading::Asymmetric);
InequalitySystem joint_decoding_system(const NetworkDist& dist,
                                       Reading reading = Reading::Asymmetric);

// ---------------------------------------------------------------------------
// Cross-checks

struct CrossCheck {
    RegionVerdict verdict;       // closed-form route
    ProjectionResult projection; // stepwise + elimination route
    bool feasibility_agrees = false;
    bool rate_agrees = false;    // |rates| within tolerance when both feasible
    bool agrees() const { return feasibility_agrees && rate_agrees; }
    std::string detail;          // human-readable explanation on disagreement
};
inline constexpr double kCrossCheckTolerance = 1e-9;

CrossCheck cross_check_region(const NetworkDist& dist);
CrossCheck cross_check_region(const InfoTermValues& t);

// Gap between a matched pair of compression-decoding rows: joint-mode rhs
// minus individual-mode rhs (chain-rule arguments make these nonnegative).
struct GapEntry {
    std::string individual_id, joint_id;
    double individual_rhs = 0.0;
    double joint_rhs = 0.0;
    double gap = 0.0;  // joint_rhs - individual_rhs
};

struct ContainmentReport {
    int grid = 32;            // grid points per axis
    double extent1 = 0.0;     // grid covers [0, extent1] x [0, extent2]
    double extent2 = 0.0;
    bool contains = true;     // joint-mode region ⊇ individual-mode region on the grid
    bool has_counterexample = false;
    double ce1 = 0.0, ce2 = 0.0;       // first failing grid point
    std::string violated_row;          // joint-mode row failing there
};

struct ModeComparison {
    Reading reading = Reading::Asymmetric;
    std::vector<GapEntry> gaps;
    ContainmentReport containment;
    double min_gap() const;
};

// Projects both systems onto the two compression-rate coordinates and checks
// on a grid (exact rational evaluation) that every individually-decodable
// point is also jointly decodable, alongside the per-row rhs gaps.
ModeComparison compare_modes(const NetworkDist& dist,
                             Reading reading = Reading::Asymmetric);
ModeComparison compare_modes(const InfoTermValues& t,
                             Reading reading = Reading::Asymmetric);

} // namespace tworelay
