#include "tworelay/region.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace tworelay {

namespace {

using G = VarGroup;

std::array<TermDef, kNumInfoTerms> make_terms() {
    using V = Var;
    return {{
        {InfoTerm::RateMain, "rate_main",
         {V::X0}, {V::X1, V::X2, V::Yh1, V::Yh2, V::Y0}, {V::V1, V::V2}},
        {InfoTerm::RateCross, "rate_cross", {V::V1, V::X1}, {V::V2, V::X2}, {}},
        {InfoTerm::Compress1Lhs, "cover1_lhs", {V::Yh1}, {V::Y1}, {V::V1, V::X1}},
        {InfoTerm::Compress2Lhs, "cover2_lhs", {V::Yh2}, {V::Y2}, {V::V2, V::X2}},
        {InfoTerm::SndS1A, "snd_s1_a", {V::X1}, {V::V2, V::X0, V::X2, V::Y0}, {V::V1}},
        {InfoTerm::CrossV1, "cross_v1", {V::V1}, {V::V2, V::X2}, {}},
        {InfoTerm::SndS2A, "snd_s2_a", {V::X2}, {V::V1, V::X0, V::X1, V::Y0}, {V::V2}},
        {InfoTerm::CrossV2, "cross_v2", {V::V2}, {V::V1, V::X1}, {}},
        {InfoTerm::SndSSumA, "snd_s_sum_a", {V::X1, V::X2}, {V::X0, V::Y0}, {V::V1, V::V2}},
        {InfoTerm::CrossVV, "cross_vv", {V::V1}, {V::V2}, {}},
        {InfoTerm::SndZ1, "snd_z1_rhs", {V::Yh1}, {V::X0, V::Y0}, {V::V1, V::X1}},
        {InfoTerm::SndZ2, "snd_z2_rhs", {V::Yh2}, {V::X0, V::Y0}, {V::V2, V::X2}},
        {InfoTerm::RcvW01, "rcv_w01_rhs", {V::V1}, {V::V2, V::Y0}, {}},
        {InfoTerm::RcvW02, "rcv_w02_rhs", {V::V2}, {V::V1, V::Y0}, {}},
        {InfoTerm::RcvW0Sum, "rcv_w0_sum_rhs", {V::V1, V::V2}, {V::Y0}, {}},
        {InfoTerm::RcvS1A, "rcv_s1_a", {V::X1}, {V::V2, V::X2, V::Y0}, {V::V1}},
        {InfoTerm::RcvS2A, "rcv_s2_a", {V::X2}, {V::V1, V::X1, V::Y0}, {V::V2}},
        {InfoTerm::RcvSSumA, "rcv_s_sum_a", {V::X1, V::X2}, {V::Y0}, {V::V1, V::V2}},
        {InfoTerm::RcvZ1, "rcv_z1_rhs", {V::Yh1}, {V::Y0}, {V::V1, V::X1}},
        {InfoTerm::RcvZ2, "rcv_z2_rhs", {V::Yh2}, {V::Y0}, {V::V2, V::X2}},
        {InfoTerm::JSndZ1, "jsnd_z1_rhs", {V::Yh1}, {V::V2, V::X0, V::X2, V::Y0}, {V::V1, V::X1}},
        {InfoTerm::JSndZ2, "jsnd_z2_rhs", {V::Yh2}, {V::V1, V::X0, V::X1, V::Yh1, V::Y0},
         {V::V2, V::X2}},
        {InfoTerm::JSndZSum, "jsnd_zsum_rhs", {V::Yh1, V::Yh2}, {V::X0, V::Y0},
         {V::V1, V::V2, V::X1, V::X2}},
        {InfoTerm::JRcvZ1, "jrcv_z1_rhs", {V::Yh1}, {V::V2, V::X2, V::Yh2, V::Y0}, {V::V1, V::X1}},
        {InfoTerm::JRcvZ2, "jrcv_z2_rhs", {V::Yh2}, {V::V1, V::X1, V::Yh1, V::Y0}, {V::V2, V::X2}},
        {InfoTerm::JRcvZSum, "jrcv_zsum_rhs", {V::Yh1, V::Yh2}, {V::Y0},
         {V::V1, V::V2, V::X1, V::X2}},
    }};
}

std::string group_to_string(const VarGroup& g) {
    VarGroup s = g;
    std::sort(s.begin(), s.end());
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += var_name(s[i]);
    }
    return out;
}

} // namespace

std::string TermDef::expression() const {
    std::string e = "I(" + group_to_string(a) + "; " + group_to_string(b);
    if (!given.empty()) e += " | " + group_to_string(given);
    return e + ")";
}

const std::array<TermDef, kNumInfoTerms>& term_definitions() {
    static const auto defs = make_terms();
    return defs;
}

std::string InfoTermValues::to_string() const {
    std::ostringstream os;
    for (const auto& d : term_definitions()) {
        os << std::left << std::setw(16) << d.name
           << std::setw(44) << d.expression()
           << std::setprecision(12) << value[static_cast<std::size_t>(d.id)] << "\n";
    }
    return os.str();
}

InfoTermValues info_vector(const JointPmf& joint) {
    InfoTermValues t;
    for (const auto& d : term_definitions())
        t[d.id] = mutual_info(joint, d.a, d.b, d.given);
    return t;
}

InfoTermValues info_vector(const NetworkDist& dist) {
    return info_vector(build_joint(dist));
}

// ---------------------------------------------------------------------------
// Closed-form region

std::vector<ConstraintCheck> RegionVerdict::violations() const {
    std::vector<ConstraintCheck> out;
    for (const auto& c : checks)
        if (!c.ok) out.push_back(c);
    return out;
}

double RegionVerdict::min_slack() const {
    double s = 0.0;
    bool first = true;
    for (const auto& c : checks) {
        const double slack = c.rhs - c.lhs;
        if (first || slack < s) s = slack;
        first = false;
    }
    return s;
}

RegionVerdict evaluate_region(const InfoTermValues& t) {
    using T = InfoTerm;
    RegionVerdict v;
    v.achieved_rate = t[T::RateMain] + t[T::RateCross];

    auto add = [&](const std::string& id, double lhs, double rhs) {
        v.checks.push_back({id, lhs, rhs, lhs <= rhs + kFeasibilityMargin});
    };
    const double lhs1 = t[T::Compress1Lhs];
    add("compress1.sender", lhs1, t[T::SndS1A] + t[T::CrossV1] + t[T::SndZ1]);
    add("compress1.receiver", lhs1,
        t[T::RcvW01] + t[T::RcvS1A] + t[T::CrossV1] + t[T::RcvZ1]);

    const double lhs2 = t[T::Compress2Lhs];
    add("compress2.sender", lhs2, t[T::SndS2A] + t[T::CrossV2] + t[T::SndZ2]);
    add("compress2.receiver", lhs2,
        t[T::RcvW02] + t[T::RcvS2A] + t[T::CrossV2] + t[T::RcvZ2]);

    const double lhs12 = lhs1 + lhs2;
    add("compress_sum.sender", lhs12,
        t[T::SndSSumA] + t[T::CrossVV] + t[T::SndZ1] + t[T::SndZ2]);
    add("compress_sum.rcv_split", lhs12,
        t[T::RcvW01] + t[T::RcvW02] + t[T::RcvSSumA] + t[T::CrossVV] + t[T::RcvZ1] + t[T::RcvZ2]);
    add("compress_sum.rcv_pooled", lhs12,
        t[T::RcvW0Sum] + t[T::RcvSSumA] + t[T::CrossVV] + t[T::RcvZ1] + t[T::RcvZ2]);
    add("compress_sum.rcv_crossed", lhs12,
        t[T::RcvW0Sum] + t[T::RcvS1A] + t[T::CrossV1] + t[T::RcvS2A] + t[T::CrossV2] +
            t[T::RcvZ1] + t[T::RcvZ2]);

    v.feasible = std::all_of(v.checks.begin(), v.checks.end(),
                             [](const ConstraintCheck& c) { return c.ok; });
    return v;
}

RegionVerdict evaluate_region(const NetworkDist& dist) {
    return evaluate_region(info_vector(dist));
}

// ---------------------------------------------------------------------------
// Stepwise systems

const std::vector<std::string>& rate_variables() {
    static const std::vector<std::string> vars = {
        "R", "Rs1", "Rs2", "R011", "R012", "R021", "R022", "Rh1", "Rh2"};
    return vars;
}

const std::vector<std::string>& elimination_order() {
    static const std::vector<std::string> order = {
        "Rh1", "Rh2", "Rs1", "Rs2", "R011", "R012", "R021", "R022"};
    return order;
}

namespace {

using Terms = std::vector<std::pair<std::string, Rational>>;

struct SystemBuilder {
    InequalitySystem sys;
    const InfoTermValues& t;

    explicit SystemBuilder(const InfoTermValues& terms) : t(terms) {
        sys.vars = rate_variables();
    }

    void upper(const Terms& lhs, std::initializer_list<InfoTerm> rhs_terms,
               const std::string& source) {
        double rhs = 0.0;
        for (InfoTerm term : rhs_terms) rhs += t[term];
        sys.add(lhs, Relation::LE, Rational::from_double(rhs), /*strict=*/true, source);
    }

    void shared_index_rows() {
        upper({{"R", 1}}, {InfoTerm::RateMain, InfoTerm::RateCross}, "msg_rate");
        upper({{"Rs1", 1}}, {InfoTerm::SndS1A, InfoTerm::CrossV1}, "snd_s1");
        upper({{"Rs2", 1}}, {InfoTerm::SndS2A, InfoTerm::CrossV2}, "snd_s2");
        upper({{"Rs1", 1}, {"Rs2", 1}}, {InfoTerm::SndSSumA, InfoTerm::CrossVV}, "snd_s_sum");
        upper({{"R011", 1}, {"R012", 1}}, {InfoTerm::RcvW01}, "rcv_w01");
        upper({{"R021", 1}, {"R022", 1}}, {InfoTerm::RcvW02}, "rcv_w02");
        upper({{"R011", 1}, {"R012", 1}, {"R021", 1}, {"R022", 1}},
              {InfoTerm::RcvW0Sum}, "rcv_w0_sum");
        upper({{"Rs1", 1}, {"R011", -1}}, {InfoTerm::RcvS1A, InfoTerm::CrossV1}, "rcv_s1");
        upper({{"Rs2", 1}, {"R021", -1}}, {InfoTerm::RcvS2A, InfoTerm::CrossV2}, "rcv_s2");
        upper({{"Rs1", 1}, {"Rs2", 1}, {"R011", -1}, {"R021", -1}},
              {InfoTerm::RcvSSumA, InfoTerm::CrossVV}, "rcv_s_sum");
    }

    void coverage_and_nonneg_rows() {
        sys.add({{"Rh1", 1}}, Relation::GE,
                Rational::from_double(t[InfoTerm::Compress1Lhs]), /*strict=*/true,
                "relay1_cover");
        sys.add({{"Rh2", 1}}, Relation::GE,
                Rational::from_double(t[InfoTerm::Compress2Lhs]), /*strict=*/true,
                "relay2_cover");
        for (const auto& v : rate_variables())
            sys.add({{v, 1}}, Relation::GE, Rational(0), /*strict=*/false, "nonneg_" + v);
    }
};

} // namespace

InequalitySystem stepwise_system(const InfoTermValues& t) {
    SystemBuilder b(t);
    b.shared_index_rows();
    b.upper({{"Rh1", 1}, {"Rs1", -1}}, {InfoTerm::SndZ1}, "snd_z1");
    b.upper({{"Rh2", 1}, {"Rs2", -1}}, {InfoTerm::SndZ2}, "snd_z2");
    b.upper({{"Rh1", 1}, {"Rs1", -1}, {"R012", -1}}, {InfoTerm::RcvZ1}, "rcv_z1");
    b.upper({{"Rh2", 1}, {"Rs2", -1}, {"R022", -1}}, {InfoTerm::RcvZ2}, "rcv_z2");
    b.coverage_and_nonneg_rows();
    b.sys.notes = {"compression decoding: one index at a time"};
    return b.sys;
}

InequalitySystem stepwise_system(const NetworkDist& dist) {
    return stepwise_system(info_vector(dist));
}

InequalitySystem joint_decoding_system(const InfoTermValues& t, Reading reading) {
    using T = InfoTerm;
    SystemBuilder b(t);
    b.shared_index_rows();
    if (reading == Reading::Asymmetric) {
        b.upper({{"Rh1", 1}, {"Rs1", -1}}, {T::JSndZ1, T::RateCross}, "jsnd_z1_s1");
        b.upper({{"Rh2", 1}, {"Rs1", -1}}, {T::JSndZ2, T::RateCross}, "jsnd_z2_s1");
        b.upper({{"Rh1", 1}, {"Rh2", 1}, {"Rs1", -1}}, {T::JSndZSum, T::RateCross},
                "jsnd_zsum_s1");
        b.upper({{"Rh1", 1}, {"Rs2", -1}}, {T::JSndZ1, T::RateCross}, "jsnd_z1_s2");
        b.upper({{"Rh2", 1}, {"Rs2", -1}}, {T::JSndZ2, T::RateCross}, "jsnd_z2_s2");
        b.upper({{"Rh1", 1}, {"Rh2", 1}, {"Rs2", -1}}, {T::JSndZSum, T::RateCross},
                "jsnd_zsum_s2");
        b.upper({{"Rh1", 1}, {"Rs1", -1}, {"R012", -1}}, {T::JRcvZ1, T::RateCross},
                "jrcv_z1_c1");
        b.upper({{"Rh2", 1}, {"Rs1", -1}, {"R012", -1}}, {T::JRcvZ2, T::RateCross},
                "jrcv_z2_c1");
        b.upper({{"Rh1", 1}, {"Rh2", 1}, {"Rs1", -1}, {"R012", -1}},
                {T::JRcvZSum, T::RateCross}, "jrcv_zsum_c1");
        b.upper({{"Rh1", 1}, {"Rs2", -1}, {"R022", -1}}, {T::JRcvZ1, T::RateCross},
                "jrcv_z1_c2");
        b.upper({{"Rh2", 1}, {"Rs2", -1}, {"R022", -1}}, {T::JRcvZ2, T::RateCross},
                "jrcv_z2_c2");
        b.upper({{"Rh1", 1}, {"Rh2", 1}, {"Rs2", -1}, {"R022", -1}},
                {T::JRcvZSum, T::RateCross}, "jrcv_zsum_c2");
        b.sys.notes = {
            "compression decoding: joint over both relays",
            "reading: asymmetric - each bound credits a single relay's bin rate;"
            " both relay variants are included as separate rows",
            "second relay's sender-side bound conditions on the first relay's"
            " quantizer output"};
    } else {
        b.upper({{"Rh1", 1}, {"Rs1", -1}}, {T::JSndZ1, T::RateCross}, "jsnd_z1");
        b.upper({{"Rh2", 1}, {"Rs2", -1}}, {T::JSndZ2, T::RateCross}, "jsnd_z2");
        b.upper({{"Rh1", 1}, {"Rh2", 1}, {"Rs1", -1}, {"Rs2", -1}},
                {T::JSndZSum, T::RateCross}, "jsnd_zsum");
        b.upper({{"Rh1", 1}, {"Rs1", -1}, {"R012", -1}}, {T::JRcvZ1, T::RateCross},
                "jrcv_z1");
        b.upper({{"Rh2", 1}, {"Rs2", -1}, {"R022", -1}}, {T::JRcvZ2, T::RateCross},
                "jrcv_z2");
        b.upper({{"Rh1", 1}, {"Rh2", 1}, {"Rs1", -1}, {"R012", -1}, {"Rs2", -1}, {"R022", -1}},
                {T::JRcvZSum, T::RateCross}, "jrcv_zsum");
        b.sys.notes = {
            "compression decoding: joint over both relays",
            "reading: symmetric - each bound credits its own relay's bin rate"};
    }
    b.coverage_and_nonneg_rows();
    return b.sys;
}

InequalitySystem joint_decoding_system(const NetworkDist& dist, Reading reading) {
    return joint_decoding_system(info_vector(dist), reading);
}

// ---------------------------------------------------------------------------
// Cross-checks

CrossCheck cross_check_region(const InfoTermValues& t) {
    CrossCheck cc;
    cc.verdict = evaluate_region(t);
    cc.projection = project_max(stepwise_system(t), "R");

    cc.feasibility_agrees = (cc.verdict.feasible == cc.projection.feasible);
    if (!cc.verdict.feasible && !cc.projection.feasible) {
        cc.rate_agrees = true;
    } else if (cc.verdict.feasible && cc.projection.feasible) {
        if (cc.projection.unbounded) {
            cc.rate_agrees = false;
            cc.detail = "projection reports an unbounded message rate";
        } else {
            const double diff =
                cc.verdict.achieved_rate - cc.projection.max_value.to_double();
            cc.rate_agrees = std::abs(diff) <= kCrossCheckTolerance;
            if (!cc.rate_agrees) {
                std::ostringstream os;
                os << "rates differ by " << diff << " (closed-form "
                   << cc.verdict.achieved_rate << ", projected "
                   << cc.projection.max_value.to_double() << ")";
                cc.detail = os.str();
            }
        }
    } else {
        cc.rate_agrees = false;
        std::ostringstream os;
        os << "feasibility differs: closed-form says "
           << (cc.verdict.feasible ? "feasible" : "infeasible")
           << ", projection says "
           << (cc.projection.feasible ? "feasible" : "infeasible");
        if (!cc.projection.contradictions.empty()) {
            os << "; contradictory rows:";
            for (const auto& row : cc.projection.contradictions) {
                os << " [";
                for (const auto& origin : row.origins) os << origin << " ";
                os << "]";
            }
        }
        cc.detail = os.str();
    }
    return cc;
}

CrossCheck cross_check_region(const NetworkDist& dist) {
    return cross_check_region(info_vector(dist));
}

double ModeComparison::min_gap() const {
    double m = 0.0;
    bool first = true;
    for (const auto& g : gaps) {
        if (first || g.gap < m) m = g.gap;
        first = false;
    }
    return m;
}

namespace {

// Project a nine-variable system onto (Rh1, Rh2).
InequalitySystem project_to_quantizer_rates(InequalitySystem sys) {
    for (const auto& v : rate_variables()) {
        if (v == "Rh1" || v == "Rh2") continue;
        sys = eliminate(sys, v);
    }
    return sys;
}

Rational axis_extent(const InequalitySystem& two_var, const std::string& var) {
    ProjectionResult pr = project_max(two_var, var);
    if (pr.feasible && !pr.unbounded && pr.max_value.sign() > 0) return pr.max_value;
    return Rational(1);
}

} // namespace

ModeComparison compare_modes(const InfoTermValues& t, Reading reading) {
    using T = InfoTerm;
    ModeComparison mc;
    mc.reading = reading;

    const bool asym = reading == Reading::Asymmetric;
    auto gap = [&](const char* ind_id, const char* joint_id, double ind_rhs,
                   double joint_rhs) {
        mc.gaps.push_back({ind_id, joint_id, ind_rhs, joint_rhs, joint_rhs - ind_rhs});
    };
    gap("snd_z1", asym ? "jsnd_z1_s1" : "jsnd_z1",
        t[T::SndZ1], t[T::JSndZ1] + t[T::RateCross]);
    gap("snd_z2", asym ? "jsnd_z2_s2" : "jsnd_z2",
        t[T::SndZ2], t[T::JSndZ2] + t[T::RateCross]);
    gap("rcv_z1", asym ? "jrcv_z1_c1" : "jrcv_z1",
        t[T::RcvZ1], t[T::JRcvZ1] + t[T::RateCross]);
    gap("rcv_z2", asym ? "jrcv_z2_c2" : "jrcv_z2",
        t[T::RcvZ2], t[T::JRcvZ2] + t[T::RateCross]);

    const InequalitySystem ind2 = project_to_quantizer_rates(stepwise_system(t));
    const InequalitySystem jnt2 = project_to_quantizer_rates(joint_decoding_system(t, reading));

    ContainmentReport& cr = mc.containment;
    const Rational e1 = axis_extent(ind2, "Rh1");
    const Rational e2 = axis_extent(ind2, "Rh2");
    cr.extent1 = e1.to_double();
    cr.extent2 = e2.to_double();

    const int n = cr.grid;
    std::vector<Rational> point(2);
    for (int i = 0; i < n && !cr.has_counterexample; ++i) {
        for (int j = 0; j < n; ++j) {
            point[0] = e1 * Rational(BigInt(i), BigInt(n - 1));
            point[1] = e2 * Rational(BigInt(j), BigInt(n - 1));
            if (!ind2.feasible_at(point)) continue;
            if (jnt2.feasible_at(point)) continue;
            cr.has_counterexample = true;
            cr.contains = false;
            cr.ce1 = point[0].to_double();
            cr.ce2 = point[1].to_double();
            for (const auto& row : jnt2.rows) {
                if (!row.satisfied_at(point)) {
                    cr.violated_row = jnt2.row_to_string(row);
                    break;
                }
            }
            break;
        }
    }
    return mc;
}

ModeComparison compare_modes(const NetworkDist& dist, Reading reading) {
    return compare_modes(info_vector(dist), reading);
}

} // namespace tworelay
