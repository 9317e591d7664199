#include "tworelay/info.hpp"

#include <algorithm>
#include <cmath>

namespace tworelay {

namespace {

double entropy_of(const JointPmf& m) {
    double h = 0.0;
    for (std::size_t i = 0; i < m.cells(); ++i) {
        const double p = m[i];
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

void check_disjoint(const VarGroup& a, const VarGroup& b, const char* what) {
    for (Var v : a)
        if (std::find(b.begin(), b.end(), v) != b.end())
            throw MeasureError(std::string("mutual_info: overlapping groups (") + what +
                               " share " + var_name(v) + ")");
}

VarGroup unite(const VarGroup& a, const VarGroup& b) {
    VarGroup u = a;
    u.insert(u.end(), b.begin(), b.end());
    return u;
}

} // namespace

double entropy(const JointPmf& joint, const VarGroup& group) {
    return entropy_of(joint.marginal(group));
}

double mutual_info(const JointPmf& joint, const VarGroup& a, const VarGroup& b,
                   const VarGroup& given) {
    if (a.empty() || b.empty())
        throw MeasureError("mutual_info: empty variable group");
    check_disjoint(a, b, "a/b");
    check_disjoint(a, given, "a/given");
    check_disjoint(b, given, "b/given");

    const double hag = entropy(joint, unite(a, given));
    const double hbg = entropy(joint, unite(b, given));
    const double habg = entropy(joint, unite(unite(a, b), given));
    const double hg = given.empty() ? 0.0 : entropy(joint, given);

    double mi = hag + hbg - habg - hg;
    if (mi < 0.0) {
        if (mi < -kMeasureClamp)
            throw MeasureError("mutual_info: negative value " + std::to_string(mi) +
                               " exceeds rounding clamp");
        mi = 0.0;
    }
    return mi;
}

} // namespace tworelay
