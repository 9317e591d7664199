#pragma once
// Shannon entropy and (conditional) mutual information in bits, computed from
// dense joint pmfs by marginalization. Values are clamped at zero when float
// rounding leaves them within 1e-12 below it; anything more negative raises,
// since it indicates an inconsistent input rather than rounding.

#include <vector>

#include "tworelay/pmf.hpp"

namespace tworelay {

using VarGroup = std::vector<Var>;

// Thrown when a computed quantity is impossibly negative or when variable
// groups passed to mutual_info overlap.
struct MeasureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kMeasureClamp = 1e-12;

// H(group) in bits. Zero-probability cells contribute zero.
double entropy(const JointPmf& joint, const VarGroup& group);

// I(a ; b | given) in bits via H(a,g) + H(b,g) - H(a,b,g) - H(g).
// The three groups must be pairwise disjoint and present in the joint.
double mutual_info(const JointPmf& joint, const VarGroup& a, const VarGroup& b,
                   const VarGroup& given = {});

} // namespace tworelay
