#pragma once
// Exact rational linear inequality systems and Fourier-Motzkin elimination.
//
// Numeric constants entering a system are rationalized by rounding to a fixed
// denominator (1e12), after which every operation is exact. Strict rows are
// tracked by flag; feasibility questions treat a strict row as closed with a
// 1e-12 margin so that degenerate zero-rate constructions (where both sides
// vanish identically) count as feasible.

#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace tworelay {

using BigInt = boost::multiprecision::cpp_int;

class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}          // NOLINT(google-explicit-constructor)
    Rational(BigInt n, BigInt d);

    // round(x * denom) / denom; denom defaults to 1e12.
    static Rational from_double(double x, long long denom = 1000000000000LL);

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }
    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ == 0 ? 0 : (num_ < 0 ? -1 : 1); }

    Rational operator-() const;
    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const { return num_ * o.den_ < o.num_ * den_; }
    bool operator<=(const Rational& o) const { return num_ * o.den_ <= o.num_ * den_; }
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator>=(const Rational& o) const { return o <= *this; }

    double to_double() const;
    std::string to_string() const;

private:
    void normalize();
    BigInt num_, den_;  // den_ > 0, gcd(num_, den_) == 1
};

// Margin used when deciding feasibility of strict rows on rational data.
const Rational& rational_margin();  // 1e-12

enum class Relation { LE, GE };

// coeffs . x  (<= or >=)  bound, over the owning system's variable list.
struct LinearInequality {
    std::vector<Rational> coeffs;
    Relation rel = Relation::LE;
    Rational bound;
    bool strict = false;
    std::string source;                // short row id, e.g. "snd_z1"
    std::vector<std::string> origins;  // ids of the original rows this derives from

    // Coefficient / bound with the relation normalized to <=.
    Rational le_coeff(std::size_t i) const { return rel == Relation::LE ? coeffs[i] : -coeffs[i]; }
    Rational le_bound() const { return rel == Relation::LE ? bound : -bound; }
    bool is_constant() const;
    // Satisfied at a point (strict rows get the rational margin of slack).
    bool satisfied_at(const std::vector<Rational>& point) const;
};

struct InequalitySystem {
    std::vector<std::string> vars;
    std::vector<LinearInequality> rows;
    std::vector<std::string> notes;  // system-level provenance remarks

    int var_index(const std::string& name) const;
    // Add a row given sparse {var -> coeff} terms. Origins default to {source}.
    void add(const std::vector<std::pair<std::string, Rational>>& terms,
             Relation rel, const Rational& bound, bool strict, const std::string& source);
    bool feasible_at(const std::vector<Rational>& point) const;
    std::string row_to_string(const LinearInequality& row) const;
    std::string to_string() const;
};

// Eliminate one variable: combine every lower bound with every upper bound,
// pass the rest through, then prune rows with identical coefficient vectors
// (keeping the tightest bound; a strict row beats a closed one at equal
// bound). Constant rows that are satisfied under the margin are dropped;
// contradictory ones are kept so projections can report infeasibility.
InequalitySystem eliminate(const InequalitySystem& system, const std::string& var);

struct ProjectionResult {
    bool feasible = false;
    bool unbounded = false;     // no upper bound on the objective variable
    Rational max_value;         // meaningful when feasible && !unbounded
    InequalitySystem reduced;   // final single-variable system
    std::vector<LinearInequality> contradictions;  // constant rows that failed
};

// Eliminate every variable except `objective` (in the system's variable
// order) and read off the maximum of the objective.
ProjectionResult project_max(const InequalitySystem& system, const std::string& objective);

// Interval [lo, hi] that `var` may take when the other coordinates are fixed
// as in `point` (point[var] is ignored). Unbounded ends are empty optionals.
// Used to check that projected points extend to the original system.
struct VarInterval {
    std::optional<Rational> lo, hi;
    bool empty_under_margin() const;
};
VarInterval var_interval_at(const InequalitySystem& system, const std::string& var,
                            const std::vector<Rational>& point);

} // namespace tworelay
