#include "tworelay/fme.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tworelay {

Rational::Rational(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) {
    if (den_ == 0) throw std::invalid_argument("Rational: zero denominator");
    normalize();
}

void Rational::normalize() {
    if (den_ < 0) { num_ = -num_; den_ = -den_; }
    if (num_ == 0) { den_ = 1; return; }
    BigInt g = boost::multiprecision::gcd(num_ < 0 ? BigInt(-num_) : num_, den_);
    if (g > 1) { num_ /= g; den_ /= g; }
}

Rational Rational::from_double(double x, long long denom) {
    if (!std::isfinite(x)) throw std::invalid_argument("Rational::from_double: non-finite");
    const double scaled = x * static_cast<double>(denom);
    if (std::abs(scaled) >= 9.0e18)
        throw std::invalid_argument("Rational::from_double: magnitude too large");
    return Rational(BigInt(std::llround(scaled)), BigInt(denom));
}

Rational Rational::operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

Rational Rational::operator+(const Rational& o) const {
    return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
    return Rational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
    return Rational(num_ * o.num_, den_ * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
    if (o.num_ == 0) throw std::invalid_argument("Rational: division by zero");
    return Rational(num_ * o.den_, den_ * o.num_);
}

double Rational::to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::to_string() const {
    std::ostringstream os;
    os << num_;
    if (den_ != 1) os << "/" << den_;
    return os.str();
}

const Rational& rational_margin() {
    static const Rational m(BigInt(1), BigInt(1000000000000LL));
    return m;
}

bool LinearInequality::is_constant() const {
    return std::all_of(coeffs.begin(), coeffs.end(),
                       [](const Rational& c) { return c.is_zero(); });
}

bool LinearInequality::satisfied_at(const std::vector<Rational>& point) const {
    Rational lhs;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (!coeffs[i].is_zero()) lhs += le_coeff(i) * point[i];
    }
    Rational slack = le_bound() - lhs;
    if (strict) slack += rational_margin();
    return slack.sign() >= 0;
}

int InequalitySystem::var_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == name) return static_cast<int>(i);
    return -1;
}

void InequalitySystem::add(const std::vector<std::pair<std::string, Rational>>& terms,
                           Relation rel, const Rational& bound, bool strict,
                           const std::string& source) {
    LinearInequality row;
    row.coeffs.assign(vars.size(), Rational());
    for (const auto& [name, c] : terms) {
        int idx = var_index(name);
        if (idx < 0) throw std::invalid_argument("InequalitySystem::add: unknown variable " + name);
        row.coeffs[static_cast<std::size_t>(idx)] += c;
    }
    row.rel = rel;
    row.bound = bound;
    row.strict = strict;
    row.source = source;
    row.origins = {source};
    rows.push_back(std::move(row));
}

bool InequalitySystem::feasible_at(const std::vector<Rational>& point) const {
    return std::all_of(rows.begin(), rows.end(),
                       [&](const LinearInequality& r) { return r.satisfied_at(point); });
}

std::string InequalitySystem::row_to_string(const LinearInequality& row) const {
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < row.coeffs.size(); ++i) {
        if (row.coeffs[i].is_zero()) continue;
        const Rational& c = row.coeffs[i];
        if (first) {
            if (c == Rational(-1)) os << "-";
            else if (c != Rational(1)) os << c.to_string() << "*";
        } else {
            os << (c.sign() < 0 ? " - " : " + ");
            Rational a = c.sign() < 0 ? -c : c;
            if (a != Rational(1)) os << a.to_string() << "*";
        }
        os << vars[i];
        first = false;
    }
    if (first) os << "0";
    os << (row.rel == Relation::LE ? (row.strict ? " < " : " <= ")
                                   : (row.strict ? " > " : " >= "));
    os << row.bound.to_string() << "  [" << row.source;
    if (row.origins.size() > 1 || (row.origins.size() == 1 && row.origins[0] != row.source)) {
        os << " from";
        for (const auto& o : row.origins) os << " " << o;
    }
    os << "]";
    return os.str();
}

std::string InequalitySystem::to_string() const {
    std::ostringstream os;
    for (const auto& note : notes) os << "# " << note << "\n";
    for (const auto& row : rows) os << row_to_string(row) << "\n";
    return os.str();
}

namespace {

std::vector<std::string> merge_origins(const std::vector<std::string>& a,
                                       const std::vector<std::string>& b) {
    std::vector<std::string> m = a;
    m.insert(m.end(), b.begin(), b.end());
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    return m;
}

// Satisfied constant rows are noise; contradictory ones must survive so the
// projection can point at them.
bool constant_row_satisfied(const LinearInequality& row) {
    Rational slack = row.le_bound();
    if (row.strict) slack += rational_margin();
    return slack.sign() >= 0;
}

void prune(std::vector<LinearInequality>& rows) {
    // Key rows by their exact coefficient vector; keep the tightest bound.
    std::map<std::string, std::size_t> best;
    std::vector<LinearInequality> kept;
    for (auto& row : rows) {
        if (row.is_constant() && constant_row_satisfied(row)) continue;
        std::ostringstream key;
        for (std::size_t i = 0; i < row.coeffs.size(); ++i) {
            const Rational c = row.le_coeff(i);
            if (!c.is_zero()) key << i << ":" << c.to_string() << ";";
        }
        auto it = best.find(key.str());
        if (it == best.end()) {
            best.emplace(key.str(), kept.size());
            kept.push_back(std::move(row));
            continue;
        }
        LinearInequality& cur = kept[it->second];
        const Rational rb = row.le_bound(), cb = cur.le_bound();
        const bool tighter = rb < cb || (rb == cb && row.strict && !cur.strict);
        if (tighter) cur = std::move(row);
    }
    rows = std::move(kept);
}

} // namespace

InequalitySystem eliminate(const InequalitySystem& system, const std::string& var) {
    const int target = system.var_index(var);
    if (target < 0)
        throw std::invalid_argument("eliminate: unknown variable " + var);
    const auto t = static_cast<std::size_t>(target);

    InequalitySystem out;
    out.notes = system.notes;
    for (std::size_t i = 0; i < system.vars.size(); ++i)
        if (i != t) out.vars.push_back(system.vars[i]);

    auto strip = [&](const LinearInequality& row, const Rational& scale) {
        // Row normalized to <= form, scaled, with the target column removed.
        LinearInequality r;
        r.rel = Relation::LE;
        r.strict = row.strict;
        r.source = row.source;
        r.origins = row.origins;
        r.coeffs.reserve(row.coeffs.size() - 1);
        for (std::size_t i = 0; i < row.coeffs.size(); ++i)
            if (i != t) r.coeffs.push_back(row.le_coeff(i) * scale);
        r.bound = row.le_bound() * scale;
        return r;
    };

    std::vector<LinearInequality> lowers, uppers;
    std::vector<LinearInequality> result;
    for (const auto& row : system.rows) {
        const Rational c = row.le_coeff(t);
        if (c.is_zero()) {
            result.push_back(strip(row, Rational(1)));
        } else if (c.sign() > 0) {
            uppers.push_back(strip(row, Rational(1) / c));   // x <= bound - rest
        } else {
            lowers.push_back(strip(row, Rational(-1) / c));  // x >= rest - bound (negated)
        }
    }
    for (const auto& lo : lowers) {
        for (const auto& up : uppers) {
            LinearInequality r;
            r.rel = Relation::LE;
            r.strict = lo.strict || up.strict;
            r.coeffs.resize(out.vars.size());
            for (std::size_t i = 0; i < out.vars.size(); ++i)
                r.coeffs[i] = lo.coeffs[i] + up.coeffs[i];
            r.bound = lo.bound + up.bound;
            r.source = "derived";
            r.origins = merge_origins(lo.origins, up.origins);
            result.push_back(std::move(r));
        }
    }
    prune(result);
    out.rows = std::move(result);
    return out;
}

ProjectionResult project_max(const InequalitySystem& system, const std::string& objective) {
    if (system.var_index(objective) < 0)
        throw std::invalid_argument("project_max: unknown objective " + objective);
    InequalitySystem cur = system;
    for (const auto& v : system.vars) {
        if (v == objective) continue;
        cur = eliminate(cur, v);
    }

    ProjectionResult res;
    res.reduced = cur;
    const int obj = cur.var_index(objective);
    const auto o = static_cast<std::size_t>(obj);

    std::optional<Rational> upper, lower;
    bool upper_strict = false;
    for (const auto& row : cur.rows) {
        if (row.is_constant()) {
            if (!constant_row_satisfied(row)) res.contradictions.push_back(row);
            continue;
        }
        const Rational c = row.le_coeff(o);
        const Rational v = row.le_bound() / c;
        if (c.sign() > 0) {
            if (!upper || v < *upper || (v == *upper && row.strict)) {
                upper = v;
                upper_strict = row.strict;
            }
        } else {
            if (!lower || v > *lower) lower = v;
        }
    }
    (void)upper_strict;  // strictness of the max is not distinguished by callers
    if (!res.contradictions.empty()) {
        res.feasible = false;
        return res;
    }
    if (lower && upper && *lower > *upper + rational_margin()) {
        res.feasible = false;
        return res;
    }
    res.feasible = true;
    if (upper) {
        res.max_value = *upper;
    } else {
        res.unbounded = true;
    }
    return res;
}

bool VarInterval::empty_under_margin() const {
    if (!lo || !hi) return false;
    return *lo > *hi + rational_margin();
}

VarInterval var_interval_at(const InequalitySystem& system, const std::string& var,
                            const std::vector<Rational>& point) {
    const int target = system.var_index(var);
    if (target < 0)
        throw std::invalid_argument("var_interval_at: unknown variable " + var);
    if (point.size() != system.vars.size())
        throw std::invalid_argument("var_interval_at: point arity mismatch");
    const auto t = static_cast<std::size_t>(target);

    VarInterval iv;
    for (const auto& row : system.rows) {
        const Rational c = row.le_coeff(t);
        if (c.is_zero()) continue;
        Rational rest;
        for (std::size_t i = 0; i < row.coeffs.size(); ++i)
            if (i != t && !row.coeffs[i].is_zero()) rest += row.le_coeff(i) * point[i];
        const Rational v = (row.le_bound() - rest) / c;
        if (c.sign() > 0) {
            if (!iv.hi || v < *iv.hi) iv.hi = v;
        } else {
            if (!iv.lo || v > *iv.lo) iv.lo = v;
        }
    }
    return iv;
}

} // namespace tworelay
