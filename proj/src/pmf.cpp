#include "tworelay/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tworelay {

namespace {
constexpr const char* kVarNames[kNumVars] = {
    "v1", "v2", "x0", "x1", "x2", "y1", "y2", "yh1", "yh2", "y0"};
constexpr std::size_t kMaxJointCells = std::size_t{1} << 26;
} // namespace

const char* var_name(Var v) { return kVarNames[static_cast<int>(v)]; }

Var var_from_name(const std::string& name) {
    for (int i = 0; i < kNumVars; ++i)
        if (name == kVarNames[i]) return static_cast<Var>(i);
    throw ShapeError("unknown variable name: " + name);
}

std::size_t AlphabetSizes::joint_cells() const {
    std::size_t total = 1;
    for (int s : size) {
        if (s <= 0) throw ShapeError("alphabet sizes must be positive");
        total *= static_cast<std::size_t>(s);
    }
    return total;
}

ConditionalTable::ConditionalTable(std::string name,
                                   std::vector<Var> out_vars, std::vector<int> out_sizes,
                                   std::vector<Var> given_vars, std::vector<int> given_sizes)
    : name_(std::move(name)),
      out_vars_(std::move(out_vars)), given_vars_(std::move(given_vars)),
      out_sizes_(std::move(out_sizes)), given_sizes_(std::move(given_sizes)) {
    if (out_vars_.size() != out_sizes_.size() || given_vars_.size() != given_sizes_.size())
        throw ShapeError(name_ + ": variable/size lists disagree");
    for (int s : out_sizes_)
        if (s <= 0) throw ShapeError(name_ + ": nonpositive output size");
    for (int s : given_sizes_)
        if (s <= 0) throw ShapeError(name_ + ": nonpositive conditioning size");
    row_size_ = 1;
    for (int s : out_sizes_) row_size_ *= static_cast<std::size_t>(s);
    num_rows_ = 1;
    for (int s : given_sizes_) num_rows_ *= static_cast<std::size_t>(s);
    data_.assign(row_size_ * num_rows_, 0.0);
}

ConditionalTable ConditionalTable::uniform(std::string name,
                                           std::vector<Var> out_vars, std::vector<int> out_sizes,
                                           std::vector<Var> given_vars, std::vector<int> given_sizes) {
    ConditionalTable t(std::move(name), std::move(out_vars), std::move(out_sizes),
                       std::move(given_vars), std::move(given_sizes));
    const double u = 1.0 / static_cast<double>(t.row_size_);
    std::fill(t.data_.begin(), t.data_.end(), u);
    return t;
}

ConditionalTable ConditionalTable::point_mass(std::string name,
                                              std::vector<Var> out_vars, std::vector<int> out_sizes,
                                              std::vector<Var> given_vars, std::vector<int> given_sizes) {
    ConditionalTable t(std::move(name), std::move(out_vars), std::move(out_sizes),
                       std::move(given_vars), std::move(given_sizes));
    for (std::size_t r = 0; r < t.num_rows_; ++r) t.entry(r, 0) = 1.0;
    return t;
}

const std::vector<double>& ConditionalTable::row(std::size_t r, std::vector<double>& scratch) const {
    scratch.assign(data_.begin() + r * row_size_, data_.begin() + (r + 1) * row_size_);
    return scratch;
}

std::size_t ConditionalTable::row_index(const std::vector<int>& given_idx) const {
    if (given_idx.size() != given_vars_.size())
        throw ShapeError(name_ + ": conditioning index arity mismatch");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < given_idx.size(); ++i) {
        if (given_idx[i] < 0 || given_idx[i] >= given_sizes_[i])
            throw ShapeError(name_ + ": conditioning index out of range");
        flat = flat * static_cast<std::size_t>(given_sizes_[i]) + static_cast<std::size_t>(given_idx[i]);
    }
    return flat;
}

std::size_t ConditionalTable::out_index(const std::vector<int>& out_idx) const {
    if (out_idx.size() != out_vars_.size())
        throw ShapeError(name_ + ": output index arity mismatch");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < out_idx.size(); ++i) {
        if (out_idx[i] < 0 || out_idx[i] >= out_sizes_[i])
            throw ShapeError(name_ + ": output index out of range");
        flat = flat * static_cast<std::size_t>(out_sizes_[i]) + static_cast<std::size_t>(out_idx[i]);
    }
    return flat;
}

std::string ConditionalTable::row_label(std::size_t row) const {
    if (given_vars_.empty()) return "(unconditional)";
    std::vector<int> idx(given_vars_.size());
    for (std::size_t i = given_vars_.size(); i-- > 0;) {
        idx[i] = static_cast<int>(row % static_cast<std::size_t>(given_sizes_[i]));
        row /= static_cast<std::size_t>(given_sizes_[i]);
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < given_vars_.size(); ++i) {
        if (i) os << ",";
        os << var_name(given_vars_[i]) << "=" << idx[i];
    }
    return os.str();
}

JointPmf::JointPmf(std::vector<Var> vars, std::vector<int> sizes)
    : vars_(std::move(vars)), sizes_(std::move(sizes)) {
    if (vars_.size() != sizes_.size())
        throw ShapeError("JointPmf: variable/size lists disagree");
    for (std::size_t i = 1; i < vars_.size(); ++i)
        if (static_cast<int>(vars_[i - 1]) >= static_cast<int>(vars_[i]))
            throw ShapeError("JointPmf: variables must be strictly in canonical order");
    std::size_t total = 1;
    for (int s : sizes_) {
        if (s <= 0) throw ShapeError("JointPmf: nonpositive size");
        total *= static_cast<std::size_t>(s);
        if (total > kMaxJointCells) throw ShapeError("JointPmf: table too large");
    }
    strides_.assign(vars_.size(), 1);
    for (std::size_t i = vars_.size(); i-- > 1;)
        strides_[i - 1] = strides_[i] * static_cast<std::size_t>(sizes_[i]);
    p_.assign(total, 0.0);
}

std::size_t JointPmf::flat_index(const std::vector<int>& idx) const {
    if (idx.size() != vars_.size()) throw ShapeError("JointPmf: index arity mismatch");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= sizes_[i]) throw ShapeError("JointPmf: index out of range");
        flat += strides_[i] * static_cast<std::size_t>(idx[i]);
    }
    return flat;
}

void JointPmf::unflatten(std::size_t flat, std::vector<int>& idx) const {
    idx.resize(vars_.size());
    for (std::size_t i = vars_.size(); i-- > 0;) {
        idx[i] = static_cast<int>(flat % static_cast<std::size_t>(sizes_[i]));
        flat /= static_cast<std::size_t>(sizes_[i]);
    }
}

int JointPmf::var_pos(Var v) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == v) return static_cast<int>(i);
    return -1;
}

double JointPmf::total_mass() const {
    return std::accumulate(p_.begin(), p_.end(), 0.0);
}

JointPmf JointPmf::marginal(const std::vector<Var>& keep) const {
    std::vector<Var> kv;
    std::vector<int> ks;
    std::vector<std::size_t> kpos;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (std::find(keep.begin(), keep.end(), vars_[i]) != keep.end()) {
            kv.push_back(vars_[i]);
            ks.push_back(sizes_[i]);
            kpos.push_back(i);
        }
    }
    if (kv.size() != keep.size())
        throw ShapeError("marginal: requested variable not present in joint");
    JointPmf out(kv, ks);
    std::vector<int> idx;
    for (std::size_t flat = 0; flat < p_.size(); ++flat) {
        if (p_[flat] == 0.0) continue;
        unflatten(flat, idx);
        std::size_t oflat = 0;
        for (std::size_t j = 0; j < kpos.size(); ++j)
            oflat = oflat * static_cast<std::size_t>(ks[j]) + static_cast<std::size_t>(idx[kpos[j]]);
        out[oflat] += p_[flat];
    }
    return out;
}

NetworkDist NetworkDist::uniform(const AlphabetSizes& a) {
    NetworkDist d;
    d.alpha = a;
    d.p_v1 = ConditionalTable::uniform("p_v1", {Var::V1}, {a[Var::V1]}, {}, {});
    d.p_v2 = ConditionalTable::uniform("p_v2", {Var::V2}, {a[Var::V2]}, {}, {});
    d.p_x1 = ConditionalTable::uniform("p_x1_given_v1", {Var::X1}, {a[Var::X1]},
                                       {Var::V1}, {a[Var::V1]});
    d.p_x2 = ConditionalTable::uniform("p_x2_given_v2", {Var::X2}, {a[Var::X2]},
                                       {Var::V2}, {a[Var::V2]});
    d.p_x0 = ConditionalTable::uniform("p_x0_given_v1_v2", {Var::X0}, {a[Var::X0]},
                                       {Var::V1, Var::V2}, {a[Var::V1], a[Var::V2]});
    d.channel = ConditionalTable::uniform("channel", {Var::Y0, Var::Y1, Var::Y2},
                                          {a[Var::Y0], a[Var::Y1], a[Var::Y2]},
                                          {Var::X0, Var::X1, Var::X2},
                                          {a[Var::X0], a[Var::X1], a[Var::X2]});
    d.q1 = ConditionalTable::uniform("q1", {Var::Yh1}, {a[Var::Yh1]},
                                     {Var::Y1, Var::X1, Var::V1},
                                     {a[Var::Y1], a[Var::X1], a[Var::V1]});
    d.q2 = ConditionalTable::uniform("q2", {Var::Yh2}, {a[Var::Yh2]},
                                     {Var::Y2, Var::X2, Var::V2},
                                     {a[Var::Y2], a[Var::X2], a[Var::V2]});
    return d;
}

std::string ValidationReport::to_string() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (const auto& v : violations) {
        os << v.table << " [" << v.location << "]: " << v.kind
           << " (value " << v.value << ")\n";
    }
    return os.str();
}

namespace {

void check_shape(const ConditionalTable& t, const AlphabetSizes& a,
                 std::vector<Violation>& out) {
    for (std::size_t i = 0; i < t.out_vars().size(); ++i) {
        if (t.out_sizes()[i] != a[t.out_vars()[i]]) {
            out.push_back({t.name(), std::string(var_name(t.out_vars()[i])), "shape",
                           static_cast<double>(t.out_sizes()[i])});
        }
    }
    for (std::size_t i = 0; i < t.given_vars().size(); ++i) {
        if (t.given_sizes()[i] != a[t.given_vars()[i]]) {
            out.push_back({t.name(), std::string(var_name(t.given_vars()[i])), "shape",
                           static_cast<double>(t.given_sizes()[i])});
        }
    }
}

void check_rows(const ConditionalTable& t, std::vector<Violation>& out) {
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        double sum = 0.0;
        for (std::size_t o = 0; o < t.row_size(); ++o) {
            double p = t.entry(r, o);
            if (p < 0.0)
                out.push_back({t.name(), t.row_label(r), "negative_entry", p});
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance)
            out.push_back({t.name(), t.row_label(r), "row_sum", sum});
    }
}

const ConditionalTable* all_tables(const NetworkDist& d, int i) {
    switch (i) {
        case 0: return &d.p_v1;
        case 1: return &d.p_v2;
        case 2: return &d.p_x1;
        case 3: return &d.p_x2;
        case 4: return &d.p_x0;
        case 5: return &d.channel;
        case 6: return &d.q1;
        case 7: return &d.q2;
    }
    return nullptr;
}

} // namespace

ValidationReport validate(const NetworkDist& dist) {
    ValidationReport rep;
    for (int i = 0; i < 8; ++i) {
        const ConditionalTable* t = all_tables(dist, i);
        check_shape(*t, dist.alpha, rep.violations);
    }
    // Row checks only make sense on well-shaped tables.
    if (rep.violations.empty())
        for (int i = 0; i < 8; ++i) check_rows(*all_tables(dist, i), rep.violations);
    return rep;
}

JointPmf build_joint(const NetworkDist& dist) {
    const AlphabetSizes& a = dist.alpha;
    {
        ValidationReport rep;
        for (int i = 0; i < 8; ++i) check_shape(*all_tables(dist, i), a, rep.violations);
        if (!rep.ok()) throw ShapeError("build_joint: " + rep.to_string());
    }
    std::vector<Var> vars;
    std::vector<int> sizes;
    for (int i = 0; i < kNumVars; ++i) {
        vars.push_back(static_cast<Var>(i));
        sizes.push_back(a.size[static_cast<std::size_t>(i)]);
    }
    JointPmf joint(vars, sizes);

    const int nv1 = a[Var::V1], nv2 = a[Var::V2], nx0 = a[Var::X0];
    const int nx1 = a[Var::X1], nx2 = a[Var::X2];
    const int ny1 = a[Var::Y1], ny2 = a[Var::Y2];
    const int nh1 = a[Var::Yh1], nh2 = a[Var::Yh2], ny0 = a[Var::Y0];

    std::vector<int> idx(kNumVars);
    std::size_t flat = 0;
    for (int v1 = 0; v1 < nv1; ++v1)
    for (int v2 = 0; v2 < nv2; ++v2)
    for (int x0 = 0; x0 < nx0; ++x0)
    for (int x1 = 0; x1 < nx1; ++x1)
    for (int x2 = 0; x2 < nx2; ++x2) {
        const double p_inputs =
            dist.p_v1.entry(0, static_cast<std::size_t>(v1)) *
            dist.p_v2.entry(0, static_cast<std::size_t>(v2)) *
            dist.p_x1.entry(static_cast<std::size_t>(v1), static_cast<std::size_t>(x1)) *
            dist.p_x2.entry(static_cast<std::size_t>(v2), static_cast<std::size_t>(x2)) *
            dist.p_x0.entry(dist.p_x0.row_index({v1, v2}), static_cast<std::size_t>(x0));
        const std::size_t ch_row = dist.channel.row_index({x0, x1, x2});
        for (int y1 = 0; y1 < ny1; ++y1)
        for (int y2 = 0; y2 < ny2; ++y2)
        for (int yh1 = 0; yh1 < nh1; ++yh1)
        for (int yh2 = 0; yh2 < nh2; ++yh2) {
            const double pq =
                dist.q1.entry(dist.q1.row_index({y1, x1, v1}), static_cast<std::size_t>(yh1)) *
                dist.q2.entry(dist.q2.row_index({y2, x2, v2}), static_cast<std::size_t>(yh2));
            for (int y0 = 0; y0 < ny0; ++y0) {
                const double pch = dist.channel.entry(
                    ch_row, dist.channel.out_index({y0, y1, y2}));
                idx = {v1, v2, x0, x1, x2, y1, y2, yh1, yh2, y0};
                joint[joint.flat_index(idx)] = p_inputs * pch * pq;
                (void)flat;
            }
        }
    }
    return joint;
}

ConditionalTable make_conditional(const JointPmf& joint,
                                  const std::vector<Var>& out,
                                  const std::vector<Var>& given,
                                  const std::string& name) {
    std::vector<Var> all = out;
    all.insert(all.end(), given.begin(), given.end());
    std::sort(all.begin(), all.end());
    JointPmf sub = joint.marginal(all);

    std::vector<int> out_sizes, given_sizes;
    for (Var v : out) {
        int p = sub.var_pos(v);
        if (p < 0) throw ShapeError("make_conditional: output var missing");
        out_sizes.push_back(sub.sizes()[static_cast<std::size_t>(p)]);
    }
    for (Var v : given) {
        int p = sub.var_pos(v);
        if (p < 0) throw ShapeError("make_conditional: conditioning var missing");
        given_sizes.push_back(sub.sizes()[static_cast<std::size_t>(p)]);
    }
    ConditionalTable t(name, out, out_sizes, given, given_sizes);

    std::vector<int> idx, oidx(out.size()), gidx(given.size());
    for (std::size_t flat = 0; flat < sub.cells(); ++flat) {
        sub.unflatten(flat, idx);
        for (std::size_t i = 0; i < out.size(); ++i)
            oidx[i] = idx[static_cast<std::size_t>(sub.var_pos(out[i]))];
        for (std::size_t i = 0; i < given.size(); ++i)
            gidx[i] = idx[static_cast<std::size_t>(sub.var_pos(given[i]))];
        t.entry(t.row_index(gidx), t.out_index(oidx)) += sub[flat];
    }
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        double mass = 0.0;
        for (std::size_t o = 0; o < t.row_size(); ++o) mass += t.entry(r, o);
        if (mass > 0.0) {
            for (std::size_t o = 0; o < t.row_size(); ++o) t.entry(r, o) /= mass;
        } else {
            const double u = 1.0 / static_cast<double>(t.row_size());
            for (std::size_t o = 0; o < t.row_size(); ++o) t.entry(r, o) = u;
        }
    }
    return t;
}

} // namespace tworelay
