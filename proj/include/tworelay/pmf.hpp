#pragma once
// Probability mass functions over the ten network variables.
//
// Variable order is fixed everywhere: v1, v2, x0, x1, x2, y1, y2, yh1, yh2, y0.
// Dense tables are row-major in that order (restricted to the variables a
// table actually covers). All probabilities are plain doubles; exactness where
// it matters (polyhedral work) lives in fme.hpp instead.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tworelay {

enum class Var : int { V1 = 0, V2, X0, X1, X2, Y1, Y2, Yh1, Yh2, Y0 };
inline constexpr int kNumVars = 10;

const char* var_name(Var v);
Var var_from_name(const std::string& name);

// Thrown when table dimensions or variable sets do not line up.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AlphabetSizes {
    std::array<int, kNumVars> size{};
    int operator[](Var v) const { return size[static_cast<int>(v)]; }
    int& operator[](Var v) { return size[static_cast<int>(v)]; }
    // Total cell count of the full joint (guards against absurd requests).
    std::size_t joint_cells() const;
};

// Conditional table p(out_vars | given_vars). A marginal/unconditional table
// is simply one with no given_vars. Entries are stored row-major: the given
// tuple picks a row, the out tuple picks the entry within the row.
class ConditionalTable {
public:
    ConditionalTable() = default;
    ConditionalTable(std::string name,
                     std::vector<Var> out_vars, std::vector<int> out_sizes,
                     std::vector<Var> given_vars, std::vector<int> given_sizes);

    static ConditionalTable uniform(std::string name,
                                    std::vector<Var> out_vars, std::vector<int> out_sizes,
                                    std::vector<Var> given_vars, std::vector<int> given_sizes);
    // Point mass on out index 0 in every row.
    static ConditionalTable point_mass(std::string name,
                                       std::vector<Var> out_vars, std::vector<int> out_sizes,
                                       std::vector<Var> given_vars, std::vector<int> given_sizes);

    const std::string& name() const { return name_; }
    const std::vector<Var>& out_vars() const { return out_vars_; }
    const std::vector<Var>& given_vars() const { return given_vars_; }
    const std::vector<int>& out_sizes() const { return out_sizes_; }
    const std::vector<int>& given_sizes() const { return given_sizes_; }
    std::size_t row_size() const { return row_size_; }
    std::size_t num_rows() const { return num_rows_; }

    double& entry(std::size_t row, std::size_t out) { return data_[row * row_size_ + out]; }
    double entry(std::size_t row, std::size_t out) const { return data_[row * row_size_ + out]; }
    const std::vector<double>& row(std::size_t r, std::vector<double>& scratch) const;
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    std::size_t row_index(const std::vector<int>& given_idx) const;
    std::size_t out_index(const std::vector<int>& out_idx) const;
    // Human-readable coordinates of a row, e.g. "y1=0,x1=1,v1=0".
    std::string row_label(std::size_t row) const;

private:
    std::string name_;
    std::vector<Var> out_vars_, given_vars_;
    std::vector<int> out_sizes_, given_sizes_;
    std::size_t row_size_ = 1, num_rows_ = 1;
    std::vector<double> data_;
};

// Dense joint pmf over a subset of the network variables, kept in canonical
// variable order.
class JointPmf {
public:
    JointPmf() = default;
    JointPmf(std::vector<Var> vars, std::vector<int> sizes);

    const std::vector<Var>& vars() const { return vars_; }
    const std::vector<int>& sizes() const { return sizes_; }
    std::size_t cells() const { return p_.size(); }
    double& operator[](std::size_t flat) { return p_[flat]; }
    double operator[](std::size_t flat) const { return p_[flat]; }
    const std::vector<double>& data() const { return p_; }
    std::vector<double>& data() { return p_; }

    std::size_t flat_index(const std::vector<int>& idx) const;
    void unflatten(std::size_t flat, std::vector<int>& idx) const;
    // Position of variable v in vars(), or -1.
    int var_pos(Var v) const;

    double total_mass() const;
    // Marginal over `keep` (any order; result is in canonical order).
    JointPmf marginal(const std::vector<Var>& keep) const;

private:
    std::vector<Var> vars_;
    std::vector<int> sizes_;
    std::vector<std::size_t> strides_;
    std::vector<double> p_;
};

// The factored network input: auxiliaries, codeword symbols, channel, and the
// two per-relay quantizers. The joint law is the product
//   p(v1) p(v2) p(x1|v1) p(x2|v2) p(x0|v1,v2)
//   * p(y0,y1,y2|x0,x1,x2) * p(yh1|y1,x1,v1) * p(yh2|y2,x2,v2).
struct NetworkDist {
    AlphabetSizes alpha;
    ConditionalTable p_v1;      // out {v1}
    ConditionalTable p_v2;      // out {v2}
    ConditionalTable p_x1;      // out {x1},         given {v1}
    ConditionalTable p_x2;      // out {x2},         given {v2}
    ConditionalTable p_x0;      // out {x0},         given {v1, v2}
    ConditionalTable channel;   // out {y0, y1, y2}, given {x0, x1, x2}
    ConditionalTable q1;        // out {yh1},        given {y1, x1, v1}
    ConditionalTable q2;        // out {yh2},        given {y2, x2, v2}

    // All eight tables with expected shapes for the given alphabets, filled
    // with uniform rows (a valid starting point for optimization).
    static NetworkDist uniform(const AlphabetSizes& alpha);
};

struct Violation {
    std::string table;     // which factor
    std::string location;  // row coordinates or shape description
    std::string kind;      // "row_sum", "negative_entry", "shape"
    double value = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Row-stochasticity check for all eight factors: rows sum to 1 within 1e-9,
// entries nonnegative, shapes consistent with dist.alpha.
ValidationReport validate(const NetworkDist& dist);

// Multiply the factors into the full ten-variable joint (canonical order).
// Throws ShapeError if validate() would report a shape violation.
JointPmf build_joint(const NetworkDist& dist);

// Conditional p(out | given) extracted from a joint. Rows with zero mass on
// the conditioning tuple fall back to uniform (they are never reachable when
// sampling from the same joint, but the table stays well-formed).
ConditionalTable make_conditional(const JointPmf& joint,
                                  const std::vector<Var>& out,
                                  const std::vector<Var>& given,
                                  const std::string& name = "conditional");

inline constexpr double kRowSumTolerance = 1e-9;

} // namespace tworelay
