#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "tworelay/pmf.hpp"

using namespace tworelay;

namespace {

AlphabetSizes binary_alpha() {
    AlphabetSizes a;
    for (int i = 0; i < kNumVars; ++i) a[static_cast<Var>(i)] = 2;
    return a;
}

} // namespace

TEST_CASE("variable names round-trip") {
    for (int i = 0; i < kNumVars; ++i) {
        const Var v = static_cast<Var>(i);
        CHECK(var_from_name(var_name(v)) == v);
    }
    CHECK_THROWS_AS(var_from_name("nope"), ShapeError);
    CHECK_THROWS_AS(var_from_name(""), ShapeError);
}

TEST_CASE("alphabet joint cell counting") {
    AlphabetSizes a = binary_alpha();
    CHECK(a.joint_cells() == 1024);
    a[Var::Yh1] = 3;
    CHECK(a.joint_cells() == 1536);
    a[Var::X0] = 0;
    CHECK_THROWS_AS(a.joint_cells(), ShapeError);
}

TEST_CASE("conditional table indexing and labels") {
    ConditionalTable t("q1", {Var::Yh1}, {2}, {Var::Y1, Var::X1, Var::V1}, {2, 2, 2});
    CHECK(t.num_rows() == 8);
    CHECK(t.row_size() == 2);
    // Row-major over the given tuple (y1, x1, v1).
    CHECK(t.row_index({0, 0, 0}) == 0);
    CHECK(t.row_index({0, 0, 1}) == 1);
    CHECK(t.row_index({1, 0, 0}) == 4);
    CHECK(t.row_label(t.row_index({1, 0, 1})) == "y1=1,x1=0,v1=1");
    CHECK_THROWS_AS(t.row_index({0, 0}), ShapeError);
    CHECK_THROWS_AS(t.row_index({0, 0, 2}), ShapeError);

    const auto u = ConditionalTable::uniform("u", {Var::Yh1}, {4}, {}, {});
    CHECK(u.num_rows() == 1);
    for (std::size_t o = 0; o < 4; ++o) CHECK(u.entry(0, o) == doctest::Approx(0.25));

    const auto pm = ConditionalTable::point_mass("pm", {Var::X0}, {3}, {Var::V1}, {2});
    for (std::size_t r = 0; r < 2; ++r) {
        CHECK(pm.entry(r, 0) == 1.0);
        CHECK(pm.entry(r, 1) == 0.0);
        CHECK(pm.entry(r, 2) == 0.0);
    }
}

TEST_CASE("validate flags shape, row-sum, and negativity problems") {
    const AlphabetSizes a = binary_alpha();
    NetworkDist d = NetworkDist::uniform(a);
    CHECK(validate(d).ok());

    SUBCASE("row sum off") {
        d.p_x1.entry(0, 0) = 0.7;
        d.p_x1.entry(0, 1) = 0.7;
        const auto rep = validate(d);
        REQUIRE_FALSE(rep.ok());
        CHECK(rep.violations[0].table == "p_x1_given_v1");
        CHECK(rep.violations[0].kind == "row_sum");
        CHECK(rep.to_string().find("p_x1_given_v1") != std::string::npos);
    }
    SUBCASE("negative entry") {
        d.q2.entry(1, 0) = -0.25;
        d.q2.entry(1, 1) = 1.25;
        const auto rep = validate(d);
        REQUIRE_FALSE(rep.ok());
        bool saw_negative = false;
        for (const auto& v : rep.violations) saw_negative |= (v.kind == "negative_entry");
        CHECK(saw_negative);
    }
    SUBCASE("shape mismatch") {
        d.p_v1 = ConditionalTable::uniform("p_v1", {Var::V1}, {3}, {}, {});
        const auto rep = validate(d);
        REQUIRE_FALSE(rep.ok());
        CHECK(rep.violations[0].kind == "shape");
        // A shape violation must not be accompanied by bogus row reports.
        for (const auto& v : rep.violations) CHECK(v.kind == "shape");
    }
}

TEST_CASE("build_joint multiplies the factors") {
    AlphabetSizes a = binary_alpha();
    const NetworkDist d = oracles::random_factored_dist(a, 5);
    const JointPmf joint = build_joint(d);
    CHECK(joint.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(joint.vars().size() == 10);
    CHECK(joint.cells() == 1024);

    // Hand-multiply one cell: (v1,v2,x0,x1,x2,y1,y2,yh1,yh2,y0).
    const std::vector<int> cell = {1, 0, 1, 0, 1, 1, 0, 0, 1, 1};
    const double expected =
        d.p_v1.entry(0, 1) * d.p_v2.entry(0, 0) *
        d.p_x1.entry(d.p_x1.row_index({1}), 0) *
        d.p_x2.entry(d.p_x2.row_index({0}), 1) *
        d.p_x0.entry(d.p_x0.row_index({1, 0}), 1) *
        d.channel.entry(d.channel.row_index({1, 0, 1}),
                        d.channel.out_index({1, 1, 0})) *
        d.q1.entry(d.q1.row_index({1, 0, 1}), 0) *
        d.q2.entry(d.q2.row_index({0, 1, 0}), 1);
    CHECK(joint[joint.flat_index(cell)] == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("build_joint rejects bad shapes") {
    const AlphabetSizes a = binary_alpha();
    NetworkDist d = NetworkDist::uniform(a);
    d.q1 = ConditionalTable::uniform("q1", {Var::Yh1}, {3}, {Var::Y1, Var::X1, Var::V1},
                                     {2, 2, 2});
    CHECK_THROWS_AS(build_joint(d), ShapeError);
}

TEST_CASE("joint size guard") {
    AlphabetSizes a = binary_alpha();
    for (int i = 0; i < kNumVars; ++i) a[static_cast<Var>(i)] = 7;  // 7^10 cells
    const NetworkDist d = NetworkDist::uniform(a);
    CHECK_THROWS_AS(build_joint(d), ShapeError);
}

TEST_CASE("marginal sums out the right variables") {
    const AlphabetSizes a = binary_alpha();
    const NetworkDist d = oracles::random_factored_dist(a, 9);
    const JointPmf joint = build_joint(d);

    const JointPmf m = joint.marginal({Var::X0, Var::Y0});
    CHECK(m.vars() == std::vector<Var>{Var::X0, Var::Y0});
    CHECK(m.total_mass() == doctest::Approx(1.0).epsilon(1e-12));

    // Marginal requested in non-canonical order lands in canonical order.
    const JointPmf m2 = joint.marginal({Var::Y0, Var::X0});
    CHECK(m2.vars() == m.vars());
    for (std::size_t i = 0; i < m.cells(); ++i) CHECK(m2[i] == doctest::Approx(m[i]));

    // p(x0) from the two-variable marginal equals p(x0) from the joint.
    const JointPmf px = joint.marginal({Var::X0});
    const JointPmf px2 = m.marginal({Var::X0});
    for (std::size_t i = 0; i < px.cells(); ++i)
        CHECK(px[i] == doctest::Approx(px2[i]).epsilon(1e-12));
}

TEST_CASE("flat index round trip and var order enforcement") {
    JointPmf j({Var::V1, Var::X0, Var::Y0}, {2, 3, 2});
    std::vector<int> idx(3);
    for (std::size_t flat = 0; flat < j.cells(); ++flat) {
        j.unflatten(flat, idx);
        CHECK(j.flat_index(idx) == flat);
    }
    CHECK(j.var_pos(Var::X0) == 1);
    CHECK(j.var_pos(Var::Yh1) == -1);
    CHECK_THROWS_AS(JointPmf({Var::X0, Var::V1}, {2, 2}), ShapeError);
    CHECK_THROWS_AS(JointPmf({Var::X0, Var::X0}, {2, 2}), ShapeError);
}

TEST_CASE("make_conditional recovers factors and handles zero rows") {
    const AlphabetSizes a = binary_alpha();
    const NetworkDist d = oracles::random_factored_dist(a, 13);
    const JointPmf joint = build_joint(d);

    const ConditionalTable px1 = make_conditional(joint, {Var::X1}, {Var::V1}, "px1");
    for (std::size_t r = 0; r < px1.num_rows(); ++r)
        for (std::size_t o = 0; o < px1.row_size(); ++o)
            CHECK(px1.entry(r, o) == doctest::Approx(d.p_x1.entry(r, o)).epsilon(1e-10));

    // Zero-mass conditioning row: make v1 = 1 impossible, then p(x1 | v1=1)
    // falls back to uniform.
    NetworkDist dz = d;
    dz.p_v1.entry(0, 0) = 1.0;
    dz.p_v1.entry(0, 1) = 0.0;
    const ConditionalTable pz = make_conditional(build_joint(dz), {Var::X1}, {Var::V1});
    CHECK(pz.entry(1, 0) == doctest::Approx(0.5));
    CHECK(pz.entry(1, 1) == doctest::Approx(0.5));
}
