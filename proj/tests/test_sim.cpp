#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include "support/oracles.hpp"
#include "tworelay/pmf.hpp"
#include "tworelay/rng.hpp"
#include "tworelay/sim.hpp"

using namespace tworelay;

namespace {

using Seq = std::vector<std::uint8_t>;

AlphabetSizes all_binary() {
    AlphabetSizes a;
    for (int i = 0; i < kNumVars; ++i) a[static_cast<Var>(i)] = 2;
    return a;
}

// Only the source and receiver symbols are non-degenerate.
AlphabetSizes direct_link_alpha() {
    AlphabetSizes a;
    for (int i = 0; i < kNumVars; ++i) a[static_cast<Var>(i)] = 1;
    a[Var::X0] = 2;
    a[Var::Y0] = 2;
    return a;
}

NetworkDist noiseless_copy_dist() {
    NetworkDist d = NetworkDist::uniform(direct_link_alpha());
    // y0 = x0 with certainty.
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            d.channel.entry(d.channel.row_index({x, 0, 0}),
                            d.channel.out_index({y, 0, 0})) = (x == y) ? 1.0 : 0.0;
    return d;
}

SimParams zero_budget_params() {
    SimParams p;
    p.k_msg = 0;
    p.k_s1 = p.k_s2 = 0;
    p.k_011 = p.k_012 = p.k_021 = p.k_022 = 0;
    p.k_h1 = p.k_h2 = 0;
    return p;
}

JointPmf single_var_ref(Var v, const std::vector<double>& probs) {
    JointPmf j({v}, {static_cast<int>(probs.size())});
    for (std::size_t i = 0; i < probs.size(); ++i) j.data()[i] = probs[i];
    return j;
}

} // namespace

TEST_CASE("robust typicality: single sequence counts") {
    const JointPmf fair = single_var_ref(Var::X0, {0.5, 0.5});
    const Seq balanced = {0, 1, 0, 1, 0, 1, 0, 1};
    const Seq lopsided = {0, 0, 0, 0, 0, 0, 1, 1};  // 6:2
    CHECK(is_jointly_typical({&balanced}, fair, 0.05));
    CHECK_FALSE(is_jointly_typical({&lopsided}, fair, 0.3));  // needs eps >= 0.5
    CHECK(is_jointly_typical({&lopsided}, fair, 0.6));

    const JointPmf skew = single_var_ref(Var::X0, {0.75, 0.25});
    const Seq matched = {0, 0, 0, 0, 0, 0, 1, 1};
    const Seq off = {0, 0, 0, 0, 0, 1, 1, 1};  // 5:3, needs eps >= 0.5
    CHECK(is_jointly_typical({&matched}, skew, 0.05));
    CHECK_FALSE(is_jointly_typical({&off}, skew, 0.4));
    CHECK(is_jointly_typical({&off}, skew, 0.6));
}

TEST_CASE("robust typicality: zero-probability cells are fatal") {
    const JointPmf point = single_var_ref(Var::X0, {1.0, 0.0});
    const Seq clean = {0, 0, 0, 0};
    const Seq dirty = {0, 0, 1, 0};
    CHECK(is_jointly_typical({&clean}, point, 0.1));
    CHECK_FALSE(is_jointly_typical({&dirty}, point, 0.99));

    // Pairwise: reference is the noiseless copy, a single flipped symbol lands
    // in a zero cell no matter how loose eps is.
    JointPmf copy({Var::X0, Var::Y0}, {2, 2});
    copy.data()[copy.flat_index({0, 0})] = 0.5;
    copy.data()[copy.flat_index({1, 1})] = 0.5;
    const Seq x = {0, 0, 0, 0, 1, 1, 1, 1};
    Seq y = x;
    CHECK(is_jointly_typical({&x, &y}, copy, 0.1));
    y[0] = 1;
    CHECK_FALSE(is_jointly_typical({&x, &y}, copy, 0.99));
}

TEST_CASE("parameter invariants") {
    SimParams ok;
    CHECK(ok.invariant_violations().empty());

    SimParams p = ok;
    p.k_011 = 2;
    p.k_s1 = 1;
    REQUIRE_FALSE(p.invariant_violations().empty());
    CHECK(p.invariant_violations()[0].find("k_011") != std::string::npos);

    p = ok;
    p.k_s1 = 3;
    p.k_h1 = 2;
    REQUIRE_FALSE(p.invariant_violations().empty());
    CHECK(p.invariant_violations()[0].find("k_s1") != std::string::npos);

    p = ok;
    p.epsilon = 1.5;
    REQUIRE_FALSE(p.invariant_violations().empty());
    CHECK(p.invariant_violations()[0].find("epsilon") != std::string::npos);

    p = ok;
    p.blocks = 1;
    CHECK_FALSE(p.invariant_violations().empty());

    p = ok;
    p.k_msg = 30;
    CHECK_FALSE(p.invariant_violations().empty());

    p = ok;
    p.max_codebook_symbols = 1;
    REQUIRE_FALSE(p.invariant_violations().empty());
    CHECK(p.invariant_violations()[0].find("memory guard") != std::string::npos);

    // Bad parameters are rejected at the entry points.
    const NetworkDist d = noiseless_copy_dist();
    SimParams bad = ok;
    bad.blocks = 0;
    CHECK_THROWS_AS(run_trial(d, bad, {}, 1), std::invalid_argument);
    // Wrong message count / out-of-range message.
    SimParams two = zero_budget_params();
    two.blocks = 3;
    CHECK_THROWS_AS(run_trial(d, two, {0, 0, 0}, 1), std::invalid_argument);
    SimParams one_bit = zero_budget_params();
    one_bit.k_msg = 1;
    one_bit.blocks = 2;
    CHECK_THROWS_AS(run_trial(d, one_bit, {7}, 1), std::invalid_argument);
}

TEST_CASE("stage and reason names are distinct") {
    std::set<std::string> names;
    for (int i = 0; i < kNumStages; ++i) {
        const std::string nm = stage_name(static_cast<Stage>(i));
        CHECK_FALSE(nm.empty());
        names.insert(nm);
    }
    CHECK(names.size() == static_cast<std::size_t>(kNumStages));
    CHECK(std::string(fail_reason_name(FailReason::NoCandidate)) != "");
    CHECK(std::string(fail_reason_name(FailReason::NotUnique)) != "");
    CHECK(std::string(fail_reason_name(FailReason::WrongValue)) != "");
}

TEST_CASE("simulation context exposes consistent references") {
    const NetworkDist d = oracles::random_factored_dist(all_binary(), 404);
    const SimContext ctx(d);
    for (int i = 0; i < kNumStages; ++i) {
        const JointPmf& ref = ctx.stage_reference(static_cast<Stage>(i));
        REQUIRE_FALSE(ref.vars().empty());
        CHECK(ref.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
    }
    // The quantizer codebook law is p(yh | x, v) from the joint.
    const JointPmf joint = build_joint(d);
    for (int relay = 1; relay <= 2; ++relay) {
        const ConditionalTable& law = ctx.quantizer_codebook_law(relay);
        const Var yh = relay == 1 ? Var::Yh1 : Var::Yh2;
        const Var x = relay == 1 ? Var::X1 : Var::X2;
        const Var v = relay == 1 ? Var::V1 : Var::V2;
        const ConditionalTable want =
            make_conditional(joint, {yh}, law.given_vars(), "want");
        REQUIRE(law.given_vars().size() == 2);
        CHECK((law.given_vars()[0] == x || law.given_vars()[0] == v));
        REQUIRE(law.data().size() == want.data().size());
        for (std::size_t i = 0; i < law.data().size(); ++i)
            CHECK(law.data()[i] == doctest::Approx(want.data()[i]).epsilon(1e-10));
    }
}

TEST_CASE("codebook families have the promised shapes") {
    const NetworkDist d = oracles::random_factored_dist(all_binary(), 505);
    const SimContext ctx(d);
    SimParams p;
    p.n = 6;
    p.k_msg = 1;
    p.k_s1 = 1, p.k_011 = 1, p.k_012 = 1, p.k_h1 = 2;
    p.k_s2 = 0, p.k_021 = 0, p.k_022 = 0, p.k_h2 = 1;
    REQUIRE(p.invariant_violations().empty());

    Rng rng(99);
    const Codebooks cb = generate_codebooks(ctx, p, rng);
    const std::size_t w01 = 4, w02 = 1;  // 2^(1+1), 2^(0+0)
    CHECK(cb.v1.size() == w01);
    CHECK(cb.v2.size() == w02);
    CHECK(cb.x1.size() == 2 * w01);       // 2^k_s1 * W01
    CHECK(cb.x2.size() == 1 * w02);
    CHECK(cb.x0.size() == 2 * w01 * w02); // 2^k_msg * W01 * W02
    CHECK(cb.yh1.size() == 4 * 2 * w01);  // 2^k_h1 * 2^k_s1 * W01
    CHECK(cb.yh2.size() == 2 * 1 * w02);
    for (const auto& fam : {cb.v1, cb.v2, cb.x1, cb.x2, cb.x0, cb.yh1, cb.yh2})
        for (const auto& seq : fam) {
            CHECK(seq.size() == 6);
            for (auto s : seq) CHECK(s < 2);
        }

    // Same stream, same books.
    Rng rng2(99);
    const Codebooks cb2 = generate_codebooks(ctx, p, rng2);
    CHECK(cb2.x0 == cb.x0);
    CHECK(cb2.yh1 == cb.yh1);
}

TEST_CASE("partitions label every quantization index") {
    SimParams p;
    p.k_s1 = 1, p.k_011 = 1, p.k_012 = 1, p.k_h1 = 2;
    p.k_s2 = 2, p.k_021 = 1, p.k_022 = 0, p.k_h2 = 3;
    REQUIRE(p.invariant_violations().empty());
    Rng rng(123);
    const Partitions pt = generate_partitions(p, rng);
    REQUIRE(pt.cell1.size() == 4);   // 2^k_h1
    REQUIRE(pt.sub1.size() == 4);
    REQUIRE(pt.cell2.size() == 8);   // 2^k_h2
    REQUIRE(pt.sub2.size() == 8);
    for (auto c : pt.cell1) CHECK(c < 2);  // 2^k_s1
    for (auto c : pt.sub1) CHECK(c < 2);   // 2^k_012
    for (auto c : pt.cell2) CHECK(c < 4);  // 2^k_s2
    for (auto c : pt.sub2) CHECK(c < 1);   // 2^k_022
    CHECK(pt.det_shift1 == 0);  // k_s1 - k_011
    CHECK(pt.det_shift2 == 1);  // k_s2 - k_021
    CHECK(pt.label1(1) == 1);
    CHECK(pt.label2(3) == 1);   // top bit of a 2-bit cell index
}

TEST_CASE("zero bit budgets decode perfectly") {
    const NetworkDist d = oracles::random_factored_dist(all_binary(), 616);
    SimParams p = zero_budget_params();
    p.n = 4;
    p.blocks = 3;
    p.trials = 20;
    p.seed = 5;
    const ErrorEstimate est = estimate_error(d, p);
    CHECK(est.trials == 20);
    CHECK(est.errors == 0);
    CHECK(est.p_hat == 0.0);
    CHECK(est.ci_lo == 0.0);
    CHECK(est.ci_hi == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 20)).epsilon(1e-12));
    CHECK(est.first_failure.empty());

    const TrialResult tr = run_trial(d, p, {0, 0}, 42);
    CHECK_FALSE(tr.message_error);
    CHECK(tr.failures.empty());
    CHECK(tr.decoded == tr.sent);
}

TEST_CASE("useless channel forces guessing") {
    // Y0 is uniform regardless of the input, so a 2-bit message cannot be
    // conveyed; the error rate must be near 3/4 and certainly above 1/2.
    NetworkDist d = NetworkDist::uniform(direct_link_alpha());
    SimParams p = zero_budget_params();
    p.k_msg = 2;
    p.n = 6;
    p.blocks = 2;
    p.trials = 60;
    p.seed = 7;
    const ErrorEstimate est = estimate_error(d, p);
    CHECK(est.p_hat >= 0.5);
    CHECK(est.errors >= 30);
    CHECK(est.ci_lo <= est.p_hat);
    CHECK(est.ci_hi >= est.p_hat);
    CHECK_FALSE(est.first_failure.empty());
    // Every first failure is a receiver-side message failure.
    for (const auto& [stage, count] : est.first_failure) {
        CHECK(stage == Stage::ReceiverMessage);
        CHECK(count > 0);
    }
}

TEST_CASE("noiseless direct link carries one bit per block") {
    const NetworkDist d = noiseless_copy_dist();
    SimParams p = zero_budget_params();
    p.k_msg = 1;
    p.n = 16;
    p.blocks = 2;
    p.epsilon = 0.9;
    p.trials = 30;
    p.seed = 11;
    const ErrorEstimate est = estimate_error(d, p);
    CHECK(est.errors == 0);
    CHECK(est.p_hat == 0.0);
}

TEST_CASE("trials are reproducible from the seed") {
    const NetworkDist d = oracles::random_factored_dist(all_binary(), 717);
    const SimContext ctx(d);
    SimParams p;
    p.n = 6;
    p.blocks = 3;
    p.trials = 10;
    p.seed = 99;
    p.epsilon = 0.5;

    const TrialResult a = run_trial(ctx, p, {1, 0}, 1234);
    const TrialResult b = run_trial(ctx, p, {1, 0}, 1234);
    CHECK(a.message_error == b.message_error);
    CHECK(a.decoded == b.decoded);
    REQUIRE(a.failures.size() == b.failures.size());
    for (std::size_t i = 0; i < a.failures.size(); ++i) {
        CHECK(a.failures[i].stage == b.failures[i].stage);
        CHECK(a.failures[i].reason == b.failures[i].reason);
        CHECK(a.failures[i].block == b.failures[i].block);
    }

    const ErrorEstimate e1 = estimate_error(ctx, p);
    const ErrorEstimate e2 = estimate_error(ctx, p);
    CHECK(e1.errors == e2.errors);
    CHECK(e1.p_hat == e2.p_hat);
    CHECK(e1.ci_lo == e2.ci_lo);
    CHECK(e1.ci_hi == e2.ci_hi);
    CHECK(e1.first_failure == e2.first_failure);
}
