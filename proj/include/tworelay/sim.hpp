#pragma once
// Monte-Carlo simulation of the block-Markov compress-and-forward scheme at
// finite block length.
//
// Index spaces are powers of two: a bit budget k gives 2^k codewords, and the
// realized rate of that component is k/n. One transmission carries B-1
// messages (blocks 1..B-1) across B+1 channel blocks; the two trailing blocks
// flush the decoding pipeline. Index convention: every "block 0" or earlier
// index is 0, and unused trailing messages are 0.
//
// Per block b each relay r quantizes its received block by picking the
// smallest index z_r whose quantization codeword is jointly typical with what
// it received; z_r is (randomly) partitioned into a cell s_r and, within the
// whole index space, a random subcell label w_0r2; cells are further labeled
// by a deterministic contiguous map w_0r1(s) = s >> (k_s - k_0r1). The relay
// transmits x_r(s_r^(b), w_0r^(b)) where w_0r^(b) = (w_0r1(s_r^(b-1)),
// w_0r2(z_r^(b-2))). The sender, after each block's feedback, re-decodes the
// relays' indices and superimposes the same pair onto its own codeword; the
// receiver runs the four-step pipeline (w_0 pair for block b, s pair for
// block b-1, z pair for block b-2 through ambiguity sets, then the message of
// block b-2). Decoding proceeds with erroneous indices rather than aborting,
// and every decode step with a single-element index space short-circuits to
// that element (no typicality test), so zero-bit budgets decode perfectly.
//
// Typicality is the robust kind: counts within a relative eps of expected,
// and symbols of probability zero must not occur.
//
// Determinism: each trial derives one random stream from (seed, trial index);
// the draw order is fixed (codebook families in declaration order, then
// partitions, then per-block channel noise), so results are reproducible
// byte-for-byte from the seed.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tworelay/pmf.hpp"
#include "tworelay/rng.hpp"

namespace tworelay {

struct SimParams {
    int n = 8;        // symbols per block
    int blocks = 4;   // B; messages occupy blocks 1..B-1
    // Bit budgets; index spaces have size 2^k.
    int k_msg = 1;
    int k_s1 = 1, k_s2 = 1;      // cell indices
    int k_011 = 1, k_012 = 0;    // relay-1 cell label / subcell label budgets
    int k_021 = 1, k_022 = 0;    // relay-2 counterparts
    int k_h1 = 2, k_h2 = 2;      // quantization indices
    double epsilon = 0.3;        // relative typicality tolerance
    int trials = 100;
    std::uint64_t seed = 1;
    bool joint_decoding = false; // decode (z1, z2) jointly instead of one at a time
    std::size_t max_codebook_symbols = 100000000;  // memory guard

    // Empty when the parameters are usable; otherwise one message per
    // violated requirement (budget orderings, ranges, memory guard).
    std::vector<std::string> invariant_violations() const;
    // k/n for a component budget.
    double realized_rate(int k) const { return static_cast<double>(k) / n; }
};

struct Codebooks {
    // Sequences are byte strings of length n. Flat composite indices:
    //   w01 = w011 * 2^k_012 + w012 (likewise w02).
    std::vector<std::vector<std::uint8_t>> v1;   // [w01]
    std::vector<std::vector<std::uint8_t>> v2;   // [w02]
    std::vector<std::vector<std::uint8_t>> x1;   // [s1 * W01 + w01]
    std::vector<std::vector<std::uint8_t>> x2;   // [s2 * W02 + w02]
    std::vector<std::vector<std::uint8_t>> x0;   // [(w * W01 + w01) * W02 + w02]
    std::vector<std::vector<std::uint8_t>> yh1;  // [(z1 * S1 + s1) * W01 + w01]
    std::vector<std::vector<std::uint8_t>> yh2;  // [(z2 * S2 + s2) * W02 + w02]
};

struct Partitions {
    std::vector<std::uint32_t> cell1, sub1;  // indexed by z1
    std::vector<std::uint32_t> cell2, sub2;  // indexed by z2
    int det_shift1 = 0, det_shift2 = 0;      // cell label = s >> det_shift
    std::uint32_t label1(std::uint32_t s1) const { return s1 >> det_shift1; }
    std::uint32_t label2(std::uint32_t s2) const { return s2 >> det_shift2; }
};

// Robust typicality of aligned sequences against a reference marginal whose
// vars() name the sequences (same order). All sequences have length n.
bool is_jointly_typical(const std::vector<const std::vector<std::uint8_t>*>& seqs,
                        const JointPmf& reference, double eps);

enum class Stage : int {
    Relay1Quantize = 0, Relay2Quantize,
    SenderS, SenderZ1, SenderZ2, SenderZPair,
    ReceiverW0, ReceiverS, ReceiverZ1, ReceiverZ2, ReceiverZPair,
    ReceiverMessage,
};
inline constexpr int kNumStages = 12;
const char* stage_name(Stage s);

enum class FailReason : int { NoCandidate = 0, NotUnique, WrongValue };
const char* fail_reason_name(FailReason r);

struct FailureEvent {
    Stage stage;
    FailReason reason;
    int block;  // block whose index was being decoded
};

struct TrialResult {
    bool message_error = false;          // any decoded message differs
    std::vector<std::uint32_t> sent;     // messages, blocks 1..B-1
    std::vector<std::uint32_t> decoded;
    std::vector<FailureEvent> failures;  // in simulation order
    std::optional<FailureEvent> first_failure() const {
        if (failures.empty()) return std::nullopt;
        return failures.front();
    }
};

// Precomputed sampling tables and per-stage typicality references for one
// network distribution. Building it is the expensive part; it can be reused
// across trials and parameter settings.
class SimContext {
public:
    explicit SimContext(const NetworkDist& dist);
    const NetworkDist& dist() const { return dist_; }
    const JointPmf& stage_reference(Stage s) const;
    const ConditionalTable& quantizer_codebook_law(int relay) const;  // p(yh_r | x_r, v_r)

private:
    NetworkDist dist_;
    std::vector<JointPmf> stage_refs_;
    ConditionalTable yh1_law_, yh2_law_;
};

Codebooks generate_codebooks(const SimContext& ctx, const SimParams& params, Rng& rng);
Partitions generate_partitions(const SimParams& params, Rng& rng);

// One full transmission: returns what was decoded and every failure event.
// `messages` must have length B-1 with entries below 2^k_msg.
TrialResult run_trial(const SimContext& ctx, const SimParams& params,
                      const std::vector<std::uint32_t>& messages, std::uint64_t seed);
TrialResult run_trial(const NetworkDist& dist, const SimParams& params,
                      const std::vector<std::uint32_t>& messages, std::uint64_t seed);

struct ErrorEstimate {
    int trials = 0;
    int errors = 0;      // trials with any wrong message
    double p_hat = 0.0;
    double ci_lo = 0.0, ci_hi = 1.0;  // 95% interval, see below
    // First-failure stage counts over failed trials only.
    std::map<Stage, int> first_failure;
};

// Monte-Carlo block-error estimate over params.trials independent trials with
// uniform random messages. The 95% interval is the normal approximation,
// except at 0 or trials errors where the exact binomial (Clopper-Pearson)
// one-sided bound is used.
ErrorEstimate estimate_error(const SimContext& ctx, const SimParams& params);
ErrorEstimate estimate_error(const NetworkDist& dist, const SimParams& params);

} // namespace tworelay
