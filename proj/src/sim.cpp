#include "tworelay/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace tworelay {

namespace {

constexpr int kMaxBudgetBits = 24;

struct Spaces {
    std::uint64_t msg, s1, s2, w011, w012, w021, w022, z1, z2, w01, w02;
};

Spaces spaces_of(const SimParams& p) {
    auto pow2 = [](int k) { return std::uint64_t{1} << k; };
    Spaces s{};
    s.msg = pow2(p.k_msg);
    s.s1 = pow2(p.k_s1);
    s.s2 = pow2(p.k_s2);
    s.w011 = pow2(p.k_011);
    s.w012 = pow2(p.k_012);
    s.w021 = pow2(p.k_021);
    s.w022 = pow2(p.k_022);
    s.z1 = pow2(p.k_h1);
    s.z2 = pow2(p.k_h2);
    s.w01 = s.w011 * s.w012;
    s.w02 = s.w021 * s.w022;
    return s;
}

std::uint64_t total_codebook_symbols(const SimParams& p) {
    const Spaces s = spaces_of(p);
    const std::uint64_t seqs = s.w01 + s.w02 + s.s1 * s.w01 + s.s2 * s.w02 +
                               s.msg * s.w01 * s.w02 +
                               s.z1 * s.s1 * s.w01 + s.z2 * s.s2 * s.w02;
    return seqs * static_cast<std::uint64_t>(p.n);
}

} // namespace

std::vector<std::string> SimParams::invariant_violations() const {
    std::vector<std::string> out;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) out.push_back(msg);
    };
    need(n >= 1, "n must be at least 1");
    need(blocks >= 2, "blocks must be at least 2 (one message block plus pipeline)");
    need(trials >= 1, "trials must be at least 1");
    need(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
    const int budgets[] = {k_msg, k_s1, k_s2, k_011, k_012, k_021, k_022, k_h1, k_h2};
    for (int k : budgets)
        need(k >= 0 && k <= kMaxBudgetBits, "bit budgets must lie in [0, 24]");
    if (!out.empty()) return out;  // size math below needs sane budgets
    need(k_011 <= k_s1, "k_011 must not exceed k_s1 (cell labels partition cells)");
    need(k_s1 <= k_h1, "k_s1 must not exceed k_h1 (cells partition quantization indices)");
    need(k_012 <= k_h1 - k_s1, "k_012 must not exceed k_h1 - k_s1 (subcells refine cells)");
    need(k_021 <= k_s2, "k_021 must not exceed k_s2 (cell labels partition cells)");
    need(k_s2 <= k_h2, "k_s2 must not exceed k_h2 (cells partition quantization indices)");
    need(k_022 <= k_h2 - k_s2, "k_022 must not exceed k_h2 - k_s2 (subcells refine cells)");
    need(total_codebook_symbols(*this) <= max_codebook_symbols,
         "codebooks would exceed the memory guard");
    return out;
}

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Relay1Quantize: return "relay1_quantize";
        case Stage::Relay2Quantize: return "relay2_quantize";
        case Stage::SenderS: return "snd_s";
        case Stage::SenderZ1: return "snd_z1";
        case Stage::SenderZ2: return "snd_z2";
        case Stage::SenderZPair: return "snd_zpair";
        case Stage::ReceiverW0: return "rcv_w0";
        case Stage::ReceiverS: return "rcv_s";
        case Stage::ReceiverZ1: return "rcv_z1";
        case Stage::ReceiverZ2: return "rcv_z2";
        case Stage::ReceiverZPair: return "rcv_zpair";
        case Stage::ReceiverMessage: return "rcv_msg";
    }
    return "?";
}

const char* fail_reason_name(FailReason r) {
    switch (r) {
        case FailReason::NoCandidate: return "no_candidate";
        case FailReason::NotUnique: return "not_unique";
        case FailReason::WrongValue: return "wrong_value";
    }
    return "?";
}

bool is_jointly_typical(const std::vector<const std::vector<std::uint8_t>*>& seqs,
                        const JointPmf& reference, double eps) {
    if (seqs.size() != reference.vars().size())
        throw ShapeError("is_jointly_typical: sequence/variable count mismatch");
    const std::size_t n = seqs.empty() ? 0 : seqs[0]->size();
    for (const auto* s : seqs)
        if (s->size() != n) throw ShapeError("is_jointly_typical: unequal lengths");
    if (n == 0) throw ShapeError("is_jointly_typical: empty sequences");

    std::vector<std::uint32_t> counts(reference.cells(), 0);
    const auto& sizes = reference.sizes();
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < seqs.size(); ++k) {
            const int sym = (*seqs[k])[t];
            if (sym >= sizes[k])
                throw ShapeError("is_jointly_typical: symbol out of alphabet range");
            flat = flat * static_cast<std::size_t>(sizes[k]) + static_cast<std::size_t>(sym);
        }
        ++counts[flat];
    }
    const double dn = static_cast<double>(n);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const double p = reference[c];
        const double f = static_cast<double>(counts[c]) / dn;
        if (p == 0.0) {
            if (counts[c] != 0) return false;
        } else if (std::abs(f - p) > eps * p) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Context

SimContext::SimContext(const NetworkDist& dist) : dist_(dist) {
    for (int s : dist_.alpha.size)
        if (s > 255) throw ShapeError("SimContext: alphabets larger than 255 unsupported");
    const JointPmf joint = build_joint(dist_);
    using V = Var;
    const std::vector<std::vector<Var>> groups = {
        {V::V1, V::X1, V::Y1, V::Yh1},                             // Relay1Quantize
        {V::V2, V::X2, V::Y2, V::Yh2},                             // Relay2Quantize
        {V::V1, V::V2, V::X0, V::X1, V::X2, V::Y0},                // SenderS
        {V::V1, V::X0, V::X1, V::Yh1, V::Y0},                      // SenderZ1
        {V::V2, V::X0, V::X2, V::Yh2, V::Y0},                      // SenderZ2
        {V::V1, V::V2, V::X0, V::X1, V::X2, V::Yh1, V::Yh2, V::Y0},// SenderZPair
        {V::V1, V::V2, V::Y0},                                     // ReceiverW0
        {V::V1, V::V2, V::X1, V::X2, V::Y0},                       // ReceiverS
        {V::V1, V::X1, V::Yh1, V::Y0},                             // ReceiverZ1
        {V::V2, V::X2, V::Yh2, V::Y0},                             // ReceiverZ2
        {V::V1, V::V2, V::X1, V::X2, V::Yh1, V::Yh2, V::Y0},       // ReceiverZPair
        {V::V1, V::V2, V::X0, V::X1, V::X2, V::Yh1, V::Yh2, V::Y0},// ReceiverMessage
    };
    stage_refs_.reserve(groups.size());
    for (const auto& g : groups) stage_refs_.push_back(joint.marginal(g));
    yh1_law_ = make_conditional(joint, {V::Yh1}, {V::X1, V::V1}, "yh1_codebook_law");
    yh2_law_ = make_conditional(joint, {V::Yh2}, {V::X2, V::V2}, "yh2_codebook_law");
}

const JointPmf& SimContext::stage_reference(Stage s) const {
    return stage_refs_[static_cast<std::size_t>(s)];
}

const ConditionalTable& SimContext::quantizer_codebook_law(int relay) const {
    return relay == 1 ? yh1_law_ : yh2_law_;
}

// ---------------------------------------------------------------------------
// Codebook and partition generation

namespace {

std::size_t sample_row(Rng& rng, const ConditionalTable& t, std::size_t row) {
    const double u = rng.next_double();
    double acc = 0.0;
    const std::size_t m = t.row_size();
    for (std::size_t o = 0; o + 1 < m; ++o) {
        acc += t.entry(row, o);
        if (u < acc) return o;
    }
    return m - 1;
}

using Seq = std::vector<std::uint8_t>;

} // namespace

Codebooks generate_codebooks(const SimContext& ctx, const SimParams& params, Rng& rng) {
    const Spaces sp = spaces_of(params);
    const NetworkDist& d = ctx.dist();
    const int n = params.n;
    Codebooks cb;

    cb.v1.resize(sp.w01, Seq(n));
    for (auto& seq : cb.v1)
        for (int t = 0; t < n; ++t) seq[t] = static_cast<std::uint8_t>(sample_row(rng, d.p_v1, 0));
    cb.v2.resize(sp.w02, Seq(n));
    for (auto& seq : cb.v2)
        for (int t = 0; t < n; ++t) seq[t] = static_cast<std::uint8_t>(sample_row(rng, d.p_v2, 0));

    cb.x1.resize(sp.s1 * sp.w01, Seq(n));
    for (std::uint64_t s1 = 0; s1 < sp.s1; ++s1)
        for (std::uint64_t w = 0; w < sp.w01; ++w) {
            Seq& seq = cb.x1[s1 * sp.w01 + w];
            for (int t = 0; t < n; ++t)
                seq[t] = static_cast<std::uint8_t>(sample_row(rng, d.p_x1, static_cast<std::size_t>(cb.v1[w][t])));
        }
    cb.x2.resize(sp.s2 * sp.w02, Seq(n));
    for (std::uint64_t s2 = 0; s2 < sp.s2; ++s2)
        for (std::uint64_t w = 0; w < sp.w02; ++w) {
            Seq& seq = cb.x2[s2 * sp.w02 + w];
            for (int t = 0; t < n; ++t)
                seq[t] = static_cast<std::uint8_t>(sample_row(rng, d.p_x2, static_cast<std::size_t>(cb.v2[w][t])));
        }

    cb.x0.resize(sp.msg * sp.w01 * sp.w02, Seq(n));
    for (std::uint64_t w = 0; w < sp.msg; ++w)
        for (std::uint64_t a = 0; a < sp.w01; ++a)
            for (std::uint64_t b = 0; b < sp.w02; ++b) {
                Seq& seq = cb.x0[(w * sp.w01 + a) * sp.w02 + b];
                for (int t = 0; t < n; ++t)
                    seq[t] = static_cast<std::uint8_t>(sample_row(
                        rng, d.p_x0, d.p_x0.row_index({cb.v1[a][t], cb.v2[b][t]})));
            }

    const ConditionalTable& law1 = ctx.quantizer_codebook_law(1);
    cb.yh1.resize(sp.z1 * sp.s1 * sp.w01, Seq(n));
    for (std::uint64_t z = 0; z < sp.z1; ++z)
        for (std::uint64_t s1 = 0; s1 < sp.s1; ++s1)
            for (std::uint64_t w = 0; w < sp.w01; ++w) {
                Seq& seq = cb.yh1[(z * sp.s1 + s1) * sp.w01 + w];
                const Seq& x1 = cb.x1[s1 * sp.w01 + w];
                for (int t = 0; t < n; ++t)
                    seq[t] = static_cast<std::uint8_t>(sample_row(rng, law1, law1.row_index({x1[t], cb.v1[w][t]})));
            }
    const ConditionalTable& law2 = ctx.quantizer_codebook_law(2);
    cb.yh2.resize(sp.z2 * sp.s2 * sp.w02, Seq(n));
    for (std::uint64_t z = 0; z < sp.z2; ++z)
        for (std::uint64_t s2 = 0; s2 < sp.s2; ++s2)
            for (std::uint64_t w = 0; w < sp.w02; ++w) {
                Seq& seq = cb.yh2[(z * sp.s2 + s2) * sp.w02 + w];
                const Seq& x2 = cb.x2[s2 * sp.w02 + w];
                for (int t = 0; t < n; ++t)
                    seq[t] = static_cast<std::uint8_t>(sample_row(rng, law2, law2.row_index({x2[t], cb.v2[w][t]})));
            }
    return cb;
}

Partitions generate_partitions(const SimParams& params, Rng& rng) {
    const Spaces sp = spaces_of(params);
    Partitions pt;
    pt.cell1.resize(sp.z1);
    for (auto& c : pt.cell1) c = static_cast<std::uint32_t>(rng.next_index(sp.s1));
    pt.sub1.resize(sp.z1);
    for (auto& c : pt.sub1) c = static_cast<std::uint32_t>(rng.next_index(sp.w012));
    pt.cell2.resize(sp.z2);
    for (auto& c : pt.cell2) c = static_cast<std::uint32_t>(rng.next_index(sp.s2));
    pt.sub2.resize(sp.z2);
    for (auto& c : pt.sub2) c = static_cast<std::uint32_t>(rng.next_index(sp.w022));
    pt.det_shift1 = params.k_s1 - params.k_011;
    pt.det_shift2 = params.k_s2 - params.k_021;
    return pt;
}

// ---------------------------------------------------------------------------
// One trial

namespace {

// Convention-aware history: index 0 and below reads as 0.
class History {
public:
    explicit History(int rounds) : v_(static_cast<std::size_t>(rounds) + 1, 0) {}
    std::uint32_t at(int b) const {
        return b < 1 ? 0u : v_[static_cast<std::size_t>(b)];
    }
    void set(int b, std::uint32_t x) { v_[static_cast<std::size_t>(b)] = x; }

private:
    std::vector<std::uint32_t> v_;
};

// Scan candidates for the unique typical one. Decoding never aborts: with no
// typical candidate the fallback is index 0; with several, the smallest.
std::uint64_t decode_step(TrialResult& res, Stage stage, int block,
                          const std::vector<std::uint64_t>& candidates,
                          const std::function<bool(std::uint64_t)>& typical,
                          std::uint64_t truth) {
    std::uint64_t first = 0;
    int matches = 0;
    for (std::uint64_t c : candidates) {
        if (!typical(c)) continue;
        if (matches == 0) first = c;
        if (++matches > 1) break;
    }
    if (matches == 0) {
        res.failures.push_back({stage, FailReason::NoCandidate, block});
        return 0;
    }
    if (matches > 1) {
        res.failures.push_back({stage, FailReason::NotUnique, block});
        return first;
    }
    if (first != truth)
        res.failures.push_back({stage, FailReason::WrongValue, block});
    return first;
}

std::vector<std::uint64_t> iota_candidates(std::uint64_t count) {
    std::vector<std::uint64_t> v(count);
    for (std::uint64_t i = 0; i < count; ++i) v[i] = i;
    return v;
}

} // namespace

TrialResult run_trial(const SimContext& ctx, const SimParams& params,
                      const std::vector<std::uint32_t>& messages, std::uint64_t seed) {
    {
        const auto bad = params.invariant_violations();
        if (!bad.empty()) {
            std::string all;
            for (const auto& b : bad) all += (all.empty() ? "" : "; ") + b;
            throw std::invalid_argument("run_trial: " + all);
        }
    }
    const Spaces sp = spaces_of(params);
    const int B = params.blocks;
    const int rounds = B + 1;
    const int n = params.n;
    const double eps = params.epsilon;
    if (messages.size() != static_cast<std::size_t>(B - 1))
        throw std::invalid_argument("run_trial: need exactly blocks-1 messages");
    for (std::uint32_t m : messages)
        if (m >= sp.msg) throw std::invalid_argument("run_trial: message out of range");

    Rng rng(seed);
    const Codebooks cb = generate_codebooks(ctx, params, rng);
    const Partitions pt = generate_partitions(params, rng);
    const NetworkDist& d = ctx.dist();

    TrialResult res;
    res.sent = messages;
    res.decoded.assign(messages.size(), 0);

    // Truth at the relays.
    History z1t(rounds), z2t(rounds), s1t(rounds), s2t(rounds), w01t(rounds), w02t(rounds);
    // Sender estimates.
    History s1e(rounds), s2e(rounds), z1e(rounds), z2e(rounds), w01e(rounds), w02e(rounds);
    // Receiver estimates.
    History w01r(rounds), w02r(rounds), s1r(rounds), s2r(rounds), z1r(rounds), z2r(rounds);

    std::vector<Seq> y0(static_cast<std::size_t>(rounds) + 1, Seq(n));
    std::vector<Seq> y1 = y0, y2 = y0;
    std::vector<const Seq*> x0used(static_cast<std::size_t>(rounds) + 1, nullptr);

    auto w_sent = [&](int b) -> std::uint32_t {
        return (b >= 1 && b <= B - 1) ? messages[static_cast<std::size_t>(b - 1)] : 0u;
    };
    auto compose1 = [&](std::uint32_t label, std::uint32_t sub) {
        return label * static_cast<std::uint32_t>(sp.w012) + sub;
    };
    auto compose2 = [&](std::uint32_t label, std::uint32_t sub) {
        return label * static_cast<std::uint32_t>(sp.w022) + sub;
    };
    auto split_sub1 = [&](std::uint32_t w01) {
        return w01 % static_cast<std::uint32_t>(sp.w012);
    };
    auto split_label1 = [&](std::uint32_t w01) {
        return w01 / static_cast<std::uint32_t>(sp.w012);
    };
    auto split_sub2 = [&](std::uint32_t w02) {
        return w02 % static_cast<std::uint32_t>(sp.w022);
    };
    auto split_label2 = [&](std::uint32_t w02) {
        return w02 / static_cast<std::uint32_t>(sp.w022);
    };

    for (int b = 1; b <= rounds; ++b) {
        // --- Encoding. Relays know their own index history exactly; the
        // sender uses its decoded estimates of the same quantities.
        s1t.set(b, pt.cell1[z1t.at(b - 1)]);
        s2t.set(b, pt.cell2[z2t.at(b - 1)]);
        w01t.set(b, compose1(pt.label1(s1t.at(b - 1)), pt.sub1[z1t.at(b - 2)]));
        w02t.set(b, compose2(pt.label2(s2t.at(b - 1)), pt.sub2[z2t.at(b - 2)]));
        w01e.set(b, compose1(pt.label1(s1e.at(b - 1)), pt.sub1[z1e.at(b - 2)]));
        w02e.set(b, compose2(pt.label2(s2e.at(b - 1)), pt.sub2[z2e.at(b - 2)]));

        const Seq& x1s = cb.x1[s1t.at(b) * sp.w01 + w01t.at(b)];
        const Seq& x2s = cb.x2[s2t.at(b) * sp.w02 + w02t.at(b)];
        const Seq& x0s =
            cb.x0[(static_cast<std::uint64_t>(w_sent(b)) * sp.w01 + w01e.at(b)) * sp.w02 +
                  w02e.at(b)];
        x0used[static_cast<std::size_t>(b)] = &x0s;

        // --- Channel.
        Seq& y0b = y0[static_cast<std::size_t>(b)];
        Seq& y1b = y1[static_cast<std::size_t>(b)];
        Seq& y2b = y2[static_cast<std::size_t>(b)];
        const auto& ch = d.channel;
        const int ny1 = ch.out_sizes()[1], ny2 = ch.out_sizes()[2];
        for (int t = 0; t < n; ++t) {
            const std::size_t row = ch.row_index({x0s[t], x1s[t], x2s[t]});
            const std::size_t triple = sample_row(rng, ch, row);
            y0b[t] = static_cast<std::uint8_t>(triple / (ny1 * ny2));
            y1b[t] = static_cast<std::uint8_t>((triple / ny2) % ny1);
            y2b[t] = static_cast<std::uint8_t>(triple % ny2);
        }

        // --- Relay quantization: smallest typical index. Several typical
        // candidates is normal covering behavior, so the only failure mode
        // is finding none (index 0 is used and flagged).
        if (sp.z1 == 1) {
            z1t.set(b, 0);
        } else {
            const JointPmf& ref = ctx.stage_reference(Stage::Relay1Quantize);
            std::vector<const Seq*> seqs = {&cb.v1[w01t.at(b)], &x1s, &y1b, nullptr};
            std::uint32_t pick = 0;
            bool found = false;
            for (std::uint64_t z = 0; z < sp.z1 && !found; ++z) {
                seqs[3] = &cb.yh1[(z * sp.s1 + s1t.at(b)) * sp.w01 + w01t.at(b)];
                if (is_jointly_typical(seqs, ref, eps)) {
                    pick = static_cast<std::uint32_t>(z);
                    found = true;
                }
            }
            if (!found)
                res.failures.push_back({Stage::Relay1Quantize, FailReason::NoCandidate, b});
            z1t.set(b, pick);
        }
        if (sp.z2 == 1) {
            z2t.set(b, 0);
        } else {
            const JointPmf& ref = ctx.stage_reference(Stage::Relay2Quantize);
            std::vector<const Seq*> seqs = {&cb.v2[w02t.at(b)], &x2s, &y2b, nullptr};
            std::uint32_t pick = 0;
            bool found = false;
            for (std::uint64_t z = 0; z < sp.z2 && !found; ++z) {
                seqs[3] = &cb.yh2[(z * sp.s2 + s2t.at(b)) * sp.w02 + w02t.at(b)];
                if (is_jointly_typical(seqs, ref, eps)) {
                    pick = static_cast<std::uint32_t>(z);
                    found = true;
                }
            }
            if (!found)
                res.failures.push_back({Stage::Relay2Quantize, FailReason::NoCandidate, b});
            z2t.set(b, pick);
        }

        // --- Sender decoding from feedback (not needed after block B).
        if (b <= B) {
            // Step 1: the relays' cell pair for this block.
            if (sp.s1 * sp.s2 == 1) {
                s1e.set(b, 0);
                s2e.set(b, 0);
            } else {
                const JointPmf& ref = ctx.stage_reference(Stage::SenderS);
                std::vector<const Seq*> seqs = {&cb.v1[w01e.at(b)], &cb.v2[w02e.at(b)],
                                                x0used[static_cast<std::size_t>(b)],
                                                nullptr, nullptr, &y0b};
                const std::uint64_t pick = decode_step(
                    res, Stage::SenderS, b, iota_candidates(sp.s1 * sp.s2),
                    [&](std::uint64_t cand) {
                        const std::uint64_t c1 = cand / sp.s2, c2 = cand % sp.s2;
                        seqs[3] = &cb.x1[c1 * sp.w01 + w01e.at(b)];
                        seqs[4] = &cb.x2[c2 * sp.w02 + w02e.at(b)];
                        return is_jointly_typical(seqs, ref, eps);
                    },
                    static_cast<std::uint64_t>(s1t.at(b)) * sp.s2 + s2t.at(b));
                s1e.set(b, static_cast<std::uint32_t>(pick / sp.s2));
                s2e.set(b, static_cast<std::uint32_t>(pick % sp.s2));
            }
            // Step 2: the previous block's quantization indices, restricted
            // to the cells just decoded.
            if (b >= 2) {
                const int pb = b - 1;
                const Seq& py0 = y0[static_cast<std::size_t>(pb)];
                const Seq* px0 = x0used[static_cast<std::size_t>(pb)];
                if (!params.joint_decoding) {
                    if (sp.z1 == 1) {
                        z1e.set(pb, 0);
                    } else {
                        std::vector<std::uint64_t> cands;
                        for (std::uint64_t z = 0; z < sp.z1; ++z)
                            if (pt.cell1[z] == s1e.at(b)) cands.push_back(z);
                        const JointPmf& ref = ctx.stage_reference(Stage::SenderZ1);
                        std::vector<const Seq*> seqs = {
                            &cb.v1[w01e.at(pb)], px0,
                            &cb.x1[s1e.at(pb) * sp.w01 + w01e.at(pb)], nullptr, &py0};
                        const std::uint64_t z = decode_step(
                            res, Stage::SenderZ1, pb, cands,
                            [&](std::uint64_t cand) {
                                seqs[3] = &cb.yh1[(cand * sp.s1 + s1e.at(pb)) * sp.w01 +
                                                  w01e.at(pb)];
                                return is_jointly_typical(seqs, ref, eps);
                            },
                            z1t.at(pb));
                        z1e.set(pb, static_cast<std::uint32_t>(z));
                    }
                    if (sp.z2 == 1) {
                        z2e.set(pb, 0);
                    } else {
                        std::vector<std::uint64_t> cands;
                        for (std::uint64_t z = 0; z < sp.z2; ++z)
                            if (pt.cell2[z] == s2e.at(b)) cands.push_back(z);
                        const JointPmf& ref = ctx.stage_reference(Stage::SenderZ2);
                        std::vector<const Seq*> seqs = {
                            &cb.v2[w02e.at(pb)], px0,
                            &cb.x2[s2e.at(pb) * sp.w02 + w02e.at(pb)], nullptr, &py0};
                        const std::uint64_t z = decode_step(
                            res, Stage::SenderZ2, pb, cands,
                            [&](std::uint64_t cand) {
                                seqs[3] = &cb.yh2[(cand * sp.s2 + s2e.at(pb)) * sp.w02 +
                                                  w02e.at(pb)];
                                return is_jointly_typical(seqs, ref, eps);
                            },
                            z2t.at(pb));
                        z2e.set(pb, static_cast<std::uint32_t>(z));
                    }
                } else {
                    if (sp.z1 * sp.z2 == 1) {
                        z1e.set(pb, 0);
                        z2e.set(pb, 0);
                    } else {
                        std::vector<std::uint64_t> cands;
                        for (std::uint64_t a = 0; a < sp.z1; ++a) {
                            if (pt.cell1[a] != s1e.at(b)) continue;
                            for (std::uint64_t c = 0; c < sp.z2; ++c)
                                if (pt.cell2[c] == s2e.at(b)) cands.push_back(a * sp.z2 + c);
                        }
                        const JointPmf& ref = ctx.stage_reference(Stage::SenderZPair);
                        std::vector<const Seq*> seqs = {
                            &cb.v1[w01e.at(pb)], &cb.v2[w02e.at(pb)], px0,
                            &cb.x1[s1e.at(pb) * sp.w01 + w01e.at(pb)],
                            &cb.x2[s2e.at(pb) * sp.w02 + w02e.at(pb)],
                            nullptr, nullptr, &py0};
                        const std::uint64_t z = decode_step(
                            res, Stage::SenderZPair, pb, cands,
                            [&](std::uint64_t cand) {
                                const std::uint64_t a = cand / sp.z2, c = cand % sp.z2;
                                seqs[5] = &cb.yh1[(a * sp.s1 + s1e.at(pb)) * sp.w01 +
                                                  w01e.at(pb)];
                                seqs[6] = &cb.yh2[(c * sp.s2 + s2e.at(pb)) * sp.w02 +
                                                  w02e.at(pb)];
                                return is_jointly_typical(seqs, ref, eps);
                            },
                            static_cast<std::uint64_t>(z1t.at(pb)) * sp.z2 + z2t.at(pb));
                        z1e.set(pb, static_cast<std::uint32_t>(z / sp.z2));
                        z2e.set(pb, static_cast<std::uint32_t>(z % sp.z2));
                    }
                }
            }
        }

        // --- Receiver pipeline.
        // Step 1: this block's w0 pair.
        if (sp.w01 * sp.w02 == 1) {
            w01r.set(b, 0);
            w02r.set(b, 0);
        } else {
            const JointPmf& ref = ctx.stage_reference(Stage::ReceiverW0);
            std::vector<const Seq*> seqs = {nullptr, nullptr, &y0b};
            const std::uint64_t pick = decode_step(
                res, Stage::ReceiverW0, b, iota_candidates(sp.w01 * sp.w02),
                [&](std::uint64_t cand) {
                    seqs[0] = &cb.v1[cand / sp.w02];
                    seqs[1] = &cb.v2[cand % sp.w02];
                    return is_jointly_typical(seqs, ref, eps);
                },
                static_cast<std::uint64_t>(w01t.at(b)) * sp.w02 + w02t.at(b));
            w01r.set(b, static_cast<std::uint32_t>(pick / sp.w02));
            w02r.set(b, static_cast<std::uint32_t>(pick % sp.w02));
        }
        // Step 2: previous block's cell pair, restricted to the cells whose
        // labels were just decoded in step 1.
        if (b >= 2) {
            const int pb = b - 1;
            if (sp.s1 * sp.s2 == 1) {
                s1r.set(pb, 0);
                s2r.set(pb, 0);
            } else {
                std::vector<std::uint64_t> cands;
                for (std::uint64_t c1 = 0; c1 < sp.s1; ++c1) {
                    if (pt.label1(static_cast<std::uint32_t>(c1)) != split_label1(w01r.at(b)))
                        continue;
                    for (std::uint64_t c2 = 0; c2 < sp.s2; ++c2)
                        if (pt.label2(static_cast<std::uint32_t>(c2)) ==
                            split_label2(w02r.at(b)))
                            cands.push_back(c1 * sp.s2 + c2);
                }
                const JointPmf& ref = ctx.stage_reference(Stage::ReceiverS);
                std::vector<const Seq*> seqs = {&cb.v1[w01r.at(pb)], &cb.v2[w02r.at(pb)],
                                                nullptr, nullptr,
                                                &y0[static_cast<std::size_t>(pb)]};
                const std::uint64_t pick = decode_step(
                    res, Stage::ReceiverS, pb, cands,
                    [&](std::uint64_t cand) {
                        seqs[2] = &cb.x1[(cand / sp.s2) * sp.w01 + w01r.at(pb)];
                        seqs[3] = &cb.x2[(cand % sp.s2) * sp.w02 + w02r.at(pb)];
                        return is_jointly_typical(seqs, ref, eps);
                    },
                    static_cast<std::uint64_t>(s1t.at(pb)) * sp.s2 + s2t.at(pb));
                s1r.set(pb, static_cast<std::uint32_t>(pick / sp.s2));
                s2r.set(pb, static_cast<std::uint32_t>(pick % sp.s2));
            }
        }
        // Steps 3 and 4 work on block b-2: quantization indices through the
        // ambiguity sets, then the message.
        if (b >= 3) {
            const int db = b - 2;
            const Seq& dy0 = y0[static_cast<std::size_t>(db)];
            if (!params.joint_decoding) {
                if (sp.z1 == 1) {
                    z1r.set(db, 0);
                } else {
                    std::vector<std::uint64_t> cands;
                    for (std::uint64_t z = 0; z < sp.z1; ++z)
                        if (pt.cell1[z] == s1r.at(b - 1) &&
                            pt.sub1[z] == split_sub1(w01r.at(b)))
                            cands.push_back(z);
                    const JointPmf& ref = ctx.stage_reference(Stage::ReceiverZ1);
                    std::vector<const Seq*> seqs = {
                        &cb.v1[w01r.at(db)],
                        &cb.x1[s1r.at(db) * sp.w01 + w01r.at(db)], nullptr, &dy0};
                    const std::uint64_t z = decode_step(
                        res, Stage::ReceiverZ1, db, cands,
                        [&](std::uint64_t cand) {
                            seqs[2] = &cb.yh1[(cand * sp.s1 + s1r.at(db)) * sp.w01 +
                                              w01r.at(db)];
                            return is_jointly_typical(seqs, ref, eps);
                        },
                        z1t.at(db));
                    z1r.set(db, static_cast<std::uint32_t>(z));
                }
                if (sp.z2 == 1) {
                    z2r.set(db, 0);
                } else {
                    std::vector<std::uint64_t> cands;
                    for (std::uint64_t z = 0; z < sp.z2; ++z)
                        if (pt.cell2[z] == s2r.at(b - 1) &&
                            pt.sub2[z] == split_sub2(w02r.at(b)))
                            cands.push_back(z);
                    const JointPmf& ref = ctx.stage_reference(Stage::ReceiverZ2);
                    std::vector<const Seq*> seqs = {
                        &cb.v2[w02r.at(db)],
                        &cb.x2[s2r.at(db) * sp.w02 + w02r.at(db)], nullptr, &dy0};
                    const std::uint64_t z = decode_step(
                        res, Stage::ReceiverZ2, db, cands,
                        [&](std::uint64_t cand) {
                            seqs[2] = &cb.yh2[(cand * sp.s2 + s2r.at(db)) * sp.w02 +
                                              w02r.at(db)];
                            return is_jointly_typical(seqs, ref, eps);
                        },
                        z2t.at(db));
                    z2r.set(db, static_cast<std::uint32_t>(z));
                }
            } else {
                if (sp.z1 * sp.z2 == 1) {
                    z1r.set(db, 0);
                    z2r.set(db, 0);
                } else {
                    std::vector<std::uint64_t> cands;
                    for (std::uint64_t a = 0; a < sp.z1; ++a) {
                        if (pt.cell1[a] != s1r.at(b - 1) ||
                            pt.sub1[a] != split_sub1(w01r.at(b)))
                            continue;
                        for (std::uint64_t c = 0; c < sp.z2; ++c)
                            if (pt.cell2[c] == s2r.at(b - 1) &&
                                pt.sub2[c] == split_sub2(w02r.at(b)))
                                cands.push_back(a * sp.z2 + c);
                    }
                    const JointPmf& ref = ctx.stage_reference(Stage::ReceiverZPair);
                    std::vector<const Seq*> seqs = {
                        &cb.v1[w01r.at(db)], &cb.v2[w02r.at(db)],
                        &cb.x1[s1r.at(db) * sp.w01 + w01r.at(db)],
                        &cb.x2[s2r.at(db) * sp.w02 + w02r.at(db)],
                        nullptr, nullptr, &dy0};
                    const std::uint64_t z = decode_step(
                        res, Stage::ReceiverZPair, db, cands,
                        [&](std::uint64_t cand) {
                            const std::uint64_t a = cand / sp.z2, c = cand % sp.z2;
                            seqs[4] = &cb.yh1[(a * sp.s1 + s1r.at(db)) * sp.w01 +
                                              w01r.at(db)];
                            seqs[5] = &cb.yh2[(c * sp.s2 + s2r.at(db)) * sp.w02 +
                                              w02r.at(db)];
                            return is_jointly_typical(seqs, ref, eps);
                        },
                        static_cast<std::uint64_t>(z1t.at(db)) * sp.z2 + z2t.at(db));
                    z1r.set(db, static_cast<std::uint32_t>(z / sp.z2));
                    z2r.set(db, static_cast<std::uint32_t>(z % sp.z2));
                }
            }
            // Step 4: the message of block b-2.
            std::uint32_t wd = 0;
            if (sp.msg > 1) {
                const JointPmf& ref = ctx.stage_reference(Stage::ReceiverMessage);
                std::vector<const Seq*> seqs = {
                    &cb.v1[w01r.at(db)], &cb.v2[w02r.at(db)], nullptr,
                    &cb.x1[s1r.at(db) * sp.w01 + w01r.at(db)],
                    &cb.x2[s2r.at(db) * sp.w02 + w02r.at(db)],
                    &cb.yh1[(static_cast<std::uint64_t>(z1r.at(db)) * sp.s1 + s1r.at(db)) *
                                sp.w01 +
                            w01r.at(db)],
                    &cb.yh2[(static_cast<std::uint64_t>(z2r.at(db)) * sp.s2 + s2r.at(db)) *
                                sp.w02 +
                            w02r.at(db)],
                    &dy0};
                wd = static_cast<std::uint32_t>(decode_step(
                    res, Stage::ReceiverMessage, db, iota_candidates(sp.msg),
                    [&](std::uint64_t cand) {
                        seqs[2] = &cb.x0[(cand * sp.w01 + w01r.at(db)) * sp.w02 +
                                         w02r.at(db)];
                        return is_jointly_typical(seqs, ref, eps);
                    },
                    w_sent(db)));
            }
            if (db >= 1 && db <= B - 1)
                res.decoded[static_cast<std::size_t>(db - 1)] = wd;
        }
    }

    res.message_error = res.sent != res.decoded;

    // Closed-loop sanity: a trial with no failure events must have decoded
    // chains identical to the relay truth and consistent with the composition
    // maps. A violation here is an internal bug, not channel noise.
    if (res.failures.empty()) {
        for (int b = 1; b <= rounds; ++b) {
            const bool chain_ok =
                w01r.at(b) == compose1(pt.label1(s1r.at(b - 1)), pt.sub1[z1r.at(b - 2)]) &&
                w02r.at(b) == compose2(pt.label2(s2r.at(b - 1)), pt.sub2[z2r.at(b - 2)]);
            if (!chain_ok)
                throw std::logic_error("run_trial: clean trial violates encoding maps");
        }
        if (res.message_error)
            throw std::logic_error("run_trial: message error without any failure event");
    }
    return res;
}

TrialResult run_trial(const NetworkDist& dist, const SimParams& params,
                      const std::vector<std::uint32_t>& messages, std::uint64_t seed) {
    SimContext ctx(dist);
    return run_trial(ctx, params, messages, seed);
}

ErrorEstimate estimate_error(const SimContext& ctx, const SimParams& params) {
    {
        const auto bad = params.invariant_violations();
        if (!bad.empty()) {
            std::string all;
            for (const auto& b : bad) all += (all.empty() ? "" : "; ") + b;
            throw std::invalid_argument("estimate_error: " + all);
        }
    }
    const Spaces sp = spaces_of(params);
    ErrorEstimate est;
    est.trials = params.trials;
    for (int i = 0; i < params.trials; ++i) {
        Rng msg_rng(mix_seed(params.seed, 2 * static_cast<std::uint64_t>(i) + 1));
        std::vector<std::uint32_t> messages(static_cast<std::size_t>(params.blocks - 1));
        for (auto& m : messages)
            m = static_cast<std::uint32_t>(msg_rng.next_index(sp.msg));
        const TrialResult tr = run_trial(ctx, params, messages,
                                         mix_seed(params.seed, 2 * static_cast<std::uint64_t>(i)));
        if (tr.message_error) {
            ++est.errors;
            if (auto ff = tr.first_failure()) ++est.first_failure[ff->stage];
        }
    }
    const double t = static_cast<double>(est.trials);
    est.p_hat = static_cast<double>(est.errors) / t;
    if (est.errors == 0) {
        est.ci_lo = 0.0;
        est.ci_hi = 1.0 - std::pow(0.025, 1.0 / t);
    } else if (est.errors == est.trials) {
        est.ci_lo = std::pow(0.025, 1.0 / t);
        est.ci_hi = 1.0;
    } else {
        const double se = std::sqrt(est.p_hat * (1.0 - est.p_hat) / t);
        est.ci_lo = std::max(0.0, est.p_hat - 1.96 * se);
        est.ci_hi = std::min(1.0, est.p_hat + 1.96 * se);
    }
    return est;
}

ErrorEstimate estimate_error(const NetworkDist& dist, const SimParams& params) {
    SimContext ctx(dist);
    return estimate_error(ctx, params);
}

} // namespace tworelay
