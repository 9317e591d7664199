#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <string>

#include "support/oracles.hpp"
#include "tworelay/netspec.hpp"
#include "tworelay/pmf.hpp"

using namespace tworelay;

namespace {

// Minimal valid description: binary X0/Y0, everything else singleton, Y0 = X0.
std::string minimal_json(const std::string& mutate_key = "",
                         const std::string& mutate_value = "") {
    std::string alpha = R"("v1":1,"v2":1,"x0":2,"x1":1,"x2":1,)"
                        R"("y1":1,"y2":1,"yh1":1,"yh2":1,"y0":2)";
    std::string channel = R"([[[[[[1.0]],[[0.0]]]]],[[[[[0.0]],[[1.0]]]]]])";
    std::string body = R"({"name":"copy","description":"noiseless copy",)"
                       R"("alphabets":{)" + alpha + R"(},"channel":)" + channel + "}";
    if (!mutate_key.empty()) {
        const auto pos = body.find(mutate_key);
        REQUIRE(pos != std::string::npos);
        body.replace(pos, mutate_key.size(), mutate_value);
    }
    return body;
}

} // namespace

TEST_CASE("minimal description parses") {
    const NetworkSpecFile spec = parse_network_spec(minimal_json());
    CHECK(spec.name == "copy");
    CHECK(spec.description == "noiseless copy");
    CHECK(spec.alpha[Var::X0] == 2);
    CHECK(spec.alpha[Var::V1] == 1);
    CHECK_FALSE(spec.has_dist);
    // channel is p(y0,y1,y2 | x0,x1,x2); the copy channel is the identity.
    CHECK(spec.channel.entry(spec.channel.row_index({0, 0, 0}),
                             spec.channel.out_index({0, 0, 0})) == 1.0);
    CHECK(spec.channel.entry(spec.channel.row_index({1, 0, 0}),
                             spec.channel.out_index({1, 0, 0})) == 1.0);
    CHECK(spec.channel.entry(spec.channel.row_index({1, 0, 0}),
                             spec.channel.out_index({0, 0, 0})) == 0.0);

    const NetworkDist skel = spec.skeleton();
    CHECK(validate(skel).ok());
    CHECK(skel.p_x0.entry(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("full file round-trips through save and load") {
    AlphabetSizes a;
    for (int i = 0; i < kNumVars; ++i) a[static_cast<Var>(i)] = 2;
    a[Var::X0] = 3;
    a[Var::Yh2] = 3;

    NetworkSpecFile spec;
    spec.name = "roundtrip";
    spec.description = "randomized factors";
    spec.alpha = a;
    spec.dist = oracles::random_factored_dist(a, 31);
    spec.channel = spec.dist.channel;
    spec.has_dist = true;

    const std::string path = std::string(TWORELAY_TEST_DATA_DIR) + "/tmp_roundtrip.json";
    save_network_spec(spec, path);
    const NetworkSpecFile back = load_network_spec(path);
    std::remove(path.c_str());

    CHECK(back.name == spec.name);
    CHECK(back.description == spec.description);
    for (int i = 0; i < kNumVars; ++i) {
        const Var v = static_cast<Var>(i);
        CHECK(back.alpha[v] == spec.alpha[v]);
    }
    REQUIRE(back.has_dist);
    const ConditionalTable* mine[] = {&spec.dist.p_v1, &spec.dist.p_v2, &spec.dist.p_x1,
                                      &spec.dist.p_x2, &spec.dist.p_x0,
                                      &spec.dist.channel, &spec.dist.q1, &spec.dist.q2};
    const ConditionalTable* theirs[] = {&back.dist.p_v1, &back.dist.p_v2, &back.dist.p_x1,
                                        &back.dist.p_x2, &back.dist.p_x0,
                                        &back.dist.channel, &back.dist.q1, &back.dist.q2};
    for (int t = 0; t < 8; ++t) {
        REQUIRE(theirs[t]->data().size() == mine[t]->data().size());
        for (std::size_t i = 0; i < mine[t]->data().size(); ++i)
            CHECK(theirs[t]->data()[i] == doctest::Approx(mine[t]->data()[i]).epsilon(1e-15));
    }
    CHECK(validate(back.dist).ok());

    // Text-level round trip is exact as well.
    const std::string text = network_spec_to_json(back);
    const NetworkSpecFile again = parse_network_spec(text);
    CHECK(network_spec_to_json(again) == text);
}

TEST_CASE("structural problems raise ParseError") {
    CHECK_THROWS_AS(parse_network_spec("not json at all {"), ParseError);
    CHECK_THROWS_AS(parse_network_spec("[1,2,3]"), ParseError);

    SUBCASE("missing top-level key") {
        CHECK_THROWS_AS(parse_network_spec(minimal_json(R"("channel")", R"("chan")")),
                        ParseError);
        CHECK_THROWS_AS(parse_network_spec(minimal_json(R"("alphabets")", R"("sizes")")),
                        ParseError);
    }
    SUBCASE("missing alphabet entry") {
        CHECK_THROWS_AS(parse_network_spec(minimal_json(R"("yh2")", R"("zz2")")),
                        ParseError);
    }
    SUBCASE("alphabet size out of range") {
        CHECK_THROWS_AS(parse_network_spec(minimal_json(R"("x0":2)", R"("x0":0)")),
                        ParseError);
        CHECK_THROWS_AS(parse_network_spec(minimal_json(R"("x0":2)", R"("x0":300)")),
                        ParseError);
        CHECK_THROWS_AS(parse_network_spec(minimal_json(R"("x0":2)", R"("x0":1.5)")),
                        ParseError);
    }
    SUBCASE("ragged channel array") {
        // Second x0 slice lists only one y0 value.
        CHECK_THROWS_AS(
            parse_network_spec(minimal_json(R"([[[[[0.0]],[[1.0]]]]])", R"([[[[[0.0]]]]])")),
            ParseError);
    }
    SUBCASE("non-numeric leaf") {
        CHECK_THROWS_AS(
            parse_network_spec(minimal_json(R"([[[[[[1.0]])", R"([[[[[["x"]])")),
            ParseError);
    }
    SUBCASE("incomplete dist block") {
        std::string body = minimal_json();
        body.pop_back();  // strip '}'
        body += R"(,"dist":{"p_v1":[1.0]}})";
        CHECK_THROWS_AS(parse_network_spec(body), ParseError);
    }
}

TEST_CASE("load reports the offending path") {
    const std::string missing = std::string(TWORELAY_TEST_DATA_DIR) + "/no_such_file.json";
    try {
        (void)load_network_spec(missing);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("no_such_file.json") != std::string::npos);
    }
}
