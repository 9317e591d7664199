#pragma once
// Network description files (JSON).
//
// Layout:
//   {
//     "name": "...", "description": "...",
//     "alphabets": {"v1":1,"v2":1,"x0":2,"x1":1,"x2":1,
//                   "y1":1,"y2":1,"yh1":1,"yh2":1,"y0":2},
//     "channel": p[x0][x1][x2][y0][y1][y2],
//     "dist": {                      // optional
//       "p_v1": [v1], "p_v2": [v2],
//       "p_x1_given_v1": [v1][x1], "p_x2_given_v2": [v2][x2],
//       "p_x0_given_v1_v2": [v1][v2][x0],
//       "q1": [y1][x1][v1][yh1], "q2": [y2][x2][v2][yh2]
//     }
//   }
//
// Structural problems (unreadable file, malformed JSON, missing keys, ragged
// arrays) throw ParseError; numerical problems (rows not summing to one) are
// left to validate().

#include <stdexcept>
#include <string>

#include "tworelay/pmf.hpp"

namespace tworelay {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NetworkSpecFile {
    std::string name;
    std::string description;
    AlphabetSizes alpha;
    ConditionalTable channel;
    bool has_dist = false;
    NetworkDist dist;  // complete (channel included) when has_dist

    // Channel-and-alphabets view, with uniform placeholders for free factors.
    NetworkDist skeleton() const;
};

NetworkSpecFile load_network_spec(const std::string& path);
void save_network_spec(const NetworkSpecFile& spec, const std::string& path);

// Like load/save but on JSON text (used by round-trip tests and the CLI).
NetworkSpecFile parse_network_spec(const std::string& json_text);
std::string network_spec_to_json(const NetworkSpecFile& spec);

} // namespace tworelay
