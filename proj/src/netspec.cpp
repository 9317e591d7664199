#include "tworelay/netspec.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tworelay {

using nlohmann::json;

namespace {

int require_size(const json& j, const std::string& key) {
    if (!j.contains(key)) throw ParseError("alphabets: missing \"" + key + "\"");
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 1)
        throw ParseError("alphabets." + key + ": want a positive integer");
    long long n = v.get<long long>();
    if (n > 255) throw ParseError("alphabets." + key + ": at most 255 symbols supported");
    return static_cast<int>(n);
}

double number_at(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + ": want a number");
    return v.get<double>();
}

// Reads a nested array of given dimensions into flat row-major data.
void read_nested(const json& v, const std::vector<int>& dims, std::size_t level,
                 const std::string& where, std::vector<double>& out) {
    if (level == dims.size()) {
        out.push_back(number_at(v, where));
        return;
    }
    if (!v.is_array() || v.size() != static_cast<std::size_t>(dims[level]))
        throw ParseError(where + ": want an array of length " + std::to_string(dims[level]));
    for (std::size_t i = 0; i < v.size(); ++i)
        read_nested(v[i], dims, level + 1, where + "[" + std::to_string(i) + "]", out);
}

// File axes are (given..., out...), row-major — the same layout
// ConditionalTable stores, so the flat data transfers directly.
ConditionalTable read_table(const json& j, const std::string& key,
                            const AlphabetSizes& alpha,
                            const std::vector<Var>& given,
                            const std::vector<Var>& out) {
    if (!j.contains(key)) throw ParseError("missing \"" + key + "\"");
    std::vector<int> given_sizes, out_sizes, dims;
    for (Var v : given) { given_sizes.push_back(alpha[v]); dims.push_back(alpha[v]); }
    for (Var v : out) { out_sizes.push_back(alpha[v]); dims.push_back(alpha[v]); }
    std::vector<double> data;
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    data.reserve(total);
    read_nested(j.at(key), dims, 0, key, data);
    ConditionalTable t(key, out, out_sizes, given, given_sizes);
    t.data() = std::move(data);
    return t;
}

json table_to_nested(const ConditionalTable& t) {
    std::vector<int> dims;
    for (int s : t.given_sizes()) dims.push_back(s);
    for (int s : t.out_sizes()) dims.push_back(s);
    std::size_t pos = 0;
    struct Builder {
        const std::vector<int>& dims;
        const std::vector<double>& data;
        std::size_t& pos;
        json build(std::size_t level) {
            if (level == dims.size()) return json(data[pos++]);
            json arr = json::array();
            for (int i = 0; i < dims[level]; ++i) arr.push_back(build(level + 1));
            return arr;
        }
    };
    Builder b{dims, t.data(), pos};
    if (dims.empty()) return json(t.data().at(0));
    return b.build(0);
}

} // namespace

NetworkDist NetworkSpecFile::skeleton() const {
    NetworkDist d = NetworkDist::uniform(alpha);
    d.channel = channel;
    return d;
}

NetworkSpecFile parse_network_spec(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("top level: want an object");

    NetworkSpecFile spec;
    if (j.contains("name")) {
        if (!j.at("name").is_string()) throw ParseError("name: want a string");
        spec.name = j.at("name").get<std::string>();
    }
    if (j.contains("description")) {
        if (!j.at("description").is_string()) throw ParseError("description: want a string");
        spec.description = j.at("description").get<std::string>();
    }

    if (!j.contains("alphabets") || !j.at("alphabets").is_object())
        throw ParseError("missing \"alphabets\" object");
    const json& a = j.at("alphabets");
    for (int i = 0; i < kNumVars; ++i) {
        Var v = static_cast<Var>(i);
        spec.alpha[v] = require_size(a, var_name(v));
    }

    spec.channel = read_table(j, "channel", spec.alpha,
                              {Var::X0, Var::X1, Var::X2},
                              {Var::Y0, Var::Y1, Var::Y2});

    if (j.contains("dist")) {
        const json& d = j.at("dist");
        if (!d.is_object()) throw ParseError("dist: want an object");
        spec.has_dist = true;
        spec.dist.alpha = spec.alpha;
        spec.dist.channel = spec.channel;
        spec.dist.p_v1 = read_table(d, "p_v1", spec.alpha, {}, {Var::V1});
        spec.dist.p_v2 = read_table(d, "p_v2", spec.alpha, {}, {Var::V2});
        spec.dist.p_x1 = read_table(d, "p_x1_given_v1", spec.alpha, {Var::V1}, {Var::X1});
        spec.dist.p_x2 = read_table(d, "p_x2_given_v2", spec.alpha, {Var::V2}, {Var::X2});
        spec.dist.p_x0 = read_table(d, "p_x0_given_v1_v2", spec.alpha,
                                    {Var::V1, Var::V2}, {Var::X0});
        spec.dist.q1 = read_table(d, "q1", spec.alpha,
                                  {Var::Y1, Var::X1, Var::V1}, {Var::Yh1});
        spec.dist.q2 = read_table(d, "q2", spec.alpha,
                                  {Var::Y2, Var::X2, Var::V2}, {Var::Yh2});
    }
    return spec;
}

std::string network_spec_to_json(const NetworkSpecFile& spec) {
    json j;
    if (!spec.name.empty()) j["name"] = spec.name;
    if (!spec.description.empty()) j["description"] = spec.description;
    json a;
    for (int i = 0; i < kNumVars; ++i) {
        Var v = static_cast<Var>(i);
        a[var_name(v)] = spec.alpha[v];
    }
    j["alphabets"] = a;
    j["channel"] = table_to_nested(spec.channel);
    if (spec.has_dist) {
        json d;
        d["p_v1"] = table_to_nested(spec.dist.p_v1);
        d["p_v2"] = table_to_nested(spec.dist.p_v2);
        d["p_x1_given_v1"] = table_to_nested(spec.dist.p_x1);
        d["p_x2_given_v2"] = table_to_nested(spec.dist.p_x2);
        d["p_x0_given_v1_v2"] = table_to_nested(spec.dist.p_x0);
        d["q1"] = table_to_nested(spec.dist.q1);
        d["q2"] = table_to_nested(spec.dist.q2);
        j["dist"] = d;
    }
    return j.dump(2) + "\n";
}

NetworkSpecFile load_network_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_network_spec(buf.str());
    } catch (ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_network_spec(const NetworkSpecFile& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << network_spec_to_json(spec);
}

} // namespace tworelay
