#include "credence/params_io.hpp"

#include <array>
#include <fstream>
#include <sstream>

namespace credence {

namespace {

constexpr std::array<const char*, 10> kPrimitive = {"h",   "mu",  "l_m", "l_s", "p_m",
                                                    "p_s", "c_m", "c_s", "k",   "k_return"};
constexpr std::array<const char*, 4> kKnobs = {"epsilon", "chi", "delta", "alpha"};
constexpr std::array<const char*, 4> kFlags = {"hidden_history", "resentment", "alt_contract",
                                               "endogenous_price"};

template <size_t N>
bool contains(const std::array<const char*, N>& a, const std::string& s) {
    for (auto* x : a)
        if (s == x) return true;
    return false;
}

double* field_ptr(ModelParams& p, const std::string& n) {
    if (n == "h") return &p.h;
    if (n == "mu") return &p.mu;
    if (n == "l_m") return &p.l_m;
    if (n == "l_s") return &p.l_s;
    if (n == "p_m") return &p.p_m;
    if (n == "p_s") return &p.p_s;
    if (n == "c_m") return &p.c_m;
    if (n == "c_s") return &p.c_s;
    if (n == "k") return &p.k;
    if (n == "k_return") return &p.k_return;
    return nullptr;
}

std::optional<double>* knob_ptr(ModelParams& p, const std::string& n) {
    if (n == "epsilon") return &p.epsilon;
    if (n == "chi") return &p.chi;
    if (n == "delta") return &p.delta;
    if (n == "alpha") return &p.alpha;
    return nullptr;
}

}  // namespace

ModelParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::Schema, "parameter document must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (!contains(kPrimitive, key) && !contains(kKnobs, key) && !contains(kFlags, key))
            throw Error(ErrorKind::Schema, "unknown key '" + key + "'");
    }
    ModelParams p;
    for (auto* key : kPrimitive) {
        if (!j.contains(key)) throw Error(ErrorKind::Schema, std::string("missing key '") + key + "'");
        if (!j[key].is_number()) throw Error(ErrorKind::Schema, std::string("key '") + key + "' must be a number");
        *field_ptr(p, key) = j[key].get<double>();
    }
    for (auto* key : kKnobs) {
        if (!j.contains(key)) continue;
        if (!j[key].is_number()) throw Error(ErrorKind::Schema, std::string("key '") + key + "' must be a number");
        *knob_ptr(p, key) = j[key].get<double>();
    }
    bool* flags[] = {&p.hidden_history, &p.resentment, &p.alt_contract, &p.endogenous_price};
    for (size_t i = 0; i < kFlags.size(); ++i) {
        if (!j.contains(kFlags[i])) continue;
        if (!j[kFlags[i]].is_boolean())
            throw Error(ErrorKind::Schema, std::string("key '") + kFlags[i] + "' must be a boolean");
        *flags[i] = j[kFlags[i]].get<bool>();
    }
    return p;
}

ModelParams params_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("malformed JSON: ") + e.what());
    }
    return params_from_json(j);
}

nlohmann::json params_to_json(const ModelParams& p) {
    nlohmann::json j;
    ModelParams q = p;
    for (auto* key : kPrimitive) j[key] = *field_ptr(q, key);
    for (auto* key : kKnobs)
        if (auto* o = knob_ptr(q, key); o->has_value()) j[key] = **o;
    if (p.hidden_history) j["hidden_history"] = true;
    if (p.resentment) j["resentment"] = true;
    if (p.alt_contract) j["alt_contract"] = true;
    if (p.endogenous_price) j["endogenous_price"] = true;
    return j;
}

bool has_numeric_field(const std::string& name) {
    return contains(kPrimitive, name) || contains(kKnobs, name);
}

double get_field(const ModelParams& p, const std::string& name) {
    ModelParams q = p;
    if (auto* f = field_ptr(q, name)) return *f;
    if (auto* o = knob_ptr(q, name)) {
        if (!o->has_value()) throw Error(ErrorKind::BadArgument, "knob '" + name + "' is unset");
        return **o;
    }
    throw Error(ErrorKind::BadArgument, "unknown parameter '" + name + "'");
}

void set_field(ModelParams& p, const std::string& name, double v) {
    if (auto* f = field_ptr(p, name)) {
        *f = v;
        return;
    }
    if (auto* o = knob_ptr(p, name)) {
        *o = v;
        return;
    }
    throw Error(ErrorKind::BadArgument, "unknown parameter '" + name + "'");
}

}  // namespace credence
