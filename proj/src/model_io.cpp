#include "pomdp/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace pomdp {

namespace {

using nlohmann::json;

json tensor3(const std::vector<double>& flat, int d0, int d1, int d2) {
    json out = json::array();
    std::size_t k = 0;
    for (int i = 0; i < d0; ++i) {
        json mid = json::array();
        for (int j = 0; j < d1; ++j) {
            json row = json::array();
            for (int l = 0; l < d2; ++l) row.push_back(flat[k++]);
            mid.push_back(std::move(row));
        }
        out.push_back(std::move(mid));
    }
    return out;
}

json tensor2(const std::vector<double>& flat, int d0, int d1) {
    json out = json::array();
    std::size_t k = 0;
    for (int i = 0; i < d0; ++i) {
        json row = json::array();
        for (int j = 0; j < d1; ++j) row.push_back(flat[k++]);
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<double> flatten(const json& j, const char* field) {
    std::vector<double> out;
    std::function<void(const json&)> walk = [&](const json& node) {
        if (node.is_array()) {
            for (const auto& c : node) walk(c);
        } else if (node.is_number()) {
            out.push_back(node.get<double>());
        } else {
            throw IoError(std::string(field) + ": expected nested numeric arrays");
        }
    };
    walk(j);
    return out;
}

json body_json(const PomdpInstance& inst) {
    json j;
    j["num_states"] = inst.num_states;
    j["num_observations"] = inst.num_observations;
    j["initial"] = inst.initial;
    j["transition"] = tensor3(inst.transition, inst.num_states, inst.num_actions, inst.num_states);
    j["emission"] = tensor2(inst.emission, inst.num_states, inst.num_observations);
    j["reward"] = tensor3(inst.reward, inst.num_states, inst.num_actions, inst.num_states);
    return j;
}

PomdpInstance body_from_json(const json& j, int num_actions, int horizon) {
    PomdpInstance inst;
    inst.num_states = j.at("num_states").get<int>();
    inst.num_observations = j.at("num_observations").get<int>();
    inst.num_actions = num_actions;
    inst.horizon = horizon;
    inst.initial = flatten(j.at("initial"), "initial");
    inst.transition = flatten(j.at("transition"), "transition");
    inst.emission = flatten(j.at("emission"), "emission");
    inst.reward = flatten(j.at("reward"), "reward");
    return validate_instance(std::move(inst));
}

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    if (!j.is_object()) throw IoError(path + ": top level must be an object");
    if (j.value("format_version", 0) != 1) throw IoError(path + ": unsupported format_version");
    return j;
}

}  // namespace

LoadedInstance load_instance_file(const std::string& path) {
    json j = parse_file(path);
    const std::string kind = j.value("kind", "");
    const int num_actions = j.at("num_actions").get<int>();
    const int horizon = j.at("horizon").get<int>();
    if (kind == "pomdp") return body_from_json(j, num_actions, horizon);
    if (kind == "decomposable") {
        DecomposablePomdp dec;
        dec.num_actions = num_actions;
        dec.horizon = horizon;
        for (const auto& c : j.at("components")) dec.components.push_back(body_from_json(c, num_actions, horizon));
        return validate_decomposable(std::move(dec));
    }
    throw IoError(path + ": kind must be \"pomdp\" or \"decomposable\"");
}

std::string instance_to_json(const PomdpInstance& inst) {
    json j = body_json(inst);
    j["format_version"] = 1;
    j["kind"] = "pomdp";
    j["num_actions"] = inst.num_actions;
    j["horizon"] = inst.horizon;
    return j.dump(1);
}

std::string instance_to_json(const DecomposablePomdp& dec) {
    json j;
    j["format_version"] = 1;
    j["kind"] = "decomposable";
    j["num_actions"] = dec.num_actions;
    j["horizon"] = dec.horizon;
    json comps = json::array();
    for (const auto& c : dec.components) comps.push_back(body_json(c));
    j["components"] = std::move(comps);
    return j.dump(1);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out << contents;
        if (!out) throw IoError("write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("rename to " + path + " failed: " + ec.message());
    }
}

}  // namespace pomdp
