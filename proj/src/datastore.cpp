#include "demogen/datastore.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "demogen/errors.hpp"

namespace demogen {

namespace {

// ordered_json: object_poses/object_params must keep task declaration order
using json = nlohmann::ordered_json;

// The writer is hand-rolled: the format pins 17-significant-digit numbers
// and exact key order, which must not drift with a JSON library version.
void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

void append_string(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void append_pose(std::string& out, const Pose& p) {
    out += '[';
    append_double(out, p.rotation.w);
    out += ',';
    append_double(out, p.rotation.x);
    out += ',';
    append_double(out, p.rotation.y);
    out += ',';
    append_double(out, p.rotation.z);
    out += ',';
    append_double(out, p.translation.x);
    out += ',';
    append_double(out, p.translation.y);
    out += ',';
    append_double(out, p.translation.z);
    out += ']';
}

void append_doubles(std::string& out, const std::vector<double>& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ',';
        append_double(out, v[i]);
    }
    out += ']';
}

void append_action(std::string& out, const DeltaAction& a) {
    out += '[';
    append_double(out, a.d_pos.x);
    out += ',';
    append_double(out, a.d_pos.y);
    out += ',';
    append_double(out, a.d_pos.z);
    out += ',';
    append_double(out, a.d_rot.x);
    out += ',';
    append_double(out, a.d_rot.y);
    out += ',';
    append_double(out, a.d_rot.z);
    out += ',';
    append_double(out, a.gripper);
    out += ']';
}

void append_state(std::string& out, const WorldState& s) {
    out += "{\"ee_pose\":";
    append_pose(out, s.ee_pose);
    out += ",\"gripper_closed\":";
    out += s.gripper_closed ? "true" : "false";
    out += ",\"attached_object\":";
    if (s.attached_object)
        append_string(out, *s.attached_object);
    else
        out += "null";
    out += ",\"object_poses\":{";
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
        if (i > 0) out += ',';
        append_string(out, s.objects[i].id);
        out += ':';
        append_pose(out, s.objects[i].pose);
    }
    out += "},\"object_params\":{";
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
        if (i > 0) out += ',';
        append_string(out, s.objects[i].id);
        out += ':';
        append_double(out, s.objects[i].param);
    }
    out += "},\"step_count\":";
    out += std::to_string(s.step_count);
    out += '}';
}

void append_report(std::string& out, const GenReport& r) {
    out += "{\"successes\":";
    out += std::to_string(r.successes);
    out += ",\"attempts\":";
    out += std::to_string(r.attempts);
    out += ",\"dgr\":";
    append_double(out, r.dgr);
    out += ",\"complete\":";
    out += r.complete ? "true" : "false";
    out += ",\"per_source_histogram\":{";
    bool first = true;
    for (const auto& [id, n] : r.per_source_histogram) {
        if (!first) out += ',';
        first = false;
        append_string(out, id);
        out += ':';
        out += std::to_string(n);
    }
    out += "},\"per_source_attempts\":{";
    first = true;
    for (const auto& [id, n] : r.per_source_attempts) {
        if (!first) out += ',';
        first = false;
        append_string(out, id);
        out += ':';
        out += std::to_string(n);
    }
    out += "}}";
}

void append_episode(std::string& out, const Episode& ep) {
    out += "{\"episode_id\":";
    append_string(out, ep.episode_id);
    out += ",\"task\":";
    append_string(out, ep.task);
    out += ",\"variant\":";
    append_string(out, ep.variant);
    out += ",\"seed\":";
    out += std::to_string(ep.seed);
    out += ",\"success\":";
    out += ep.success ? "true" : "false";
    out += ",\"init_state\":";
    append_state(out, ep.init_state);
    out += ",\"steps\":[";
    for (std::size_t i = 0; i < ep.steps.size(); ++i) {
        if (i > 0) out += ',';
        out += '[';
        append_doubles(out, ep.steps[i].obs);
        out += ',';
        append_action(out, ep.steps[i].action);
        out += ',';
        append_pose(out, ep.steps[i].target);
        out += ']';
    }
    out += "],\"subtask_boundaries\":[";
    for (std::size_t i = 0; i < ep.subtask_boundaries.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(ep.subtask_boundaries[i]);
    }
    out += "],\"source_ids\":[";
    for (std::size_t i = 0; i < ep.source_ids.size(); ++i) {
        if (i > 0) out += ',';
        append_string(out, ep.source_ids[i]);
    }
    out += "],\"profile\":";
    append_string(out, ep.profile);
    out += ",\"quality\":";
    append_string(out, ep.quality);
    out += '}';
}

Pose parse_pose(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 7)
        throw ValidationError(where + ": pose must be a 7-number array");
    return Pose(Quat{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()},
                Vec3{j[4].get<double>(), j[5].get<double>(), j[6].get<double>()});
}

WorldState parse_state(const json& j, const std::string& where) {
    WorldState s;
    s.ee_pose = parse_pose(j.at("ee_pose"), where);
    s.gripper_closed = j.at("gripper_closed").get<bool>();
    if (!j.at("attached_object").is_null())
        s.attached_object = j.at("attached_object").get<std::string>();
    const json& poses = j.at("object_poses");
    const json& params = j.at("object_params");
    for (auto it = poses.begin(); it != poses.end(); ++it) {
        ObjectState obj;
        obj.id = it.key();
        obj.pose = parse_pose(it.value(), where);
        obj.param = params.at(it.key()).get<double>();
        s.objects.push_back(obj);
    }
    s.step_count = j.at("step_count").get<int>();
    return s;
}

GenReport parse_report(const json& j) {
    GenReport r;
    r.successes = j.at("successes").get<int>();
    r.attempts = j.at("attempts").get<int>();
    r.dgr = j.at("dgr").get<double>();
    r.complete = j.at("complete").get<bool>();
    for (auto it = j.at("per_source_histogram").begin(); it != j.at("per_source_histogram").end(); ++it)
        r.per_source_histogram[it.key()] = it.value().get<int>();
    for (auto it = j.at("per_source_attempts").begin(); it != j.at("per_source_attempts").end(); ++it)
        r.per_source_attempts[it.key()] = it.value().get<int>();
    return r;
}

Episode parse_episode(const json& j) {
    Episode ep;
    ep.episode_id = j.at("episode_id").get<std::string>();
    const std::string where = "episode " + ep.episode_id;
    ep.task = j.at("task").get<std::string>();
    ep.variant = j.at("variant").get<std::string>();
    ep.seed = j.at("seed").get<std::uint64_t>();
    ep.success = j.at("success").get<bool>();
    ep.init_state = parse_state(j.at("init_state"), where);
    for (const json& js : j.at("steps")) {
        if (!js.is_array() || js.size() != 3)
            throw ValidationError(where + ": step must be [obs, action, target]");
        EpisodeStep step;
        step.obs = js[0].get<std::vector<double>>();
        const json& ja = js[1];
        if (!ja.is_array() || ja.size() != 7)
            throw ValidationError(where + ": field steps: action must have 7 components");
        step.action.d_pos = {ja[0].get<double>(), ja[1].get<double>(), ja[2].get<double>()};
        step.action.d_rot = {ja[3].get<double>(), ja[4].get<double>(), ja[5].get<double>()};
        step.action.gripper = ja[6].get<double>();
        step.target = parse_pose(js[2], where);
        ep.steps.push_back(std::move(step));
    }
    ep.subtask_boundaries = j.at("subtask_boundaries").get<std::vector<int>>();
    ep.source_ids = j.at("source_ids").get<std::vector<std::string>>();
    ep.profile = j.at("profile").get<std::string>();
    ep.quality = j.at("quality").get<std::string>();
    return ep;
}

}  // namespace

void validate_episode(const Episode& ep) {
    const std::string where = "episode " + ep.episode_id;
    for (std::size_t i = 0; i < ep.steps.size(); ++i) {
        if (!ep.steps[i].action.finite())
            throw ValidationError(where + ": field steps[" + std::to_string(i) +
                                  "].action: non-finite component");
        if (ep.steps[i].action.d_rot.norm() >= kPi)
            throw ValidationError(where + ": field steps[" + std::to_string(i) +
                                  "].action: |d_rot| must be < pi");
        if (ep.steps[i].obs.size() != observation_size(ep.init_state.objects.size()))
            throw ValidationError(where + ": field steps[" + std::to_string(i) +
                                  "].obs: layout mismatch");
    }
    int prev = 0;
    for (std::size_t i = 0; i < ep.subtask_boundaries.size(); ++i) {
        if (ep.subtask_boundaries[i] <= prev)
            throw ValidationError(where + ": field subtask_boundaries: not strictly increasing");
        prev = ep.subtask_boundaries[i];
    }
    if (!ep.subtask_boundaries.empty() &&
        ep.subtask_boundaries.back() != static_cast<int>(ep.steps.size()))
        throw ValidationError(where + ": field subtask_boundaries: last boundary (" +
                              std::to_string(ep.subtask_boundaries.back()) +
                              ") must equal step count (" + std::to_string(ep.steps.size()) + ")");
    if (!ep.source_ids.empty() && ep.source_ids.size() != ep.subtask_boundaries.size())
        throw ValidationError(where + ": field source_ids: must be empty or one per subtask");
}

void save(const std::filesystem::path& path, const std::vector<Episode>& episodes,
          const std::optional<GenReport>& report) {
    for (const auto& ep : episodes) validate_episode(ep);

    std::string out;
    out.reserve(1 << 20);
    out += "{\"format\":\"demogen.v1\",\"task\":";
    append_string(out, episodes.empty() ? std::string() : episodes.front().task);
    out += ",\"variant\":";
    append_string(out, episodes.empty() ? std::string() : episodes.front().variant);
    out += ",\"report\":";
    if (report)
        append_report(out, *report);
    else
        out += "null";
    out += "}\n";
    for (const auto& ep : episodes) {
        append_episode(out, ep);
        out += '\n';
    }

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + tmp.string());
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!f) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename to " + path.string() + " failed: " + ec.message());
}

Dataset load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());

    Dataset ds;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        try {
            if (line_no == 1) {
                const std::string format = j.at("format").get<std::string>();
                if (format != "demogen.v1")
                    throw IoError(path.string() + ": unsupported format version '" + format + "'");
                ds.task = j.at("task").get<std::string>();
                ds.variant = j.at("variant").get<std::string>();
                if (!j.at("report").is_null()) ds.report = parse_report(j.at("report"));
            } else {
                Episode ep = parse_episode(j);
                validate_episode(ep);
                ds.episodes.push_back(std::move(ep));
            }
        } catch (const json::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (line_no == 0) throw IoError(path.string() + ": empty file, missing manifest");
    return ds;
}

}  // namespace demogen
