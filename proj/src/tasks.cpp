#include "demogen/tasks.hpp"

#include <fstream>

#include <json.hpp>

#include "demogen/errors.hpp"

namespace demogen {

namespace {

ResetRegion box(double cx, double cy, double half_x, double half_y, double theta_half,
                double scale_lo = 0.0, double scale_hi = 0.0) {
    ResetRegion r;
    r.x_lo = cx - half_x;
    r.x_hi = cx + half_x;
    r.y_lo = cy - half_y;
    r.y_hi = cy + half_y;
    r.theta_lo = -theta_half;
    r.theta_hi = theta_half;
    r.scale_lo = scale_lo;
    r.scale_hi = scale_hi;
    return r;
}

TaskDef make_stack() {
    TaskDef def;
    def.task.name = "stack";
    def.task.success_check = "stack";
    def.task.horizon = 400;
    def.task.objects = {
        {"red", GeometryClass::kBlock, 0.02},
        {"green", GeometryClass::kBlock, 0.025},
    };
    def.task.subtasks = {
        {"red", EndMetric::kGrasped},
        {"green", EndMetric::kTaskSuccess},
    };
    // d0: narrow source regime; d1: wide; d2: wide with full rotation
    def.variants["d0"] = {{
        {"red", box(-0.09, 0.0, 0.04, 0.04, 0.3)},
        {"green", box(0.09, 0.0, 0.04, 0.04, 0.3)},
    }};
    def.variants["d1"] = {{
        {"red", box(0.0, 0.0, 0.13, 0.13, 0.3)},
        {"green", box(0.0, 0.0, 0.13, 0.13, 0.3)},
    }};
    def.variants["d2"] = {{
        {"red", box(0.0, 0.0, 0.13, 0.13, kPi)},
        {"green", box(0.0, 0.0, 0.13, 0.13, kPi)},
    }};
    // object-transfer variant: block sizes sampled per episode
    def.variants["o1"] = {{
        {"red", box(0.0, 0.0, 0.13, 0.13, 0.3, 0.016, 0.026)},
        {"green", box(0.0, 0.0, 0.13, 0.13, 0.3, 0.02, 0.03)},
    }};
    return def;
}

TaskDef make_stack_three() {
    TaskDef def;
    def.task.name = "stack_three";
    def.task.success_check = "stack_three";
    def.task.horizon = 800;
    def.task.objects = {
        {"red", GeometryClass::kBlock, 0.02},
        {"green", GeometryClass::kBlock, 0.025},
        {"blue", GeometryClass::kBlock, 0.018},
    };
    def.task.subtasks = {
        {"red", EndMetric::kGrasped},
        {"green", EndMetric::kPlacedOn},
        {"blue", EndMetric::kGrasped},
        {"red", EndMetric::kTaskSuccess},
    };
    def.variants["d0"] = {{
        {"red", box(-0.12, -0.02, 0.04, 0.04, 0.3)},
        {"green", box(0.12, -0.02, 0.04, 0.04, 0.3)},
        {"blue", box(0.0, 0.14, 0.04, 0.04, 0.3)},
    }};
    def.variants["d1"] = {{
        {"red", box(0.0, 0.0, 0.13, 0.13, 0.3)},
        {"green", box(0.0, 0.0, 0.13, 0.13, 0.3)},
        {"blue", box(0.0, 0.0, 0.13, 0.13, 0.3)},
    }};
    def.variants["d2"] = {{
        {"red", box(0.0, 0.0, 0.13, 0.13, kPi)},
        {"green", box(0.0, 0.0, 0.13, 0.13, kPi)},
        {"blue", box(0.0, 0.0, 0.13, 0.13, kPi)},
    }};
    def.variants["o1"] = {{
        {"red", box(0.0, 0.0, 0.13, 0.13, 0.3, 0.016, 0.026)},
        {"green", box(0.0, 0.0, 0.13, 0.13, 0.3, 0.02, 0.03)},
        {"blue", box(0.0, 0.0, 0.13, 0.13, 0.3, 0.015, 0.022)},
    }};
    return def;
}

TaskDef make_peg_insert() {
    TaskDef def;
    def.task.name = "peg_insert";
    def.task.success_check = "peg_insert";
    def.task.horizon = 400;
    // ring hole radius 0.010, peg radius 0.004: insertion demands the ring
    // center within 1.5 peg radii (6 mm) of the peg axis, the precision
    // regime where action noise visibly costs generation attempts
    def.task.objects = {
        {"ring", GeometryClass::kSocket, 0.010},
        {"board", GeometryClass::kPegBoard, 0.004},
    };
    def.task.subtasks = {
        {"ring", EndMetric::kGrasped},
        {"board", EndMetric::kInserted},
    };
    def.variants["d0"] = {{
        {"ring", box(-0.12, 0.0, 0.04, 0.04, 0.3)},
        {"board", box(0.12, 0.0, 0.02, 0.02, 0.1)},
    }};
    def.variants["d1"] = {{
        {"ring", box(-0.09, 0.0, 0.09, 0.08, 0.3)},
        {"board", box(0.09, 0.0, 0.09, 0.08, 0.3)},
    }};
    def.variants["d2"] = {{
        {"ring", box(-0.09, 0.0, 0.09, 0.08, kPi)},
        {"board", box(0.09, 0.0, 0.09, 0.08, kPi)},
    }};
    def.variants["o1"] = {{
        {"ring", box(-0.09, 0.0, 0.09, 0.08, 0.3, 0.009, 0.012)},
        {"board", box(0.09, 0.0, 0.09, 0.08, 0.3, 0.0035, 0.0045)},
    }};
    return def;
}

}  // namespace

const std::vector<TaskDef>& builtin_tasks() {
    static const std::vector<TaskDef> tasks = [] {
        std::vector<TaskDef> t{make_stack(), make_stack_three(), make_peg_insert()};
        for (const auto& def : t) validate_task(def.task);
        return t;
    }();
    return tasks;
}

const std::vector<ControllerProfile>& builtin_profiles() {
    static const std::vector<ControllerProfile> profiles = {
        {"default", 0.05, 0.2, 0.03},
        {"slow", 0.02, 0.1, 0.03},
        {"coarse", 0.08, 0.3, 0.03},
    };
    return profiles;
}

const ControllerProfile& find_profile(const std::string& name) {
    for (const auto& p : builtin_profiles())
        if (p.name == name) return p;
    throw ValidationError("unknown controller profile '" + name + "'");
}

const TaskDef& find_task(const std::string& name, const std::vector<TaskDef>& extra) {
    for (const auto& def : extra)
        if (def.task.name == name) return def;
    for (const auto& def : builtin_tasks())
        if (def.task.name == name) return def;
    throw ValidationError("unknown task '" + name + "'");
}

namespace {

using nlohmann::json;

GeometryClass parse_geom(const std::string& s) {
    if (s == "block") return GeometryClass::kBlock;
    if (s == "peg_board") return GeometryClass::kPegBoard;
    if (s == "socket") return GeometryClass::kSocket;
    throw ValidationError("unknown geometry class '" + s + "'");
}

EndMetric parse_metric(const std::string& s) {
    if (s == "grasped") return EndMetric::kGrasped;
    if (s == "placed_on") return EndMetric::kPlacedOn;
    if (s == "inserted") return EndMetric::kInserted;
    if (s == "task_success") return EndMetric::kTaskSuccess;
    throw ValidationError("unknown end metric '" + s + "'");
}

void parse_range(const json& j, double& lo, double& hi, const char* what) {
    if (!j.is_array() || j.size() != 2)
        throw ValidationError(std::string(what) + " must be a [lo, hi] pair");
    lo = j.at(0).get<double>();
    hi = j.at(1).get<double>();
    if (lo > hi) throw ValidationError(std::string(what) + " range is not ordered");
}

TaskDef parse_task(const json& jt) {
    TaskDef def;
    def.task.name = jt.at("name").get<std::string>();
    def.task.success_check = jt.at("success_check").get<std::string>();
    def.task.horizon = jt.value("horizon", 400);
    for (const auto& jo : jt.at("objects")) {
        ObjectSpec spec;
        spec.id = jo.at("id").get<std::string>();
        spec.geom = parse_geom(jo.at("class").get<std::string>());
        spec.param = jo.at("param").get<double>();
        def.task.objects.push_back(spec);
    }
    for (const auto& js : jt.at("subtasks")) {
        SubtaskSpec st;
        st.reference_object = js.at("reference").get<std::string>();
        st.end_metric = parse_metric(js.at("metric").get<std::string>());
        def.task.subtasks.push_back(st);
    }
    for (const auto& [vname, jv] : jt.at("variants").items()) {
        ResetDistribution dist;
        for (const auto& [oid, jr] : jv.items()) {
            ResetRegion r;
            parse_range(jr.at("x"), r.x_lo, r.x_hi, "x");
            parse_range(jr.at("y"), r.y_lo, r.y_hi, "y");
            parse_range(jr.at("theta"), r.theta_lo, r.theta_hi, "theta");
            if (jr.contains("scale")) parse_range(jr.at("scale"), r.scale_lo, r.scale_hi, "scale");
            dist.regions[oid] = r;
        }
        def.variants[vname] = dist;
    }
    validate_task(def.task);
    return def;
}

}  // namespace

std::vector<TaskDef> load_task_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open task file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError("task file " + path.string() + ": " + e.what());
    }
    std::vector<TaskDef> out;
    if (!doc.contains("tasks") || !doc.at("tasks").is_array())
        throw ValidationError("task file " + path.string() + ": missing \"tasks\" array");
    for (const auto& jt : doc.at("tasks")) out.push_back(parse_task(jt));
    return out;
}

}  // namespace demogen
