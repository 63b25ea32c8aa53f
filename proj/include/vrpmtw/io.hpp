#pragma once

// JSON serialization of instances and solutions (schema "vrpmtw-v1").
//
// Instance:
//   { "schema": "vrpmtw-v1", "name": str, "seed": int,
//     "depot_x": num, "depot_y": num,
//     "horizon": {"open": num, "close": num}, "capacity": num,
//     "customers": [ {"id": int, "x": num, "y": num, "demand": num,
//                     "service_time": num,
//                     "windows": [{"open": num, "close": num}, ...]}, ... ] }
//
// Solution:
//   { "schema": "vrpmtw-v1", "instance": str,
//     "routes": [ {"customers": [int, ...]}, ... ],
//     "metrics": {"length": num, "duration": num, "vehicles_used": int,
//                 "solve_time": num} }        // metrics optional

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "model.hpp"

namespace vrpmtw {

inline constexpr const char* kSchemaVersion = "vrpmtw-v1";

using Json = nlohmann::json;

namespace detail {

inline void check_schema(const Json& j) {
    if (!j.is_object() || j.value("schema", std::string{}) != kSchemaVersion)
        throw StructuralError(std::string("expected schema \"") + kSchemaVersion + "\"");
}

template <class F>
auto parse_guard(F&& f) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw StructuralError(std::string("malformed JSON document: ") + e.what());
    }
}

}  // namespace detail

inline Json to_json(const TimeWindow& w) { return {{"open", w.open}, {"close", w.close}}; }

inline Json to_json(const Instance& inst) {
    Json customers = Json::array();
    for (const Customer& c : inst.customers()) {
        Json windows = Json::array();
        for (const TimeWindow& w : c.windows) windows.push_back(to_json(w));
        customers.push_back({{"id", c.id},
                             {"x", c.x},
                             {"y", c.y},
                             {"demand", c.demand},
                             {"service_time", c.service_time},
                             {"windows", std::move(windows)}});
    }
    return {{"schema", kSchemaVersion},
            {"name", inst.name()},
            {"seed", inst.seed()},
            {"depot_x", inst.depot_x()},
            {"depot_y", inst.depot_y()},
            {"horizon", to_json(inst.horizon())},
            {"capacity", inst.capacity()},
            {"customers", std::move(customers)}};
}

inline Instance instance_from_json(const Json& j) {
    detail::check_schema(j);
    return detail::parse_guard([&] {
        auto window = [](const Json& w) { return TimeWindow{w.at("open").get<double>(), w.at("close").get<double>()}; };
        std::vector<Customer> customers;
        for (const Json& c : j.at("customers")) {
            Customer cu;
            cu.id = c.at("id").get<int>();
            cu.x = c.at("x").get<double>();
            cu.y = c.at("y").get<double>();
            cu.demand = c.at("demand").get<double>();
            cu.service_time = c.at("service_time").get<double>();
            for (const Json& w : c.at("windows")) cu.windows.push_back(window(w));
            customers.push_back(std::move(cu));
        }
        return Instance(j.at("name").get<std::string>(), j.at("seed").get<std::uint64_t>(),
                        j.at("depot_x").get<double>(), j.at("depot_y").get<double>(), window(j.at("horizon")),
                        j.at("capacity").get<double>(), std::move(customers));
    });
}

inline Json to_json(const Metrics& m) {
    return {{"length", m.length},
            {"duration", m.duration},
            {"vehicles_used", m.vehicles_used},
            {"solve_time", m.solve_time}};
}

inline Json to_json(const Solution& sol, const std::string& instance_name, const Metrics* m = nullptr) {
    Json routes = Json::array();
    for (const Route& r : sol.routes) routes.push_back({{"customers", r}});
    Json j = {{"schema", kSchemaVersion}, {"instance", instance_name}, {"routes", std::move(routes)}};
    if (m != nullptr) j["metrics"] = to_json(*m);
    return j;
}

inline Solution solution_from_json(const Json& j) {
    detail::check_schema(j);
    return detail::parse_guard([&] {
        Solution sol;
        for (const Json& r : j.at("routes")) sol.routes.push_back(r.at("customers").get<Route>());
        return sol;
    });
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw StructuralError(path.string() + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline Instance load_instance(const std::filesystem::path& path) { return instance_from_json(read_json_file(path)); }

inline Solution load_solution(const std::filesystem::path& path) { return solution_from_json(read_json_file(path)); }

}  // namespace vrpmtw
