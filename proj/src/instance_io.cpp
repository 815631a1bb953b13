#include "rowlegal/instance_io.hpp"

#include <fstream>

#include "rowlegal/errors.hpp"

namespace rowlegal {

namespace {

double get_number(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ValidationError(where + ": missing or non-numeric \"" + key + "\"");
    return j.at(key).get<double>();
}

PiecewiseQuadratic parse_cost(const nlohmann::json& j, const std::string& where) {
    if (!j.contains("cost")) throw ValidationError(where + ": missing \"cost\"");
    try {
        return PiecewiseQuadratic::from_json(j.at("cost"));
    } catch (const ValidationError& e) {
        throw ValidationError(where + "/cost: " + e.what());
    }
}

template <typename Cell>
Cell parse_cell(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    Cell c;
    c.id = j.contains("id") ? j.at("id").get<std::string>() : "";
    c.width = get_number(j, "width", where);
    c.cost = parse_cost(j, where);
    return c;
}

std::pair<double, double> parse_window(const nlohmann::json& j) {
    if (!j.contains("window") || !j.at("window").is_array() || j.at("window").size() != 2)
        throw ValidationError("/window: expected [x_min, x_max]");
    return {j.at("window")[0].get<double>(), j.at("window")[1].get<double>()};
}

nlohmann::json emit_cell(const std::string& id, double width, const PiecewiseQuadratic& cost) {
    return {{"id", id}, {"width", width}, {"cost", cost.to_json()}};
}

} // namespace

ParsedInstance parse_instance_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("instance file must contain a JSON object");
    ParsedInstance out;
    auto [x_min, x_max] = parse_window(j);
    if (j.contains("cells")) {
        if (j.contains("doubles") || j.contains("gaps"))
            throw ValidationError("an instance is either single-row (\"cells\") or double-row "
                                  "(\"doubles\" + \"gaps\"), not both");
        SingleRowInstance inst;
        inst.x_min = x_min;
        inst.x_max = x_max;
        std::size_t i = 0;
        for (const auto& cj : j.at("cells"))
            inst.cells.push_back(parse_cell<SingleRowCell>(cj, "/cells/" + std::to_string(i++)));
        inst.validate();
        out.single = std::move(inst);
        return out;
    }
    if (!j.contains("doubles") || !j.contains("gaps"))
        throw ValidationError("instance file needs \"cells\" (single-row) or \"doubles\" and "
                              "\"gaps\" (double-row)");
    DoubleRowInstance inst;
    inst.x_min = x_min;
    inst.x_max = x_max;
    std::size_t i = 0;
    for (const auto& cj : j.at("doubles"))
        inst.doubles.push_back(parse_cell<DoubleRowCell>(cj, "/doubles/" + std::to_string(i++)));
    i = 0;
    for (const auto& gj : j.at("gaps")) {
        const std::string where = "/gaps/" + std::to_string(i++);
        if (!gj.is_object()) throw ValidationError(where + ": expected an object");
        GapCells gap;
        std::size_t jj = 0;
        if (gj.contains("bottom"))
            for (const auto& cj : gj.at("bottom"))
                gap.bottom.push_back(
                    parse_cell<DoubleRowCell>(cj, where + "/bottom/" + std::to_string(jj++)));
        jj = 0;
        if (gj.contains("top"))
            for (const auto& cj : gj.at("top"))
                gap.top.push_back(
                    parse_cell<DoubleRowCell>(cj, where + "/top/" + std::to_string(jj++)));
        inst.gaps.push_back(std::move(gap));
    }
    inst.validate();
    out.double_row = std::move(inst);
    return out;
}

ParsedInstance parse_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open instance file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": malformed JSON: " + e.what());
    }
    return parse_instance_json(j);
}

nlohmann::json emit_instance(const SingleRowInstance& inst) {
    nlohmann::json cells = nlohmann::json::array();
    for (const SingleRowCell& c : inst.cells) cells.push_back(emit_cell(c.id, c.width, c.cost));
    return {{"format", 1}, {"window", {inst.x_min, inst.x_max}}, {"cells", cells}};
}

nlohmann::json emit_instance(const DoubleRowInstance& inst) {
    nlohmann::json doubles = nlohmann::json::array();
    for (const DoubleRowCell& c : inst.doubles) doubles.push_back(emit_cell(c.id, c.width, c.cost));
    nlohmann::json gaps = nlohmann::json::array();
    for (const GapCells& g : inst.gaps) {
        nlohmann::json bottom = nlohmann::json::array(), top = nlohmann::json::array();
        for (const DoubleRowCell& c : g.bottom) bottom.push_back(emit_cell(c.id, c.width, c.cost));
        for (const DoubleRowCell& c : g.top) top.push_back(emit_cell(c.id, c.width, c.cost));
        gaps.push_back({{"bottom", bottom}, {"top", top}});
    }
    return {{"format", 1}, {"window", {inst.x_min, inst.x_max}}, {"doubles", doubles}, {"gaps", gaps}};
}

nlohmann::json emit_solution(const SingleRowInstance& inst, const SingleRowSolution& sol) {
    nlohmann::json ids = nlohmann::json::array();
    for (const SingleRowCell& c : inst.cells) ids.push_back(c.id);
    nlohmann::json blocks = nlohmann::json::array();
    for (auto [first, last] : sol.blocks) blocks.push_back({first, last});
    return {{"format", 1},
            {"type", "single_row"},
            {"ids", ids},
            {"positions", sol.positions},
            {"blocks", blocks},
            {"cost", sol.total_cost}};
}

nlohmann::json emit_solution(const DoubleRowInstance& inst, const DoubleRowSolution& sol) {
    nlohmann::json ids = nlohmann::json::array();
    for (const DoubleRowCell& c : inst.doubles) ids.push_back(c.id);
    return {{"format", 1},
            {"type", "double_row"},
            {"ids", ids},
            {"x", sol.x},
            {"y", sol.y},
            {"z", sol.z},
            {"cost", sol.total_cost}};
}

} // namespace rowlegal
