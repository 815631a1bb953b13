#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "rowlegal/double_row.hpp"
#include "rowlegal/single_row.hpp"

namespace rowlegal {

/** A parsed instance file: exactly one of the two members is set. */
struct ParsedInstance {
    std::optional<SingleRowInstance> single;
    std::optional<DoubleRowInstance> double_row;
};

/**
 * Loads and validates an instance file. Single-row files carry "cells",
 * double-row files carry "doubles" and "gaps". Validation failures throw
 * ValidationError / InfeasibleError with the offending JSON path and the
 * violated inequality in the message.
 */
ParsedInstance parse_instance_file(const std::string& path);
ParsedInstance parse_instance_json(const nlohmann::json& j);

nlohmann::json emit_instance(const SingleRowInstance& inst);
nlohmann::json emit_instance(const DoubleRowInstance& inst);

nlohmann::json emit_solution(const SingleRowInstance& inst, const SingleRowSolution& sol);
nlohmann::json emit_solution(const DoubleRowInstance& inst, const DoubleRowSolution& sol);

} // namespace rowlegal
