#pragma once

#include <json.hpp>

#include <string>

namespace qcde::detail {

//! Serializes like nlohmann::json::dump(2) but prints every floating-point
//! number with 17 significant digits (non-finite values become null).
std::string dump_json(const nlohmann::ordered_json& value);

} // namespace qcde::detail
