#include "json_out.hpp"
#include "qcde/csv.hpp"

#include <cmath>

namespace qcde::detail {

namespace {

void dump_rec(const nlohmann::ordered_json& v, int depth, std::string& out)
{
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  if (v.is_object()) {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first) {
        out += ",\n";
      }
      first = false;
      out += pad;
      out += nlohmann::ordered_json(it.key()).dump();
      out += ": ";
      dump_rec(it.value(), depth + 1, out);
    }
    out += "\n" + close_pad + "}";
  } else if (v.is_array()) {
    if (v.empty()) {
      out += "[]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) {
        out += ",\n";
      }
      out += pad;
      dump_rec(v[i], depth + 1, out);
    }
    out += "\n" + close_pad + "]";
  } else if (v.is_number_float()) {
    const double d = v.get<double>();
    out += std::isfinite(d) ? format_number(d) : "null";
  } else {
    out += v.dump();
  }
}

} // namespace

std::string dump_json(const nlohmann::ordered_json& value)
{
  std::string out;
  dump_rec(value, 0, out);
  out += "\n";
  return out;
}

} // namespace qcde::detail
