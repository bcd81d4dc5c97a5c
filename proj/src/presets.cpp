#include "mams/presets.hpp"

#include "mams/errors.hpp"

namespace mams {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& preset_table();
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::preset_table()) names.emplace_back(name);
  return names;
}

std::optional<std::string_view> preset_text(std::string_view name) {
  if (name == "fig5") name = "fig5_b";
  for (const auto& [key, text] : detail::preset_table()) {
    if (key == name) return text;
  }
  return std::nullopt;
}

SystemSpec load_preset(std::string_view name) {
  auto text = preset_text(name);
  if (!text) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ParseError("unknown preset '" + std::string(name) + "' (known: " + known + ", fig5)");
  }
  try {
    return parse_spec(*text);
  } catch (const ParseError& e) {
    throw ParseError("preset " + std::string(name) + ": " + e.what());
  }
}

}  // namespace mams
