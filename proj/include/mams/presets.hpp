#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mams/spec_io.hpp"

namespace mams {

/// Names of the built-in figure presets (fig4, fig5_a, ...). "fig5" is an
/// alias for fig5_b.
std::vector<std::string> preset_names();

/// Spec text of a preset, or nullopt for an unknown name.
std::optional<std::string_view> preset_text(std::string_view name);

/// Throws ParseError for an unknown name.
SystemSpec load_preset(std::string_view name);

}  // namespace mams
