#pragma once

// Built-in design presets. The JSON documents live in presets/*.json and are
// compiled in through a header generated at configure time.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bayescal/design_model.hpp"
#include "bayescal/preset_data.hpp"

namespace bayescal {

inline std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& e : presets_data::kEntries) out.emplace_back(e.name);
    return out;
}

/// The raw preset document, or nullopt for an unknown name.
inline std::optional<json> preset_json(std::string_view name) {
    for (const auto& e : presets_data::kEntries) {
        if (e.name == name) return json::parse(e.text);
    }
    return std::nullopt;
}

inline DesignSpec load_preset(std::string_view name) {
    auto j = preset_json(name);
    if (!j) throw DomainError("unknown preset '" + std::string(name) + "'");
    return design_from_json(*j);
}

}  // namespace bayescal
