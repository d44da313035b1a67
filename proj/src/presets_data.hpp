#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gnb::detail {

/// (name, JSON text) for every file in presets/, generated at build time.
const std::vector<std::pair<std::string, std::string>>& embedded_presets();

}  // namespace gnb::detail
