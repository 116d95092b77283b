#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace ramcut {

using WarningSink = std::function<void(std::string_view)>;

/// Emit a non-fatal warning. Goes to stderr unless a sink is installed.
void warn(std::string_view message);

/// Install a sink for warnings; returns the previous one. An empty sink restores stderr.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace ramcut
