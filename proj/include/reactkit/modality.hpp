#pragma once

#include <array>
#include <string>
#include <string_view>

namespace reactkit {

// Cue combination of one warning. Cues inside a warning fire together.
enum class Modality { V, AV, HV, HAV };

inline constexpr std::array<Modality, 4> kAllModalities{Modality::V, Modality::AV, Modality::HV, Modality::HAV};

std::string to_string(Modality m);
// Throws ConfigError on unknown names.
Modality modality_from_string(std::string_view s);

}  // namespace reactkit
