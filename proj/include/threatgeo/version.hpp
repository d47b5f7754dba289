#pragma once

#include <string_view>

namespace threatgeo {

#ifndef THREATGEO_VERSION
#define THREATGEO_VERSION "0.0.0"
#endif

inline constexpr std::string_view kVersion = THREATGEO_VERSION;

} // namespace threatgeo
