#pragma once

#include "averaging.hpp"
#include "diffraction.hpp"
#include "folner.hpp"
#include "observable.hpp"
#include "signal.hpp"
#include "source.hpp"
#include "spectrum.hpp"
#include "types.hpp"
#include "wwpoint.hpp"

namespace ww {
inline constexpr const char* kVersion = "1.0.0";
}
