#pragma once

namespace dmalab {

inline constexpr const char* kVersionString = "dmalab 0.1.0";

}  // namespace dmalab
