#pragma once

namespace spectra {

inline constexpr const char* kToolVersion = "spectra 0.1.0";

}  // namespace spectra
