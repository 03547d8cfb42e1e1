#pragma once

#include <string>

#include "fanlab/spectral.hpp"

namespace fanlab::cli {

// Log-log singular-value plot of one spectrum experiment: curves for the
// base, noise, and noisy spectra plus dashed horizontal reference lines at
// the Marchenko-Pastur bulk edges and tau*. Output is deterministic for a
// given report (fixed layout, fixed coordinate formatting).
void write_spectrum_svg(const std::string& path, const SpectralReport& report);

}  // namespace fanlab::cli
