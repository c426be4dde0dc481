// Minimal SVG plot writer: density polyline, optional histogram bars.
#pragma once

#include <string>

#include "fe/density.hpp"
#include "fe/rmt.hpp"

namespace fe {

// Writes a standalone SVG overlaying the curve (line) on the histogram
// (bars); pass emp = nullptr for a curve-only plot.
void svg_overlay(const DensityCurve& curve, const EmpiricalSpectrum* emp,
                 const std::string& path, const std::string& title = "");

}  // namespace fe
