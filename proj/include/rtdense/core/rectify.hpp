#pragma once

#include "rtdense/core/types.hpp"

namespace rtdense {

/// Remap an image through a rectification map with bilinear interpolation.
/// Out-of-view pixels come out black. Throws std::invalid_argument when the
/// raw image does not match the map's declared source size.
GrayImage rectify(const GrayImage& raw, const RectifyMap& map);
ColorImage rectify(const ColorImage& raw, const RectifyMap& map);

}  // namespace rtdense
