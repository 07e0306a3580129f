#pragma once

#include <string>

#include "stylenorm/tensor.hpp"

namespace stylenorm {

// Binary PPM (P6, 8-bit, maxval 255). Pixels map to [-1, 1] by x/127.5 - 1;
// saving inverts with clamping, so values on the 8-bit lattice round-trip
// exactly. Malformed headers are rejected with the byte position.
TensorD loadImagePPM(const std::string& path);           // (1, 3, H, W)
void saveImagePPM(const std::string& path, const TensorD& t);

}  // namespace stylenorm
