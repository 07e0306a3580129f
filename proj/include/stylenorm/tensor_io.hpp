#pragma once

#include <string>

#include "stylenorm/tensor.hpp"

namespace stylenorm {

// ATNS binary tensor container:
//   magic "ATNS", u8 version=1, u8 dtype (0=f32, 1=f64), u8 rank,
//   rank x u32 little-endian dims, raw little-endian scalar data.

void saveAtns(const std::string& path, const Tensor<float>& t);
void saveAtns(const std::string& path, const Tensor<double>& t);

// dtype byte of the file at `path`, 0 or 1
int peekAtnsDtype(const std::string& path);

// Strict loads: the stored dtype must match the requested scalar type.
template <std::floating_point T>
Tensor<T> loadAtns(const std::string& path);

extern template Tensor<float> loadAtns<float>(const std::string&);
extern template Tensor<double> loadAtns<double>(const std::string&);

}  // namespace stylenorm
