#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "segtopics/model.hpp"

namespace segtopics {

// SGH1 model file:
//   "SGH1" | header_bytes: u32 LE | JSON header | f32 LE blob
// The header carries the config, the decision threshold and a tensor
// manifest (name, shape, byte offset into the blob) in named_tensors()
// order. Parameters are narrowed to 32-bit floats on write.
std::vector<std::uint8_t> encode_model(const HeadModel& model);
HeadModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const HeadModel& model, const std::filesystem::path& path);
HeadModel load_model(const std::filesystem::path& path);

// Rounds every parameter to the nearest 32-bit float, i.e. the values a
// save/load cycle reproduces.
void round_to_float(HeadParams& params);

} // namespace segtopics
