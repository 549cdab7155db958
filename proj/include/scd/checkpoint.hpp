#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scd/tensor.hpp"

namespace scd {

// Checkpoint layout: an 8-byte little-endian header length, a JSON array of
// {"name", "shape", "offset"} entries (offset in bytes into the payload),
// then the payload of little-endian 32-bit floats in entry order.
struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::uint64_t offset = 0;
};

template <typename T>
void save_checkpoint(const std::string& path, const Tape<T>& tape);

// Loads into an already-constructed parameter registry. Names and shapes
// must match the file exactly (both directions).
template <typename T>
void load_checkpoint(const std::string& path, Tape<T>& tape);

std::vector<CheckpointEntry> read_checkpoint_header(const std::string& path);

std::int64_t checkpoint_value_count(const std::string& path);

}  // namespace scd
