#include "scd/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace scd {

namespace {

using nlohmann::json;

void write_u64_le(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw std::runtime_error("checkpoint: truncated header length");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_f32_le(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), 4);
}

float read_f32_le(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

json header_json(const std::vector<CheckpointEntry>& entries) {
  json arr = json::array();
  for (const CheckpointEntry& e : entries) {
    arr.push_back(json{{"name", e.name},
                       {"shape", {e.shape.n, e.shape.c, e.shape.h, e.shape.w}},
                       {"offset", e.offset}});
  }
  return arr;
}

std::vector<CheckpointEntry> parse_header(const std::string& text) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("checkpoint: invalid header JSON: ") + e.what());
  }
  if (!arr.is_array()) throw std::runtime_error("checkpoint: header must be a JSON array");
  std::vector<CheckpointEntry> entries;
  for (const json& item : arr) {
    CheckpointEntry e;
    e.name = item.at("name").get<std::string>();
    const auto s = item.at("shape").get<std::vector<int>>();
    if (s.size() != 4) throw std::runtime_error("checkpoint: shape of " + e.name + " is not 4-d");
    e.shape = Shape{s[0], s[1], s[2], s[3]};
    e.offset = item.at("offset").get<std::uint64_t>();
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::string& path, const Tape<T>& tape) {
  std::vector<CheckpointEntry> entries;
  std::uint64_t offset = 0;
  for (const auto& p : tape.parameters()) {
    entries.push_back(CheckpointEntry{p.name, p.tensor.shape(), offset});
    offset += static_cast<std::uint64_t>(p.tensor.numel()) * 4;
  }
  const std::string header = header_json(entries).dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  write_u64_le(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& p : tape.parameters())
    for (T v : p.tensor.value()) write_f32_le(out, static_cast<float>(v));
  if (!out) throw std::runtime_error("failed while writing checkpoint: " + path);
}

std::vector<CheckpointEntry> read_checkpoint_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  const std::uint64_t len = read_u64_le(in);
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("checkpoint: truncated header");
  return parse_header(header);
}

std::int64_t checkpoint_value_count(const std::string& path) {
  std::int64_t total = 0;
  for (const CheckpointEntry& e : read_checkpoint_header(path)) total += e.shape.numel();
  return total;
}

template <typename T>
void load_checkpoint(const std::string& path, Tape<T>& tape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  const std::uint64_t len = read_u64_le(in);
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("checkpoint: truncated header");
  const std::vector<CheckpointEntry> entries = parse_header(header);
  const std::uint64_t payload_start = 8 + len;

  std::map<std::string, const CheckpointEntry*> by_name;
  for (const CheckpointEntry& e : entries) by_name[e.name] = &e;
  if (by_name.size() != entries.size())
    throw std::runtime_error("checkpoint: duplicate parameter names in header");

  if (entries.size() != tape.parameters().size())
    throw std::runtime_error("checkpoint/config mismatch: file has " +
                             std::to_string(entries.size()) + " parameters, model has " +
                             std::to_string(tape.parameters().size()));
  for (auto& p : tape.parameters()) {
    const auto it = by_name.find(p.name);
    if (it == by_name.end())
      throw std::runtime_error("checkpoint/config mismatch: parameter '" + p.name +
                               "' missing from file");
    const CheckpointEntry& e = *it->second;
    if (!(e.shape == p.tensor.shape()))
      throw std::runtime_error("checkpoint/config mismatch: parameter '" + p.name + "' has shape " +
                               e.shape.str() + " in file but " + p.tensor.shape().str() +
                               " in model");
    in.seekg(static_cast<std::streamoff>(payload_start + e.offset));
    auto& values = p.tensor.value();
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<T>(read_f32_le(in));
    if (!in) throw std::runtime_error("checkpoint: truncated payload reading '" + p.name + "'");
  }
}

template void save_checkpoint<float>(const std::string&, const Tape<float>&);
template void save_checkpoint<double>(const std::string&, const Tape<double>&);
template void load_checkpoint<float>(const std::string&, Tape<float>&);
template void load_checkpoint<double>(const std::string&, Tape<double>&);

}  // namespace scd
