#include "inwdt/correspondence.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace inwdt {
namespace {

std::uint32_t load_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32_le(std::uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v & 0xFF);
  p[1] = static_cast<unsigned char>((v >> 8) & 0xFF);
  p[2] = static_cast<unsigned char>((v >> 16) & 0xFF);
  p[3] = static_cast<unsigned char>((v >> 24) & 0xFF);
}

float load_f32_le(const unsigned char* p) { return std::bit_cast<float>(load_u32_le(p)); }

}  // namespace

CorrespondenceField::CorrespondenceField(int width, int height, std::vector<Displacement> flow)
    : width_(width), height_(height), flow_(std::move(flow)) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("flow dimensions must be positive");
  }
  if (flow_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("flow length must be width*height");
  }
  for (const auto& d : flow_) {
    if (!std::isfinite(d.dx) || !std::isfinite(d.dy)) {
      throw std::invalid_argument("flow displacements must be finite");
    }
  }
}

CorrespondenceField load_flo(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FlowFormatError(FlowFormatError::Kind::kMissingFile, "cannot open flow file: " + path.string());
  }
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 4 || load_f32_le(bytes.data()) != kFloMagic) {
    throw FlowFormatError(FlowFormatError::Kind::kBadMagic, "bad .flo magic: " + path.string());
  }
  if (bytes.size() < 12) {
    throw FlowFormatError(FlowFormatError::Kind::kTruncated, "truncated .flo header: " + path.string());
  }
  const auto w = static_cast<std::int32_t>(load_u32_le(bytes.data() + 4));
  const auto h = static_cast<std::int32_t>(load_u32_le(bytes.data() + 8));
  if (w <= 0 || h <= 0) {
    throw FlowFormatError(FlowFormatError::Kind::kBadDimensions,
                          "non-positive .flo dimensions: " + std::to_string(w) + "x" + std::to_string(h));
  }
  const std::uint64_t count = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
  if ((bytes.size() - 12) / 8 < count) {
    throw FlowFormatError(FlowFormatError::Kind::kTruncated, "truncated .flo payload: " + path.string());
  }

  std::vector<Displacement> flow(count);
  const unsigned char* p = bytes.data() + 12;
  for (auto& d : flow) {
    d.dx = load_f32_le(p);
    d.dy = load_f32_le(p + 4);
    p += 8;
    if (!std::isfinite(d.dx) || !std::isfinite(d.dy)) {
      throw FlowFormatError(FlowFormatError::Kind::kNonFinite, "non-finite flow value: " + path.string());
    }
  }
  return CorrespondenceField(w, h, std::move(flow));
}

void write_flo(const CorrespondenceField& field, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(12 + 8 * field.flow().size());
  store_u32_le(std::bit_cast<std::uint32_t>(kFloMagic), bytes.data());
  store_u32_le(static_cast<std::uint32_t>(field.width()), bytes.data() + 4);
  store_u32_le(static_cast<std::uint32_t>(field.height()), bytes.data() + 8);
  unsigned char* p = bytes.data() + 12;
  for (const auto& d : field.flow()) {
    store_u32_le(std::bit_cast<std::uint32_t>(d.dx), p);
    store_u32_le(std::bit_cast<std::uint32_t>(d.dy), p + 4);
    p += 8;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FlowFormatError(FlowFormatError::Kind::kUnwritable, "cannot open for writing: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw FlowFormatError(FlowFormatError::Kind::kUnwritable, "write failed: " + path.string());
  }
}

CorrespondenceField identity_field(int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("flow dimensions must be positive");
  }
  return CorrespondenceField(
      width, height,
      std::vector<Displacement>(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)));
}

std::pair<int, int> target_coords(const CorrespondenceField& field, int x, int y, int target_w,
                                  int target_h) {
  const auto& d = field.at(x, y);
  // Clamp in double before the integer conversion so huge flows cannot overflow.
  const double tx = std::clamp(std::round(x + static_cast<double>(d.dx)), 0.0, target_w - 1.0);
  const double ty = std::clamp(std::round(y + static_cast<double>(d.dy)), 0.0, target_h - 1.0);
  return {static_cast<int>(tx), static_cast<int>(ty)};
}

}  // namespace inwdt
