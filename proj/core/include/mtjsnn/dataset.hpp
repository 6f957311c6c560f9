#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace mtjsnn {

// Labeled 8-bit grayscale images.
struct Dataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // image-major, row-major within an image
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  // Pixel intensities scaled to [0, 1].
  std::vector<double> image(std::size_t i) const;
  Dataset subset(std::size_t first, std::size_t count) const;
};

// IDX pair (magic 2051 for images, 2049 for labels).
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);
void save_idx(const Dataset& d, const std::filesystem::path& images, const std::filesystem::path& labels);

// Raw subset: "MTJR", u32 count, u32 rows, u32 cols (big-endian), then per image one
// label byte followed by rows*cols pixel bytes.
Dataset load_raw(const std::filesystem::path& path);
void save_raw(const Dataset& d, const std::filesystem::path& path);

// Dispatches on the file header.
Dataset load_dataset(const std::filesystem::path& images, const std::filesystem::path& labels = {});

}  // namespace mtjsnn
