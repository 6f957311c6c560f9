#include "mtjsnn/dataset.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <fstream>

#include "mtjsnn/errors.hpp"

namespace mtjsnn {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw InvalidArgument(what + ": truncated header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + p.string());
  return out;
}

void read_bytes(std::istream& in, std::vector<std::uint8_t>& v, const std::string& what) {
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size()))) {
    throw InvalidArgument(what + ": truncated data");
  }
}

}  // namespace

std::vector<double> Dataset::image(std::size_t i) const {
  const std::size_t n = rows * cols;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = pixels[i * n + k] / 255.0;
  return out;
}

Dataset Dataset::subset(std::size_t first, std::size_t count) const {
  if (first > size()) first = size();
  count = std::min(count, size() - first);
  const std::size_t n = rows * cols;
  Dataset d{rows, cols, {}, {}};
  d.pixels.assign(pixels.begin() + static_cast<std::ptrdiff_t>(first * n),
                  pixels.begin() + static_cast<std::ptrdiff_t>((first + count) * n));
  d.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(first),
                  labels.begin() + static_cast<std::ptrdiff_t>(first + count));
  return d;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  auto in = open_in(images);
  const std::string iw = images.string();
  if (read_be32(in, iw) != 2051) throw InvalidArgument(iw + ": not an IDX image file (magic 2051)");
  const std::uint32_t count = read_be32(in, iw);
  Dataset d;
  d.rows = read_be32(in, iw);
  d.cols = read_be32(in, iw);
  d.pixels.resize(std::size_t{count} * d.rows * d.cols);
  read_bytes(in, d.pixels, iw);

  auto lin = open_in(labels);
  const std::string lw = labels.string();
  if (read_be32(lin, lw) != 2049) throw InvalidArgument(lw + ": not an IDX label file (magic 2049)");
  if (read_be32(lin, lw) != count) throw InvalidArgument(lw + ": label count does not match images");
  d.labels.resize(count);
  read_bytes(lin, d.labels, lw);
  return d;
}

void save_idx(const Dataset& d, const std::filesystem::path& images, const std::filesystem::path& labels) {
  auto out = open_out(images);
  write_be32(out, 2051);
  write_be32(out, static_cast<std::uint32_t>(d.size()));
  write_be32(out, static_cast<std::uint32_t>(d.rows));
  write_be32(out, static_cast<std::uint32_t>(d.cols));
  out.write(reinterpret_cast<const char*>(d.pixels.data()), static_cast<std::streamsize>(d.pixels.size()));
  auto lout = open_out(labels);
  write_be32(lout, 2049);
  write_be32(lout, static_cast<std::uint32_t>(d.size()));
  lout.write(reinterpret_cast<const char*>(d.labels.data()), static_cast<std::streamsize>(d.labels.size()));
}

Dataset load_raw(const std::filesystem::path& path) {
  auto in = open_in(path);
  const std::string w = path.string();
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "MTJR") throw InvalidArgument(w + ": not a raw subset file");
  const std::uint32_t count = read_be32(in, w);
  Dataset d;
  d.rows = read_be32(in, w);
  d.cols = read_be32(in, w);
  const std::size_t n = d.rows * d.cols;
  d.labels.resize(count);
  d.pixels.resize(std::size_t{count} * n);
  std::vector<std::uint8_t> record(n + 1);
  for (std::uint32_t i = 0; i < count; ++i) {
    read_bytes(in, record, w);
    d.labels[i] = record[0];
    std::copy(record.begin() + 1, record.end(), d.pixels.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  return d;
}

void save_raw(const Dataset& d, const std::filesystem::path& path) {
  auto out = open_out(path);
  out.write("MTJR", 4);
  write_be32(out, static_cast<std::uint32_t>(d.size()));
  write_be32(out, static_cast<std::uint32_t>(d.rows));
  write_be32(out, static_cast<std::uint32_t>(d.cols));
  const std::size_t n = d.rows * d.cols;
  for (std::size_t i = 0; i < d.size(); ++i) {
    out.put(static_cast<char>(d.labels[i]));
    out.write(reinterpret_cast<const char*>(d.pixels.data() + i * n), static_cast<std::streamsize>(n));
  }
}

Dataset load_dataset(const std::filesystem::path& images, const std::filesystem::path& labels) {
  auto in = open_in(images);
  char magic[4] = {};
  in.read(magic, 4);
  if (std::string(magic, 4) == "MTJR") return load_raw(images);
  if (labels.empty()) throw InvalidArgument("IDX images need a label file");
  return load_idx(images, labels);
}

}  // namespace mtjsnn
