#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mtjsnn/dataset.hpp"
#include "mtjsnn/errors.hpp"

using namespace mtjsnn;
namespace fs = std::filesystem;

namespace {

Dataset sample() {
  Dataset d;
  d.rows = 3;
  d.cols = 2;
  d.labels = {7, 1};
  d.pixels = {0, 255, 10, 20, 30, 40, 1, 2, 3, 4, 5, 6};
  return d;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mtjsnn_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("IDX round trip") {
  const auto d = sample();
  save_idx(d, scratch("i.idx3"), scratch("l.idx1"));
  const auto r = load_idx(scratch("i.idx3"), scratch("l.idx1"));
  CHECK(r.rows == 3);
  CHECK(r.cols == 2);
  CHECK(r.pixels == d.pixels);
  CHECK(r.labels == d.labels);
  CHECK(r.image(0)[1] == 1.0);
  CHECK(r.image(1)[0] == doctest::Approx(1.0 / 255.0));
  const auto same = load_dataset(scratch("i.idx3"), scratch("l.idx1"));
  CHECK(same.labels == d.labels);
}

TEST_CASE("raw subset round trip and header dispatch") {
  const auto d = sample();
  save_raw(d, scratch("s.raw"));
  const auto r = load_dataset(scratch("s.raw"));
  CHECK(r.pixels == d.pixels);
  CHECK(r.labels == d.labels);
  const auto one = d.subset(1, 1);
  CHECK(one.size() == 1);
  CHECK(one.labels[0] == 1);
  CHECK(one.pixels.front() == 1);
}

TEST_CASE("bad dataset files are rejected") {
  {
    std::ofstream f(scratch("bad.idx3"), std::ios::binary);
    f << "junkjunkjunk";
  }
  CHECK_THROWS_AS(load_dataset(scratch("bad.idx3"), scratch("l.idx1")), InvalidArgument);
  CHECK_THROWS_AS(load_dataset(scratch("missing.idx3"), scratch("l.idx1")), InvalidArgument);
  const auto d = sample();
  save_idx(d, scratch("i2.idx3"), scratch("l2.idx1"));
  fs::resize_file(scratch("i2.idx3"), fs::file_size(scratch("i2.idx3")) - 3);
  CHECK_THROWS_AS(load_idx(scratch("i2.idx3"), scratch("l2.idx1")), InvalidArgument);
}
