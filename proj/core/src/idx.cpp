// Copyright 2026 The fedsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedsim/idx.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

namespace fedsim::data {

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError(IdxErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  std::uint32_t be32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    std::span<const std::uint8_t> s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw IdxError(IdxErrorKind::kTruncated, name_ + " is truncated");
    }
  }
  const std::vector<std::uint8_t>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path, std::optional<int> num_classes) {
  const auto image_bytes = read_all(images_path);
  const auto label_bytes = read_all(labels_path);
  Reader images(image_bytes, images_path.string());
  Reader labels(label_bytes, labels_path.string());

  if (images.be32() != kIdxImageMagic) {
    throw IdxError(IdxErrorKind::kBadMagic, images_path.string() + ": bad image magic");
  }
  if (labels.be32() != kIdxLabelMagic) {
    throw IdxError(IdxErrorKind::kBadMagic, labels_path.string() + ": bad label magic");
  }
  const std::uint32_t n_images = images.be32();
  const std::uint32_t rows = images.be32();
  const std::uint32_t cols = images.be32();
  const std::uint32_t n_labels = labels.be32();
  if (n_images != n_labels) {
    throw IdxError(IdxErrorKind::kCountMismatch, std::to_string(n_images) + " images but " +
                                                     std::to_string(n_labels) + " labels");
  }
  const std::size_t width = static_cast<std::size_t>(rows) * cols;
  auto pixels = images.take(static_cast<std::size_t>(n_images) * width);
  auto raw_labels = labels.take(n_labels);

  LabeledDataset ds;
  std::vector<double> values(pixels.size());
  std::transform(pixels.begin(), pixels.end(), values.begin(),
                 [](std::uint8_t p) { return static_cast<double>(p) / 255.0; });
  ds.features = Tensor({n_images, width}, std::move(values), Check::kNone);
  ds.labels.assign(raw_labels.begin(), raw_labels.end());
  const int max_label = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end());
  ds.num_classes = num_classes.value_or(std::max(2, max_label + 1));
  ds.validate();
  return ds;
}

void write_idx_images(const std::filesystem::path& path, std::uint32_t count, std::uint32_t rows,
                      std::uint32_t cols, std::span<const std::uint8_t> pixels) {
  if (pixels.size() != static_cast<std::size_t>(count) * rows * cols) {
    throw ShapeError("pixel buffer does not match count x rows x cols");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IdxError(IdxErrorKind::kIo, "cannot write " + path.string());
  put_be32(out, kIdxImageMagic);
  put_be32(out, count);
  put_be32(out, rows);
  put_be32(out, cols);
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IdxError(IdxErrorKind::kIo, "cannot write " + path.string());
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

}  // namespace fedsim::data
