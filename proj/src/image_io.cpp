#include "ebgan/image_io.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ebgan/errors.hpp"

namespace ebgan {

namespace {

// u8 -> [-1,1] and back; both directions round-trip through lround exactly.
inline float u8_to_unit(int v) { return static_cast<float>(v) / 127.5f - 1.0f; }

inline int unit_to_u8(float v) {
  const float scaled = (v + 1.0f) * 127.5f;
  const long r = std::lround(scaled);
  return static_cast<int>(std::clamp(r, 0L, 255L));
}

}  // namespace

torch::Tensor load_image(const std::filesystem::path& path, long resolution) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw IoError("cannot decode image: " + path.string());
  }
  if (bgr.rows != bgr.cols) {
    const int side = std::min(bgr.rows, bgr.cols);
    const int r0 = (bgr.rows - side) / 2;
    const int c0 = (bgr.cols - side) / 2;
    bgr = bgr(cv::Rect(c0, r0, side, side)).clone();
  }
  if (bgr.rows != resolution) {
    cv::Mat resized;
    const auto interp = bgr.rows > resolution ? cv::INTER_AREA : cv::INTER_LINEAR;
    cv::resize(bgr, resized, cv::Size(static_cast<int>(resolution), static_cast<int>(resolution)),
               0, 0, interp);
    bgr = resized;
  }
  auto out = torch::empty({3, resolution, resolution}, torch::kFloat32);
  auto acc = out.accessor<float, 3>();
  for (long r = 0; r < resolution; ++r) {
    const auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(r));
    for (long c = 0; c < resolution; ++c) {
      acc[0][r][c] = u8_to_unit(row[c][2]);
      acc[1][r][c] = u8_to_unit(row[c][1]);
      acc[2][r][c] = u8_to_unit(row[c][0]);
    }
  }
  return out;
}

torch::Tensor load_image_native(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw IoError("cannot decode image: " + path.string());
  }
  auto out = torch::empty({3, bgr.rows, bgr.cols}, torch::kFloat32);
  auto acc = out.accessor<float, 3>();
  for (long r = 0; r < bgr.rows; ++r) {
    const auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(r));
    for (long c = 0; c < bgr.cols; ++c) {
      acc[0][r][c] = u8_to_unit(row[c][2]);
      acc[1][r][c] = u8_to_unit(row[c][1]);
      acc[2][r][c] = u8_to_unit(row[c][0]);
    }
  }
  return out;
}

void save_image(const torch::Tensor& image, const std::filesystem::path& path) {
  if (image.dim() != 3 || image.size(0) != 3) {
    throw ValidationError("save_image expects a (3,H,W) tensor");
  }
  auto img = image.to(torch::kFloat32).contiguous();
  const long h = img.size(1);
  const long w = img.size(2);
  cv::Mat bgr(static_cast<int>(h), static_cast<int>(w), CV_8UC3);
  auto acc = img.accessor<float, 3>();
  for (long r = 0; r < h; ++r) {
    auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(r));
    for (long c = 0; c < w; ++c) {
      row[c][2] = static_cast<unsigned char>(unit_to_u8(acc[0][r][c]));
      row[c][1] = static_cast<unsigned char>(unit_to_u8(acc[1][r][c]));
      row[c][0] = static_cast<unsigned char>(unit_to_u8(acc[2][r][c]));
    }
  }
  if (!cv::imwrite(path.string(), bgr)) {
    throw IoError("cannot write image: " + path.string());
  }
}

torch::Tensor quantize_u8(const torch::Tensor& image) {
  auto img = image.to(torch::kFloat32).contiguous();
  auto flat = img.view(-1);
  auto out = torch::empty_like(flat);
  auto in_acc = flat.accessor<float, 1>();
  auto out_acc = out.accessor<float, 1>();
  for (long i = 0; i < flat.size(0); ++i) {
    out_acc[i] = u8_to_unit(unit_to_u8(in_acc[i]));
  }
  return out.view(img.sizes());
}

}  // namespace ebgan
