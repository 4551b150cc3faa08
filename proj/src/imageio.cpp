#include "mfs/imageio.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <stdexcept>

namespace mfs::imageio {

RgbImage load_rgb(const std::string& path) {
    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) throw std::runtime_error("cannot read image: " + path);
    RgbImage img(bgr.rows, bgr.cols);
    for (int r = 0; r < bgr.rows; ++r) {
        const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(r);
        for (int c = 0; c < bgr.cols; ++c) {
            img.at(r, c, 0) = row[c][2];
            img.at(r, c, 1) = row[c][1];
            img.at(r, c, 2) = row[c][0];
        }
    }
    return img;
}

void save_rgb(const std::string& path, const RgbImage& img) {
    cv::Mat bgr(img.h, img.w, CV_8UC3);
    for (int r = 0; r < img.h; ++r) {
        cv::Vec3b* row = bgr.ptr<cv::Vec3b>(r);
        for (int c = 0; c < img.w; ++c) {
            row[c][2] = img.at(r, c, 0);
            row[c][1] = img.at(r, c, 1);
            row[c][0] = img.at(r, c, 2);
        }
    }
    if (!cv::imwrite(path, bgr)) throw std::runtime_error("cannot write image: " + path);
}

BinaryMask load_mask(const std::string& path) {
    cv::Mat g = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (g.empty()) throw std::runtime_error("cannot read mask: " + path);
    BinaryMask m(g.rows, g.cols);
    for (int r = 0; r < g.rows; ++r) {
        const uint8_t* row = g.ptr<uint8_t>(r);
        for (int c = 0; c < g.cols; ++c) m.px[static_cast<size_t>(r) * g.cols + c] = row[c] > 127;
    }
    return m;
}

void save_mask(const std::string& path, const BinaryMask& m) {
    cv::Mat g(m.h, m.w, CV_8UC1);
    for (int r = 0; r < m.h; ++r) {
        uint8_t* row = g.ptr<uint8_t>(r);
        for (int c = 0; c < m.w; ++c) row[c] = m.px[static_cast<size_t>(r) * m.w + c] ? 255 : 0;
    }
    if (!cv::imwrite(path, g)) throw std::runtime_error("cannot write mask: " + path);
}

void save_gray(const std::string& path, const GrayImage& img) {
    cv::Mat g(img.h, img.w, CV_8UC1);
    for (int r = 0; r < img.h; ++r) {
        uint8_t* row = g.ptr<uint8_t>(r);
        for (int c = 0; c < img.w; ++c) row[c] = img.px[static_cast<size_t>(r) * img.w + c];
    }
    if (!cv::imwrite(path, g)) throw std::runtime_error("cannot write image: " + path);
}

}  // namespace mfs::imageio
