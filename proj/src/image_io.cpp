// SPDX-License-Identifier: Apache-2.0
#include "resmaster/image_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "resmaster/errors.hpp"

namespace resmaster {
namespace {

class HeaderReader {
public:
    HeaderReader(const std::vector<std::uint8_t>& bytes, const std::string& origin) : bytes_(bytes), origin_(origin) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw IoError(origin_ + ": " + what + " at byte offset " + std::to_string(pos_));
    }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long number(const char* field) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size()) fail(std::string("unexpected end of header reading ") + field);
        if (!std::isdigit(bytes_[pos_])) fail(std::string("expected digits for ") + field);
        unsigned long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000UL) fail(std::string(field) + " is too large");
            ++pos_;
        }
        return value;
    }

    std::size_t& pos() { return pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    const std::string& origin_;
    std::size_t pos_ = 0;
};

}  // namespace

LatentGrid decode_netpbm(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
    HeaderReader in(bytes, origin);
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        in.fail("not a binary PGM/PPM file (expected magic P5 or P6)");
    }
    const std::size_t channels = bytes[1] == '6' ? 3 : 1;
    in.pos() = 2;
    const auto width = in.number("width");
    const auto height = in.number("height");
    const auto maxval = in.number("maxval");
    if (width == 0 || height == 0) in.fail("image dimensions must be positive");
    if (maxval == 0 || maxval > 255) in.fail("unsupported maxval " + std::to_string(maxval) + " (need 1..255)");
    if (in.pos() >= bytes.size() || !std::isspace(bytes[in.pos()])) {
        in.fail("expected a single whitespace byte after maxval");
    }
    ++in.pos();

    const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
    const std::size_t available = bytes.size() - in.pos();
    if (available < expected) {
        throw IoError(origin + ": truncated pixel data: expected " + std::to_string(expected) + " bytes from offset " +
                      std::to_string(in.pos()) + ", file ends at byte offset " + std::to_string(bytes.size()));
    }
    std::vector<double> values(expected);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < expected; ++i) {
        const auto sample = bytes[in.pos() + i];
        if (sample > maxval) {
            throw IoError(origin + ": sample " + std::to_string(sample) + " exceeds maxval at byte offset " +
                          std::to_string(in.pos() + i));
        }
        values[i] = static_cast<double>(sample) * scale;
    }
    return LatentGrid(height, width, channels, std::move(values));
}

std::uint8_t quantize_unit(double value) noexcept {
    if (!(value > 0.0)) return 0;  // also catches NaN
    if (value >= 1.0) return 255;
    return static_cast<std::uint8_t>(std::floor(value * 255.0 + 0.5));
}

std::vector<std::uint8_t> encode_netpbm(const LatentGrid& grid) {
    if (grid.channels() != 1 && grid.channels() != 3) {
        throw InvalidArgument("write_image: only 1 or 3 channels can be written, got " + grid.shape_string());
    }
    const std::string header = std::string(grid.channels() == 3 ? "P6" : "P5") + "\n" + std::to_string(grid.width()) +
                               " " + std::to_string(grid.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + grid.size());
    for (double v : grid.data()) out.push_back(quantize_unit(v));
    return out;
}

LatentGrid read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open image " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_netpbm(bytes, path.string());
}

void write_image(const LatentGrid& grid, const std::filesystem::path& path) {
    const auto bytes = encode_netpbm(grid);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

}  // namespace resmaster
