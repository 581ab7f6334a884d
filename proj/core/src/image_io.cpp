#include "latent/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace latent {

namespace {

struct ByteReader {
    std::string path;
    std::vector<char> bytes;
    std::size_t pos = 0;

    explicit ByteReader(const std::string& p) : path(p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw std::runtime_error(p + ": cannot open");
        bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw std::runtime_error(path + ": " + what + " at byte " + std::to_string(pos));
    }

    /// Skips whitespace and '#' comment lines between header tokens.
    void skip_separators() {
        while (pos < bytes.size()) {
            const char ch = bytes[pos];
            if (ch == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
                ++pos;
            } else {
                break;
            }
        }
    }

    std::size_t read_number() {
        skip_separators();
        if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9') {
            fail("expected decimal number");
        }
        std::size_t value = 0;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
            ++pos;
        }
        return value;
    }

    void expect_magic(const char* magic) {
        if (bytes.size() < 2 || bytes[0] != magic[0] || bytes[1] != magic[1]) {
            fail(std::string("expected magic '") + magic + "'");
        }
        pos = 2;
    }

    const unsigned char* payload(std::size_t needed) {
        // Exactly one whitespace byte after maxval, then raw pixel data.
        if (pos >= bytes.size()) fail("missing pixel data separator");
        const char ch = bytes[pos];
        if (ch != ' ' && ch != '\t' && ch != '\r' && ch != '\n') fail("expected whitespace");
        ++pos;
        if (bytes.size() - pos < needed) {
            fail("truncated pixel data, need " + std::to_string(needed) + " bytes, have " +
                 std::to_string(bytes.size() - pos));
        }
        return reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    }
};

unsigned char to_byte(double v) {
    const double scaled = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
    return static_cast<unsigned char>(scaled);
}

}  // namespace

ImageGrid read_ppm(const std::string& path) {
    ByteReader reader(path);
    reader.expect_magic("P6");
    const std::size_t width = reader.read_number();
    const std::size_t height = reader.read_number();
    const std::size_t maxval = reader.read_number();
    if (width == 0 || height == 0) reader.fail("zero image dimension");
    if (maxval != 255) reader.fail("unsupported maxval " + std::to_string(maxval));
    const unsigned char* data = reader.payload(width * height * 3);
    ImageGrid image(height, width, 3);
    for (std::size_t i = 0; i < image.values.size(); ++i) {
        image.values[i] = static_cast<double>(data[i]) / 255.0;
    }
    return image;
}

void write_ppm(const ImageGrid& image, const std::string& path) {
    require(image.channels == 3, "write_ppm: expected a 3-channel image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    std::vector<unsigned char> bytes(image.values.size());
    for (std::size_t i = 0; i < image.values.size(); ++i) bytes[i] = to_byte(image.values[i]);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

MaskGrid read_pgm_mask(const std::string& path) {
    ByteReader reader(path);
    reader.expect_magic("P5");
    const std::size_t width = reader.read_number();
    const std::size_t height = reader.read_number();
    const std::size_t maxval = reader.read_number();
    if (width == 0 || height == 0) reader.fail("zero image dimension");
    if (maxval != 255) reader.fail("unsupported maxval " + std::to_string(maxval));
    const unsigned char* data = reader.payload(width * height);
    MaskGrid mask(height, width);
    for (std::size_t i = 0; i < mask.values.size(); ++i) {
        mask.values[i] = data[i] == 255 ? 1 : 0;
    }
    return mask;
}

void write_pgm_mask(const MaskGrid& mask, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    std::vector<unsigned char> bytes(mask.values.size());
    for (std::size_t i = 0; i < mask.values.size(); ++i) bytes[i] = mask.values[i] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace latent
