#include "roadstereo/image_io.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace roadstereo {
namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in)
{
    std::string token;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n')
                c = in.get();
        } else if (std::isspace(c)) {
            if (!token.empty())
                return token;
        } else {
            token.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    if (token.empty())
        throw FormatError("truncated header");
    return token;
}

int header_int(std::istream& in, const char* what)
{
    const std::string token = header_token(in);
    try {
        std::size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size())
            throw FormatError(std::string("bad ") + what + " '" + token + "'");
        return value;
    } catch (const std::logic_error&) {
        throw FormatError(std::string("bad ") + what + " '" + token + "'");
    }
}

std::uint32_t byteswap32(std::uint32_t v)
{
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

constexpr std::uint32_t kPfmNan = 0x7fc00000u;

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

GrayImage read_pgm(std::istream& in)
{
    char magic[2] = {};
    if (!in.read(magic, 2))
        throw FormatError("PGM: missing magic number");
    if (magic[0] != 'P' || magic[1] != '5')
        throw FormatError(std::string("PGM: unsupported magic '") + magic[0] + magic[1] + "', expected P5");
    const int width = header_int(in, "PGM width");
    const int height = header_int(in, "PGM height");
    const int maxval = header_int(in, "PGM maxval");
    if (width < 1 || height < 1)
        throw FormatError("PGM: non-positive dimensions");
    if (maxval != 255)
        throw FormatError("PGM: maxval " + std::to_string(maxval) + " unsupported, expected 255");

    std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (in.gcount() != static_cast<std::streamsize>(data.size()))
        throw FormatError("PGM: truncated payload");
    return GrayImage(width, height, std::move(data));
}

void write_pgm(std::ostream& out, const GrayImage& image)
{
    if (image.empty())
        throw DimensionError("PGM: cannot write an empty image");
    out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels().data()), static_cast<std::streamsize>(image.size()));
    if (!out)
        throw IoError("PGM: write failed");
}

DisparityMap read_pfm(std::istream& in)
{
    char magic[2] = {};
    if (!in.read(magic, 2))
        throw FormatError("PFM: missing magic number");
    if (magic[0] == 'P' && magic[1] == 'F')
        throw FormatError("PFM: color PFM ('PF') is unsupported");
    if (magic[0] != 'P' || magic[1] != 'f')
        throw FormatError("PFM: bad magic number");
    const int width = header_int(in, "PFM width");
    const int height = header_int(in, "PFM height");
    if (width < 1 || height < 1)
        throw FormatError("PFM: non-positive dimensions");
    const std::string scale_token = header_token(in);
    double scale = 0.0;
    try {
        scale = std::stod(scale_token);
    } catch (const std::logic_error&) {
        throw FormatError("PFM: bad scale '" + scale_token + "'");
    }
    if (scale == 0.0)
        throw FormatError("PFM: zero scale");
    const bool file_little = scale < 0.0;
    const bool host_little = std::endian::native == std::endian::little;

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<std::uint32_t> words(count);
    in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(count * 4));
    if (in.gcount() != static_cast<std::streamsize>(count * 4))
        throw FormatError("PFM: truncated payload");

    DisparityMap map(width, height);
    for (int y = 0; y < height; ++y) {
        const std::uint32_t* src = words.data() + static_cast<std::size_t>(height - 1 - y) * static_cast<std::size_t>(width);
        for (int x = 0; x < width; ++x) {
            std::uint32_t w = src[x];
            if (file_little != host_little)
                w = byteswap32(w);
            const float f = std::bit_cast<float>(w);
            map(x, y) = std::isnan(f) ? kInvalidDisparity : static_cast<double>(f);
        }
    }
    return map;
}

void write_pfm(std::ostream& out, const DisparityMap& map)
{
    if (map.empty())
        throw DimensionError("PFM: cannot write an empty map");
    const bool host_little = std::endian::native == std::endian::little;
    out << "Pf\n" << map.width() << ' ' << map.height() << "\n-1.0\n";
    std::vector<std::uint32_t> row(static_cast<std::size_t>(map.width()));
    for (int y = map.height() - 1; y >= 0; --y) {
        for (int x = 0; x < map.width(); ++x) {
            const double d = map(x, y);
            std::uint32_t w = is_valid_disparity(d) ? std::bit_cast<std::uint32_t>(static_cast<float>(d)) : kPfmNan;
            row[static_cast<std::size_t>(x)] = host_little ? w : byteswap32(w);
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    }
    if (!out)
        throw IoError("PFM: write failed");
}

GrayImage load_pgm(const std::filesystem::path& path)
{
    auto in = open_in(path);
    try {
        return read_pgm(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_pgm(const std::filesystem::path& path, const GrayImage& image)
{
    auto out = open_out(path);
    write_pgm(out, image);
}

DisparityMap load_pfm(const std::filesystem::path& path)
{
    auto in = open_in(path);
    try {
        return read_pfm(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_pfm(const std::filesystem::path& path, const DisparityMap& map)
{
    auto out = open_out(path);
    write_pfm(out, map);
}

}  // namespace roadstereo
