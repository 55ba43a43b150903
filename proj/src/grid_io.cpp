#include "liir/grid_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace liir {

namespace {

static_assert(sizeof(double) == 8, "8-byte IEEE doubles required");

// Files are little-endian on disk; byte-swap on big-endian hosts.
void to_disk_order(std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::big) {
        for (double& d : v) {
            std::uint64_t bits;
            std::memcpy(&bits, &d, 8);
            bits = __builtin_bswap64(bits);
            std::memcpy(&d, &bits, 8);
        }
    }
}

}  // namespace

void write_float_grid(const std::string& path, const FloatGrid& grid) {
    if (static_cast<std::int64_t>(grid.values.size()) !=
        grid.rows * grid.cols * grid.channels) {
        throw ShapeError("write_float_grid: value count does not match header");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "liir-f64 " << grid.rows << " " << grid.cols << " " << grid.channels << "\n";
    std::vector<double> disk = grid.values;
    to_disk_order(disk);
    out.write(reinterpret_cast<const char*>(disk.data()),
              static_cast<std::streamsize>(disk.size() * 8));
    if (!out) throw IoError("short write: " + path);
}

FloatGrid read_float_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string header;
    if (!std::getline(in, header)) throw FormatError("missing header: " + path);
    std::istringstream hs(header);
    std::string magic;
    FloatGrid grid;
    hs >> magic >> grid.rows >> grid.cols >> grid.channels;
    if (magic != "liir-f64" || grid.rows <= 0 || grid.cols <= 0 || grid.channels <= 0) {
        throw FormatError("bad float-grid header: " + path);
    }
    const std::size_t n =
        static_cast<std::size_t>(grid.rows * grid.cols * grid.channels);
    grid.values.resize(n);
    in.read(reinterpret_cast<char*>(grid.values.data()),
            static_cast<std::streamsize>(n * 8));
    if (static_cast<std::size_t>(in.gcount()) != n * 8) {
        throw FormatError("truncated float grid: " + path);
    }
    to_disk_order(grid.values);
    return grid;
}

void write_flow_f64(const std::string& path, int height, int width,
                    const std::vector<double>& flow) {
    const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * 2;
    if (flow.size() != n) throw ShapeError("write_flow_f64: size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    std::vector<double> disk = flow;
    to_disk_order(disk);
    out.write(reinterpret_cast<const char*>(disk.data()),
              static_cast<std::streamsize>(disk.size() * 8));
    if (!out) throw IoError("short write: " + path);
}

std::vector<double> read_flow_f64(const std::string& path, int height, int width) {
    const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * 2;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<double> flow(n);
    in.read(reinterpret_cast<char*>(flow.data()), static_cast<std::streamsize>(n * 8));
    if (static_cast<std::size_t>(in.gcount()) != n * 8) {
        throw FormatError("truncated flow file: " + path);
    }
    to_disk_order(flow);
    return flow;
}

}  // namespace liir
