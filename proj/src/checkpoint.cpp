#include "liir/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace liir {

namespace {

constexpr char kMagic[4] = {'L', 'I', 'I', 'R'};

template <typename T>
void write_le(std::ofstream& out, T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto* p = reinterpret_cast<unsigned char*>(&v);
        std::reverse(p, p + sizeof(T));
    }
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("truncated checkpoint");
    if constexpr (std::endian::native == std::endian::big) {
        auto* p = reinterpret_cast<unsigned char*>(&v);
        std::reverse(p, p + sizeof(T));
    }
    return v;
}

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::big) {
        for (double d : v) write_le(out, d);
    } else {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * 8));
    }
}

std::vector<double> read_doubles(std::ifstream& in, std::size_t n) {
    std::vector<double> v(n);
    if constexpr (std::endian::native == std::endian::big) {
        for (double& d : v) d = read_le<double>(in);
    } else {
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * 8));
        if (!in) throw FormatError("truncated checkpoint tensor");
    }
    return v;
}

void write_named(std::ofstream& out, const std::string& name,
                 const std::vector<double>& data) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_le<std::uint32_t>(out, 1);  // stored flat; shapes live in the meta block
    write_le<std::uint64_t>(out, data.size());
    write_doubles(out, data);
}

std::string meta_for(const EncoderParams& p, bool has_ema) {
    std::ostringstream os;
    os << "height=" << p.input_height << "\n"
       << "width=" << p.input_width << "\n"
       << "position=" << to_string(p.pos.kind) << "\n"
       << "pos_learnable=" << (p.pos.learnable ? 1 : 0) << "\n"
       << "temperature=" << p.temperature << "\n"
       << "colorspace=" << (p.input_space == ColorSpace::Lab ? "lab" : "rgb") << "\n"
       << "ema=" << (has_ema ? 1 : 0) << "\n";
    return os.str();
}

std::map<std::string, std::string> parse_meta(const std::string& blob) {
    std::map<std::string, std::string> meta;
    std::istringstream is(blob);
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return meta;
}

void collect_tensors(const EncoderParams& p, const std::string& prefix,
                     std::vector<std::pair<std::string, const std::vector<double>*>>& out) {
    for (const auto& [name, data] : p.named_params()) out.emplace_back(prefix + name, data);
    if (!p.pos.learnable && p.pos.kind == PositionKind::Spe2d) {
        // Regenerable, but storing it keeps loads independent of the builder.
        out.emplace_back(prefix + "pos.grid", &p.pos.grid);
    }
}

EncoderParams rebuild(const std::map<std::string, std::string>& meta,
                      const std::map<std::string, std::vector<double>>& tensors,
                      const std::string& prefix) {
    const int h = std::stoi(meta.at("height"));
    const int w = std::stoi(meta.at("width"));
    const PositionKind kind = position_kind_from_string(meta.at("position"));
    const bool learnable = meta.at("pos_learnable") == "1";
    const double temperature = std::stod(meta.at("temperature"));

    EncoderParams p = make_encoder(h, w, kind, 0, temperature);
    p.pos.learnable = learnable;
    if (meta.count("colorspace")) {
        p.input_space = meta.at("colorspace") == "rgb" ? ColorSpace::RGB : ColorSpace::Lab;
    }

    auto fetch = [&](const std::string& name) -> const std::vector<double>& {
        auto it = tensors.find(prefix + name);
        if (it == tensors.end()) throw FormatError("checkpoint missing tensor " + name);
        return it->second;
    };
    auto assign = [&](std::vector<double>& dst, const std::string& name) {
        const auto& src = fetch(name);
        if (src.size() != dst.size()) {
            throw FormatError("checkpoint tensor " + name + " has unexpected size");
        }
        dst = src;
    };
    assign(p.conv1.weights, "conv1.w");
    assign(p.conv1.bias, "conv1.b");
    assign(p.conv2.weights, "conv2.w");
    assign(p.conv2.bias, "conv2.b");
    assign(p.conv3.weights, "conv3.w");
    assign(p.conv3.bias, "conv3.b");
    if (kind == PositionKind::Ape2d) {
        assign(p.pos.x_set, "pos.x");
        assign(p.pos.y_set, "pos.y");
    } else {
        assign(p.pos.grid, "pos.grid");
    }
    return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const EncoderParams& live,
                     const EncoderParams* ema) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(kMagic, 4);
    write_le<std::uint32_t>(out, kCheckpointVersion);
    const std::string meta = meta_for(live, ema != nullptr);
    write_le<std::uint64_t>(out, meta.size());
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));

    std::vector<std::pair<std::string, const std::vector<double>*>> tensors;
    collect_tensors(live, "", tensors);
    if (ema) collect_tensors(*ema, "ema.", tensors);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, data] : tensors) write_named(out, name, *data);
    if (!out) throw IoError("short write: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("not a LIIR checkpoint: " + path);
    }
    const auto version = read_le<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    const auto meta_len = read_le<std::uint64_t>(in);
    std::string meta_blob(meta_len, '\0');
    in.read(meta_blob.data(), static_cast<std::streamsize>(meta_len));
    if (!in) throw FormatError("truncated checkpoint meta");
    const auto meta = parse_meta(meta_blob);

    const auto count = read_le<std::uint32_t>(in);
    std::map<std::string, std::vector<double>> tensors;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = read_le<std::uint32_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) throw FormatError("truncated checkpoint name");
        const auto ndim = read_le<std::uint32_t>(in);
        std::uint64_t total = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) total *= read_le<std::uint64_t>(in);
        tensors[name] = read_doubles(in, total);
    }

    Checkpoint ck;
    ck.live = rebuild(meta, tensors, "");
    if (meta.count("ema") && meta.at("ema") == "1") {
        ck.ema = rebuild(meta, tensors, "ema.");
    }
    return ck;
}

}  // namespace liir
