#pragma once

#include <optional>
#include <string>

#include "liir/encoder.hpp"

namespace liir {

// Versioned binary blob: magic "LIIR", u32 format version, a key=value meta
// block, then a named shape table of raw little-endian doubles. Load rejects
// any version it does not understand.
constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    EncoderParams live;
    std::optional<EncoderParams> ema;
};

void save_checkpoint(const std::string& path, const EncoderParams& live,
                     const EncoderParams* ema = nullptr);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace liir
