#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fujitalab/grid.hpp"

namespace fujitalab {

/// Round-trip decimal formatting (17 significant digits, '.' decimal).
std::string format_double(double v);

/// RealField binary format: 32-byte header (magic "PFL1", u32 n, u32 N,
/// f64 L, zero padding), then N^n little-endian f64 values, row-major.
void write_field_binary(const std::filesystem::path& path, const RealField& u);
RealField read_field_binary(const std::filesystem::path& path);

/// CSV export: index columns then value.
void write_field_csv(const std::filesystem::path& path, const RealField& u);

/// Hex SHA-256 digests (OpenSSL).
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file(const std::filesystem::path& path);

/// Writes text atomically (temp file + rename).
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

struct ManifestEntry {
    std::string path;  // relative to the run directory
    std::string sha256;
    std::uint64_t bytes = 0;
};

struct StageTiming {
    std::string name;
    double seconds = 0.0;
};

/// Per-invocation manifest: config hash, tool version, artifact
/// checksums, wall-clock per stage. Written atomically after all outputs.
struct RunManifest {
    std::string config_sha256;
    std::string tool_version;
    std::string command;
    std::vector<ManifestEntry> artifacts;
    std::vector<StageTiming> stages;

    void add_artifact(const std::filesystem::path& run_dir,
                      const std::filesystem::path& file);
    void write(const std::filesystem::path& path) const;
};

}  // namespace fujitalab
