#include "fujitalab/report.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace fujitalab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {
constexpr char kMagic[4] = {'P', 'F', 'L', '1'};
constexpr std::size_t kHeaderBytes = 32;
}  // namespace

void write_field_binary(const std::filesystem::path& path, const RealField& u) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_field_binary: cannot open " + path.string());
    char header[kHeaderBytes] = {};
    std::memcpy(header, kMagic, 4);
    const std::uint32_t n = static_cast<std::uint32_t>(u.grid.n);
    const std::uint32_t N = static_cast<std::uint32_t>(u.grid.N);
    std::memcpy(header + 4, &n, 4);
    std::memcpy(header + 8, &N, 4);
    std::memcpy(header + 12, &u.grid.L, 8);
    out.write(header, kHeaderBytes);
    out.write(reinterpret_cast<const char*>(u.values.data()),
              static_cast<std::streamsize>(u.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write_field_binary: write failed for " + path.string());
}

RealField read_field_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_field_binary: cannot open " + path.string());
    char header[kHeaderBytes];
    in.read(header, kHeaderBytes);
    if (!in || std::memcmp(header, kMagic, 4) != 0)
        throw std::runtime_error("read_field_binary: bad magic in " + path.string());
    std::uint32_t n = 0, N = 0;
    double L = 0.0;
    std::memcpy(&n, header + 4, 4);
    std::memcpy(&N, header + 8, 4);
    std::memcpy(&L, header + 12, 8);
    RealField u(make_grid(static_cast<int>(n), static_cast<int>(N), L));
    in.read(reinterpret_cast<char*>(u.values.data()),
            static_cast<std::streamsize>(u.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("read_field_binary: truncated file " + path.string());
    return u;
}

void write_field_csv(const std::filesystem::path& path, const RealField& u) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_field_csv: cannot open " + path.string());
    for (int a = 0; a < u.grid.n; ++a) out << "i" << a << ",";
    out << "value\n";
    const std::int64_t total = u.grid.size();
    for (std::int64_t i = 0; i < total; ++i) {
        auto j = u.grid.unflatten(i);
        for (int a = 0; a < u.grid.n; ++a) out << j[a] << ",";
        out << format_double(u.values[i]) << "\n";
    }
}

std::string sha256_hex(const void* data, std::size_t len) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (!EVP_Digest(data, len, digest, &digest_len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256: EVP_Digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * digest_len);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("sha256_file: cannot open " + path.string());
    std::string contents((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    return sha256_hex(contents.data(), contents.size());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("write_text_atomic: cannot open " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw std::runtime_error("write_text_atomic: write failed");
    }
    std::filesystem::rename(tmp, path);
}

void RunManifest::add_artifact(const std::filesystem::path& run_dir,
                               const std::filesystem::path& file) {
    ManifestEntry e;
    e.path = std::filesystem::relative(file, run_dir).generic_string();
    e.sha256 = sha256_file(file);
    e.bytes = static_cast<std::uint64_t>(std::filesystem::file_size(file));
    artifacts.push_back(std::move(e));
}

void RunManifest::write(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["config_sha256"] = config_sha256;
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["artifacts"] = nlohmann::json::array();
    for (const auto& a : artifacts)
        j["artifacts"].push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
    j["stages"] = nlohmann::json::array();
    for (const auto& s : stages)
        j["stages"].push_back({{"name", s.name}, {"seconds", s.seconds}});
    write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace fujitalab
