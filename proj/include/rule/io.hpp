#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rule {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts unsupported");

// Container layout: magic "RULE", u32 format version, then sections of
// (fourcc, u64 payload size, payload). Readers skip unknown sections.
constexpr char kContainerMagic[4] = {'R', 'U', 'L', 'E'};
constexpr uint32_t kContainerVersion = 1;

constexpr uint32_t fourcc(const char (&s)[5]) {
    return static_cast<uint32_t>(static_cast<uint8_t>(s[0])) |
           (static_cast<uint32_t>(static_cast<uint8_t>(s[1])) << 8) |
           (static_cast<uint32_t>(static_cast<uint8_t>(s[2])) << 16) |
           (static_cast<uint32_t>(static_cast<uint8_t>(s[3])) << 24);
}

constexpr uint32_t kSectionEmbeddings = fourcc("EMBS");
constexpr uint32_t kSectionGroundingMlp = fourcc("GMLP");
constexpr uint32_t kSectionOptimizerState = fourcc("OPTS");

class BinaryWriter {
public:
    template <typename T>
    void put(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        const char* p = reinterpret_cast<const char*>(&v);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }

    void put_f32_array(const double* data, size_t n) {
        size_t base = buf_.size();
        buf_.resize(base + n * sizeof(float));
        float* out = reinterpret_cast<float*>(buf_.data() + base);
        for (size_t i = 0; i < n; ++i) out[i] = static_cast<float>(data[i]);
    }

    void put_f64_array(const double* data, size_t n) {
        const char* p = reinterpret_cast<const char*>(data);
        buf_.insert(buf_.end(), p, p + n * sizeof(double));
    }

    void put_string(const std::string& s) {
        put<uint64_t>(s.size());
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    const std::vector<char>& bytes() const { return buf_; }

private:
    std::vector<char> buf_;
};

class BinaryReader {
public:
    BinaryReader(const char* data, size_t size) : data_(data), size_(size) {}

    template <typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        need(sizeof(T));
        T v;
        std::memcpy(&v, data_ + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    void get_f32_array(double* out, size_t n) {
        need(n * sizeof(float));
        const float* in = reinterpret_cast<const float*>(data_ + pos_);
        for (size_t i = 0; i < n; ++i) out[i] = static_cast<double>(in[i]);
        pos_ += n * sizeof(float);
    }

    void get_f64_array(double* out, size_t n) {
        need(n * sizeof(double));
        std::memcpy(out, data_ + pos_, n * sizeof(double));
        pos_ += n * sizeof(double);
    }

    std::string get_string() {
        uint64_t n = get<uint64_t>();
        need(n);
        std::string s(data_ + pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ >= size_; }

private:
    void need(size_t n) const {
        if (pos_ + n > size_) throw std::runtime_error("checkpoint payload truncated");
    }

    const char* data_;
    size_t size_;
    size_t pos_ = 0;
};

struct Section {
    uint32_t type;
    std::vector<char> payload;
};

inline void write_container(const std::string& path, const std::vector<Section>& sections) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint file: " + path);
    out.write(kContainerMagic, 4);
    uint32_t version = kContainerVersion;
    out.write(reinterpret_cast<const char*>(&version), 4);
    for (const Section& s : sections) {
        out.write(reinterpret_cast<const char*>(&s.type), 4);
        uint64_t size = s.payload.size();
        out.write(reinterpret_cast<const char*>(&size), 8);
        out.write(s.payload.data(), static_cast<std::streamsize>(s.payload.size()));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<Section> read_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kContainerMagic, 4) != 0)
        throw std::runtime_error(path + ": not a RULE checkpoint (bad magic)");
    uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    if (version != kContainerVersion)
        throw std::runtime_error(path + ": unsupported format version " + std::to_string(version));
    std::vector<Section> sections;
    while (true) {
        uint32_t type = 0;
        in.read(reinterpret_cast<char*>(&type), 4);
        if (!in) break;
        uint64_t size = 0;
        in.read(reinterpret_cast<char*>(&size), 8);
        Section s;
        s.type = type;
        s.payload.resize(size);
        in.read(s.payload.data(), static_cast<std::streamsize>(size));
        if (!in) throw std::runtime_error(path + ": truncated section");
        sections.push_back(std::move(s));
    }
    return sections;
}

inline const Section* find_section(const std::vector<Section>& sections, uint32_t type) {
    for (const Section& s : sections)
        if (s.type == type) return &s;
    return nullptr;
}

}  // namespace rule
