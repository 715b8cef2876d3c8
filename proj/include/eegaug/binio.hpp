#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

// Little-endian scalar IO for the Eegb/TFRB/CKPT container formats.
namespace eegaug::binio {

template <typename T>
T read_le(std::istream& in) {
    unsigned char buf[sizeof(T)] = {};
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    uint64_t bits = 0;
    for (size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<uint64_t>(buf[i]) << (8 * i);
    T v;
    std::memcpy(&v, &bits, sizeof(T));
    return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
    uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(T));
    unsigned char buf[sizeof(T)];
    for (size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

inline uint8_t read_u8(std::istream& in) { return read_le<uint8_t>(in); }
inline uint32_t read_u32(std::istream& in) { return read_le<uint32_t>(in); }
inline float read_f32(std::istream& in) { return read_le<float>(in); }
inline double read_f64(std::istream& in) { return read_le<double>(in); }

inline void write_u8(std::ostream& out, uint8_t v) { write_le(out, v); }
inline void write_u32(std::ostream& out, uint32_t v) { write_le(out, v); }
inline void write_f32(std::ostream& out, float v) { write_le(out, v); }
inline void write_f64(std::ostream& out, double v) { write_le(out, v); }

}  // namespace eegaug::binio
