#include "swarm/chain/digest.hpp"

#include <cstring>

namespace swarm::chain {

std::string to_hex(std::span<const std::uint8_t> data) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 0x0f]);
    }
    return out;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error("invalid hex character");
}

Bytes from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw Error("hex string with odd length");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>((hex_nibble(hex[2 * i]) << 4) | hex_nibble(hex[2 * i + 1]));
    return out;
}

Digest Digest::from_hex_string(const std::string& hex) {
    const Bytes raw = from_hex(hex);
    if (raw.size() != 32) throw Error("digest hex must decode to 32 bytes");
    Digest d;
    std::memcpy(d.bytes.data(), raw.data(), 32);
    return d;
}

// FIPS 180-4 SHA-256.
namespace {

constexpr std::array<std::uint32_t, 64> kRound = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

inline std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

struct Sha256Ctx {
    std::array<std::uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                      0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    std::array<std::uint8_t, 64> block{};
    std::size_t fill = 0;
    std::uint64_t total = 0;

    void compress(const std::uint8_t* p) {
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = hh + s1 + ch + kRound[i] + w[i];
            const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = s0 + maj;
            hh = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        h[5] += f;
        h[6] += g;
        h[7] += hh;
    }

    void update(std::span<const std::uint8_t> data) {
        total += data.size();
        std::size_t off = 0;
        if (fill > 0) {
            const std::size_t take = std::min(data.size(), 64 - fill);
            std::memcpy(block.data() + fill, data.data(), take);
            fill += take;
            off = take;
            if (fill == 64) {
                compress(block.data());
                fill = 0;
            }
        }
        while (off + 64 <= data.size()) {
            compress(data.data() + off);
            off += 64;
        }
        if (off < data.size()) {
            std::memcpy(block.data(), data.data() + off, data.size() - off);
            fill = data.size() - off;
        }
    }

    Digest finish() {
        const std::uint64_t bits = total * 8;
        std::uint8_t pad = 0x80;
        update(std::span<const std::uint8_t>(&pad, 1));
        std::uint8_t zero = 0;
        while (fill != 56) update(std::span<const std::uint8_t>(&zero, 1));
        std::array<std::uint8_t, 8> len{};
        for (int i = 0; i < 8; ++i) len[i] = static_cast<std::uint8_t>(bits >> (56 - 8 * i));
        update(len);
        Digest out;
        for (int i = 0; i < 8; ++i) {
            out.bytes[4 * i] = static_cast<std::uint8_t>(h[i] >> 24);
            out.bytes[4 * i + 1] = static_cast<std::uint8_t>(h[i] >> 16);
            out.bytes[4 * i + 2] = static_cast<std::uint8_t>(h[i] >> 8);
            out.bytes[4 * i + 3] = static_cast<std::uint8_t>(h[i]);
        }
        return out;
    }
};

}  // namespace

Digest sha256(std::span<const std::uint8_t> data) {
    Sha256Ctx ctx;
    ctx.update(data);
    return ctx.finish();
}

Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message) {
    std::array<std::uint8_t, 64> k{};
    if (key.size() > 64) {
        const Digest kd = sha256(key);
        std::memcpy(k.data(), kd.bytes.data(), 32);
    } else {
        std::memcpy(k.data(), key.data(), key.size());
    }
    std::array<std::uint8_t, 64> ipad, opad;
    for (int i = 0; i < 64; ++i) {
        ipad[i] = k[i] ^ 0x36;
        opad[i] = k[i] ^ 0x5c;
    }
    Sha256Ctx inner;
    inner.update(ipad);
    inner.update(message);
    const Digest inner_digest = inner.finish();

    Sha256Ctx outer;
    outer.update(opad);
    outer.update(inner_digest.bytes);
    return outer.finish();
}

}  // namespace swarm::chain
