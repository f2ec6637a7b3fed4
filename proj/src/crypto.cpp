#include "bodega/crypto.hpp"

// Single-block AES via the low-level schedule: reentrant and allocation-free
// on the query path, which the EVP interface is not.
#define OPENSSL_SUPPRESS_DEPRECATED
#include <openssl/aes.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

namespace bodega {

struct Prp::Schedule {
    AES_KEY enc;
};

SecretKey SecretKey::generate() {
    SecretKey k;
    if (RAND_bytes(k.key_.data(), static_cast<int>(k.key_.size())) != 1)
        throw ConfigError("OS entropy source unavailable");
    return k;
}

SecretKey SecretKey::from_seed(std::uint64_t seed) {
    SecretKey k;
    Rng rng(seed);
    for (int i = 0; i < 16; i += 8) {
        std::uint64_t w = rng();
        std::memcpy(k.key_.data() + i, &w, 8);
    }
    return k;
}

SecretKey SecretKey::from_bytes(const std::array<std::uint8_t, 16>& material) {
    SecretKey k;
    k.key_ = material;
    return k;
}

SecretKey keygen(unsigned lambda_bits, std::optional<std::uint64_t> seed) {
    if (lambda_bits != SecretKey::kLambdaBits)
        throw ConfigError("unsupported security parameter: lambda must be 128");
    return seed ? SecretKey::from_seed(*seed) : SecretKey::generate();
}

Prp::Prp(SecretKey key) : key_(key), sched_(std::make_unique<Schedule>()) {
    AES_set_encrypt_key(key_.material().data(), 128, &sched_->enc);
}

Prp::~Prp() = default;

Prp::Prp(const Prp& other) : Prp(other.key_) {}

Prp& Prp::operator=(const Prp& other) {
    if (this != &other) {
        key_ = other.key_;
        sched_ = std::make_unique<Schedule>();
        AES_set_encrypt_key(key_.material().data(), 128, &sched_->enc);
    }
    return *this;
}

Prp::Prp(Prp&&) noexcept = default;
Prp& Prp::operator=(Prp&&) noexcept = default;

ElementId Prp::apply(const ElementId& x) const {
    ElementId out;
    AES_encrypt(x.bytes.data(), out.bytes.data(), &sched_->enc);
    return out;
}

Prf::Prf(SecretKey key, unsigned output_bits) : prp_(key), output_bits_(output_bits) {
    if (output_bits_ < 1 || output_bits_ > 64)
        throw ConfigError("fingerprint width must be in [1, 64] bits");
}

std::uint64_t Prf::eval(const ElementId& x, unsigned side) const {
    if (side != 1 && side != 2) throw InvalidInput("PRF side index must be 1 or 2");
    ElementId tweaked = x;
    tweaked.bytes[15] ^= static_cast<std::uint8_t>(side);
    ElementId block = prp_.apply(tweaked);
    std::uint64_t w;
    std::memcpy(&w, block.bytes.data(), 8);
    return output_bits_ == 64 ? w : (w & ((1ULL << output_bits_) - 1));
}

std::array<std::uint8_t, 16> digest128(const std::uint8_t* data, std::size_t len) {
    std::array<std::uint8_t, 32> full;
    SHA256(data, len, full.data());
    std::array<std::uint8_t, 16> out;
    std::memcpy(out.data(), full.data(), 16);
    return out;
}

}  // namespace bodega
