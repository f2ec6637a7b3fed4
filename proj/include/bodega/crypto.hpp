#pragma once

#include <memory>
#include <optional>

#include "bodega/common.hpp"

namespace bodega {

/// 128-bit secret key. Generated from OS entropy in production; the seeded
/// path exists only so that security-game runs are reproducible. Keys are
/// never written into filter snapshots (the deliberate key-leak
/// counterexample excepted).
class SecretKey {
  public:
    static constexpr unsigned kLambdaBits = 128;

    static SecretKey generate();
    static SecretKey from_seed(std::uint64_t seed);
    static SecretKey from_bytes(const std::array<std::uint8_t, 16>& material);

    const std::array<std::uint8_t, 16>& material() const { return key_; }
    unsigned lambda_bits() const { return kLambdaBits; }

    bool operator==(const SecretKey&) const = default;

  private:
    SecretKey() = default;
    std::array<std::uint8_t, 16> key_{};
};

/// keygen per the construction contract: lambda is fixed at 128 in this
/// artifact; anything else is a configuration error.
SecretKey keygen(unsigned lambda_bits, std::optional<std::uint64_t> seed = std::nullopt);

/// Keyed pseudorandom permutation over the 128-bit domain: a single AES-128
/// block encryption. Immutable and reentrant.
class Prp {
  public:
    explicit Prp(SecretKey key);
    ~Prp();
    Prp(const Prp&);
    Prp& operator=(const Prp&);
    Prp(Prp&&) noexcept;
    Prp& operator=(Prp&&) noexcept;

    ElementId apply(const ElementId& x) const;
    const SecretKey& key() const { return key_; }

  private:
    SecretKey key_;
    struct Schedule;
    std::unique_ptr<Schedule> sched_;
};

/// Keyed pseudorandom function (element, side in {1,2}) -> r-bit fingerprint.
/// Same block cipher with the side index folded into the input block, output
/// truncated to r bits.
class Prf {
  public:
    Prf(SecretKey key, unsigned output_bits);

    std::uint64_t eval(const ElementId& x, unsigned side) const;
    unsigned output_bits() const { return output_bits_; }
    const SecretKey& key() const { return prp_.key(); }

  private:
    Prp prp_;
    unsigned output_bits_;
};

/// Fixed 128-bit digest for variable-length keys (SHA-256 truncated).
std::array<std::uint8_t, 16> digest128(const std::uint8_t* data, std::size_t len);

}  // namespace bodega
