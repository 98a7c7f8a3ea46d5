#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace lrfhss::netcode {

/// Element of GF(4) = GF(2)[x]/(x^2 + x + 1); 2 stands for x, 3 for x + 1.
using Gf4 = std::uint8_t;
using Symbols = std::vector<Gf4>;

Gf4 gf4_add(Gf4 a, Gf4 b);
Gf4 gf4_mul(Gf4 a, Gf4 b);
/// Multiplicative inverse; throws std::domain_error for 0.
Gf4 gf4_inv(Gf4 a);

/// Packet order inside a cluster: o0, o_ne, p0, p_ne.
enum class Packet { Own = 0, Partner = 1, ParityOwn = 2, ParityPartner = 3 };

/// Coefficients of each packet over (o0, o_ne).
inline constexpr std::array<std::array<Gf4, 2>, 4> kCodeRows{{{1, 0}, {0, 1}, {1, 1}, {1, 2}}};

enum class EncodeMode {
    Cooperative,     ///< p0 = o0 + o_ne, p_ne = o0 + 2 o_ne
    Retransmission,  ///< partner coefficients zeroed: p0 = p_ne = o0
};

struct ClusterCodeword {
    Symbols o0;
    Symbols o_ne;
    Symbols p0;
    Symbols p_ne;
    std::array<bool, 4> received{true, true, true, true};

    [[nodiscard]] const Symbols& packet(Packet p) const;
};

ClusterCodeword encode_cluster(const Symbols& o0, const Symbols& o_ne,
                               EncodeMode mode = EncodeMode::Cooperative);

/// Recovers (o0, o_ne) from any two received packets; nullopt when fewer
/// than two survived. Only the received packets' contents are read.
std::optional<std::pair<Symbols, Symbols>> decode_cluster(const ClusterCodeword& cw);

/// All six 2x2 minors of the coefficient rows are nonzero.
bool mds_check();

Gf4 det2(const std::array<Gf4, 2>& r0, const std::array<Gf4, 2>& r1);

/// Four symbols per byte, least significant bit pair first.
Symbols bytes_to_symbols(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> symbols_to_bytes(const Symbols& symbols);

}  // namespace lrfhss::netcode
