#include "lrfhss/netcode.hpp"

#include <stdexcept>

namespace lrfhss::netcode {

namespace {

constexpr std::array<std::array<Gf4, 4>, 4> kMul{{
    {0, 0, 0, 0},
    {0, 1, 2, 3},
    {0, 2, 3, 1},
    {0, 3, 1, 2},
}};

void check(Gf4 a) {
    if (a > 3) throw std::domain_error("GF(4) element out of range");
}

}  // namespace

Gf4 gf4_add(Gf4 a, Gf4 b) {
    check(a);
    check(b);
    return static_cast<Gf4>(a ^ b);
}

Gf4 gf4_mul(Gf4 a, Gf4 b) {
    check(a);
    check(b);
    return kMul[a][b];
}

Gf4 gf4_inv(Gf4 a) {
    check(a);
    if (a == 0) throw std::domain_error("GF(4): zero has no inverse");
    for (Gf4 b = 1; b < 4; ++b) {
        if (kMul[a][b] == 1) return b;
    }
    throw std::logic_error("GF(4): inverse table is broken");
}

const Symbols& ClusterCodeword::packet(Packet p) const {
    switch (p) {
        case Packet::Own:
            return o0;
        case Packet::Partner:
            return o_ne;
        case Packet::ParityOwn:
            return p0;
        case Packet::ParityPartner:
            return p_ne;
    }
    throw std::invalid_argument("unknown packet");
}

ClusterCodeword encode_cluster(const Symbols& o0, const Symbols& o_ne, EncodeMode mode) {
    if (o0.size() != o_ne.size()) throw std::invalid_argument("encode_cluster: payload lengths differ");
    ClusterCodeword cw;
    cw.o0 = o0;
    cw.o_ne = o_ne;
    cw.p0.resize(o0.size());
    cw.p_ne.resize(o0.size());
    const bool coop = mode == EncodeMode::Cooperative;
    for (std::size_t i = 0; i < o0.size(); ++i) {
        const Gf4 partner = coop ? o_ne[i] : Gf4{0};
        cw.p0[i] = gf4_add(o0[i], gf4_mul(kCodeRows[2][1], partner));
        cw.p_ne[i] = gf4_add(o0[i], gf4_mul(kCodeRows[3][1], partner));
    }
    return cw;
}

Gf4 det2(const std::array<Gf4, 2>& r0, const std::array<Gf4, 2>& r1) {
    // subtraction is addition in characteristic 2
    return gf4_add(gf4_mul(r0[0], r1[1]), gf4_mul(r0[1], r1[0]));
}

std::optional<std::pair<Symbols, Symbols>> decode_cluster(const ClusterCodeword& cw) {
    int a = -1;
    int b = -1;
    for (int i = 0; i < 4; ++i) {
        if (!cw.received[i]) continue;
        if (a < 0) {
            a = i;
        } else {
            b = i;
            break;
        }
    }
    if (b < 0) return std::nullopt;
    const auto& ya = cw.packet(static_cast<Packet>(a));
    const auto& yb = cw.packet(static_cast<Packet>(b));
    if (ya.size() != yb.size()) throw std::invalid_argument("decode_cluster: packet lengths differ");
    const auto& ra = kCodeRows[a];
    const auto& rb = kCodeRows[b];
    const Gf4 inv = gf4_inv(det2(ra, rb));
    // Cramer's rule over GF(4).
    Symbols o0(ya.size());
    Symbols o_ne(ya.size());
    for (std::size_t i = 0; i < ya.size(); ++i) {
        o0[i] = gf4_mul(inv, gf4_add(gf4_mul(ya[i], rb[1]), gf4_mul(ra[1], yb[i])));
        o_ne[i] = gf4_mul(inv, gf4_add(gf4_mul(ra[0], yb[i]), gf4_mul(ya[i], rb[0])));
    }
    return std::pair{std::move(o0), std::move(o_ne)};
}

bool mds_check() {
    for (std::size_t i = 0; i < kCodeRows.size(); ++i) {
        for (std::size_t j = i + 1; j < kCodeRows.size(); ++j) {
            if (det2(kCodeRows[i], kCodeRows[j]) == 0) return false;
        }
    }
    return true;
}

Symbols bytes_to_symbols(std::span<const std::uint8_t> bytes) {
    Symbols s;
    s.reserve(bytes.size() * 4);
    for (auto byte : bytes) {
        for (int shift = 0; shift < 8; shift += 2) s.push_back(static_cast<Gf4>((byte >> shift) & 3u));
    }
    return s;
}

std::vector<std::uint8_t> symbols_to_bytes(const Symbols& symbols) {
    if (symbols.size() % 4 != 0) throw std::invalid_argument("symbols_to_bytes: length must be a multiple of 4");
    std::vector<std::uint8_t> out(symbols.size() / 4, 0);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        check(symbols[i]);
        out[i / 4] = static_cast<std::uint8_t>(out[i / 4] | (symbols[i] << (2 * (i % 4))));
    }
    return out;
}

}  // namespace lrfhss::netcode
