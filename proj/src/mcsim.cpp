#include "lrfhss/mcsim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "lrfhss/channel.hpp"
#include "lrfhss/netcode.hpp"
#include "lrfhss/parallel.hpp"

namespace lrfhss::mcsim {

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
    noise += o.noise;
    header_loss += o.header_loss;
    payload_loss += o.payload_loss;
    d2d_unavailable += o.d2d_unavailable;
    return *this;
}

std::vector<double> generate_traffic(Rng& rng, const Scenario& scenario) {
    std::uniform_real_distribution<double> u(0.0, scenario.slot_s);
    std::vector<double> t(static_cast<std::size_t>(scenario.n_users));
    for (auto& x : t) x = u(rng);
    return t;
}

HopPattern generate_hops(Rng& rng, const analytic::DataRateProfile& dr) {
    std::uniform_int_distribution<int> g(0, dr.groups - 1);
    std::uniform_int_distribution<int> c(0, dr.carriers_per_group - 1);
    HopPattern h;
    h.group = g(rng);
    h.carriers.resize(static_cast<std::size_t>(dr.fragments()));
    for (auto& x : h.carriers) x = c(rng);
    return h;
}

bool resolve_fragment(const FragmentEvent& frag, std::span<const FragmentEvent> cochannel,
                      const analytic::LinearLink& link) {
    if (!(frag.snr_linear > link.snr_threshold)) return false;
    double interference = 0.0;
    for (const auto& f : cochannel) interference += f.rx_power_mw;
    if (interference == 0.0) return true;
    return frag.rx_power_mw / interference > link.sir_threshold;
}

bool decode_packet(std::span<const bool> outcomes, const analytic::DataRateProfile& dr) {
    if (outcomes.size() != static_cast<std::size_t>(dr.fragments())) {
        throw std::invalid_argument("decode_packet: expected one outcome per fragment");
    }
    const auto hdr = outcomes.first(static_cast<std::size_t>(dr.n_hdr));
    const auto pl = outcomes.subspan(static_cast<std::size_t>(dr.n_hdr));
    const bool header_ok = std::find(hdr.begin(), hdr.end(), true) != hdr.end();
    const auto lost = std::count(pl.begin(), pl.end(), false);
    return header_ok && lost < dr.omega();
}

Clustering cluster_devices(std::span<const geometry::DevicePosition> positions, double d_max_km) {
    Clustering out;
    const std::size_t n = positions.size();
    if (!(d_max_km > 0.0)) {
        for (std::size_t i = 0; i < n; ++i) out.singles.push_back(i);
        return out;
    }
    auto cell_of = [d_max_km](const geometry::DevicePosition& p) {
        return std::pair{static_cast<long long>(std::floor(p.along_track_km / d_max_km)),
                         static_cast<long long>(std::floor(p.cross_track_km / d_max_km))};
    };
    auto key = [](long long cx, long long cy) {
        return static_cast<std::uint64_t>(cx) * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(cy);
    };
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [cx, cy] = cell_of(positions[i]);
        grid[key(cx, cy)].push_back(i);
    }
    std::vector<bool> paired(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (paired[i]) continue;
        const auto [cx, cy] = cell_of(positions[i]);
        std::size_t best = n;
        double best_d = d_max_km;
        for (long long dx = -1; dx <= 1; ++dx) {
            for (long long dy = -1; dy <= 1; ++dy) {
                const auto it = grid.find(key(cx + dx, cy + dy));
                if (it == grid.end()) continue;
                for (std::size_t j : it->second) {
                    if (j == i || paired[j]) continue;
                    const double d = geometry::device_distance_km(positions[i], positions[j]);
                    if (d < best_d || (d == best_d && best < n && j < best)) {
                        best_d = d;
                        best = j;
                    }
                }
            }
        }
        if (best < n && best_d < d_max_km) {
            paired[i] = paired[best] = true;
            out.clusters.emplace_back(i, best);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!paired[i]) out.singles.push_back(i);
    }
    return out;
}

namespace {

/// One LR-FHSS transmission in a trial.
struct Transmission {
    std::uint32_t owner = 0;
    double start_s = 0.0;
    bool needed = false;  ///< its fragments must be resolved
};

enum class PacketFate { Decoded, Noise, Header, Payload };

/// Builds every fragment of every transmission and resolves the fragments of
/// the needed ones against the whole population.
class Channel {
public:
    static constexpr std::size_t kMaxFragments = 32;

    Channel(Rng& rng, const Scenario& sc) : rng_(rng), sc_(sc), link_(sc.linear_link()), fading_(sc.fading) {}

    std::vector<PacketFate> run(const std::vector<Transmission>& tx) {
        const auto& dr = sc_.dr;
        const std::size_t per = static_cast<std::size_t>(dr.fragments());
        if (per > kMaxFragments) throw std::invalid_argument("simulator: too many fragments per packet");
        frags_.clear();
        frags_.reserve(tx.size() * per);
        for (std::size_t p = 0; p < tx.size(); ++p) {
            const double g = geometry::sample_visible_path_gain(rng_, sc_.geometry, sc_.slot_s,
                                                                sc_.link.frequency_mhz);
            const auto hops = generate_hops(rng_, dr);
            double t = tx[p].start_s;
            for (std::size_t f = 0; f < per; ++f) {
                FragmentEvent e;
                e.owner = tx[p].owner;
                e.packet = static_cast<std::uint32_t>(p);
                e.kind = f < static_cast<std::size_t>(dr.n_hdr) ? FragmentKind::Header : FragmentKind::Payload;
                e.duration_s = e.kind == FragmentKind::Header ? dr.t_hdr_s : dr.t_pl_s;
                e.start_s = t;
                t += e.duration_s;
                e.group = hops.group;
                e.carrier = hops.carriers[f];
                e.rx_power_mw = link_.effective_power_mw * fading_(rng_) * g;
                e.snr_linear = e.rx_power_mw / link_.noise_mw;
                frags_.push_back(e);
            }
        }
        index_channels();

        std::vector<PacketFate> fate(tx.size(), PacketFate::Decoded);
        std::vector<FragmentEvent> cochannel;
        std::array<bool, kMaxFragments> outcome{};
        for (std::size_t p = 0; p < tx.size(); ++p) {
            if (!tx[p].needed) continue;
            bool collided = false;
            for (std::size_t f = 0; f < per; ++f) {
                const auto& e = frags_[p * per + f];
                gather(e, cochannel);
                collided = collided || !cochannel.empty();
                outcome[f] = resolve_fragment(e, cochannel, link_);
            }
            if (decode_packet(std::span<const bool>(outcome.data(), per), dr)) continue;
            const auto hdr_end = outcome.begin() + dr.n_hdr;
            if (!collided) {
                fate[p] = PacketFate::Noise;
            } else if (std::find(outcome.begin(), hdr_end, true) == hdr_end) {
                fate[p] = PacketFate::Header;
            } else {
                fate[p] = PacketFate::Payload;
            }
        }
        return fate;
    }

private:
    void index_channels() {
        const int carriers = sc_.dr.carriers_per_group;
        buckets_.assign(static_cast<std::size_t>(sc_.dr.groups * carriers), {});
        for (std::size_t i = 0; i < frags_.size(); ++i) {
            const auto& e = frags_[i];
            buckets_[static_cast<std::size_t>(e.group * carriers + e.carrier)].push_back(i);
        }
        for (auto& b : buckets_) {
            std::sort(b.begin(), b.end(), [this](std::size_t a, std::size_t c) {
                return frags_[a].start_s < frags_[c].start_s;
            });
        }
        max_duration_ = std::max(sc_.dr.t_hdr_s, sc_.dr.t_pl_s);
    }

    void gather(const FragmentEvent& e, std::vector<FragmentEvent>& out) const {
        out.clear();
        const auto& b = buckets_[static_cast<std::size_t>(e.group * sc_.dr.carriers_per_group + e.carrier)];
        // Anything overlapping e starts in (e.start - max_duration, e.end).
        auto lo = std::lower_bound(b.begin(), b.end(), e.start_s - max_duration_,
                                   [this](std::size_t i, double t) { return frags_[i].start_s < t; });
        for (auto it = lo; it != b.end() && frags_[*it].start_s < e.end_s(); ++it) {
            const auto& o = frags_[*it];
            if (o.owner == e.owner) continue;
            if (o.end_s() > e.start_s) out.push_back(o);
        }
    }

    Rng& rng_;
    const Scenario& sc_;
    analytic::LinearLink link_;
    channel::PowerSampler fading_;
    std::vector<FragmentEvent> frags_;
    std::vector<std::vector<std::size_t>> buckets_;
    double max_duration_ = 0.0;
};

bool in_tracking_window(double start, const Scenario& sc) {
    const double toa = sc.dr.toa_s();
    return start >= toa && start <= sc.slot_s - 2.0 * toa;
}

void count_loss(PacketFate fate, LossBreakdown& b) {
    switch (fate) {
        case PacketFate::Decoded:
            break;
        case PacketFate::Noise:
            ++b.noise;
            break;
        case PacketFate::Header:
            ++b.header_loss;
            break;
        case PacketFate::Payload:
            ++b.payload_loss;
            break;
    }
}

OutageReport finish(long long tracked, const LossBreakdown& b) {
    OutageReport r;
    r.trials = tracked;
    r.loss_breakdown = b;
    r.losses = b.total();
    if (tracked > 0) {
        r.outage_estimate = static_cast<double>(r.losses) / static_cast<double>(tracked);
        r.std_error = std::sqrt(r.outage_estimate * (1.0 - r.outage_estimate) / static_cast<double>(tracked));
    }
    return r;
}

/// Two start times in [0, T) for one device, sorted and at least one packet
/// apart so that a device never overlaps itself.
std::pair<double, double> two_starts(Rng& rng, const Scenario& sc) {
    const double toa = sc.dr.toa_s();
    std::uniform_real_distribution<double> u(0.0, sc.slot_s);
    for (;;) {
        double a = u(rng);
        double b = u(rng);
        if (a > b) std::swap(a, b);
        if (b - a >= toa) return {a, b};
    }
}

/// Device positions for clustering, uniform at the scenario's density. At
/// reduced area scale they are drawn in a square of the scaled area.
std::vector<geometry::DevicePosition> clustering_positions(Rng& rng, const Scenario& sc) {
    const auto n = static_cast<std::size_t>(sc.n_users);
    if (sc.area_scale >= 1.0) return geometry::sample_positions(rng, n, sc.geometry, sc.slot_s);
    const double side = std::sqrt(sc.area_scale * geometry::footprint_area_km2(sc.geometry, sc.slot_s));
    std::uniform_real_distribution<double> u(0.0, side);
    std::vector<geometry::DevicePosition> out(n);
    for (auto& p : out) p = {u(rng), u(rng)};
    return out;
}

}  // namespace

OutageReport run_lrfhss_trial(Rng& rng, const Scenario& scenario) {
    if (scenario.d2d_enabled) throw std::invalid_argument("run_lrfhss_trial: scenario has d2d_enabled set");
    scenario.validate();
    const auto starts = generate_traffic(rng, scenario);
    std::vector<Transmission> tx(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        tx[i] = {static_cast<std::uint32_t>(i), starts[i], in_tracking_window(starts[i], scenario)};
    }
    Channel ch(rng, scenario);
    const auto fate = ch.run(tx);
    long long tracked = 0;
    LossBreakdown b;
    for (std::size_t i = 0; i < tx.size(); ++i) {
        if (!tx[i].needed) continue;
        ++tracked;
        count_loss(fate[i], b);
    }
    return finish(tracked, b);
}

OutageReport run_d2d_trial(Rng& rng, const Scenario& scenario) {
    if (!scenario.d2d_enabled) throw std::invalid_argument("run_d2d_trial: scenario has d2d_enabled unset");
    scenario.validate();
    const auto positions = clustering_positions(rng, scenario);
    const auto clustering = cluster_devices(positions, scenario.d_max_km);
    const std::size_t n = positions.size();

    // Every device sends two packets: original then parity after a successful
    // exchange, otherwise the original twice.
    std::vector<Transmission> tx(2 * n);
    std::vector<bool> tracked(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [a, b] = two_starts(rng, scenario);
        tracked[i] = in_tracking_window(a, scenario) && in_tracking_window(b, scenario);
        tx[2 * i] = {static_cast<std::uint32_t>(i), a, tracked[i]};
        tx[2 * i + 1] = {static_cast<std::uint32_t>(i), b, tracked[i]};
    }
    std::bernoulli_distribution exchange(scenario.p_lora_success);
    std::vector<int> coop(clustering.clusters.size());
    for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
        const auto [u, v] = clustering.clusters[c];
        coop[c] = exchange(rng) ? 1 : 0;
        if (coop[c] && (tracked[u] || tracked[v])) {
            for (auto d : {u, v}) tx[2 * d].needed = tx[2 * d + 1].needed = true;
        }
    }
    Channel ch(rng, scenario);
    const auto fate = ch.run(tx);

    long long count = 0;
    LossBreakdown b;
    auto decoded = [&](std::size_t packet) { return fate[packet] == PacketFate::Decoded; };
    auto retransmission = [&](std::size_t d, bool unavailable) {
        if (!tracked[d]) return;
        ++count;
        if (decoded(2 * d) || decoded(2 * d + 1)) return;
        if (unavailable) {
            ++b.d2d_unavailable;
        } else {
            count_loss(fate[2 * d], b);
        }
    };
    for (auto s : clustering.singles) retransmission(s, true);

    std::uniform_int_distribution<int> symbol(0, 3);
    for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
        const auto [u, v] = clustering.clusters[c];
        if (!coop[c]) {
            retransmission(u, true);
            retransmission(v, true);
            continue;
        }
        netcode::Symbols o_u(16);
        netcode::Symbols o_v(16);
        for (auto& x : o_u) x = static_cast<netcode::Gf4>(symbol(rng));
        for (auto& x : o_v) x = static_cast<netcode::Gf4>(symbol(rng));
        auto cw = netcode::encode_cluster(o_u, o_v);
        // Row order: u's original, v's original, u's parity, v's parity.
        cw.received = {decoded(2 * u), decoded(2 * v), decoded(2 * u + 1), decoded(2 * v + 1)};
        const std::array<netcode::Symbols*, 4> slots{&cw.o0, &cw.o_ne, &cw.p0, &cw.p_ne};
        for (std::size_t i = 0; i < 4; ++i) {
            // The receiver holds nothing for a lost packet.
            if (!cw.received[i]) std::fill(slots[i]->begin(), slots[i]->end(), netcode::Gf4{0});
        }
        const auto solved = netcode::decode_cluster(cw);
        for (int side = 0; side < 2; ++side) {
            const std::size_t d = side == 0 ? u : v;
            if (!tracked[d]) continue;
            ++count;
            if (cw.received[static_cast<std::size_t>(side)]) continue;
            if (solved && (side == 0 ? solved->first == o_u : solved->second == o_v)) continue;
            count_loss(fate[2 * d], b);
        }
    }
    return finish(count, b);
}

OutageReport estimate(std::span<const OutageReport> trials) {
    if (trials.empty()) throw std::invalid_argument("estimate: need at least one trial");
    long long tracked = 0;
    LossBreakdown b;
    for (const auto& t : trials) {
        tracked += t.trials;
        b += t.loss_breakdown;
    }
    return finish(tracked, b);
}

OutageReport simulate(const Scenario& scenario, std::size_t trials, std::uint64_t seed, std::size_t first_trial) {
    if (trials < 1) throw std::invalid_argument("trials: must be >= 1");
    scenario.validate();
    std::vector<OutageReport> out(trials);
    parallel_for(trials, [&](std::size_t t) {
        Rng rng = make_stream(seed, {first_trial + t});
        out[t] = scenario.d2d_enabled ? run_d2d_trial(rng, scenario) : run_lrfhss_trial(rng, scenario);
    });
    return estimate(out);
}

}  // namespace lrfhss::mcsim
