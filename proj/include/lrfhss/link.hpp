#pragma once

#include <string_view>

namespace lrfhss::analytic {

enum class DataRate { DR5, DR6 };

std::string_view to_string(DataRate dr);
DataRate parse_data_rate(std::string_view text);

/// LR-FHSS constants for one data rate on a single 1.523 MHz OCW channel.
struct DataRateProfile {
    DataRate name = DataRate::DR5;
    int n_hdr = 3;
    double t_hdr_s = 0.233;
    int n_pl = 5;
    double t_pl_s = 0.102;
    int code_rate_num = 1;
    int code_rate_den = 3;
    int groups = 52;
    int carriers_per_group = 60;
    double obw_hz = 488.0;

    static DataRateProfile dr5();
    static DataRateProfile dr6();
    static DataRateProfile of(DataRate dr);

    /// Time on air of a whole packet.
    [[nodiscard]] double toa_s() const { return n_hdr * t_hdr_s + n_pl * t_pl_s; }
    [[nodiscard]] double code_rate() const { return static_cast<double>(code_rate_num) / code_rate_den; }
    /// Minimum number of lost payload fragments that makes the packet undecodable.
    [[nodiscard]] int omega() const;
    [[nodiscard]] int fragments() const { return n_hdr + n_pl; }

    void validate() const;
    friend bool operator==(const DataRateProfile&, const DataRateProfile&) = default;
};

/// Link budget in dB units as configured.
struct LinkBudget {
    double tx_power_dbm = 30.0;
    double tx_gain_dbi = 2.5;
    double rx_gain_dbi = 22.6;
    double noise_figure_db = 6.0;
    double snr_threshold_db = 3.96;
    double sir_threshold_db = 6.0;
    double frequency_mhz = 905.4385;

    void validate() const;
    friend bool operator==(const LinkBudget&, const LinkBudget&) = default;
};

/// -174 + NF + 10 log10(B_OBW), in dBm.
double noise_power_dbm(double nf_db, double obw_hz);

double db_to_linear(double db);

/// The link budget converted once to linear units (mW and ratios).
struct LinearLink {
    double effective_power_mw = 0.0;  ///< P = P_t G_t G_r
    double noise_mw = 0.0;            ///< sigma^2
    double snr_threshold = 0.0;       ///< psi
    double sir_threshold = 0.0;       ///< delta

    static LinearLink from(const LinkBudget& lb, double obw_hz);

    /// psi sigma^2 / P: the normalized power |h|^2 g must exceed this.
    [[nodiscard]] double normalized_snr_threshold() const {
        return snr_threshold * noise_mw / effective_power_mw;
    }
};

/// LoRa (CSS) time on air in seconds, Semtech formula.
struct LoraFrame {
    int payload_bytes = 30;
    int spreading_factor = 12;
    double bandwidth_hz = 500e3;
    int coding_rate = 4;  ///< 4/(4+coding_rate)
    int preamble_symbols = 8;
    bool explicit_header = true;
    bool crc = true;
    bool low_data_rate_optimize = false;

    friend bool operator==(const LoraFrame&, const LoraFrame&) = default;
};

double lora_time_on_air_s(const LoraFrame& frame);

/// Worst-case per-device airtime of the cooperative scheme: one SF12 D2D
/// exchange plus two DR5 LR-FHSS packets.
double worst_case_d2d_airtime_s(const LoraFrame& d2d_frame);

}  // namespace lrfhss::analytic
