#include "lrfhss/link.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lrfhss::analytic {

std::string_view to_string(DataRate dr) {
    return dr == DataRate::DR5 ? "DR5" : "DR6";
}

DataRate parse_data_rate(std::string_view text) {
    if (text == "DR5" || text == "dr5" || text == "5") return DataRate::DR5;
    if (text == "DR6" || text == "dr6" || text == "6") return DataRate::DR6;
    throw std::invalid_argument("unknown data rate '" + std::string(text) + "' (DR5|DR6)");
}

DataRateProfile DataRateProfile::dr5() {
    return {};
}

DataRateProfile DataRateProfile::dr6() {
    DataRateProfile p;
    p.name = DataRate::DR6;
    p.n_hdr = 2;
    p.code_rate_num = 2;
    p.code_rate_den = 3;
    return p;
}

DataRateProfile DataRateProfile::of(DataRate dr) {
    return dr == DataRate::DR5 ? dr5() : dr6();
}

int DataRateProfile::omega() const {
    // ceil((1 - num/den) * n_pl) in exact integer arithmetic
    const int num = (code_rate_den - code_rate_num) * n_pl;
    return (num + code_rate_den - 1) / code_rate_den;
}

void DataRateProfile::validate() const {
    if (n_hdr < 1 || n_pl < 1) throw std::invalid_argument("DataRateProfile: fragment counts must be >= 1");
    if (!(t_hdr_s > 0.0 && t_pl_s > 0.0)) throw std::invalid_argument("DataRateProfile: durations must be > 0");
    if (code_rate_num < 1 || code_rate_den < code_rate_num) {
        throw std::invalid_argument("DataRateProfile: code rate must lie in (0, 1]");
    }
    if (omega() < 1) throw std::invalid_argument("DataRateProfile: code rate leaves no payload redundancy budget");
    if (groups < 1 || carriers_per_group < 1) throw std::invalid_argument("DataRateProfile: empty hopping grid");
    if (!(obw_hz > 0.0)) throw std::invalid_argument("DataRateProfile: obw_hz must be > 0");
}

void LinkBudget::validate() const {
    if (!(frequency_mhz > 0.0)) throw std::invalid_argument("LinkBudget: frequency_mhz must be > 0");
    for (double v : {tx_power_dbm, tx_gain_dbi, rx_gain_dbi, noise_figure_db, snr_threshold_db, sir_threshold_db}) {
        if (std::isnan(v)) throw std::invalid_argument("LinkBudget: NaN field");
    }
}

double noise_power_dbm(double nf_db, double obw_hz) {
    if (!(obw_hz > 0.0)) throw std::domain_error("noise_power_dbm: bandwidth must be > 0");
    return -174.0 + nf_db + 10.0 * std::log10(obw_hz);
}

double db_to_linear(double db) {
    return std::pow(10.0, db / 10.0);
}

LinearLink LinearLink::from(const LinkBudget& lb, double obw_hz) {
    lb.validate();
    LinearLink l;
    l.effective_power_mw = db_to_linear(lb.tx_power_dbm + lb.tx_gain_dbi + lb.rx_gain_dbi);
    l.noise_mw = db_to_linear(noise_power_dbm(lb.noise_figure_db, obw_hz));
    l.snr_threshold = db_to_linear(lb.snr_threshold_db);
    l.sir_threshold = db_to_linear(lb.sir_threshold_db);
    return l;
}

double lora_time_on_air_s(const LoraFrame& f) {
    const double t_sym = std::pow(2.0, f.spreading_factor) / f.bandwidth_hz;
    const double t_preamble = (f.preamble_symbols + 4.25) * t_sym;
    const int de = f.low_data_rate_optimize ? 1 : 0;
    const int ih = f.explicit_header ? 0 : 1;
    const double num = 8.0 * f.payload_bytes - 4.0 * f.spreading_factor + 28.0 + 16.0 * (f.crc ? 1 : 0) - 20.0 * ih;
    const double den = 4.0 * (f.spreading_factor - 2 * de);
    const double n_payload = 8.0 + std::max(std::ceil(num / den) * (f.coding_rate + 4), 0.0);
    return t_preamble + n_payload * t_sym;
}

double worst_case_d2d_airtime_s(const LoraFrame& d2d_frame) {
    return 2.0 * DataRateProfile::dr5().toa_s() + lora_time_on_air_s(d2d_frame);
}

}  // namespace lrfhss::analytic
