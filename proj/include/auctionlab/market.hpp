#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace auctionlab::market {

/// One UAV feeding sensed data to its VSP over an effective link rate
/// (bandwidth/distance/fading collapsed into bits per second).
struct UavConfig {
    double sensing_time_s = 2.0;
    double sensing_rate_img_per_s = 3.0;
    double raw_image_bits = 28'720'000.0;  // a 3.59 MB camera frame
    double link_rate_bps = 1e7;
};

/// A virtual service provider: a fleet of UAVs, local CPU, processing
/// complexity, and the latency requirements of the applications it serves.
struct VspConfig {
    std::vector<UavConfig> uavs;
    double cpu_hz = 7.5e9;
    double cycles_per_bit = 600.0;
    std::vector<double> app_latency_reqs_s;
};

/// Uniform resampling ranges applied per profile when building datasets.
/// cpu_hz and every app requirement are redrawn inside these ranges; the
/// optional cycles_per_bit range replaces the fixed per-VSP value when set.
struct SamplingRanges {
    double cpu_hz_lo = 5e9;
    double cpu_hz_hi = 10e9;
    double app_req_lo_s = 1.0;
    double app_req_hi_s = 3.0;
    bool sample_cycles_per_bit = false;
    double cycles_per_bit_lo = 600.0;
    double cycles_per_bit_hi = 600.0;
};

enum class ValuationSource { latency, uniform };

/// Scenario parameters generating bidder valuations. In `latency` mode the
/// vsps list drives the sensing/communication/compute model; in `uniform`
/// mode valuations are i.i.d. U[0,1] (synthetic mode for analytic oracles).
struct MarketConfig {
    ValuationSource valuation_source = ValuationSource::latency;
    std::vector<VspConfig> vsps;
    std::size_t n_bidders_uniform = 0;  // uniform mode only
    std::size_t n_units = 1;
    bool semcom_enabled = false;
    double semcom_box_ratio = 0.65 / 3.59;
    double semcom_text_bits = 448.0;
    double valuation_scale_s = 5.0;
    SamplingRanges sampling;
    std::uint64_t seed = 1;

    std::size_t n_bidders() const {
        return valuation_source == ValuationSource::uniform ? n_bidders_uniform : vsps.size();
    }
};

struct LatencyBreakdown {
    double sense_comm_s = 0.0;
    double compute_s = 0.0;
    double total_s = 0.0;
    double total_bits = 0.0;
};

/// One auction instance: per-bidder valuations, each in [0,1].
struct ValuationProfile {
    std::vector<double> values;
};

/// A sampled profile together with the latency quantities that produced it
/// (zeros in uniform mode); this is what the dataset CSV stores.
struct ProfileRecord {
    std::vector<double> values;
    std::vector<double> t_total_s;
    std::vector<double> t_req_s;
};

/// Bits actually transmitted for one raw image: identity when semantic
/// extraction is disabled, otherwise raw * box_ratio + text_bits.
double semantic_payload_bits(double raw_bits, const MarketConfig& config);

/// Bits one UAV uploads per sensing round: floor(time * rate) images, each
/// shrunk by the semantic payload model. Zero-image configs are rejected.
double uav_payload_bits(const UavConfig& uav, const MarketConfig& config);

/// Time until the VSP holds data from all its UAVs: max over UAVs of
/// (sensing time + payload / link rate).
double sense_comm_time(const VspConfig& vsp, const MarketConfig& config);

/// Local processing time: total_bits * cycles_per_bit / cpu_hz.
double local_compute_time(double total_bits, double cpu_hz, double cycles_per_bit);

/// Full pipeline latency: slowest UAV arrival plus local compute over the
/// summed payload of all UAVs.
LatencyBreakdown total_latency(const VspConfig& vsp, const MarketConfig& config);

/// Tightest application requirement for this VSP.
double min_latency_requirement(const VspConfig& vsp);

/// Normalized latency deficit: clamp((t_total - t_req) / scale, 0, 1).
/// Zero when the VSP already meets its tightest requirement on its own.
double valuation(const VspConfig& vsp, const MarketConfig& config);

/// Deterministic dataset sampling: per profile and VSP, cpu_hz and app
/// requirements are redrawn uniformly from the configured ranges (streams
/// derived per index, so paired seeds line up across config variants).
std::vector<ProfileRecord> sample_records(const MarketConfig& config, std::size_t count,
                                          std::uint64_t seed);
std::vector<ValuationProfile> sample_profiles(const MarketConfig& config, std::size_t count,
                                              std::uint64_t seed);

/// CSV with header `profile_id,vsp_id,valuation,t_total_s,t_req_s`,
/// floats printed with 9 significant digits.
std::string records_to_csv(const std::vector<ProfileRecord>& records);

MarketConfig market_config_from_json(const nlohmann::json& j);
nlohmann::json market_config_to_json(const MarketConfig& config);

}  // namespace auctionlab::market
