#include "auctionlab/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "auctionlab/errors.hpp"
#include "auctionlab/format.hpp"
#include "auctionlab/rng.hpp"

namespace auctionlab::market {

namespace {

// Stream tags so every sampled quantity has its own derived seed path and
// paired runs (e.g. semantic compression on/off) reuse identical draws.
constexpr std::uint64_t kStreamCpu = 0;
constexpr std::uint64_t kStreamAppReq = 1;
constexpr std::uint64_t kStreamCyclesPerBit = 2;
constexpr std::uint64_t kStreamUniformValue = 3;

void validate_uav(const UavConfig& uav) {
    if (uav.sensing_time_s <= 0.0 || uav.sensing_rate_img_per_s <= 0.0 ||
        uav.raw_image_bits <= 0.0 || uav.link_rate_bps <= 0.0)
        throw config_error("uav config: all fields must be strictly positive");
}

void validate_vsp(const VspConfig& vsp) {
    if (vsp.uavs.empty()) throw config_error("vsp config: needs at least one uav");
    for (const UavConfig& uav : vsp.uavs) validate_uav(uav);
    if (vsp.cpu_hz <= 0.0) throw config_error("vsp config: cpu_hz must be positive");
    if (vsp.cycles_per_bit <= 0.0) throw config_error("vsp config: cycles_per_bit must be positive");
    if (vsp.app_latency_reqs_s.empty())
        throw config_error("vsp config: needs at least one application requirement");
    for (double r : vsp.app_latency_reqs_s)
        if (r <= 0.0) throw config_error("vsp config: latency requirements must be positive");
}

void validate_market(const MarketConfig& config) {
    if (config.n_units < 1) throw config_error("market config: n_units must be >= 1");
    if (!(config.semcom_box_ratio > 0.0 && config.semcom_box_ratio <= 1.0))
        throw config_error("market config: semcom_box_ratio must be in (0, 1]");
    if (config.semcom_text_bits < 0.0)
        throw config_error("market config: semcom_text_bits must be nonnegative");
    if (config.valuation_scale_s <= 0.0)
        throw config_error("market config: valuation_scale_s must be positive");
    if (config.valuation_source == ValuationSource::uniform) {
        if (config.n_bidders_uniform < 2)
            throw config_error("market config: uniform mode needs n_bidders >= 2");
        return;
    }
    if (config.vsps.size() < 2) throw config_error("market config: need at least 2 vsps");
    for (const VspConfig& vsp : config.vsps) validate_vsp(vsp);
}

}  // namespace

double semantic_payload_bits(double raw_bits, const MarketConfig& config) {
    if (raw_bits <= 0.0) throw config_error("semantic_payload_bits: raw_bits must be positive");
    if (!config.semcom_enabled) return raw_bits;
    return raw_bits * config.semcom_box_ratio + config.semcom_text_bits;
}

double uav_payload_bits(const UavConfig& uav, const MarketConfig& config) {
    validate_uav(uav);
    const double images = std::floor(uav.sensing_time_s * uav.sensing_rate_img_per_s);
    if (images < 1.0)
        throw config_error("uav config: sensing window captures zero whole images");
    return images * semantic_payload_bits(uav.raw_image_bits, config);
}

double sense_comm_time(const VspConfig& vsp, const MarketConfig& config) {
    double worst = 0.0;
    for (const UavConfig& uav : vsp.uavs) {
        const double t = uav.sensing_time_s + uav_payload_bits(uav, config) / uav.link_rate_bps;
        worst = std::max(worst, t);
    }
    return worst;
}

double local_compute_time(double total_bits, double cpu_hz, double cycles_per_bit) {
    if (cpu_hz <= 0.0) throw config_error("local_compute_time: cpu_hz must be positive");
    if (total_bits < 0.0 || cycles_per_bit <= 0.0)
        throw config_error("local_compute_time: bits and cycles_per_bit must be positive");
    return total_bits * cycles_per_bit / cpu_hz;
}

LatencyBreakdown total_latency(const VspConfig& vsp, const MarketConfig& config) {
    validate_vsp(vsp);
    LatencyBreakdown out;
    out.sense_comm_s = sense_comm_time(vsp, config);
    for (const UavConfig& uav : vsp.uavs) out.total_bits += uav_payload_bits(uav, config);
    out.compute_s = local_compute_time(out.total_bits, vsp.cpu_hz, vsp.cycles_per_bit);
    out.total_s = out.sense_comm_s + out.compute_s;
    return out;
}

double min_latency_requirement(const VspConfig& vsp) {
    if (vsp.app_latency_reqs_s.empty())
        throw config_error("vsp config: needs at least one application requirement");
    return *std::min_element(vsp.app_latency_reqs_s.begin(), vsp.app_latency_reqs_s.end());
}

double valuation(const VspConfig& vsp, const MarketConfig& config) {
    const LatencyBreakdown lat = total_latency(vsp, config);
    const double deficit = lat.total_s - min_latency_requirement(vsp);
    return std::clamp(deficit / config.valuation_scale_s, 0.0, 1.0);
}

std::vector<ProfileRecord> sample_records(const MarketConfig& config, std::size_t count,
                                          std::uint64_t seed) {
    validate_market(config);
    if (count < 1) throw config_error("sample_records: count must be >= 1");

    const std::size_t n = config.n_bidders();
    std::vector<ProfileRecord> records;
    records.reserve(count);

    for (std::size_t i = 0; i < count; ++i) {
        ProfileRecord rec;
        rec.values.resize(n);
        rec.t_total_s.assign(n, 0.0);
        rec.t_req_s.assign(n, 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            if (config.valuation_source == ValuationSource::uniform) {
                Rng rng{derive_seed(seed, {kStreamUniformValue, i, v})};
                rec.values[v] = rng.uniform01();
                continue;
            }
            VspConfig vsp = config.vsps[v];
            const SamplingRanges& s = config.sampling;
            Rng cpu_rng{derive_seed(seed, {kStreamCpu, i, v})};
            vsp.cpu_hz = cpu_rng.uniform(s.cpu_hz_lo, s.cpu_hz_hi);
            Rng req_rng{derive_seed(seed, {kStreamAppReq, i, v})};
            for (double& r : vsp.app_latency_reqs_s)
                r = req_rng.uniform(s.app_req_lo_s, s.app_req_hi_s);
            if (s.sample_cycles_per_bit) {
                Rng zeta_rng{derive_seed(seed, {kStreamCyclesPerBit, i, v})};
                vsp.cycles_per_bit = zeta_rng.uniform(s.cycles_per_bit_lo, s.cycles_per_bit_hi);
            }
            const LatencyBreakdown lat = total_latency(vsp, config);
            rec.t_total_s[v] = lat.total_s;
            rec.t_req_s[v] = min_latency_requirement(vsp);
            const double deficit = lat.total_s - rec.t_req_s[v];
            rec.values[v] = std::clamp(deficit / config.valuation_scale_s, 0.0, 1.0);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<ValuationProfile> sample_profiles(const MarketConfig& config, std::size_t count,
                                              std::uint64_t seed) {
    std::vector<ProfileRecord> records = sample_records(config, count, seed);
    std::vector<ValuationProfile> profiles;
    profiles.reserve(records.size());
    for (ProfileRecord& rec : records) profiles.push_back(ValuationProfile{std::move(rec.values)});
    return profiles;
}

std::string records_to_csv(const std::vector<ProfileRecord>& records) {
    std::string out = "profile_id,vsp_id,valuation,t_total_s,t_req_s\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const ProfileRecord& rec = records[i];
        for (std::size_t v = 0; v < rec.values.size(); ++v) {
            out += std::to_string(i);
            out += ',';
            out += std::to_string(v);
            out += ',';
            out += format_g9(rec.values[v]);
            out += ',';
            out += format_g9(rec.t_total_s[v]);
            out += ',';
            out += format_g9(rec.t_req_s[v]);
            out += '\n';
        }
    }
    return out;
}

namespace {

UavConfig uav_from_json(const nlohmann::json& j) {
    UavConfig uav;
    uav.sensing_time_s = j.value("sensing_time_s", uav.sensing_time_s);
    uav.sensing_rate_img_per_s = j.value("sensing_rate_img_per_s", uav.sensing_rate_img_per_s);
    uav.raw_image_bits = j.value("raw_image_bits", uav.raw_image_bits);
    uav.link_rate_bps = j.value("link_rate_bps", uav.link_rate_bps);
    return uav;
}

nlohmann::json uav_to_json(const UavConfig& uav) {
    return {{"sensing_time_s", uav.sensing_time_s},
            {"sensing_rate_img_per_s", uav.sensing_rate_img_per_s},
            {"raw_image_bits", uav.raw_image_bits},
            {"link_rate_bps", uav.link_rate_bps}};
}

VspConfig vsp_from_json(const nlohmann::json& j) {
    VspConfig vsp;
    if (j.contains("uavs")) {
        vsp.uavs.clear();
        for (const nlohmann::json& u : j.at("uavs")) vsp.uavs.push_back(uav_from_json(u));
    }
    vsp.cpu_hz = j.value("cpu_hz", vsp.cpu_hz);
    vsp.cycles_per_bit = j.value("cycles_per_bit", vsp.cycles_per_bit);
    if (j.contains("app_latency_reqs_s"))
        vsp.app_latency_reqs_s = j.at("app_latency_reqs_s").get<std::vector<double>>();
    else if (j.contains("n_apps"))
        // Requirement values are resampled per profile; only the count matters.
        vsp.app_latency_reqs_s.assign(j.at("n_apps").get<std::size_t>(), 2.0);
    return vsp;
}

nlohmann::json vsp_to_json(const VspConfig& vsp) {
    nlohmann::json uavs = nlohmann::json::array();
    for (const UavConfig& uav : vsp.uavs) uavs.push_back(uav_to_json(uav));
    return {{"uavs", std::move(uavs)},
            {"cpu_hz", vsp.cpu_hz},
            {"cycles_per_bit", vsp.cycles_per_bit},
            {"app_latency_reqs_s", vsp.app_latency_reqs_s}};
}

}  // namespace

MarketConfig market_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw config_error("market config: expected a JSON object");
    MarketConfig config;
    const std::string source = j.value("valuation_source", std::string("latency"));
    if (source == "latency")
        config.valuation_source = ValuationSource::latency;
    else if (source == "uniform")
        config.valuation_source = ValuationSource::uniform;
    else
        throw config_error("market config: valuation_source must be 'latency' or 'uniform'");
    config.n_bidders_uniform = j.value("n_bidders", std::size_t{0});
    if (j.contains("vsps")) {
        for (const nlohmann::json& v : j.at("vsps")) config.vsps.push_back(vsp_from_json(v));
    }
    config.n_units = j.value("n_units", config.n_units);
    config.semcom_enabled = j.value("semcom_enabled", config.semcom_enabled);
    config.semcom_box_ratio = j.value("semcom_box_ratio", config.semcom_box_ratio);
    config.semcom_text_bits = j.value("semcom_text_bits", config.semcom_text_bits);
    config.valuation_scale_s = j.value("valuation_scale_s", config.valuation_scale_s);
    config.seed = j.value("seed", config.seed);
    if (j.contains("sampling")) {
        const nlohmann::json& s = j.at("sampling");
        if (s.contains("cpu_hz")) {
            config.sampling.cpu_hz_lo = s.at("cpu_hz").at(0).get<double>();
            config.sampling.cpu_hz_hi = s.at("cpu_hz").at(1).get<double>();
        }
        if (s.contains("app_req_s")) {
            config.sampling.app_req_lo_s = s.at("app_req_s").at(0).get<double>();
            config.sampling.app_req_hi_s = s.at("app_req_s").at(1).get<double>();
        }
        if (s.contains("cycles_per_bit")) {
            config.sampling.sample_cycles_per_bit = true;
            config.sampling.cycles_per_bit_lo = s.at("cycles_per_bit").at(0).get<double>();
            config.sampling.cycles_per_bit_hi = s.at("cycles_per_bit").at(1).get<double>();
        }
    }
    validate_market(config);
    return config;
}

nlohmann::json market_config_to_json(const MarketConfig& config) {
    nlohmann::json j;
    j["valuation_source"] =
        config.valuation_source == ValuationSource::uniform ? "uniform" : "latency";
    if (config.valuation_source == ValuationSource::uniform)
        j["n_bidders"] = config.n_bidders_uniform;
    nlohmann::json vsps = nlohmann::json::array();
    for (const VspConfig& vsp : config.vsps) vsps.push_back(vsp_to_json(vsp));
    if (!vsps.empty()) j["vsps"] = std::move(vsps);
    j["n_units"] = config.n_units;
    j["semcom_enabled"] = config.semcom_enabled;
    j["semcom_box_ratio"] = config.semcom_box_ratio;
    j["semcom_text_bits"] = config.semcom_text_bits;
    j["valuation_scale_s"] = config.valuation_scale_s;
    j["seed"] = config.seed;
    j["sampling"] = {{"cpu_hz", {config.sampling.cpu_hz_lo, config.sampling.cpu_hz_hi}},
                     {"app_req_s", {config.sampling.app_req_lo_s, config.sampling.app_req_hi_s}}};
    if (config.sampling.sample_cycles_per_bit)
        j["sampling"]["cycles_per_bit"] = {config.sampling.cycles_per_bit_lo,
                                           config.sampling.cycles_per_bit_hi};
    return j;
}

}  // namespace auctionlab::market
