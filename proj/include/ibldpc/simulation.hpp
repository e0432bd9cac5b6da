#pragma once

// Monte-Carlo frame error rate campaigns: all-zero codeword, BPSK over AWGN,
// punctured positions never transmitted. Every frame draws its noise from a
// generator seeded by (master seed, rate index, Eb/N0 index, frame index), so
// tallies do not depend on the number of worker threads.

#include "ibldpc/decoders.hpp"
#include "ibldpc/ldpc_code.hpp"
#include "ibldpc/table_designer.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ibldpc {

enum class DecoderKind { ib, sum_product, offset_min_sum, layered_nmsa };

struct DecoderSpec {
    std::string id;
    DecoderKind kind = DecoderKind::sum_product;
    MsDecoderConfig ms;           // fixed-point settings for the min-sum kinds
    bool auto_llr_scale = true;   // derive ms.llr_scale from the channel quantizer
};

/// Parses "ib", "bp", "oms4", "nmsa6" or the long kind names.
DecoderSpec decoder_from_name(const std::string& name);

struct EbN0Sweep {
    double start = 0.0;
    double stop = 0.0;
    double step = 0.5;

    std::vector<double> points() const;
};

struct CampaignConfig {
    std::string family_path;  // empty: the built-in stand-in family
    std::vector<double> rates;
    std::vector<DecoderSpec> decoders;
    EbN0Sweep sweep;
    std::size_t max_frames = 1000000;
    std::size_t min_frame_errors = 50;
    int max_iters = 100;
    std::uint64_t seed = 1;
    std::string tables_path;
    unsigned threads = 0;           // 0: one per hardware thread
    bool record_wall_time = false;  // off keeps the CSV byte-reproducible

    void validate() const;
};

/// JSON campaign file. Relative paths resolve against `base_dir`.
CampaignConfig parse_campaign_config(std::string_view json_text, const std::string& base_dir = "");
CampaignConfig load_campaign_config(const std::string& path);

struct FerRecord {
    std::string decoder;
    double rate = 0.0;
    double ebn0_db = 0.0;
    std::uint64_t frames = 0;
    std::uint64_t frame_errors = 0;
    std::uint64_t bit_errors = 0;
    double fer = 0.0;
    double avg_iters = 0.0;
    double wall_s = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const FerRecord&) const = default;
};

struct WilsonInterval {
    double low = 0.0;
    double high = 1.0;
    double half_width() const { return 0.5 * (high - low); }
};

/// Wilson score interval for k successes in n trials (z = 1.96 by default).
WilsonInterval wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

/// Seed of one frame's noise stream.
std::uint64_t frame_seed(std::uint64_t master, std::size_t rate_index, std::size_t ebn0_index, std::uint64_t frame);

/// One (decoder, rate) pair ready to simulate: code, puncture pattern and
/// decoder objects shared read-only by the workers.
class PointSimulator {
public:
    PointSimulator(const PbrlFamily& family, double rate, const DecoderSpec& spec, const DecoderTables* tables,
                   int max_iters);

    struct Outcome {
        bool frame_error = false;
        std::uint32_t bit_errors = 0;
        int iterations = 0;
    };

    /// Decodes one frame whose noise comes from `seed`.
    Outcome run_frame(double ebn0_db, std::uint64_t seed) const;
    Outcome run_frame(const ChannelQuantizer& quantizer, double ebn0_db, std::uint64_t seed) const;

    /// Channel quantizer feeding the IB and fixed-point decoders: the one
    /// embedded in the tables, else one designed at `ebn0_db`.
    ChannelQuantizer quantizer_for(double ebn0_db) const;

    /// Simulates frames 0, 1, ... in order until `min_frame_errors` errors or
    /// `max_frames` frames, using `threads` workers.
    FerRecord run_point(double ebn0_db, std::uint64_t master_seed, std::size_t rate_index, std::size_t ebn0_index,
                        std::size_t max_frames, std::size_t min_frame_errors, unsigned threads) const;

    const SparseMatrix& code() const noexcept { return h_; }

private:
    DecoderSpec spec_;
    double rate_;
    std::size_t k_info_;
    SparseMatrix h_;
    std::vector<std::uint8_t> punctured_;
    int max_iters_;
    const RateTables* rate_tables_ = nullptr;
    std::optional<SumProductDecoder> bp_;
    std::optional<MinSumDecoder> ms_;
    std::optional<IbDecoder> ib_;
};

using RecordCallback = std::function<void(const FerRecord&)>;

/// Runs every (rate, Eb/N0, decoder) point of the campaign.
std::vector<FerRecord> run_campaign(const CampaignConfig& config, const PbrlFamily& family,
                                    const DecoderTables* tables, const RecordCallback& on_record = {});

/// Loads the family and tables named by the config, then runs it.
std::vector<FerRecord> run_campaign(const CampaignConfig& config, const RecordCallback& on_record = {});

inline constexpr std::string_view kCsvHeader = "decoder,rate,ebn0_db,frames,frame_errors,bit_errors,fer,avg_iters,wall_s,seed";

std::string emit_csv(const std::vector<FerRecord>& records);
void emit_csv(const std::vector<FerRecord>& records, const std::string& path);
std::vector<FerRecord> parse_csv(std::string_view text);

/// JSON with one series per (decoder, rate), points ordered by Eb/N0, each
/// with its FER and Wilson 95% bounds.
std::string emit_plot_data(const std::vector<FerRecord>& records);
void emit_plot_data(const std::vector<FerRecord>& records, const std::string& path);

/// Eb/N0 where a series crosses `target_fer`, interpolated linearly in
/// log10(FER) between the bracketing points; nullopt without a crossing.
std::optional<double> fer_crossing(const std::vector<FerRecord>& series, double target_fer);

}  // namespace ibldpc
