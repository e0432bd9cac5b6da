#pragma once

// Runtime message-passing decoders on a Tanner graph: the lookup-table (IB)
// decoder and the reference decoders (double-precision belief propagation,
// fixed-point offset min-sum, layered normalized min-sum). All of them stop as
// soon as the hard decision satisfies every parity check.
//
// Hard-decision convention: a total LLR > 0 decides bit 0, < 0 decides bit 1,
// and an exact zero falls back to the channel sign (bit 1 when that is zero too).

#include "ibldpc/ldpc_code.hpp"
#include "ibldpc/table_designer.hpp"

#include <cstdint>
#include <vector>

namespace ibldpc {

struct DecodeResult {
    std::vector<std::uint8_t> hard_bits;
    int iterations_used = 0;
    bool syndrome_ok = false;
    bool converged_early = false;  // stopped on the syndrome before max_iters

    bool operator==(const DecodeResult&) const = default;
};

enum class MinSumVariant { offset_min_sum, layered_nmsa };

struct MsDecoderConfig {
    MinSumVariant variant = MinSumVariant::offset_min_sum;
    int message_bits = 4;
    int vn_accumulator_bits = 6;
    int offset = 1;              // offset min-sum: subtracted LSBs
    double normalization = 0.75; // layered NMSA: check-node scaling
    double llr_scale = 1.0;      // LLR value of one LSB

    /// 4-bit messages, 6-bit variable-node accumulator, offset 1.
    static MsDecoderConfig offset_min_sum_4bit();
    /// 6-bit messages and accumulator, normalization 0.75.
    static MsDecoderConfig layered_nmsa_6bit();

    int message_max() const noexcept { return (1 << (message_bits - 1)) - 1; }
    int accumulator_max() const noexcept { return (1 << (vn_accumulator_bits - 1)) - 1; }
    void validate() const;
};

/// Largest magnitude representable with `bits` in symmetric two's complement.
inline int saturate(int value, int bits)
{
    const int top = (1 << (bits - 1)) - 1;
    return value > top ? top : (value < -top ? -top : value);
}

/// Fixed-point channel value: round(llr / scale) to the nearest integer, but
/// never to zero for a nonzero LLR, then saturated to `bits`.
int quantize_llr(double llr, double scale, int bits);

/// Double-precision flooding belief propagation (tanh rule).
class SumProductDecoder {
public:
    explicit SumProductDecoder(const SparseMatrix& h);
    DecodeResult decode(const std::vector<double>& channel_llrs, int max_iters, bool early_stop = true) const;

private:
    TannerGraph graph_;
};

/// Per-iteration message snapshots (edge order of TannerGraph).
struct MinSumTrace {
    std::vector<std::vector<int>> v2c;     // messages entering the checks
    std::vector<std::vector<int>> c2v;     // check outputs
    std::vector<std::vector<int>> totals;  // variable accumulators after the iteration
};

/// Fixed-point min-sum decoders: flooding offset min-sum on integer channel
/// values, or row-layered normalized min-sum (rows of one lifted protograph
/// row touch disjoint variables, so row-serial updates equal layer updates).
class MinSumDecoder {
public:
    MinSumDecoder(const SparseMatrix& h, const MsDecoderConfig& config);
    DecodeResult decode(const std::vector<int>& channel_values, int max_iters, bool early_stop = true,
                        MinSumTrace* trace = nullptr) const;
    const MsDecoderConfig& config() const noexcept { return config_; }

private:
    DecodeResult flooding_oms(const std::vector<int>& ch, int max_iters, bool early_stop, MinSumTrace* trace) const;
    DecodeResult layered_nmsa(const std::vector<int>& ch, int max_iters, bool early_stop, MinSumTrace* trace) const;

    TannerGraph graph_;
    MsDecoderConfig config_;
};

/// Message type of the lookup-table decoder: an opaque cluster index.
enum class ClusterIndex : std::uint8_t {};
inline constexpr ClusterIndex kInactive{0xFF};  // carries no information yet
inline constexpr std::uint8_t kPuncturedSymbol = 0xFF;

/// Lookup-table decoder. Punctured variables receive kPuncturedSymbol; every
/// other position carries a channel quantizer index.
class IbDecoder {
public:
    IbDecoder(const RateTables& tables, const SparseMatrix& h, std::vector<std::uint8_t> punctured);
    DecodeResult decode(const std::vector<std::uint8_t>& channel_indices, int max_iters,
                        bool early_stop = true) const;

private:
    const RateTables* tables_;
    TannerGraph graph_;
    std::vector<std::uint8_t> punctured_;
};

bool syndrome_ok(const TannerGraph& graph, const std::vector<std::uint8_t>& bits);

DecodeResult decode_sum_product(const SparseMatrix& h, const std::vector<double>& channel_llrs, int max_iters,
                                bool early_stop = true);
DecodeResult decode_offset_min_sum(const SparseMatrix& h, const std::vector<int>& quantized_llrs,
                                   const MsDecoderConfig& config, int max_iters, bool early_stop = true);
/// Channel LLRs are quantized internally with config.llr_scale.
DecodeResult decode_layered_nmsa(const SparseMatrix& h, const std::vector<double>& channel_llrs,
                                 const MsDecoderConfig& config, int max_iters, bool early_stop = true);
/// Throws ConfigError when the tables hold no such rate point.
DecodeResult decode_ib(const DecoderTables& tables, double code_rate, const SparseMatrix& h,
                       const std::vector<std::uint8_t>& punctured, const std::vector<std::uint8_t>& channel_indices,
                       int max_iters, bool early_stop = true);

}  // namespace ibldpc
