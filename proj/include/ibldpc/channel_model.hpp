#pragma once

// BPSK over AWGN: channel statistics, fine discretization, IB channel
// quantizer design and runtime sample quantization.
//
// Mapping convention: code bit 0 -> +1, code bit 1 -> -1, so positive
// samples and positive LLRs favour bit 0.

#include "ibldpc/ib_core.hpp"

#include <cstddef>
#include <vector>

namespace ibldpc {

class ChannelSpec {
public:
    ChannelSpec(double ebn0_db, double code_rate);

    /// Inverse of the sigma derivation; used for round-trip checks.
    static ChannelSpec from_sigma(double noise_sigma, double code_rate);

    double ebn0_db() const noexcept { return ebn0_db_; }
    double code_rate() const noexcept { return code_rate_; }
    /// sigma^2 = 1 / (2 R 10^(Eb/N0 / 10)) for unit-energy BPSK.
    double noise_sigma() const noexcept { return sigma_; }
    /// Channel LLR of a received sample: 2 y / sigma^2.
    double llr(double y) const noexcept { return 2.0 * y / (sigma_ * sigma_); }

private:
    double ebn0_db_;
    double code_rate_;
    double sigma_;
};

inline constexpr std::size_t kDefaultGridPoints = 2000;
inline constexpr double kDefaultClipSigma = 8.0;

/// Fine discretization of the channel output into `grid_points` equal-width
/// cells on [-1 - clip*sigma, 1 + clip*sigma]. The outer cells absorb the
/// Gaussian tails, so every cell probability is an exact CDF difference.
struct DiscretizedChannel {
    BinaryJoint joint;              // p(x, y_cell), x equiprobable
    std::vector<double> cell_edges; // grid_points + 1 ascending edges
};

DiscretizedChannel discretize_channel_grid(const ChannelSpec& spec, std::size_t grid_points = kDefaultGridPoints,
                                           double clip_sigma = kDefaultClipSigma);

BinaryJoint discretize_channel(const ChannelSpec& spec, std::size_t grid_points = kDefaultGridPoints,
                               double clip_sigma = kDefaultClipSigma);

/// Symmetric scalar quantizer with half-open cells [b_{i-1}, b_i).
struct ChannelQuantizer {
    std::vector<double> boundaries;     // |T_ch| - 1 strictly increasing thresholds
    std::vector<double> index_meanings; // per-index LLR (nats), strictly increasing
    BinaryJoint joint;                  // p(x, t_ch) at the design point
    double design_ebn0_db = 0.0;
    double code_rate = 0.0;
    double information = 0.0;           // I(X;T_ch) in bits at the design point
    double fine_information = 0.0;      // I(X;Y_fine) of the underlying grid

    std::size_t cardinality() const noexcept { return boundaries.size() + 1; }

    /// Checks ordering, mirror symmetry and monotone meanings.
    void validate() const;
};

/// Designs the I(X;T_ch)-maximizing contiguous quantizer on the fine grid.
/// Symmetry is enforced by designing one half and mirroring it.
ChannelQuantizer design_quantizer(const ChannelSpec& spec, std::size_t cardinality,
                                  std::size_t grid_points = kDefaultGridPoints,
                                  double clip_sigma = kDefaultClipSigma);

/// Index of the cell containing y. A sample equal to a boundary belongs to
/// the upper cell. Throws ValidationError on NaN.
std::size_t quantize_sample(const ChannelQuantizer& q, double y);

}  // namespace ibldpc
