#include "ibldpc/decoders.hpp"

#include "ibldpc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace ibldpc {

namespace {

constexpr double kMaxChannelLlr = 1000.0;
constexpr double kTanhLimit = 1.0 - 1e-15;

std::uint8_t hard_bit(double total, double channel)
{
    if (total > 0.0) {
        return 0;
    }
    if (total < 0.0) {
        return 1;
    }
    return channel > 0.0 ? 0 : 1;
}

void check_iters(int max_iters)
{
    if (max_iters < 1) {
        throw ParameterError("max_iters must be at least 1");
    }
}

}  // namespace

bool syndrome_ok(const TannerGraph& graph, const std::vector<std::uint8_t>& bits)
{
    for (std::size_t c = 0; c < graph.num_checks; ++c) {
        std::uint8_t parity = 0;
        for (auto e = graph.check_start[c]; e < graph.check_start[c + 1]; ++e) {
            parity ^= bits[graph.edge_var[e]];
        }
        if (parity != 0) {
            return false;
        }
    }
    return true;
}

MsDecoderConfig MsDecoderConfig::offset_min_sum_4bit()
{
    MsDecoderConfig c;
    c.variant = MinSumVariant::offset_min_sum;
    c.message_bits = 4;
    c.vn_accumulator_bits = 6;
    c.offset = 1;
    return c;
}

MsDecoderConfig MsDecoderConfig::layered_nmsa_6bit()
{
    MsDecoderConfig c;
    c.variant = MinSumVariant::layered_nmsa;
    c.message_bits = 6;
    c.vn_accumulator_bits = 6;
    c.normalization = 0.75;
    return c;
}

void MsDecoderConfig::validate() const
{
    if (message_bits < 2 || message_bits > 16) {
        throw ParameterError("message bits must lie in [2, 16]");
    }
    if (vn_accumulator_bits < message_bits || vn_accumulator_bits > 24) {
        throw ParameterError("accumulator needs at least the message width (and at most 24 bits)");
    }
    if (offset < 0) {
        throw ParameterError("offset must be nonnegative");
    }
    if (!(normalization > 0.0 && normalization <= 1.0)) {
        throw ParameterError("normalization must lie in (0, 1]");
    }
    if (!(llr_scale > 0.0) || !std::isfinite(llr_scale)) {
        throw ParameterError("LLR scale must be positive");
    }
}

int quantize_llr(double llr, double scale, int bits)
{
    if (std::isnan(llr)) {
        throw ValidationError("cannot quantize a NaN LLR");
    }
    const int top = (1 << (bits - 1)) - 1;
    const double v = llr / scale;
    if (v == 0.0) {
        return 0;
    }
    if (std::abs(v) >= top) {
        return v > 0 ? top : -top;
    }
    long q = std::lround(v);
    if (q == 0) {
        q = v > 0 ? 1 : -1;
    }
    return static_cast<int>(q);
}

// ---------------------------------------------------------------------------
// Belief propagation

SumProductDecoder::SumProductDecoder(const SparseMatrix& h) : graph_(h) {}

DecodeResult SumProductDecoder::decode(const std::vector<double>& channel_llrs, int max_iters, bool early_stop) const
{
    check_iters(max_iters);
    const auto& g = graph_;
    if (channel_llrs.size() != g.num_vars) {
        throw ParameterError("channel LLR count does not match the code length");
    }
    std::vector<double> ch(g.num_vars);
    for (std::size_t v = 0; v < g.num_vars; ++v) {
        if (std::isnan(channel_llrs[v])) {
            throw ValidationError("NaN channel LLR");
        }
        ch[v] = std::clamp(channel_llrs[v], -kMaxChannelLlr, kMaxChannelLlr);
    }
    const std::size_t num_edges = g.num_edges();
    std::vector<double> v2c(num_edges), c2v(num_edges, 0.0), t(num_edges), fwd(num_edges);
    for (std::size_t e = 0; e < num_edges; ++e) {
        v2c[e] = ch[g.edge_var[e]];
    }
    DecodeResult res;
    res.hard_bits.assign(g.num_vars, 0);
    for (int it = 0; it < max_iters; ++it) {
        for (std::size_t c = 0; c < g.num_checks; ++c) {
            const auto b = g.check_start[c];
            const auto end = g.check_start[c + 1];
            double acc = 1.0;
            for (auto e = b; e < end; ++e) {
                t[e] = std::tanh(0.5 * v2c[e]);
                fwd[e] = acc;
                acc *= t[e];
            }
            double back = 1.0;
            for (auto e = end; e-- > b;) {
                const double prod = std::clamp(fwd[e] * back, -kTanhLimit, kTanhLimit);
                c2v[e] = 2.0 * std::atanh(prod);
                back *= t[e];
            }
        }
        for (std::size_t v = 0; v < g.num_vars; ++v) {
            double total = ch[v];
            for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                total += c2v[g.var_edges[k]];
            }
            for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                const auto e = g.var_edges[k];
                v2c[e] = total - c2v[e];
            }
            res.hard_bits[v] = hard_bit(total, ch[v]);
        }
        res.iterations_used = it + 1;
        res.syndrome_ok = syndrome_ok(g, res.hard_bits);
        if (res.syndrome_ok && early_stop) {
            break;
        }
    }
    res.converged_early = res.syndrome_ok && res.iterations_used < max_iters;
    return res;
}

// ---------------------------------------------------------------------------
// Min-sum

MinSumDecoder::MinSumDecoder(const SparseMatrix& h, const MsDecoderConfig& config) : graph_(h), config_(config)
{
    config_.validate();
}

DecodeResult MinSumDecoder::decode(const std::vector<int>& channel_values, int max_iters, bool early_stop,
                                   MinSumTrace* trace) const
{
    check_iters(max_iters);
    if (channel_values.size() != graph_.num_vars) {
        throw ParameterError("channel value count does not match the code length");
    }
    const int acc_max = config_.accumulator_max();
    for (int v : channel_values) {
        if (std::abs(v) > acc_max) {
            throw ParameterError("channel value exceeds the accumulator range");
        }
    }
    if (config_.variant == MinSumVariant::offset_min_sum) {
        return flooding_oms(channel_values, max_iters, early_stop, trace);
    }
    return layered_nmsa(channel_values, max_iters, early_stop, trace);
}

DecodeResult MinSumDecoder::flooding_oms(const std::vector<int>& ch, int max_iters, bool early_stop,
                                         MinSumTrace* trace) const
{
    const auto& g = graph_;
    const int mb = config_.message_bits;
    const int ab = config_.vn_accumulator_bits;
    const std::size_t num_edges = g.num_edges();
    std::vector<int> v2c(num_edges), c2v(num_edges, 0), total(g.num_vars);
    for (std::size_t e = 0; e < num_edges; ++e) {
        v2c[e] = saturate(ch[g.edge_var[e]], mb);
    }
    DecodeResult res;
    res.hard_bits.assign(g.num_vars, 0);
    for (int it = 0; it < max_iters; ++it) {
        if (trace) {
            trace->v2c.push_back(v2c);
        }
        for (std::size_t c = 0; c < g.num_checks; ++c) {
            const auto b = g.check_start[c];
            const auto end = g.check_start[c + 1];
            int min1 = 1 << 30;
            int min2 = 1 << 30;
            std::uint32_t arg = b;
            bool negative = false;
            for (auto e = b; e < end; ++e) {
                const int m = std::abs(v2c[e]);
                negative ^= v2c[e] < 0;
                if (m < min1) {
                    min2 = min1;
                    min1 = m;
                    arg = e;
                } else if (m < min2) {
                    min2 = m;
                }
            }
            for (auto e = b; e < end; ++e) {
                const int m = e == arg ? min2 : min1;
                const int mag = end - b < 2 ? 0 : std::max(m - config_.offset, 0);
                const bool neg = negative ^ (v2c[e] < 0);
                c2v[e] = saturate(neg ? -mag : mag, mb);
            }
        }
        for (std::size_t v = 0; v < g.num_vars; ++v) {
            int sum = ch[v];
            for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                sum += c2v[g.var_edges[k]];
            }
            total[v] = saturate(sum, ab);
            for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                const auto e = g.var_edges[k];
                v2c[e] = saturate(saturate(total[v] - c2v[e], ab), mb);
            }
            res.hard_bits[v] = hard_bit(total[v], ch[v]);
        }
        if (trace) {
            trace->c2v.push_back(c2v);
            trace->totals.push_back(total);
        }
        res.iterations_used = it + 1;
        res.syndrome_ok = syndrome_ok(g, res.hard_bits);
        if (res.syndrome_ok && early_stop) {
            break;
        }
    }
    res.converged_early = res.syndrome_ok && res.iterations_used < max_iters;
    return res;
}

DecodeResult MinSumDecoder::layered_nmsa(const std::vector<int>& ch, int max_iters, bool early_stop,
                                         MinSumTrace* trace) const
{
    const auto& g = graph_;
    const int mb = config_.message_bits;
    const int ab = config_.vn_accumulator_bits;
    const double alpha = config_.normalization;
    const std::size_t num_edges = g.num_edges();
    std::vector<int> posterior(g.num_vars), r(num_edges, 0), q(num_edges, 0);
    for (std::size_t v = 0; v < g.num_vars; ++v) {
        posterior[v] = saturate(ch[v], ab);
    }
    DecodeResult res;
    res.hard_bits.assign(g.num_vars, 0);
    for (int it = 0; it < max_iters; ++it) {
        for (std::size_t c = 0; c < g.num_checks; ++c) {
            const auto b = g.check_start[c];
            const auto end = g.check_start[c + 1];
            int min1 = 1 << 30;
            int min2 = 1 << 30;
            std::uint32_t arg = b;
            bool negative = false;
            for (auto e = b; e < end; ++e) {
                q[e] = saturate(posterior[g.edge_var[e]] - r[e], ab);
                const int m = std::abs(q[e]);
                negative ^= q[e] < 0;
                if (m < min1) {
                    min2 = min1;
                    min1 = m;
                    arg = e;
                } else if (m < min2) {
                    min2 = m;
                }
            }
            for (auto e = b; e < end; ++e) {
                const int m = end - b < 2 ? 0 : (e == arg ? min2 : min1);
                const int mag = static_cast<int>(std::lround(alpha * m));
                const bool neg = negative ^ (q[e] < 0);
                r[e] = saturate(neg ? -mag : mag, mb);
                posterior[g.edge_var[e]] = saturate(q[e] + r[e], ab);
            }
        }
        for (std::size_t v = 0; v < g.num_vars; ++v) {
            res.hard_bits[v] = hard_bit(posterior[v], ch[v]);
        }
        if (trace) {
            trace->v2c.push_back(q);
            trace->c2v.push_back(r);
            trace->totals.push_back(posterior);
        }
        res.iterations_used = it + 1;
        res.syndrome_ok = syndrome_ok(g, res.hard_bits);
        if (res.syndrome_ok && early_stop) {
            break;
        }
    }
    res.converged_early = res.syndrome_ok && res.iterations_used < max_iters;
    return res;
}

DecodeResult decode_sum_product(const SparseMatrix& h, const std::vector<double>& channel_llrs, int max_iters,
                                bool early_stop)
{
    return SumProductDecoder(h).decode(channel_llrs, max_iters, early_stop);
}

DecodeResult decode_offset_min_sum(const SparseMatrix& h, const std::vector<int>& quantized_llrs,
                                   const MsDecoderConfig& config, int max_iters, bool early_stop)
{
    if (config.variant != MinSumVariant::offset_min_sum) {
        throw ParameterError("configuration is not an offset min-sum variant");
    }
    return MinSumDecoder(h, config).decode(quantized_llrs, max_iters, early_stop);
}

DecodeResult decode_layered_nmsa(const SparseMatrix& h, const std::vector<double>& channel_llrs,
                                 const MsDecoderConfig& config, int max_iters, bool early_stop)
{
    if (config.variant != MinSumVariant::layered_nmsa) {
        throw ParameterError("configuration is not a layered NMSA variant");
    }
    config.validate();
    std::vector<int> ch(channel_llrs.size());
    for (std::size_t v = 0; v < ch.size(); ++v) {
        ch[v] = quantize_llr(channel_llrs[v], config.llr_scale, config.vn_accumulator_bits);
    }
    return MinSumDecoder(h, config).decode(ch, max_iters, early_stop);
}

}  // namespace ibldpc
