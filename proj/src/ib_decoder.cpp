#include "ibldpc/decoders.hpp"

#include "ibldpc/errors.hpp"

#include <algorithm>
#include <sstream>

namespace ibldpc {

namespace {

// Lookups on cluster indices. Messages are never converted to numbers the
// decoder computes with; the underlying byte only addresses tables.
inline std::size_t idx(ClusterIndex c)
{
    return static_cast<std::size_t>(c);
}

inline ClusterIndex lookup(const TwoInputTable& t, ClusterIndex a, ClusterIndex b)
{
    return ClusterIndex{t(idx(a), idx(b))};
}

inline ClusterIndex lookup(const std::vector<std::uint8_t>& map, ClusterIndex a)
{
    return ClusterIndex{map[idx(a)]};
}

// Variable-node tree walk: state after the first input, then one stage per input.
struct VnWalk {
    const VnTables& t;
    ClusterIndex channel;
    bool punctured;

    ClusterIndex first(ClusterIndex r) const
    {
        if (punctured) {
            return lookup(t.puncture_alignment.map[1], lookup(t.punctured_relabel, r));
        }
        return lookup(t.puncture_alignment.map[0], lookup(t.channel_stage, channel, r));
    }
    // `consumed` inputs are already folded into `state`.
    ClusterIndex step(ClusterIndex state, std::size_t consumed, ClusterIndex r) const
    {
        return lookup(t.stages[consumed - 1], state, r);
    }
};

}  // namespace

IbDecoder::IbDecoder(const RateTables& tables, const SparseMatrix& h, std::vector<std::uint8_t> punctured)
    : tables_(&tables), graph_(h), punctured_(std::move(punctured))
{
    if (punctured_.size() != graph_.num_vars) {
        throw ParameterError("puncture pattern does not match the code length");
    }
    if (tables.iterations.empty()) {
        throw ConfigError("decoder tables hold no iterations");
    }
    for (std::size_t v = 0; v < graph_.num_vars; ++v) {
        if (graph_.var_degree(v) > static_cast<std::size_t>(tables.max_var_degree)) {
            throw ConfigError("variable degree exceeds the depth of the designed tables");
        }
    }
    for (std::size_t c = 0; c < graph_.num_checks; ++c) {
        if (graph_.check_degree(c) > static_cast<std::size_t>(tables.max_check_degree)) {
            throw ConfigError("check degree exceeds the depth of the designed tables");
        }
    }
}

DecodeResult IbDecoder::decode(const std::vector<std::uint8_t>& channel_indices, int max_iters, bool early_stop) const
{
    if (max_iters < 1) {
        throw ParameterError("max_iters must be at least 1");
    }
    const auto& g = graph_;
    const std::size_t alphabet = tables_->quantizer.cardinality();
    if (channel_indices.size() != g.num_vars) {
        throw ParameterError("channel index count does not match the code length");
    }
    std::vector<ClusterIndex> ch(g.num_vars);
    for (std::size_t v = 0; v < g.num_vars; ++v) {
        const std::uint8_t s = channel_indices[v];
        if (punctured_[v] ? s != kPuncturedSymbol : s >= alphabet) {
            std::ostringstream msg;
            msg << "channel symbol " << static_cast<int>(s) << " at position " << v
                << (punctured_[v] ? " must be the punctured marker" : " is outside the quantizer alphabet");
            throw ParameterError(msg.str());
        }
        ch[v] = punctured_[v] ? kInactive : ClusterIndex{s};
    }

    const std::size_t num_edges = g.num_edges();
    std::vector<ClusterIndex> v2c(num_edges, kInactive), c2v(num_edges, kInactive);
    std::vector<ClusterIndex> prefix;
    std::vector<std::uint32_t> active;
    for (std::size_t e = 0; e < num_edges; ++e) {
        v2c[e] = ch[g.edge_var[e]];
    }

    DecodeResult res;
    res.hard_bits.assign(g.num_vars, 0);
    const auto& iterations = tables_->iterations;
    for (int it = 0; it < max_iters; ++it) {
        const auto& rec = iterations[std::min(static_cast<std::size_t>(it), iterations.size() - 1)];

        if (it > 0) {
            // Variable-to-check messages from the previous iteration's tables.
            const auto& prev = iterations[std::min(static_cast<std::size_t>(it) - 1, iterations.size() - 1)];
            for (std::size_t v = 0; v < g.num_vars; ++v) {
                const VnWalk walk{prev.vn, ch[v], punctured_[v] != 0};
                active.clear();
                for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                    if (c2v[g.var_edges[k]] != kInactive) {
                        active.push_back(g.var_edges[k]);
                    }
                }
                // prefix[i]: state after the first i active inputs.
                prefix.assign(active.size() + 1, kInactive);
                for (std::size_t i = 0; i < active.size(); ++i) {
                    prefix[i + 1] = i == 0 ? walk.first(c2v[active[0]]) : walk.step(prefix[i], i, c2v[active[i]]);
                }
                for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                    const auto e = g.var_edges[k];
                    const auto pos = static_cast<std::size_t>(std::find(active.begin(), active.end(), e) - active.begin());
                    ClusterIndex state = prefix[std::min(pos, active.size())];
                    std::size_t consumed = std::min(pos, active.size());
                    for (std::size_t i = pos + 1; i < active.size(); ++i) {
                        state = consumed == 0 ? walk.first(c2v[active[i]]) : walk.step(state, consumed, c2v[active[i]]);
                        ++consumed;
                    }
                    if (consumed == 0) {
                        v2c[e] = walk.punctured ? kInactive : lookup(prev.vn.degree_alignment.map[0], ch[v]);
                    } else {
                        v2c[e] = lookup(prev.vn.degree_alignment.map[consumed], state);
                    }
                }
            }
        }

        // Check-to-variable messages.
        for (std::size_t c = 0; c < g.num_checks; ++c) {
            const auto b = g.check_start[c];
            const auto end = g.check_start[c + 1];
            const std::size_t degree = end - b;
            std::size_t inactive = 0;
            std::uint32_t missing = b;
            for (auto e = b; e < end; ++e) {
                if (v2c[e] == kInactive) {
                    ++inactive;
                    missing = e;
                }
            }
            for (auto e = b; e < end; ++e) {
                c2v[e] = kInactive;
            }
            if (inactive > 1 || degree < 2) {
                continue;
            }
            const auto& cn = rec.cn;
            auto finish = [&](std::uint32_t target) {
                // Inputs: every edge but the target, in edge order.
                ClusterIndex acc = kInactive;
                std::size_t count = 0;
                for (auto o = b; o < end; ++o) {
                    if (o == target) {
                        continue;
                    }
                    acc = count == 0 ? v2c[o] : lookup(cn.stages[count - 1], acc, v2c[o]);
                    ++count;
                }
                c2v[target] = lookup(cn.degree_alignment.map[count - 1], acc);
            };
            if (inactive == 1) {
                finish(missing);
                continue;
            }
            // prefix[i]: accumulator over the first i edges.
            prefix.assign(degree + 1, kInactive);
            for (std::size_t i = 0; i + 1 < degree; ++i) {
                prefix[i + 1] = i == 0 ? v2c[b] : lookup(cn.stages[i - 1], prefix[i], v2c[b + i]);
            }
            for (std::size_t j = 0; j < degree; ++j) {
                ClusterIndex acc = j == 0 ? kInactive : prefix[j];
                std::size_t count = j;
                for (std::size_t i = j + 1; i < degree; ++i) {
                    acc = count == 0 ? v2c[b + i] : lookup(cn.stages[count - 1], acc, v2c[b + i]);
                    ++count;
                }
                c2v[b + j] = lookup(cn.degree_alignment.map[count - 1], acc);
            }
        }

        // Decisions from every informative input.
        for (std::size_t v = 0; v < g.num_vars; ++v) {
            const VnWalk walk{rec.vn, ch[v], punctured_[v] != 0};
            ClusterIndex state = kInactive;
            std::size_t consumed = 0;
            for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                const ClusterIndex r = c2v[g.var_edges[k]];
                if (r == kInactive) {
                    continue;
                }
                state = consumed == 0 ? walk.first(r) : walk.step(state, consumed, r);
                ++consumed;
            }
            if (consumed == 0) {
                res.hard_bits[v] = walk.punctured ? 1 : rec.vn.decision[0][idx(ch[v])];
            } else {
                res.hard_bits[v] = rec.vn.decision[consumed][idx(state)];
            }
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

DecodeResult decode_ib(const DecoderTables& tables, double code_rate, const SparseMatrix& h,
                       const std::vector<std::uint8_t>& punctured, const std::vector<std::uint8_t>& channel_indices,
                       int max_iters, bool early_stop)
{
    const RateTables& rate = tables.rate(code_rate);
    return IbDecoder(rate, h, punctured).decode(channel_indices, max_iters, early_stop);
}

}  // namespace ibldpc
