#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code under test beyond plain data types.

#include "ibldpc/decoders.hpp"
#include "ibldpc/ib_core.hpp"
#include "ibldpc/ldpc_code.hpp"
#include "ibldpc/table_designer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef IBLDPC_DATA_DIR
#define IBLDPC_DATA_DIR "data"
#endif

namespace oracle {

inline std::string data_path(const std::string& name)
{
    return std::string(IBLDPC_DATA_DIR) + "/" + name;
}

inline nlohmann::json load_json(const std::string& name)
{
    std::ifstream in(data_path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return nlohmann::json::parse(ss.str());
}

// Plain p(x, y) table, kept apart from BinaryJoint on purpose.
using Table = std::vector<std::array<double, 2>>;

inline Table to_table(const ibldpc::BinaryJoint& j)
{
    Table t(j.size());
    for (std::size_t y = 0; y < j.size(); ++y) {
        t[y] = {j(0, y), j(1, y)};
    }
    return t;
}

inline double mutual_info(const Table& t)
{
    double p0 = 0, p1 = 0, total = 0;
    for (const auto& c : t) {
        p0 += c[0];
        p1 += c[1];
    }
    total = p0 + p1;
    double mi = 0;
    for (const auto& c : t) {
        const double py = (c[0] + c[1]) / total;
        if (c[0] > 0) mi += c[0] / total * std::log2(c[0] / total / (py * p0 / total));
        if (c[1] > 0) mi += c[1] / total * std::log2(c[1] / total / (py * p1 / total));
    }
    return mi;
}

inline Table cluster(const Table& t, const std::vector<int>& assign, int clusters)
{
    Table out(static_cast<std::size_t>(clusters), {0.0, 0.0});
    for (std::size_t y = 0; y < t.size(); ++y) {
        out[static_cast<std::size_t>(assign[y])][0] += t[y][0];
        out[static_cast<std::size_t>(assign[y])][1] += t[y][1];
    }
    return out;
}

/// Best I(X;T) over every map Y -> T (clusters^|Y| candidates).
inline double exhaustive_best(const Table& t, int clusters)
{
    const std::size_t n = t.size();
    std::vector<int> a(n, 0);
    double best = 0;
    for (;;) {
        best = std::max(best, mutual_info(cluster(t, a, clusters)));
        std::size_t i = 0;
        while (i < n && ++a[i] == clusters) {
            a[i++] = 0;
        }
        if (i == n) {
            return best;
        }
    }
}

struct Context {
    double weight;
    Table joint;
};

/// Best I(X;Z) over all per-context maps T -> Z of the weighted mixture.
inline double exhaustive_alignment(const std::vector<Context>& ctx, int clusters)
{
    std::vector<std::vector<int>> a;
    for (const auto& c : ctx) {
        a.emplace_back(c.joint.size(), 0);
    }
    double best = 0;
    for (;;) {
        Table z(static_cast<std::size_t>(clusters), {0.0, 0.0});
        for (std::size_t k = 0; k < ctx.size(); ++k) {
            for (std::size_t t = 0; t < ctx[k].joint.size(); ++t) {
                z[static_cast<std::size_t>(a[k][t])][0] += ctx[k].weight * ctx[k].joint[t][0];
                z[static_cast<std::size_t>(a[k][t])][1] += ctx[k].weight * ctx[k].joint[t][1];
            }
        }
        best = std::max(best, mutual_info(z));
        std::size_t k = 0, t = 0;
        for (;;) {
            if (k == ctx.size()) {
                return best;
            }
            if (++a[k][t] < clusters) {
                break;
            }
            a[k][t] = 0;
            if (++t == a[k].size()) {
                t = 0;
                ++k;
            }
        }
    }
}

/// Random joint with p(x=0) = p(x=1) = 1/2.
inline ibldpc::BinaryJoint random_balanced_joint(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::vector<double> r0(n), r1(n);
    double s0 = 0, s1 = 0;
    for (std::size_t y = 0; y < n; ++y) {
        r0[y] = u(rng);
        r1[y] = u(rng);
        s0 += r0[y];
        s1 += r1[y];
    }
    for (std::size_t y = 0; y < n; ++y) {
        r0[y] *= 0.5 / s0;
        r1[y] *= 0.5 / s1;
    }
    return ibldpc::BinaryJoint::from_rows(r0, r1);
}

// p(x, (a, b)) with x uniform: p(a|x) p(b|x) / 2.
inline Table vn_cells(const Table& a, const Table& b)
{
    double pa[2] = {0, 0}, pb[2] = {0, 0};
    for (const auto& c : a) {
        pa[0] += c[0];
        pa[1] += c[1];
    }
    for (const auto& c : b) {
        pb[0] += c[0];
        pb[1] += c[1];
    }
    Table out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out.push_back({0.5 * (a[i][0] / pa[0]) * (b[j][0] / pb[0]), 0.5 * (a[i][1] / pa[1]) * (b[j][1] / pb[1])});
        }
    }
    return out;
}

// p(x, (a, b)) for x = x1 xor x2. The cells already sum to one.
inline Table cn_cells(const Table& a, const Table& b)
{
    Table out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double even = a[i][0] * b[j][0] + a[i][1] * b[j][1];
            const double odd = a[i][0] * b[j][1] + a[i][1] * b[j][0];
            out.push_back({even, odd});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Codes

inline std::vector<std::uint8_t> dense_syndrome(const std::vector<std::vector<int>>& h, const std::vector<std::uint8_t>& x)
{
    std::vector<std::uint8_t> s(h.size(), 0);
    for (std::size_t r = 0; r < h.size(); ++r) {
        int acc = 0;
        for (std::size_t c = 0; c < x.size(); ++c) {
            acc += h[r][c] * x[c];
        }
        s[r] = static_cast<std::uint8_t>(acc % 2);
    }
    return s;
}

inline bool dense_is_codeword(const std::vector<std::vector<int>>& h, const std::vector<std::uint8_t>& x)
{
    const auto s = dense_syndrome(h, x);
    return std::all_of(s.begin(), s.end(), [](std::uint8_t b) { return b == 0; });
}

inline std::vector<std::vector<int>> hamming74()
{
    return {{1, 1, 0, 1, 1, 0, 0}, {1, 0, 1, 1, 0, 1, 0}, {0, 1, 1, 1, 0, 0, 1}};
}

/// Uniformly random codeword by Gaussian elimination over GF(2).
inline std::vector<std::uint8_t> random_codeword(const std::vector<std::vector<int>>& h, std::mt19937_64& rng)
{
    const std::size_t n = h.front().size();
    const std::size_t words = (n + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows;
    for (const auto& r : h) {
        std::vector<std::uint64_t> b(words, 0);
        for (std::size_t c = 0; c < n; ++c) {
            if (r[c] & 1) {
                b[c / 64] |= std::uint64_t{1} << (c % 64);
            }
        }
        rows.push_back(std::move(b));
    }
    auto bit = [](const std::vector<std::uint64_t>& b, std::size_t c) { return (b[c / 64] >> (c % 64)) & 1u; };
    std::vector<std::size_t> pivots;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < n && rank < rows.size(); ++c) {
        std::size_t r = rank;
        while (r < rows.size() && !bit(rows[r], c)) {
            ++r;
        }
        if (r == rows.size()) {
            continue;
        }
        std::swap(rows[r], rows[rank]);
        for (std::size_t o = 0; o < rows.size(); ++o) {
            if (o != rank && bit(rows[o], c)) {
                for (std::size_t w = 0; w < words; ++w) {
                    rows[o][w] ^= rows[rank][w];
                }
            }
        }
        pivots.push_back(c);
        ++rank;
    }
    std::vector<std::uint8_t> x(n, 0);
    std::vector<std::uint8_t> is_pivot(n, 0);
    for (auto c : pivots) {
        is_pivot[c] = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        if (!is_pivot[c]) {
            x[c] = static_cast<std::uint8_t>(rng() & 1u);
        }
    }
    // reduced rows: pivot bit = xor of the free bits in the row
    for (std::size_t k = 0; k < rank; ++k) {
        std::uint8_t v = 0;
        for (std::size_t c = 0; c < n; ++c) {
            if (!is_pivot[c] && bit(rows[k], c)) {
                v ^= x[c];
            }
        }
        x[pivots[k]] = v;
    }
    return x;
}

/// Every codeword of a small code by brute force.
inline std::vector<std::vector<std::uint8_t>> codewords(const std::vector<std::vector<int>>& h)
{
    const std::size_t n = h.front().size();
    std::vector<std::vector<std::uint8_t>> out;
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
        std::vector<std::uint8_t> x(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<std::uint8_t>((m >> i) & 1u);
        }
        if (dense_is_codeword(h, x)) {
            out.push_back(x);
        }
    }
    return out;
}

/// Bitwise MAP decisions by summing over all codewords (LLR 0 = no information).
inline std::vector<std::uint8_t> bitwise_map(const std::vector<std::vector<int>>& h, const std::vector<double>& llr)
{
    const auto words = codewords(h);
    const std::size_t n = llr.size();
    std::vector<double> p0(n, 0.0), p1(n, 0.0);
    for (const auto& w : words) {
        double logp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            logp += w[i] ? -0.5 * llr[i] : 0.5 * llr[i];
        }
        const double p = std::exp(logp);
        for (std::size_t i = 0; i < n; ++i) {
            (w[i] ? p1[i] : p0[i]) += p;
        }
    }
    std::vector<std::uint8_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = p0[i] > p1[i] ? 0 : 1;
    }
    return out;
}

/// Flooding normalized min-sum on integers: same arithmetic per check as the
/// layered decoder, but every check reads the previous iteration's messages.
inline std::vector<std::uint8_t> flooding_nmsa(const ibldpc::SparseMatrix& h, const std::vector<int>& ch,
                                               const ibldpc::MsDecoderConfig& cfg, int iters)
{
    const ibldpc::TannerGraph g(h);
    std::vector<int> r(g.num_edges(), 0), q(g.num_edges(), 0), total(ch);
    for (int it = 0; it < iters; ++it) {
        for (std::size_t e = 0; e < g.num_edges(); ++e) {
            q[e] = ibldpc::saturate(total[g.edge_var[e]] - r[e], cfg.vn_accumulator_bits);
        }
        for (std::size_t c = 0; c < g.num_checks; ++c) {
            for (auto e = g.check_start[c]; e < g.check_start[c + 1]; ++e) {
                int mag = 1 << 30;
                bool neg = false;
                for (auto o = g.check_start[c]; o < g.check_start[c + 1]; ++o) {
                    if (o != e) {
                        mag = std::min(mag, std::abs(q[o]));
                        neg ^= q[o] < 0;
                    }
                }
                const int m = static_cast<int>(std::lround(cfg.normalization * mag));
                r[e] = ibldpc::saturate(neg ? -m : m, cfg.message_bits);
            }
        }
        for (std::size_t v = 0; v < g.num_vars; ++v) {
            long t = ch[v];
            for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                t += r[g.var_edges[k]];
            }
            total[v] = ibldpc::saturate(static_cast<int>(t), cfg.vn_accumulator_bits);
        }
    }
    std::vector<std::uint8_t> bits(g.num_vars);
    for (std::size_t v = 0; v < g.num_vars; ++v) {
        bits[v] = total[v] > 0 ? 0 : (total[v] < 0 ? 1 : (ch[v] > 0 ? 0 : 1));
    }
    return bits;
}

// ---------------------------------------------------------------------------
// Distribution-level lookup decoder: every message is a probability vector
// over the cluster alphabet and every table is applied as a channel
// out[t] = sum over a, b with table(a, b) == t of p(a) p(b). Each extrinsic
// message is recomputed from scratch. Inactive messages are empty vectors.

using Dist = std::vector<double>;

inline Dist one_hot(std::size_t size, std::size_t k)
{
    Dist d(size, 0.0);
    d[k] = 1.0;
    return d;
}

inline Dist apply(const ibldpc::TwoInputTable& t, const Dist& a, const Dist& b)
{
    Dist out(t.output_size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[t(i, j)] += a[i] * b[j];
        }
    }
    return out;
}

inline Dist apply(const std::vector<std::uint8_t>& map, const Dist& a, std::size_t out_size)
{
    Dist out(out_size, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[map[i]] += a[i];
    }
    return out;
}

class DistributionDecoder {
public:
    DistributionDecoder(const ibldpc::RateTables& tables, const ibldpc::SparseMatrix& h,
                        std::vector<std::uint8_t> punctured)
        : t_(tables), g_(h), punctured_(std::move(punctured))
    {
    }

    ibldpc::DecodeResult decode(const std::vector<std::uint8_t>& symbols, int max_iters) const
    {
        const std::size_t q = t_.quantizer.cardinality();
        const std::size_t m = t_.iterations.front().cn.degree_alignment.meanings.size();
        std::vector<Dist> ch(g_.num_vars);
        for (std::size_t v = 0; v < g_.num_vars; ++v) {
            if (!punctured_[v]) {
                ch[v] = one_hot(q, symbols[v]);
            }
        }
        std::vector<Dist> v2c(g_.num_edges()), c2v(g_.num_edges());
        for (std::size_t e = 0; e < g_.num_edges(); ++e) {
            v2c[e] = ch[g_.edge_var[e]];
        }
        ibldpc::DecodeResult res;
        res.hard_bits.assign(g_.num_vars, 0);
        auto pick = [&](std::size_t i) -> const ibldpc::IterationTables& {
            return t_.iterations[std::min(i, t_.iterations.size() - 1)];
        };
        for (int it = 0; it < max_iters; ++it) {
            const auto& rec = pick(static_cast<std::size_t>(it));
            if (it > 0) {
                const auto& vn = pick(static_cast<std::size_t>(it) - 1).vn;
                for (std::size_t e = 0; e < g_.num_edges(); ++e) {
                    const std::size_t v = g_.edge_var[e];
                    std::vector<const Dist*> in;
                    for (auto k = g_.var_start[v]; k < g_.var_start[v + 1]; ++k) {
                        const auto o = g_.var_edges[k];
                        if (o != e && !c2v[o].empty()) {
                            in.push_back(&c2v[o]);
                        }
                    }
                    if (in.empty()) {
                        v2c[e] = punctured_[v] ? Dist{} : apply(vn.degree_alignment.map[0], ch[v], m);
                        continue;
                    }
                    Dist s = vn_fold(vn, ch[v], punctured_[v] != 0, in, m);
                    v2c[e] = apply(vn.degree_alignment.map[in.size()], s, m);
                }
            }
            for (std::size_t e = 0; e < g_.num_edges(); ++e) {
                const std::size_t c = g_.edge_check[e];
                std::vector<const Dist*> in;
                bool dead = false;
                for (auto o = g_.check_start[c]; o < g_.check_start[c + 1]; ++o) {
                    if (o == e) {
                        continue;
                    }
                    if (v2c[o].empty()) {
                        dead = true;
                    }
                    in.push_back(&v2c[o]);
                }
                if (dead || in.empty()) {
                    c2v[e].clear();
                    continue;
                }
                Dist acc = *in[0];
                for (std::size_t s = 1; s < in.size(); ++s) {
                    acc = apply(rec.cn.stages[s - 1], acc, *in[s]);
                }
                c2v[e] = apply(rec.cn.degree_alignment.map[in.size() - 1], acc, m);
            }
            for (std::size_t v = 0; v < g_.num_vars; ++v) {
                std::vector<const Dist*> in;
                for (auto k = g_.var_start[v]; k < g_.var_start[v + 1]; ++k) {
                    if (!c2v[g_.var_edges[k]].empty()) {
                        in.push_back(&c2v[g_.var_edges[k]]);
                    }
                }
                double p1 = 0;
                if (in.empty()) {
                    if (punctured_[v]) {
                        p1 = 1.0;
                    } else {
                        for (std::size_t k = 0; k < q; ++k) {
                            p1 += ch[v][k] * rec.vn.decision[0][k];
                        }
                    }
                } else {
                    const Dist s = vn_fold(rec.vn, ch[v], punctured_[v] != 0, in, m);
                    for (std::size_t k = 0; k < s.size(); ++k) {
                        p1 += s[k] * rec.vn.decision[in.size()][k];
                    }
                }
                res.hard_bits[v] = p1 > 0.5 ? 1 : 0;
            }
            res.iterations_used = it + 1;
            bool ok = true;
            for (std::size_t c = 0; c < g_.num_checks && ok; ++c) {
                int parity = 0;
                for (auto e = g_.check_start[c]; e < g_.check_start[c + 1]; ++e) {
                    parity ^= res.hard_bits[g_.edge_var[e]];
                }
                ok = parity == 0;
            }
            res.syndrome_ok = ok;
            if (ok) {
                break;
            }
        }
        res.converged_early = res.syndrome_ok && res.iterations_used < max_iters;
        return res;
    }

private:
    static Dist vn_fold(const ibldpc::VnTables& vn, const Dist& ch, bool punctured, const std::vector<const Dist*>& in,
                        std::size_t m)
    {
        const std::size_t first_size = vn.puncture_alignment.meanings.size();
        Dist s = punctured ? apply(vn.puncture_alignment.map[1], apply(vn.punctured_relabel, *in[0], m), first_size)
                           : apply(vn.puncture_alignment.map[0], apply(vn.channel_stage, ch, *in[0]), first_size);
        for (std::size_t k = 1; k < in.size(); ++k) {
            s = apply(vn.stages[k - 1], s, *in[k]);
        }
        return s;
    }

    const ibldpc::RateTables& t_;
    ibldpc::TannerGraph g_;
    std::vector<std::uint8_t> punctured_;
};

}  // namespace oracle
