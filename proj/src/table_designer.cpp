#include "ibldpc/table_designer.hpp"

#include "ibldpc/errors.hpp"
#include "ibldpc/text.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

namespace ibldpc {

namespace {

constexpr double kMarginalTolerance = 1e-9;

// p(x) of a joint, snapped to exactly 1/2 when it is uniform to rounding so
// that combining symmetric inputs stays exactly symmetric.
std::array<double, 2> marginal(const BinaryJoint& j)
{
    const double p0 = j.px(0);
    const double p1 = j.px(1);
    if (std::abs(p0 - p1) < BinaryJoint::kTolerance) {
        const double half = 0.5 * (p0 + p1);
        return {half, half};
    }
    return {p0, p1};
}

void check_marginals(const BinaryJoint& a, const BinaryJoint& b, const char* what)
{
    a.validate();
    b.validate();
    const double pa = a.px(0);
    const double pb = b.px(0);
    if (std::abs(pa - pb) > kMarginalTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << what << ": inputs disagree on p(x=0) (" << pa << " vs " << pb << ")";
        throw DesignError(msg.str());
    }
}

std::vector<std::size_t> pair_reflection(std::size_t size_a, std::size_t size_b, PairSymmetry symmetry)
{
    std::vector<std::size_t> r(size_a * size_b);
    for (std::size_t a = 0; a < size_a; ++a) {
        for (std::size_t b = 0; b < size_b; ++b) {
            const std::size_t fb = symmetry == PairSymmetry::variable ? size_b - 1 - b : b;
            r[a * size_b + b] = (size_a - 1 - a) * size_b + fb;
        }
    }
    return r;
}

bool reflects(const BinaryJoint& joint, const std::vector<std::size_t>& reflection)
{
    for (std::size_t y = 0; y < joint.size(); ++y) {
        const std::size_t r = reflection[y];
        if (std::abs(joint(0, y) - joint(1, r)) > BinaryJoint::kTolerance ||
            std::abs(joint(1, y) - joint(0, r)) > BinaryJoint::kTolerance) {
            return false;
        }
    }
    return true;
}

std::uint8_t decide(double llr, std::size_t index, std::size_t alphabet)
{
    if (llr > 0.0) {
        return 0;
    }
    if (llr < 0.0) {
        return 1;
    }
    return index < alphabet / 2 ? 1 : 0;
}

AlignmentMap to_map(const AlignmentResult& r)
{
    AlignmentMap m;
    for (const auto& ctx : r.assignment) {
        m.map.emplace_back(ctx.begin(), ctx.end());
    }
    for (std::size_t z = 0; z < r.aligned.size(); ++z) {
        m.meanings.push_back(r.aligned.llr(z));
    }
    return m;
}

// Aligned symbol whose meaning is closest to each symbol of `joint`.
std::vector<std::uint8_t> nearest_meaning_map(const BinaryJoint& joint, const std::vector<double>& meanings)
{
    std::vector<std::uint8_t> map(joint.size());
    for (std::size_t t = 0; t < joint.size(); ++t) {
        const double l = joint.llr(t);
        std::size_t best = 0;
        for (std::size_t z = 1; z < meanings.size(); ++z) {
            if (std::abs(meanings[z] - l) < std::abs(meanings[best] - l)) {
                best = z;
            }
        }
        map[t] = static_cast<std::uint8_t>(best);
    }
    return map;
}

std::vector<double> count_weights(const std::vector<std::size_t>& counts, std::size_t first, std::size_t size,
                                  std::size_t fallback)
{
    std::vector<double> w(size, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < size && first + i < counts.size(); ++i) {
        w[i] = static_cast<double>(counts[first + i]);
        total += w[i];
    }
    if (total == 0.0) {
        std::fill(w.begin(), w.end(), 0.0);
        w[fallback] = 1.0;
        return w;
    }
    for (auto& v : w) {
        v /= total;
    }
    // Absorb rounding so the weights sum to one within the alignment tolerance.
    double sum = 0.0;
    for (auto v : w) {
        sum += v;
    }
    const auto top = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    w[top] += 1.0 - sum;
    return w;
}

std::string trace_text(const RateTables& t)
{
    std::ostringstream msg;
    msg.precision(6);
    for (std::size_t i = 0; i < t.iterations.size(); ++i) {
        const auto& it = t.iterations[i];
        msg << "\n  iter " << i << ": I(v2c)=" << it.mi_v2c << " I(c2v)=" << it.mi_c2v << " I(app)=" << it.mi_app;
        if (it.frozen) {
            msg << " (saturated, remaining iterations reuse these tables)";
            break;
        }
    }
    return msg.str();
}

}  // namespace

const RateTables& DecoderTables::rate(double code_rate) const
{
    for (const auto& r : rates) {
        if (std::abs(r.code_rate - code_rate) < 1e-9) {
            return r;
        }
    }
    std::ostringstream msg;
    msg << "tables hold no rate point with R = " << code_rate;
    throw ConfigError(msg.str());
}

DesignGeometry family_geometry(const PbrlFamily& family, const RatePoint& rate)
{
    family.validate();
    const Protograph mother = family.mother();
    const std::size_t rows = family.hrc.rows() + rate.num_irc_transmitted;
    const std::size_t cols = family.hrc.cols() + rate.num_irc_transmitted;
    std::vector<std::vector<int>> base(rows, std::vector<int>(cols, 0));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (mother.base[r][c] > 1) {
                throw ParameterError("density evolution needs a protograph without parallel edges");
            }
            base[r][c] = mother.base[r][c];
        }
    }
    DesignGeometry g;
    g.base = SparseMatrix::from_dense(base);
    const PunctureMask mask = build_mask(family, rate);
    for (std::size_t c = 0; c < cols; ++c) {
        g.punctured.push_back(mask.punctured[c * family.lifting]);
    }
    g.code_rate = rate.code_rate;
    g.num_irc_transmitted = rate.num_irc_transmitted;
    g.puncture_rate = mask.puncture_rate;
    // The lowest rate fixes the tree depth for every rate point.
    for (std::size_t c = 0; c < mother.cols(); ++c) {
        int d = 0;
        for (std::size_t r = 0; r < mother.rows(); ++r) {
            d += mother.base[r][c];
        }
        g.max_var_degree = std::max(g.max_var_degree, d);
    }
    for (const auto& row : mother.base) {
        int d = 0;
        for (int v : row) {
            d += v;
        }
        g.max_check_degree = std::max(g.max_check_degree, d);
    }
    return g;
}

DesignGeometry plain_geometry(const SparseMatrix& h, double code_rate)
{
    DesignGeometry g;
    g.base = h;
    g.punctured.assign(h.cols(), 0);
    g.code_rate = code_rate;
    for (std::size_t c = 0; c < h.cols(); ++c) {
        g.max_var_degree = std::max(g.max_var_degree, static_cast<int>(h.col(c).size()));
    }
    for (std::size_t r = 0; r < h.rows(); ++r) {
        g.max_check_degree = std::max(g.max_check_degree, static_cast<int>(h.row(r).size()));
    }
    return g;
}

BinaryJoint vn_combine(const BinaryJoint& a, const BinaryJoint& b)
{
    check_marginals(a, b, "variable-node combination");
    const auto px = marginal(a);
    BinaryJoint out(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            for (int x = 0; x < 2; ++x) {
                const double p = px[static_cast<std::size_t>(x)];
                out.at(x, i * b.size() + j) = p > 0.0 ? a(x, i) * b(x, j) / p : 0.0;
            }
        }
    }
    out.normalize();
    return out;
}

BinaryJoint cn_combine(const BinaryJoint& a, const BinaryJoint& b)
{
    check_marginals(a, b, "check-node combination");
    BinaryJoint out(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out.at(0, i * b.size() + j) = a(0, i) * b(0, j) + a(1, i) * b(1, j);
            out.at(1, i * b.size() + j) = a(0, i) * b(1, j) + a(1, i) * b(0, j);
        }
    }
    out.normalize();
    return out;
}

CompressedStage compress_stage(const BinaryJoint& pair_joint, std::size_t size_a, std::size_t size_b,
                               std::size_t num_clusters, PairSymmetry symmetry)
{
    if (pair_joint.size() != size_a * size_b) {
        std::ostringstream msg;
        msg << "pair joint has " << pair_joint.size() << " symbols, expected " << size_a << " x " << size_b;
        throw ParameterError(msg.str());
    }
    if (num_clusters > 256) {
        throw ParameterError("table outputs are limited to 256 symbols");
    }
    std::vector<std::size_t> reflection;
    if (symmetry != PairSymmetry::none) {
        reflection = pair_reflection(size_a, size_b, symmetry);
        if (!reflects(pair_joint, reflection)) {
            reflection.clear();
        }
    }
    const ClusterMapping mapping = cluster_by_llr(pair_joint, num_clusters, reflection);

    CompressedStage stage;
    stage.output = mapping.clustered;
    if (!reflection.empty()) {
        stage.output.make_mirror_symmetric();
    }
    stage.table.size_a = static_cast<std::uint32_t>(size_a);
    stage.table.size_b = static_cast<std::uint32_t>(size_b);
    stage.table.out.assign(mapping.assignment.begin(), mapping.assignment.end());
    for (std::size_t t = 0; t < num_clusters; ++t) {
        stage.table.meanings.push_back(stage.output.llr(t));
    }
    const double in = mutual_information(pair_joint);
    stage.information_ratio = in > 0.0 ? mutual_information(stage.output) / in : 1.0;
    return stage;
}

BinaryJoint push_through(const TwoInputTable& table, const BinaryJoint& pair_joint)
{
    if (pair_joint.size() != table.out.size()) {
        throw ParameterError("pair joint does not match the table inputs");
    }
    BinaryJoint out(table.output_size());
    for (std::size_t y = 0; y < pair_joint.size(); ++y) {
        out.at(0, table.out[y]) += pair_joint(0, y);
        out.at(1, table.out[y]) += pair_joint(1, y);
    }
    return out;
}

BinaryJoint relabel(const BinaryJoint& joint, const std::vector<std::uint8_t>& map, std::size_t out_size)
{
    if (map.size() != joint.size()) {
        throw ParameterError("relabeling map does not match the alphabet");
    }
    BinaryJoint out(out_size);
    for (std::size_t y = 0; y < joint.size(); ++y) {
        out.at(0, map[y]) += joint(0, y);
        out.at(1, map[y]) += joint(1, y);
    }
    return out;
}

namespace {

// Sum of the joints seen by one table or alignment context.
struct Pool {
    BinaryJoint sum;
    std::size_t count = 0;

    explicit Pool(std::size_t size) : sum(size) {}

    void add(const BinaryJoint& j)
    {
        for (std::size_t y = 0; y < j.size(); ++y) {
            sum.at(0, y) += j(0, y);
            sum.at(1, y) += j(1, y);
        }
        ++count;
    }

    BinaryJoint mean_or(const BinaryJoint& fallback) const
    {
        if (count == 0) {
            return fallback;
        }
        BinaryJoint m = sum;
        m.normalize();
        return tidy(std::move(m));
    }

    static BinaryJoint tidy(BinaryJoint j)
    {
        if (j.is_mirror_symmetric(1e-9)) {
            j.make_mirror_symmetric();
        }
        return j;
    }
};

// One node computation tracked through the tables: an outgoing message
// (target edge) or a decision (target kDecision).
struct Chain {
    static constexpr std::uint32_t kDecision = 0xFFFFFFFF;
    std::vector<std::uint32_t> inputs;
    std::uint32_t target = kDecision;
    bool punctured = false;
    BinaryJoint state;
};

std::vector<double> pool_weights(const std::vector<std::size_t>& counts)
{
    std::vector<std::size_t> c = counts;
    return count_weights(c, 0, c.size(), c.size() - 1);
}

}  // namespace

RateTables design_at(const DesignGeometry& geometry, double ebn0_db, const DesignConfig& config)
{
    if (config.bit_width < 2 || config.bit_width > 6) {
        throw ParameterError("bit width must lie in [2, 6]");
    }
    if (config.max_iters < 1) {
        throw ParameterError("at least one decoding iteration is required");
    }
    if (geometry.punctured.size() != geometry.base.cols()) {
        throw ParameterError("puncture pattern does not match the code");
    }
    const std::size_t T = std::size_t{1} << config.bit_width;
    const auto dv = static_cast<std::size_t>(geometry.max_var_degree);
    const auto dc = static_cast<std::size_t>(geometry.max_check_degree);
    const TannerGraph g(geometry.base);
    for (std::size_t v = 0; v < g.num_vars; ++v) {
        if (g.var_degree(v) > dv) {
            throw ParameterError("tree depth below the largest variable degree");
        }
    }
    for (std::size_t c = 0; c < g.num_checks; ++c) {
        if (g.check_degree(c) > dc) {
            throw ParameterError("tree depth below the largest check degree");
        }
    }
    if (dv < 1 || dc < 2) {
        throw ParameterError("degenerate code: need variable degree >= 1 and check degree >= 2");
    }

    RateTables out;
    out.code_rate = geometry.code_rate;
    out.num_irc_transmitted = geometry.num_irc_transmitted;
    out.design_ebn0_db = ebn0_db;
    out.puncture_rate = geometry.puncture_rate;
    out.max_var_degree = geometry.max_var_degree;
    out.max_check_degree = geometry.max_check_degree;
    out.quantizer = design_quantizer(ChannelSpec(ebn0_db, geometry.code_rate), T, config.grid_points);

    const BinaryJoint& ch = out.quantizer.joint;
    const double pr = config.condition_on_puncturing ? geometry.puncture_rate : 0.0;
    const auto schedule = effective_degree_schedule(geometry.base, geometry.punctured, config.max_iters + 1);
    const auto self = mirror_reflection(T);
    const std::size_t num_edges = g.num_edges();

    std::vector<BinaryJoint> q(num_edges, ch);  // variable-to-check, meaningful where informative
    std::vector<BinaryJoint> r(num_edges, ch);  // check-to-variable
    auto count_lossy = [&](const CompressedStage& s) { out.lossy_stages += s.information_ratio < 0.995 ? 1 : 0; };

    for (int iter = 0; iter < config.max_iters; ++iter) {
        if (!out.iterations.empty() && out.iterations.back().frozen) {
            out.iterations.push_back(out.iterations.back());
            continue;
        }
        const auto& now = schedule.iterations[static_cast<std::size_t>(iter)];
        const auto& next = schedule.iterations[static_cast<std::size_t>(iter) + 1];
        IterationTables rec;

        Pool q_pool(T);
        double mi_sum = 0.0;
        for (std::size_t e = 0; e < num_edges; ++e) {
            if (now.v2c_active[e]) {
                q_pool.add(q[e]);
                mi_sum += mutual_information(q[e]);
            }
        }
        const BinaryJoint q_mix = q_pool.mean_or(ch);
        rec.mi_v2c = q_pool.count ? mi_sum / static_cast<double>(q_pool.count) : 0.0;

        // Check nodes.
        std::vector<Chain> cn_chains;
        for (std::size_t c = 0; c < g.num_checks; ++c) {
            for (auto e = g.check_start[c]; e < g.check_start[c + 1]; ++e) {
                if (!now.c2v_active[e]) {
                    continue;
                }
                Chain chain;
                chain.target = e;
                for (auto o = g.check_start[c]; o < g.check_start[c + 1]; ++o) {
                    if (o != e) {
                        chain.inputs.push_back(o);
                    }
                }
                chain.state = q[chain.inputs.front()];
                cn_chains.push_back(std::move(chain));
            }
        }
        std::vector<BinaryJoint> cn_fallback = {q_mix};
        for (std::size_t s = 1; s + 1 < dc; ++s) {
            Pool pool(T * T);
            std::vector<BinaryJoint> pairs(cn_chains.size());
            for (std::size_t i = 0; i < cn_chains.size(); ++i) {
                if (cn_chains[i].inputs.size() > s) {
                    pairs[i] = cn_combine(cn_chains[i].state, q[cn_chains[i].inputs[s]]);
                    pool.add(pairs[i]);
                }
            }
            auto stage = compress_stage(pool.mean_or(cn_combine(cn_fallback.back(), q_mix)), T, T, T,
                                        PairSymmetry::check);
            count_lossy(stage);
            for (std::size_t i = 0; i < cn_chains.size(); ++i) {
                if (cn_chains[i].inputs.size() > s) {
                    cn_chains[i].state = Pool::tidy(push_through(stage.table, pairs[i]));
                }
            }
            cn_fallback.push_back(stage.output);
            rec.cn.stages.push_back(std::move(stage.table));
        }
        {
            std::vector<Pool> pools(dc - 1, Pool(T));
            for (const auto& chain : cn_chains) {
                pools[chain.inputs.size() - 1].add(chain.state);
            }
            std::vector<std::size_t> counts;
            std::vector<AlignmentContext> ctx;
            for (std::size_t k = 1; k < dc; ++k) {
                counts.push_back(pools[k - 1].count);
                ctx.push_back({static_cast<int>(k), 0.0, pools[k - 1].mean_or(cn_fallback[k - 1])});
            }
            const auto w = pool_weights(counts);
            for (std::size_t k = 0; k < ctx.size(); ++k) {
                ctx[k].weight = w[k];
            }
            const AlignmentResult aligned = align_messages(ctx, T);
            rec.cn.degree_alignment = to_map(aligned);
        }
        Pool r_pool(T);
        mi_sum = 0.0;
        for (const auto& chain : cn_chains) {
            r[chain.target] = Pool::tidy(relabel(chain.state, rec.cn.degree_alignment.map[chain.inputs.size() - 1], T));
            r_pool.add(r[chain.target]);
            mi_sum += mutual_information(r[chain.target]);
        }
        const BinaryJoint r_mix = r_pool.mean_or(BinaryJoint::uniform(T));
        rec.mi_c2v = r_pool.count ? mi_sum / static_cast<double>(r_pool.count) : 0.0;

        // Variable nodes: every outgoing message of iteration iter+1 and every decision.
        std::vector<Chain> vn_chains;
        for (std::size_t v = 0; v < g.num_vars; ++v) {
            std::vector<std::uint32_t> active;
            for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                if (now.c2v_active[g.var_edges[k]]) {
                    active.push_back(g.var_edges[k]);
                }
            }
            const bool punctured = geometry.punctured[v] != 0;
            for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                const auto e = g.var_edges[k];
                if (!next.v2c_active[e]) {
                    continue;
                }
                Chain chain;
                chain.target = e;
                chain.punctured = punctured;
                for (auto a : active) {
                    if (a != e) {
                        chain.inputs.push_back(a);
                    }
                }
                vn_chains.push_back(std::move(chain));
            }
            Chain decision;
            decision.inputs = active;
            decision.punctured = punctured;
            vn_chains.push_back(std::move(decision));
        }

        Pool first_pool(T * T);
        Pool punct_in(T);
        std::vector<BinaryJoint> pairs(vn_chains.size());
        for (std::size_t i = 0; i < vn_chains.size(); ++i) {
            auto& chain = vn_chains[i];
            if (chain.inputs.empty()) {
                chain.state = chain.punctured ? BinaryJoint::uniform(T) : ch;
            } else if (chain.punctured) {
                punct_in.add(r[chain.inputs[0]]);
            } else {
                pairs[i] = vn_combine(ch, r[chain.inputs[0]]);
                first_pool.add(pairs[i]);
            }
        }
        auto first = compress_stage(first_pool.mean_or(vn_combine(ch, r_mix)), T, T, T, PairSymmetry::variable);
        count_lossy(first);
        rec.vn.channel_stage = first.table;
        const ClusterMapping relabel_r = cluster_by_llr(punct_in.mean_or(r_mix), T, self);
        rec.vn.punctured_relabel.assign(relabel_r.assignment.begin(), relabel_r.assignment.end());

        Pool tx_pool(T);
        Pool p_pool(T);
        for (std::size_t i = 0; i < vn_chains.size(); ++i) {
            auto& chain = vn_chains[i];
            if (chain.inputs.empty()) {
                continue;
            }
            if (chain.punctured) {
                chain.state = Pool::tidy(relabel(r[chain.inputs[0]], rec.vn.punctured_relabel, T));
                p_pool.add(chain.state);
            } else {
                chain.state = Pool::tidy(push_through(first.table, pairs[i]));
                tx_pool.add(chain.state);
            }
        }
        BinaryJoint mix;
        {
            const BinaryJoint tx_joint = tx_pool.mean_or(first.output);
            const BinaryJoint p_joint = p_pool.mean_or(relabel(r_mix, rec.vn.punctured_relabel, T));
            if (config.condition_on_puncturing) {
                const std::vector<AlignmentContext> ctx = {{0, 1.0 - pr, tx_joint}, {1, pr, p_joint}};
                const AlignmentResult aligned = align_messages(ctx, T);
                rec.vn.puncture_alignment = to_map(aligned);
                mix = aligned.aligned;
            } else {
                const std::vector<AlignmentContext> ctx = {{0, 1.0, tx_joint}};
                const AlignmentResult aligned = align_messages(ctx, T);
                rec.vn.puncture_alignment = to_map(aligned);
                rec.vn.puncture_alignment.map.push_back(
                    nearest_meaning_map(p_joint, rec.vn.puncture_alignment.meanings));
                mix = aligned.aligned;
            }
            mix = Pool::tidy(std::move(mix));
        }
        for (auto& chain : vn_chains) {
            if (!chain.inputs.empty()) {
                chain.state = Pool::tidy(relabel(chain.state, rec.vn.puncture_alignment.map[chain.punctured ? 1 : 0], T));
            }
        }
        std::vector<BinaryJoint> vn_fallback = {ch, mix};
        for (std::size_t k = 1; k < dv; ++k) {
            Pool pool(T * T);
            for (std::size_t i = 0; i < vn_chains.size(); ++i) {
                if (vn_chains[i].inputs.size() > k) {
                    pairs[i] = vn_combine(vn_chains[i].state, r[vn_chains[i].inputs[k]]);
                    pool.add(pairs[i]);
                }
            }
            auto stage = compress_stage(pool.mean_or(vn_combine(vn_fallback.back(), r_mix)), T, T, T,
                                        PairSymmetry::variable);
            count_lossy(stage);
            for (std::size_t i = 0; i < vn_chains.size(); ++i) {
                if (vn_chains[i].inputs.size() > k) {
                    vn_chains[i].state = Pool::tidy(push_through(stage.table, pairs[i]));
                }
            }
            vn_fallback.push_back(stage.output);
            rec.vn.stages.push_back(std::move(stage.table));
        }
        {
            std::vector<Pool> pools(dv, Pool(T));
            for (const auto& chain : vn_chains) {
                if (chain.target != Chain::kDecision) {
                    pools[chain.inputs.size()].add(chain.state);
                }
            }
            std::vector<std::size_t> counts;
            std::vector<AlignmentContext> ctx;
            for (std::size_t e = 0; e < dv; ++e) {
                counts.push_back(pools[e].count);
                ctx.push_back({static_cast<int>(e), 0.0, e == 0 ? ch : pools[e].mean_or(vn_fallback[e])});
            }
            const auto w = pool_weights(counts);
            for (std::size_t e = 0; e < ctx.size(); ++e) {
                ctx[e].weight = w[e];
            }
            const AlignmentResult aligned = align_messages(ctx, T);
            rec.vn.degree_alignment = to_map(aligned);
        }

        rec.vn.decision.assign(dv + 1, std::vector<std::uint8_t>(T, 0));
        for (std::size_t t = 0; t < T; ++t) {
            rec.vn.decision[0][t] = decide(out.quantizer.index_meanings[t], t, T);
            rec.vn.decision[1][t] = decide(rec.vn.puncture_alignment.meanings[t], t, T);
            for (std::size_t e = 2; e <= dv; ++e) {
                rec.vn.decision[e][t] = decide(rec.vn.stages[e - 2].meanings[t], t, T);
            }
        }

        double app = 0.0;
        for (const auto& chain : vn_chains) {
            if (chain.target == Chain::kDecision) {
                app += mutual_information(chain.state);
            } else {
                q[chain.target] =
                    Pool::tidy(relabel(chain.state, rec.vn.degree_alignment.map[chain.inputs.size()], T));
            }
        }
        rec.mi_app = app / static_cast<double>(g.num_vars);
        rec.frozen = rec.mi_app >= config.saturation;
        out.iterations.push_back(std::move(rec));
    }
    out.converged = out.iterations.back().mi_app >= config.convergence_target;
    return out;
}

RateTables design_rate(const DesignGeometry& geometry, double ebn0_db, const DesignConfig& config)
{
    if (!std::isnan(ebn0_db)) {
        RateTables t = design_at(geometry, ebn0_db, config);
        if (t.iterations.back().mi_app < t.quantizer.information) {
            std::ostringstream msg;
            msg << "density evolution diverges at R = " << geometry.code_rate << ", Eb/N0 = " << ebn0_db
                << " dB" << trace_text(t);
            throw DesignError(msg.str());
        }
        return t;
    }
    if (!(config.search_resolution_db > 0.0) || !(config.search_high_db > config.search_low_db)) {
        throw ParameterError("invalid design Eb/N0 search range");
    }
    const auto steps = static_cast<long>(
        std::ceil((config.search_high_db - config.search_low_db) / config.search_resolution_db - 1e-9));
    auto point = [&](long i) {
        const double v = config.search_low_db + static_cast<double>(i) * config.search_resolution_db;
        return std::round(v * 1e9) / 1e9;
    };
    RateTables best = design_at(geometry, point(steps), config);
    if (!best.converged) {
        std::ostringstream msg;
        msg << "density evolution does not reach I = " << config.convergence_target << " at R = "
            << geometry.code_rate << " up to " << point(steps) << " dB" << trace_text(best);
        throw DesignError(msg.str());
    }
    long lo = 0;
    long hi = steps;
    RateTables low = design_at(geometry, point(lo), config);
    if (low.converged) {
        return low;
    }
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        RateTables t = design_at(geometry, point(mid), config);
        if (t.converged) {
            hi = mid;
            best = std::move(t);
        } else {
            lo = mid;
        }
    }
    return best;
}

DecoderTables design_tables(const PbrlFamily& family, const std::vector<RatePoint>& rates,
                            const DesignConfig& config)
{
    if (rates.empty()) {
        throw ParameterError("no rate points to design");
    }
    if (!config.design_ebn0_db.empty() && config.design_ebn0_db.size() != 1 &&
        config.design_ebn0_db.size() != rates.size()) {
        throw ParameterError("design Eb/N0 list must hold one value or one per rate point");
    }
    DecoderTables tables;
    tables.bit_width = config.bit_width;
    tables.max_iters = config.max_iters;
    tables.seed = config.seed;
    tables.family_name = family.name;

    std::vector<std::future<RateTables>> jobs;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        double ebn0 = DesignConfig::kAuto;
        if (!config.design_ebn0_db.empty()) {
            ebn0 = config.design_ebn0_db.size() == 1 ? config.design_ebn0_db.front() : config.design_ebn0_db[i];
        }
        const DesignGeometry geometry = family_geometry(family, rates[i]);
        jobs.push_back(std::async(std::launch::async,
                                  [geometry, ebn0, &config] { return design_rate(geometry, ebn0, config); }));
    }
    for (auto& job : jobs) {
        tables.rates.push_back(job.get());
    }
    return tables;
}

std::string design_report_csv(const DecoderTables& tables)
{
    std::ostringstream out;
    out << "rate,design_ebn0_db,iteration,mi_v2c,mi_c2v,mi_app,frozen\n";
    for (const auto& r : tables.rates) {
        for (std::size_t i = 0; i < r.iterations.size(); ++i) {
            const auto& it = r.iterations[i];
            out << format_double(r.code_rate) << ',' << format_double(r.design_ebn0_db) << ',' << i << ','
                << format_double(it.mi_v2c) << ',' << format_double(it.mi_c2v) << ',' << format_double(it.mi_app)
                << ',' << (it.frozen ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

}  // namespace ibldpc
