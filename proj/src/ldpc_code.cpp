#include "ibldpc/ldpc_code.hpp"

#include "ibldpc/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <charconv>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace ibldpc {

// ---------------------------------------------------------------------------
// SparseMatrix / TannerGraph

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols) : row_cols_(rows), col_rows_(cols) {}

SparseMatrix SparseMatrix::from_entries(std::size_t rows, std::size_t cols,
                                        const std::vector<std::pair<std::size_t, std::size_t>>& entries)
{
    SparseMatrix m(rows, cols);
    for (auto [r, c] : entries) {
        if (r >= rows || c >= cols) {
            throw ParameterError("matrix entry outside the declared shape");
        }
        m.row_cols_[r].push_back(static_cast<std::uint32_t>(c));
        m.col_rows_[c].push_back(static_cast<std::uint32_t>(r));
    }
    for (auto& row : m.row_cols_) {
        std::sort(row.begin(), row.end());
        if (std::adjacent_find(row.begin(), row.end()) != row.end()) {
            throw ParameterError("duplicate matrix entry");
        }
    }
    for (auto& col : m.col_rows_) {
        std::sort(col.begin(), col.end());
    }
    m.nnz_ = entries.size();
    return m;
}

SparseMatrix SparseMatrix::from_dense(const std::vector<std::vector<int>>& dense)
{
    const std::size_t rows = dense.size();
    const std::size_t cols = rows == 0 ? 0 : dense.front().size();
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    for (std::size_t r = 0; r < rows; ++r) {
        if (dense[r].size() != cols) {
            throw ParameterError("ragged dense matrix");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (dense[r][c] != 0) {
                entries.emplace_back(r, c);
            }
        }
    }
    return from_entries(rows, cols, entries);
}

bool SparseMatrix::get(std::size_t r, std::size_t c) const
{
    const auto& row = row_cols_.at(r);
    return std::binary_search(row.begin(), row.end(), static_cast<std::uint32_t>(c));
}

std::vector<std::vector<int>> SparseMatrix::to_dense() const
{
    std::vector<std::vector<int>> d(rows(), std::vector<int>(cols(), 0));
    for (std::size_t r = 0; r < rows(); ++r) {
        for (auto c : row_cols_[r]) {
            d[r][c] = 1;
        }
    }
    return d;
}

SparseMatrix SparseMatrix::leading_block(std::size_t rows, std::size_t cols) const
{
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    for (std::size_t r = 0; r < std::min(rows, this->rows()); ++r) {
        for (auto c : row_cols_[r]) {
            if (c < cols) {
                entries.emplace_back(r, c);
            }
        }
    }
    return from_entries(rows, cols, entries);
}

TannerGraph::TannerGraph(const SparseMatrix& h) : num_checks(h.rows()), num_vars(h.cols())
{
    check_start.resize(num_checks + 1, 0);
    for (std::size_t c = 0; c < num_checks; ++c) {
        check_start[c + 1] = check_start[c] + static_cast<std::uint32_t>(h.row(c).size());
        for (auto v : h.row(c)) {
            edge_var.push_back(v);
            edge_check.push_back(static_cast<std::uint32_t>(c));
        }
    }
    var_start.resize(num_vars + 1, 0);
    for (auto v : edge_var) {
        ++var_start[v + 1];
    }
    for (std::size_t v = 0; v < num_vars; ++v) {
        var_start[v + 1] += var_start[v];
    }
    var_edges.resize(edge_var.size());
    std::vector<std::uint32_t> fill(var_start.begin(), var_start.end() - 1);
    for (std::uint32_t e = 0; e < edge_var.size(); ++e) {
        var_edges[fill[edge_var[e]]++] = e;
    }
}

bool syndrome_check(const SparseMatrix& h, const std::vector<std::uint8_t>& bits)
{
    if (bits.size() != h.cols()) {
        throw ParameterError("word length does not match the parity-check matrix");
    }
    for (std::size_t r = 0; r < h.rows(); ++r) {
        std::uint8_t parity = 0;
        for (auto c : h.row(r)) {
            parity ^= bits[c] & 1U;
        }
        if (parity != 0) {
            return false;
        }
    }
    return true;
}

std::size_t girth(const SparseMatrix& h)
{
    // Nodes: variables [0, n), checks [n, n + m).
    const std::size_t n = h.cols();
    const std::size_t total = n + h.rows();
    std::size_t best = std::numeric_limits<std::size_t>::max();
    std::vector<int> dist(total);
    std::vector<std::size_t> parent(total);
    for (std::size_t src = 0; src < n; ++src) {
        std::fill(dist.begin(), dist.end(), -1);
        std::deque<std::size_t> queue{src};
        dist[src] = 0;
        parent[src] = total;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            if (2 * static_cast<std::size_t>(dist[u]) + 1 >= best) {
                break;
            }
            auto visit = [&](std::size_t w) {
                if (w == parent[u]) {
                    return;
                }
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else {
                    best = std::min(best, static_cast<std::size_t>(dist[u] + dist[w] + 1));
                }
            };
            if (u < n) {
                for (auto r : h.col(u)) {
                    visit(n + r);
                }
            } else {
                for (auto c : h.row(u - n)) {
                    visit(c);
                }
            }
        }
    }
    return best == std::numeric_limits<std::size_t>::max() ? 0 : best;
}

// ---------------------------------------------------------------------------
// Protograph / family

void Protograph::validate() const
{
    if (base.empty() || base.front().empty()) {
        throw ParameterError("protograph is empty");
    }
    for (std::size_t r = 0; r < base.size(); ++r) {
        if (base[r].size() != cols()) {
            throw ParameterError("protograph rows differ in length");
        }
        bool any = false;
        for (int v : base[r]) {
            if (v < 0) {
                throw ParameterError("negative protograph multiplicity");
            }
            any = any || v > 0;
        }
        if (!any) {
            throw ParameterError("protograph row " + std::to_string(r) + " is all zero");
        }
    }
}

Protograph PbrlFamily::mother() const
{
    const std::size_t n_hrc = hrc.cols();
    const std::size_t m_irc = irc_rows.size();
    Protograph p;
    p.base.assign(mother_rows(), std::vector<int>(mother_cols(), 0));
    for (std::size_t r = 0; r < hrc.rows(); ++r) {
        std::copy(hrc.base[r].begin(), hrc.base[r].end(), p.base[r].begin());
    }
    for (std::size_t j = 0; j < m_irc; ++j) {
        auto& row = p.base[hrc.rows() + j];
        std::copy(irc_rows[j].begin(), irc_rows[j].end(), row.begin());
        row[n_hrc + j] = 1;
    }
    return p;
}

void PbrlFamily::validate() const
{
    hrc.validate();
    const std::size_t n_hrc = hrc.cols();
    for (std::size_t j = 0; j < irc_rows.size(); ++j) {
        if (irc_rows[j].size() != n_hrc) {
            throw ParameterError("IRC row " + std::to_string(j) + " does not span the HRC columns");
        }
        for (int v : irc_rows[j]) {
            if (v < 0) {
                throw ParameterError("negative IRC multiplicity");
            }
        }
    }
    if (punctured_hrc_vns.empty()) {
        throw ParameterError("a PBRL family punctures at least one HRC variable");
    }
    for (auto c : punctured_hrc_vns) {
        if (c >= n_hrc) {
            throw ParameterError("punctured column outside the HRC");
        }
    }
    if (lifting == 0) {
        throw ParameterError("lifting factor must be positive");
    }
    if (info_columns == 0 || info_columns > n_hrc || info_columns * lifting != k_info) {
        throw ParameterError("k_info must equal info_columns * Z");
    }
    const Protograph m = mother();
    if (shifts.size() != m.rows()) {
        throw ParameterError("shift table does not cover the mother protograph rows");
    }
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (shifts[r].size() != m.cols()) {
            throw ParameterError("shift table does not cover the mother protograph columns");
        }
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (shifts[r][c].size() != static_cast<std::size_t>(m.base[r][c])) {
                std::ostringstream msg;
                msg << "entry (" << r << "," << c << ") has multiplicity " << m.base[r][c] << " but "
                    << shifts[r][c].size() << " shifts";
                throw ParameterError(msg.str());
            }
        }
    }
    for (auto k : rate_irc_counts) {
        if (k > irc_rows.size()) {
            throw ParameterError("rate point transmits more IRC rows than the family has");
        }
    }
}

RatePoint make_rate_point(const PbrlFamily& family, std::size_t num_irc_transmitted)
{
    if (num_irc_transmitted > family.irc_rows.size()) {
        throw ParameterError("rate point transmits more IRC rows than the family has");
    }
    const std::size_t transmitted_cols =
        family.hrc.cols() - family.punctured_hrc_vns.size() + num_irc_transmitted;
    RatePoint rp;
    rp.num_irc_transmitted = num_irc_transmitted;
    rp.code_rate = static_cast<double>(family.k_info) / static_cast<double>(transmitted_cols * family.lifting);
    return rp;
}

std::vector<RatePoint> family_rate_points(const PbrlFamily& family)
{
    std::vector<RatePoint> out;
    for (auto k : family.rate_irc_counts) {
        out.push_back(make_rate_point(family, k));
    }
    std::sort(out.begin(), out.end(), [](const RatePoint& a, const RatePoint& b) { return a.code_rate < b.code_rate; });
    return out;
}

double parse_rate(std::string_view text)
{
    auto parse_double = [](std::string_view s) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw ConfigError("cannot parse rate '" + std::string(s) + "'");
        }
        return v;
    };
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        return parse_double(text);
    }
    const double num = parse_double(text.substr(0, slash));
    const double den = parse_double(text.substr(slash + 1));
    if (den == 0.0) {
        throw ConfigError("rate with zero denominator");
    }
    return num / den;
}

RatePoint find_rate_point(const PbrlFamily& family, double code_rate)
{
    for (std::size_t k = 0; k <= family.irc_rows.size(); ++k) {
        const RatePoint rp = make_rate_point(family, k);
        if (std::abs(rp.code_rate - code_rate) < 1e-9) {
            return rp;
        }
    }
    std::ostringstream msg;
    msg << "family '" << family.name << "' has no rate point with R = " << code_rate;
    throw ConfigError(msg.str());
}

std::vector<std::uint8_t> PunctureMask::prefix(std::size_t cols) const
{
    if (cols > punctured.size()) {
        throw ParameterError("mask prefix longer than the mask");
    }
    return {punctured.begin(), punctured.begin() + static_cast<std::ptrdiff_t>(cols)};
}

SparseMatrix lift_protograph(const Protograph& proto, const std::vector<std::vector<std::vector<int>>>& shifts,
                             std::size_t lifting)
{
    proto.validate();
    const std::size_t z = lifting;
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    for (std::size_t r = 0; r < proto.rows(); ++r) {
        for (std::size_t c = 0; c < proto.cols(); ++c) {
            const int mult = proto.base[r][c];
            if (mult == 0) {
                continue;
            }
            if (static_cast<std::size_t>(mult) > z) {
                throw ParameterError("multiplicity exceeds the lifting factor");
            }
            const auto& s = shifts.at(r).at(c);
            if (s.size() != static_cast<std::size_t>(mult)) {
                throw ParameterError("shift count does not match multiplicity");
            }
            std::set<int> distinct;
            for (int shift : s) {
                if (shift < 0 || static_cast<std::size_t>(shift) >= z) {
                    throw ParameterError("circulant shift outside [0, Z)");
                }
                if (!distinct.insert(shift).second) {
                    std::ostringstream msg;
                    msg << "duplicate shift " << shift << " on multi-edge (" << r << "," << c << ")";
                    throw ParameterError(msg.str());
                }
                for (std::size_t i = 0; i < z; ++i) {
                    entries.emplace_back(r * z + i, c * z + (i + static_cast<std::size_t>(shift)) % z);
                }
            }
        }
    }
    return SparseMatrix::from_entries(proto.rows() * z, proto.cols() * z, entries);
}

SparseMatrix lift(const PbrlFamily& family, const RatePoint& rate)
{
    family.validate();
    const Protograph mother = family.mother();
    const std::size_t rows = family.hrc.rows() + rate.num_irc_transmitted;
    const std::size_t cols = family.hrc.cols() + rate.num_irc_transmitted;
    Protograph sub;
    std::vector<std::vector<std::vector<int>>> sub_shifts;
    for (std::size_t r = 0; r < rows; ++r) {
        sub.base.emplace_back(mother.base[r].begin(), mother.base[r].begin() + static_cast<std::ptrdiff_t>(cols));
        sub_shifts.emplace_back(family.shifts[r].begin(),
                                family.shifts[r].begin() + static_cast<std::ptrdiff_t>(cols));
    }
    return lift_protograph(sub, sub_shifts, family.lifting);
}

SparseMatrix lift_mother(const PbrlFamily& family)
{
    return lift(family, make_rate_point(family, family.irc_rows.size()));
}

PunctureMask build_mask(const PbrlFamily& family, const RatePoint& rate)
{
    const std::size_t z = family.lifting;
    const Protograph mother = family.mother();
    PunctureMask mask;
    mask.punctured.assign(mother.cols() * z, 0);
    for (auto c : family.punctured_hrc_vns) {
        std::fill_n(mask.punctured.begin() + static_cast<std::ptrdiff_t>(c * z), z, std::uint8_t{1});
    }
    for (std::size_t j = rate.num_irc_transmitted; j < family.irc_rows.size(); ++j) {
        const std::size_t c = family.hrc.cols() + j;
        std::fill_n(mask.punctured.begin() + static_cast<std::ptrdiff_t>(c * z), z, std::uint8_t{1});
    }
    std::size_t heavy = 0;
    std::size_t heavy_punctured = 0;
    for (std::size_t c = 0; c < mother.cols(); ++c) {
        int degree = 0;
        for (std::size_t r = 0; r < mother.rows(); ++r) {
            degree += mother.base[r][c];
        }
        if (degree > 1) {
            heavy += z;
            heavy_punctured += mask.punctured[c * z] ? z : 0;
        }
    }
    mask.puncture_rate = heavy == 0 ? 0.0 : static_cast<double>(heavy_punctured) / static_cast<double>(heavy);
    return mask;
}

std::vector<std::vector<std::vector<int>>> greedy_girth_shifts(const Protograph& proto, std::size_t lifting,
                                                               std::uint64_t seed)
{
    proto.validate();
    const std::size_t z = lifting;
    const std::size_t n = proto.cols() * z;
    const std::size_t m = proto.rows() * z;
    // Adjacency over variables [0, n) and checks [n, n + m).
    std::vector<std::vector<std::uint32_t>> adj(n + m);
    std::vector<std::vector<std::vector<int>>> shifts(proto.rows(), std::vector<std::vector<int>>(proto.cols()));
    std::mt19937_64 rng(seed);

    constexpr int kDepthLimit = 14;
    std::vector<int> dist(n + m, -1);
    std::vector<std::uint32_t> touched;

    // Shortest path length from `src` to `dst`, ignoring the direct edge
    // between them; kDepthLimit + 1 when farther than the limit.
    auto path_length = [&](std::uint32_t src, std::uint32_t dst) {
        touched.clear();
        std::deque<std::uint32_t> queue{src};
        dist[src] = 0;
        touched.push_back(src);
        int found = kDepthLimit + 1;
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            if (dist[u] >= kDepthLimit) {
                break;
            }
            for (auto w : adj[u]) {
                if (u == src && w == dst) {
                    continue;
                }
                if (dist[w] >= 0) {
                    continue;
                }
                dist[w] = dist[u] + 1;
                touched.push_back(w);
                if (w == dst) {
                    found = dist[w];
                    queue.clear();
                    break;
                }
                queue.push_back(w);
            }
        }
        for (auto t : touched) {
            dist[t] = -1;
        }
        return found;
    };

    auto add_circulant = [&](std::size_t r, std::size_t c, std::size_t s) {
        for (std::size_t i = 0; i < z; ++i) {
            const auto chk = static_cast<std::uint32_t>(n + r * z + i);
            const auto var = static_cast<std::uint32_t>(c * z + (i + s) % z);
            adj[chk].push_back(var);
            adj[var].push_back(chk);
        }
    };
    auto remove_circulant = [&](std::size_t r, std::size_t c, std::size_t s) {
        for (std::size_t i = 0; i < z; ++i) {
            const auto chk = static_cast<std::uint32_t>(n + r * z + i);
            const auto var = static_cast<std::uint32_t>(c * z + (i + s) % z);
            adj[chk].pop_back();
            adj[var].pop_back();
        }
    };

    std::vector<std::size_t> candidates(z);
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    for (std::size_t r = 0; r < proto.rows(); ++r) {
        for (std::size_t c = 0; c < proto.cols(); ++c) {
            for (int copy = 0; copy < proto.base[r][c]; ++copy) {
                std::shuffle(candidates.begin(), candidates.end(), rng);
                int best_len = -1;
                std::size_t best_shift = 0;
                for (auto s : candidates) {
                    const auto& used = shifts[r][c];
                    if (std::find(used.begin(), used.end(), static_cast<int>(s)) != used.end()) {
                        continue;
                    }
                    add_circulant(r, c, s);
                    const int len =
                        path_length(static_cast<std::uint32_t>(c * z + s), static_cast<std::uint32_t>(n + r * z)) + 1;
                    remove_circulant(r, c, s);
                    if (len > best_len) {
                        best_len = len;
                        best_shift = s;
                    }
                }
                shifts[r][c].push_back(static_cast<int>(best_shift));
                add_circulant(r, c, best_shift);
            }
        }
    }
    return shifts;
}

DegreeDistributions degree_distributions(const SparseMatrix& h)
{
    if (h.nnz() == 0) {
        throw ParameterError("degree distributions of an empty matrix");
    }
    DegreeDistributions d;
    const auto edges = static_cast<double>(h.nnz());
    std::map<int, std::size_t> vn, cn;
    for (std::size_t c = 0; c < h.cols(); ++c) {
        const auto deg = static_cast<int>(h.col(c).size());
        if (deg > 0) {
            vn[deg] += static_cast<std::size_t>(deg);
        }
    }
    for (std::size_t r = 0; r < h.rows(); ++r) {
        const auto deg = static_cast<int>(h.row(r).size());
        if (deg > 0) {
            cn[deg] += static_cast<std::size_t>(deg);
        }
    }
    for (auto [deg, count] : vn) {
        d.lambda[deg] = static_cast<double>(count) / edges;
    }
    for (auto [deg, count] : cn) {
        d.rho[deg] = static_cast<double>(count) / edges;
    }
    return d;
}

EffectiveDegreeSchedule effective_degree_schedule(const SparseMatrix& h, const std::vector<std::uint8_t>& punctured,
                                                  int max_iters)
{
    if (max_iters < 1) {
        throw ParameterError("schedule needs at least one iteration");
    }
    if (punctured.size() != h.cols()) {
        throw ParameterError("puncture mask length does not match the matrix");
    }
    const TannerGraph g(h);
    EffectiveDegreeSchedule out;
    for (std::size_t v = 0; v < g.num_vars; ++v) {
        out.max_var_degree = std::max(out.max_var_degree, static_cast<int>(g.var_degree(v)));
    }
    for (std::size_t c = 0; c < g.num_checks; ++c) {
        out.max_check_degree = std::max(out.max_check_degree, static_cast<int>(g.check_degree(c)));
    }
    const std::size_t num_edges = g.num_edges();
    const auto dv_max = static_cast<std::size_t>(out.max_var_degree);
    const auto dc_max = static_cast<std::size_t>(out.max_check_degree);

    // a check holding a punctured degree-one variable is switched off for good
    std::vector<std::uint8_t> dead_check(g.num_checks, 0);
    for (std::size_t v = 0; v < g.num_vars; ++v) {
        if (punctured[v] && g.var_degree(v) == 1) {
            dead_check[g.edge_check[g.var_edges[g.var_start[v]]]] = 1;
        }
    }

    std::vector<std::uint8_t> previous_c2v(num_edges, 0);
    for (int it = 0; it < max_iters; ++it) {
        ScheduleIteration s;
        s.v2c_active.assign(num_edges, 0);
        s.c2v_active.assign(num_edges, 0);
        s.v2c_inputs.assign(num_edges, 0);
        s.vn_effective_degree.assign(g.num_vars, 0);
        s.cn_effective_degree.assign(g.num_checks, 0);
        s.v2c_by_inputs.assign(dv_max + 1, 0);
        s.c2v_by_check_degree.assign(dc_max + 1, 0);
        s.app_by_inputs.assign(dv_max + 1, 0);
        s.app_by_inputs_punctured.assign(dv_max + 1, 0);

        std::map<int, std::size_t> lambda_count, rho_count;
        std::size_t informative_v2c = 0;
        for (std::size_t v = 0; v < g.num_vars; ++v) {
            const bool transmitted = punctured[v] == 0;
            std::size_t total_in = 0;
            for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                total_in += previous_c2v[g.var_edges[k]];
            }
            for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                const auto e = g.var_edges[k];
                const std::size_t inputs = total_in - previous_c2v[e];
                s.v2c_inputs[e] = static_cast<std::uint16_t>(inputs);
                if (transmitted || inputs > 0) {
                    s.v2c_active[e] = 1;
                    const int d_eff = static_cast<int>(inputs) + (transmitted ? 1 : 0);
                    ++lambda_count[d_eff];
                    ++s.v2c_by_inputs[inputs];
                    ++informative_v2c;
                    s.vn_effective_degree[v] = std::max(s.vn_effective_degree[v], d_eff);
                }
            }
        }
        std::size_t informative_c2v = 0;
        for (std::size_t c = 0; c < g.num_checks; ++c) {
            const auto begin = g.check_start[c];
            const auto end = g.check_start[c + 1];
            std::size_t active_in = 0;
            for (auto e = begin; e < end; ++e) {
                active_in += s.v2c_active[e];
            }
            s.cn_effective_degree[c] = static_cast<int>(active_in);
            const std::size_t degree = end - begin;
            for (auto e = begin; e < end; ++e) {
                const std::size_t others = active_in - s.v2c_active[e];
                if (!dead_check[c] && degree >= 2 && others == degree - 1) {
                    s.c2v_active[e] = 1;
                    ++rho_count[static_cast<int>(degree)];
                    ++s.c2v_by_check_degree[degree];
                    ++informative_c2v;
                }
            }
        }
        for (std::size_t v = 0; v < g.num_vars; ++v) {
            std::size_t inputs = 0;
            for (auto k = g.var_start[v]; k < g.var_start[v + 1]; ++k) {
                inputs += s.c2v_active[g.var_edges[k]];
            }
            if (punctured[v]) {
                ++s.app_by_inputs_punctured[inputs];
            } else {
                ++s.app_by_inputs[inputs];
            }
        }
        for (auto [d, count] : lambda_count) {
            s.lambda_eff[d] = static_cast<double>(count) / static_cast<double>(informative_v2c);
        }
        for (auto [d, count] : rho_count) {
            s.rho_eff[d] = static_cast<double>(count) / static_cast<double>(informative_c2v);
        }
        previous_c2v = s.c2v_active;
        out.iterations.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// alist

namespace {

struct LineReader {
    std::vector<std::string> lines;
    std::size_t next = 0;

    explicit LineReader(std::string_view text)
    {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            const auto end = nl == std::string_view::npos ? text.size() : nl;
            std::string line(text.substr(pos, end - pos));
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            lines.push_back(std::move(line));
            if (nl == std::string_view::npos) {
                break;
            }
            pos = nl + 1;
        }
    }

    // Next non-blank line as integers, with its 1-based line number.
    std::pair<std::vector<long>, std::size_t> ints(const char* what)
    {
        while (next < lines.size()) {
            const std::size_t number = next + 1;
            const std::string& line = lines[next++];
            std::istringstream in(line);
            std::vector<long> values;
            std::string token;
            while (in >> token) {
                long v = 0;
                const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
                if (ec != std::errc{} || ptr != token.data() + token.size()) {
                    throw ParseError("alist line " + std::to_string(number) + ": bad integer '" + token + "'");
                }
                values.push_back(v);
            }
            if (!values.empty()) {
                return {values, number};
            }
        }
        throw ParseError(std::string("alist truncated: expected ") + what + " at line " +
                         std::to_string(lines.size() + 1));
    }
};

}  // namespace

SparseMatrix parse_alist(std::string_view text)
{
    LineReader in(text);
    auto [shape, shape_line] = in.ints("the matrix shape");
    if (shape.size() != 2 || shape[0] <= 0 || shape[1] <= 0) {
        throw ParseError("alist line " + std::to_string(shape_line) + ": expected '<cols> <rows>'");
    }
    const auto n = static_cast<std::size_t>(shape[0]);
    const auto m = static_cast<std::size_t>(shape[1]);
    auto [maxdeg, maxdeg_line] = in.ints("the maximum degrees");
    if (maxdeg.size() != 2) {
        throw ParseError("alist line " + std::to_string(maxdeg_line) + ": expected two maximum degrees");
    }
    auto [col_deg, col_deg_line] = in.ints("column degrees");
    if (col_deg.size() != n) {
        throw ParseError("alist line " + std::to_string(col_deg_line) + ": declared " + std::to_string(n) +
                         " column degrees, found " + std::to_string(col_deg.size()));
    }
    auto [row_deg, row_deg_line] = in.ints("row degrees");
    if (row_deg.size() != m) {
        throw ParseError("alist line " + std::to_string(row_deg_line) + ": declared " + std::to_string(m) +
                         " row degrees, found " + std::to_string(row_deg.size()));
    }
    const long max_col = *std::max_element(col_deg.begin(), col_deg.end());
    const long max_row = *std::max_element(row_deg.begin(), row_deg.end());
    if (max_col != maxdeg[0] || max_row != maxdeg[1]) {
        throw ParseError("alist line " + std::to_string(maxdeg_line) +
                         ": maximum degrees disagree with the degree lists");
    }

    std::vector<std::pair<std::size_t, std::size_t>> entries;
    for (std::size_t c = 0; c < n; ++c) {
        auto [vals, line] = in.ints("a column list");
        std::vector<long> nz;
        for (long v : vals) {
            if (v != 0) {
                nz.push_back(v);
            }
        }
        if (nz.size() != static_cast<std::size_t>(col_deg[c])) {
            throw ParseError("alist line " + std::to_string(line) + ": column " + std::to_string(c + 1) +
                             " declares degree " + std::to_string(col_deg[c]) + " but lists " +
                             std::to_string(nz.size()) + " rows");
        }
        for (long r : nz) {
            if (r < 1 || static_cast<std::size_t>(r) > m) {
                throw ParseError("alist line " + std::to_string(line) + ": row index " + std::to_string(r) +
                                 " out of range");
            }
            entries.emplace_back(static_cast<std::size_t>(r - 1), c);
        }
    }
    SparseMatrix h = SparseMatrix::from_entries(m, n, entries);
    for (std::size_t r = 0; r < m; ++r) {
        auto [vals, line] = in.ints("a row list");
        std::vector<std::uint32_t> nz;
        for (long v : vals) {
            if (v != 0) {
                if (v < 1 || static_cast<std::size_t>(v) > n) {
                    throw ParseError("alist line " + std::to_string(line) + ": column index " + std::to_string(v) +
                                     " out of range");
                }
                nz.push_back(static_cast<std::uint32_t>(v - 1));
            }
        }
        if (nz.size() != static_cast<std::size_t>(row_deg[r])) {
            throw ParseError("alist line " + std::to_string(line) + ": row " + std::to_string(r + 1) +
                             " declares degree " + std::to_string(row_deg[r]) + " but lists " +
                             std::to_string(nz.size()) + " columns");
        }
        std::sort(nz.begin(), nz.end());
        if (nz != h.row(r)) {
            throw ParseError("alist line " + std::to_string(line) + ": row " + std::to_string(r + 1) +
                             " disagrees with the column lists");
        }
    }
    return h;
}

std::string write_alist(const SparseMatrix& h)
{
    std::size_t max_col = 0;
    std::size_t max_row = 0;
    for (std::size_t c = 0; c < h.cols(); ++c) {
        max_col = std::max(max_col, h.col(c).size());
    }
    for (std::size_t r = 0; r < h.rows(); ++r) {
        max_row = std::max(max_row, h.row(r).size());
    }
    std::ostringstream out;
    out << h.cols() << ' ' << h.rows() << '\n' << max_col << ' ' << max_row << '\n';
    for (std::size_t c = 0; c < h.cols(); ++c) {
        out << (c ? " " : "") << h.col(c).size();
    }
    out << '\n';
    for (std::size_t r = 0; r < h.rows(); ++r) {
        out << (r ? " " : "") << h.row(r).size();
    }
    out << '\n';
    auto padded = [&](const std::vector<std::uint32_t>& list, std::size_t width) {
        for (std::size_t i = 0; i < width; ++i) {
            out << (i ? " " : "") << (i < list.size() ? list[i] + 1 : 0);
        }
        out << '\n';
    };
    for (std::size_t c = 0; c < h.cols(); ++c) {
        padded(h.col(c), max_col);
    }
    for (std::size_t r = 0; r < h.rows(); ++r) {
        padded(h.row(r), max_row);
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// family JSON

PbrlFamily parse_family_json(std::string_view text)
{
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("family file: ") + e.what());
    }
    try {
        PbrlFamily f;
        f.name = doc.value("name", std::string("unnamed"));
        f.hrc.base = doc.at("hrc").get<std::vector<std::vector<int>>>();
        f.irc_rows = doc.at("irc_rows").get<std::vector<std::vector<int>>>();
        f.punctured_hrc_vns = doc.at("punctured_hrc_columns").get<std::vector<std::size_t>>();
        f.info_columns = doc.at("info_columns").get<std::size_t>();
        f.k_info = doc.at("k_info").get<std::size_t>();
        f.lifting = doc.at("lifting").get<std::size_t>();
        f.rate_irc_counts = doc.value("rate_points", std::vector<std::size_t>{});
        for (const auto& row : doc.at("shifts")) {
            std::vector<std::vector<int>> out_row;
            for (const auto& entry : row) {
                if (entry.is_array()) {
                    out_row.push_back(entry.get<std::vector<int>>());
                } else if (entry.get<int>() < 0) {
                    out_row.emplace_back();
                } else {
                    out_row.push_back({entry.get<int>()});
                }
            }
            f.shifts.push_back(std::move(out_row));
        }
        f.validate();
        return f;
    } catch (const json::exception& e) {
        throw ParseError(std::string("family file: ") + e.what());
    } catch (const ParameterError& e) {
        throw ParseError(std::string("family file: ") + e.what());
    }
}

std::string write_family_json(const PbrlFamily& family)
{
    using nlohmann::json;
    json doc;
    doc["name"] = family.name;
    doc["lifting"] = family.lifting;
    doc["k_info"] = family.k_info;
    doc["info_columns"] = family.info_columns;
    doc["punctured_hrc_columns"] = family.punctured_hrc_vns;
    doc["rate_points"] = family.rate_irc_counts;
    doc["hrc"] = family.hrc.base;
    doc["irc_rows"] = family.irc_rows;
    json shifts = json::array();
    for (const auto& row : family.shifts) {
        json out_row = json::array();
        for (const auto& entry : row) {
            if (entry.empty()) {
                out_row.push_back(-1);
            } else if (entry.size() == 1) {
                out_row.push_back(entry.front());
            } else {
                out_row.push_back(entry);
            }
        }
        shifts.push_back(std::move(out_row));
    }
    doc["shifts"] = std::move(shifts);

    // One matrix row per line keeps the file reviewable.
    std::ostringstream out;
    out << "{\n";
    const std::vector<std::string> order = {"name", "lifting", "k_info", "info_columns", "punctured_hrc_columns",
                                            "rate_points", "hrc", "irc_rows", "shifts"};
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& key = order[i];
        const json& value = doc[key];
        out << "  " << json(key).dump() << ": ";
        if (value.is_array() && !value.empty() && value.front().is_array()) {
            out << "[\n";
            for (std::size_t r = 0; r < value.size(); ++r) {
                out << "    " << value[r].dump() << (r + 1 < value.size() ? ",\n" : "\n");
            }
            out << "  ]";
        } else {
            out << value.dump();
        }
        out << (i + 1 < order.size() ? ",\n" : "\n");
    }
    out << "}\n";
    return out.str();
}

PbrlFamily load_family(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open family file '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_family_json(buffer.str());
}

PbrlFamily stand_in_family()
{
    PbrlFamily f;
    f.name = "pbrl-k1032-z129";
    f.lifting = 129;
    f.info_columns = 8;
    f.k_info = 1032;
    // Columns 0..7 carry information (column 0 is punctured); 8..10 are the
    // HRC parity columns with a weight-3 column followed by an accumulator.
    f.hrc.base = {
        {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0},
        {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
        {1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1},
    };
    f.punctured_hrc_vns = {0};
    // Every IRC row checks the punctured column and two further HRC columns.
    const std::vector<std::pair<int, int>> partners = {{1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10}, {1, 5}, {2, 7},
                                                       {3, 9}, {4, 10}, {6, 8}, {1, 4}, {2, 9}, {3, 6}, {5, 10}};
    for (auto [a, b] : partners) {
        std::vector<int> row(f.hrc.cols(), 0);
        row[0] = 1;
        row[static_cast<std::size_t>(a)] = 1;
        row[static_cast<std::size_t>(b)] = 1;
        f.irc_rows.push_back(row);
    }
    f.rate_irc_counts = {14, 6, 2};  // R = 1/3, 1/2, 2/3
    f.shifts = greedy_girth_shifts(f.mother(), f.lifting, 20200315);
    f.validate();
    return f;
}

}  // namespace ibldpc
