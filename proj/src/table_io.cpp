#include "ibldpc/errors.hpp"
#include "ibldpc/table_designer.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ibldpc {

namespace {

constexpr char kMagic[8] = {'I', 'B', 'L', 'D', 'P', 'C', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) {
            u8(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i) {
            u8(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(std::string_view s) { bytes_.append(s); }
    void text(const std::string& s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s);
    }
    void bytes(const std::vector<std::uint8_t>& v)
    {
        u32(static_cast<std::uint32_t>(v.size()));
        for (auto b : v) {
            u8(b);
        }
    }
    void doubles(const std::vector<double>& v)
    {
        u32(static_cast<std::uint32_t>(v.size()));
        for (double d : v) {
            f64(d);
        }
    }
    void joint(const BinaryJoint& j)
    {
        u32(static_cast<std::uint32_t>(j.size()));
        for (std::size_t y = 0; y < j.size(); ++y) {
            f64(j(0, y));
            f64(j(1, y));
        }
    }
    void table(const TwoInputTable& t)
    {
        u32(t.size_a);
        u32(t.size_b);
        bytes(t.out);
        doubles(t.meanings);
    }
    void alignment(const AlignmentMap& m)
    {
        u32(static_cast<std::uint32_t>(m.map.size()));
        for (const auto& ctx : m.map) {
            bytes(ctx);
        }
        doubles(m.meanings);
    }
    const std::string& str() const { return bytes_; }

private:
    std::string bytes_;
};

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint8_t u8()
    {
        need(1);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }
    std::uint32_t u32()
    {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        }
        return v;
    }
    std::uint64_t u64()
    {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        }
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string_view raw(std::size_t n)
    {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string text() { return std::string(raw(u32())); }
    std::vector<std::uint8_t> bytes()
    {
        const auto n = u32();
        need(n);
        std::vector<std::uint8_t> v(n);
        for (auto& b : v) {
            b = u8();
        }
        return v;
    }
    std::vector<double> doubles()
    {
        const auto n = u32();
        need(std::size_t{n} * 8);
        std::vector<double> v(n);
        for (auto& d : v) {
            d = f64();
        }
        return v;
    }
    BinaryJoint joint()
    {
        const auto n = u32();
        need(std::size_t{n} * 16);
        if (n == 0) {
            throw ParseError("table artifact: empty distribution");
        }
        BinaryJoint j(n);
        for (std::size_t y = 0; y < n; ++y) {
            j.at(0, y) = f64();
            j.at(1, y) = f64();
        }
        return j;
    }
    TwoInputTable table()
    {
        TwoInputTable t;
        t.size_a = u32();
        t.size_b = u32();
        t.out = bytes();
        t.meanings = doubles();
        if (t.out.size() != std::size_t{t.size_a} * t.size_b) {
            throw ParseError("table artifact: table size does not match its input alphabets");
        }
        for (auto o : t.out) {
            if (o >= t.meanings.size()) {
                throw ParseError("table artifact: table output outside its alphabet");
            }
        }
        return t;
    }
    AlignmentMap alignment()
    {
        AlignmentMap m;
        const auto n = u32();
        for (std::uint32_t i = 0; i < n; ++i) {
            m.map.push_back(bytes());
        }
        m.meanings = doubles();
        return m;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const
    {
        if (bytes_.size() - pos_ < n) {
            throw ParseError("table artifact is truncated");
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

void write_rate(Writer& w, const RateTables& r)
{
    w.f64(r.code_rate);
    w.u64(r.num_irc_transmitted);
    w.f64(r.design_ebn0_db);
    w.f64(r.puncture_rate);
    w.u32(static_cast<std::uint32_t>(r.max_var_degree));
    w.u32(static_cast<std::uint32_t>(r.max_check_degree));
    w.u8(r.converged ? 1 : 0);
    w.u64(r.lossy_stages);
    const auto& q = r.quantizer;
    w.doubles(q.boundaries);
    w.doubles(q.index_meanings);
    w.joint(q.joint);
    w.f64(q.design_ebn0_db);
    w.f64(q.code_rate);
    w.f64(q.information);
    w.f64(q.fine_information);
    w.u32(static_cast<std::uint32_t>(r.iterations.size()));
    for (const auto& it : r.iterations) {
        w.f64(it.mi_v2c);
        w.f64(it.mi_c2v);
        w.f64(it.mi_app);
        w.u8(it.frozen ? 1 : 0);
        w.u32(static_cast<std::uint32_t>(it.cn.stages.size()));
        for (const auto& t : it.cn.stages) {
            w.table(t);
        }
        w.alignment(it.cn.degree_alignment);
        w.table(it.vn.channel_stage);
        w.bytes(it.vn.punctured_relabel);
        w.alignment(it.vn.puncture_alignment);
        w.u32(static_cast<std::uint32_t>(it.vn.stages.size()));
        for (const auto& t : it.vn.stages) {
            w.table(t);
        }
        w.alignment(it.vn.degree_alignment);
        w.u32(static_cast<std::uint32_t>(it.vn.decision.size()));
        for (const auto& d : it.vn.decision) {
            w.bytes(d);
        }
    }
}

RateTables read_rate(Reader& rd)
{
    RateTables r;
    r.code_rate = rd.f64();
    r.num_irc_transmitted = rd.u64();
    r.design_ebn0_db = rd.f64();
    r.puncture_rate = rd.f64();
    r.max_var_degree = static_cast<int>(rd.u32());
    r.max_check_degree = static_cast<int>(rd.u32());
    r.converged = rd.u8() != 0;
    r.lossy_stages = rd.u64();
    auto& q = r.quantizer;
    q.boundaries = rd.doubles();
    q.index_meanings = rd.doubles();
    q.joint = rd.joint();
    q.design_ebn0_db = rd.f64();
    q.code_rate = rd.f64();
    q.information = rd.f64();
    q.fine_information = rd.f64();
    const auto iters = rd.u32();
    for (std::uint32_t i = 0; i < iters; ++i) {
        IterationTables it;
        it.mi_v2c = rd.f64();
        it.mi_c2v = rd.f64();
        it.mi_app = rd.f64();
        it.frozen = rd.u8() != 0;
        const auto cn_stages = rd.u32();
        for (std::uint32_t s = 0; s < cn_stages; ++s) {
            it.cn.stages.push_back(rd.table());
        }
        it.cn.degree_alignment = rd.alignment();
        it.vn.channel_stage = rd.table();
        it.vn.punctured_relabel = rd.bytes();
        it.vn.puncture_alignment = rd.alignment();
        const auto vn_stages = rd.u32();
        for (std::uint32_t s = 0; s < vn_stages; ++s) {
            it.vn.stages.push_back(rd.table());
        }
        it.vn.degree_alignment = rd.alignment();
        const auto decisions = rd.u32();
        for (std::uint32_t d = 0; d < decisions; ++d) {
            it.vn.decision.push_back(rd.bytes());
        }
        r.iterations.push_back(std::move(it));
    }
    return r;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string serialize_tables(const DecoderTables& tables)
{
    Writer body;
    body.u64(tables.seed);
    body.text(tables.family_name);
    for (const auto& r : tables.rates) {
        write_rate(body, r);
    }

    Writer out;
    out.raw(std::string_view(kMagic, sizeof(kMagic)));
    out.u32(kVersion);
    out.u32(static_cast<std::uint32_t>(tables.bit_width));
    out.u32(static_cast<std::uint32_t>(tables.max_iters));
    out.u32(static_cast<std::uint32_t>(tables.rates.size()));
    for (const auto& r : tables.rates) {
        out.f64(r.code_rate);
    }
    out.u64(body.str().size());
    out.u64(fnv1a64(body.str()));
    out.raw(body.str());
    return out.str();
}

DecoderTables deserialize_tables(std::string_view bytes)
{
    Reader rd(bytes);
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw ParseError("not a decoder table artifact (bad magic)");
    }
    rd.raw(sizeof(kMagic));
    const auto version = rd.u32();
    if (version != kVersion) {
        throw ParseError("unsupported table artifact version " + std::to_string(version));
    }
    DecoderTables t;
    t.bit_width = static_cast<int>(rd.u32());
    t.max_iters = static_cast<int>(rd.u32());
    if (t.bit_width < 2 || t.bit_width > 6) {
        throw ParseError("table artifact: bit width outside [2, 6]");
    }
    const auto num_rates = rd.u32();
    std::vector<double> header_rates;
    for (std::uint32_t i = 0; i < num_rates; ++i) {
        header_rates.push_back(rd.f64());
    }
    const auto body_size = rd.u64();
    const auto checksum = rd.u64();
    const std::string_view body = rd.raw(body_size);
    if (!rd.done()) {
        throw ParseError("table artifact has trailing bytes");
    }
    if (fnv1a64(body) != checksum) {
        throw ParseError("table artifact checksum mismatch");
    }
    Reader b(body);
    t.seed = b.u64();
    t.family_name = b.text();
    for (std::uint32_t i = 0; i < num_rates; ++i) {
        t.rates.push_back(read_rate(b));
        if (t.rates.back().code_rate != header_rates[i]) {
            throw ParseError("table artifact: header and body disagree on the rate points");
        }
        if (t.rates.back().iterations.size() != static_cast<std::size_t>(t.max_iters)) {
            throw ParseError("table artifact: iteration count does not match the header");
        }
        t.rates.back().quantizer.joint.validate();
    }
    if (!b.done()) {
        throw ParseError("table artifact body has trailing bytes");
    }
    return t;
}

void save_tables(const DecoderTables& tables, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write table artifact '" + path + "'");
    }
    const std::string bytes = serialize_tables(tables);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ConfigError("failed writing table artifact '" + path + "'");
    }
}

DecoderTables load_tables(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open table artifact '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return deserialize_tables(buffer.str());
}

}  // namespace ibldpc
