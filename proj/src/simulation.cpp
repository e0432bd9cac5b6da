#include "ibldpc/simulation.hpp"

#include "ibldpc/channel_model.hpp"
#include "ibldpc/errors.hpp"
#include "ibldpc/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace ibldpc {

namespace {

using nlohmann::json;

constexpr int kChannelBits = 4;  // channel quantizer width when no tables are given

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string resolve(const std::string& path, const std::string& base_dir)
{
    if (path.empty() || base_dir.empty()) {
        return path;
    }
    std::filesystem::path p(path);
    if (p.is_absolute()) {
        return path;
    }
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

double json_rate(const json& j)
{
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        try {
            return parse_rate(j.get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(std::string("bad rate: ") + e.what());
        }
    }
    throw ConfigError("rates must be numbers or strings like \"1/2\"");
}

DecoderSpec json_decoder(const json& j)
{
    if (j.is_string()) {
        return decoder_from_name(j.get<std::string>());
    }
    if (!j.is_object()) {
        throw ConfigError("decoder entries must be names or objects");
    }
    if (!j.contains("kind")) {
        throw ConfigError("decoder object needs a \"kind\"");
    }
    DecoderSpec spec = decoder_from_name(j.at("kind").get<std::string>());
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") {
            continue;
        } else if (key == "id") {
            spec.id = value.get<std::string>();
        } else if (key == "message_bits") {
            spec.ms.message_bits = value.get<int>();
        } else if (key == "vn_accumulator_bits") {
            spec.ms.vn_accumulator_bits = value.get<int>();
        } else if (key == "offset") {
            spec.ms.offset = value.get<int>();
        } else if (key == "normalization") {
            spec.ms.normalization = value.get<double>();
        } else if (key == "llr_scale") {
            spec.ms.llr_scale = value.get<double>();
            spec.auto_llr_scale = false;
        } else {
            throw ConfigError("unknown decoder key \"" + key + "\"");
        }
    }
    return spec;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + path);
    }
    out << text;
    if (!out) {
        throw ConfigError("write failed: " + path);
    }
}

}  // namespace

DecoderSpec decoder_from_name(const std::string& name)
{
    const std::string n = lower(name);
    DecoderSpec spec;
    if (n == "ib" || n == "lookup" || n == "lookup_table") {
        spec.kind = DecoderKind::ib;
        spec.id = "ib";
    } else if (n == "bp" || n == "sum_product") {
        spec.kind = DecoderKind::sum_product;
        spec.id = "bp";
    } else if (n == "oms4" || n == "oms" || n == "offset_min_sum") {
        spec.kind = DecoderKind::offset_min_sum;
        spec.ms = MsDecoderConfig::offset_min_sum_4bit();
        spec.id = "oms4";
    } else if (n == "nmsa6" || n == "nmsa" || n == "layered_nmsa") {
        spec.kind = DecoderKind::layered_nmsa;
        spec.ms = MsDecoderConfig::layered_nmsa_6bit();
        spec.id = "nmsa6";
    } else {
        throw ConfigError("unknown decoder \"" + name + "\"");
    }
    return spec;
}

std::vector<double> EbN0Sweep::points() const
{
    if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) {
        throw ConfigError("Eb/N0 sweep needs finite bounds and step > 0");
    }
    std::vector<double> out;
    // index-based so 0.1 steps do not drift
    for (long i = 0;; ++i) {
        const double x = start + static_cast<double>(i) * step;
        if (x > stop + 1e-9 * step) {
            break;
        }
        out.push_back(std::round(x * 1e9) / 1e9);
    }
    return out;
}

void CampaignConfig::validate() const
{
    if (rates.empty()) {
        throw ConfigError("campaign lists no rates");
    }
    if (decoders.empty()) {
        throw ConfigError("campaign lists no decoders");
    }
    if (!(sweep.step > 0.0)) {
        throw ConfigError("Eb/N0 step must be positive");
    }
    if (sweep.stop < sweep.start) {
        throw ConfigError("Eb/N0 stop lies below start");
    }
    if (min_frame_errors < 1) {
        throw ConfigError("min_frame_errors must be at least 1");
    }
    if (max_frames < 1) {
        throw ConfigError("max_frames must be at least 1");
    }
    if (max_iters < 1) {
        throw ConfigError("max_iters must be at least 1");
    }
    std::vector<std::string> ids;
    for (const auto& d : decoders) {
        if (d.id.empty()) {
            throw ConfigError("decoder id must not be empty");
        }
        if (d.id.find_first_of(",\"\n") != std::string::npos) {
            throw ConfigError("decoder id \"" + d.id + "\" contains a CSV separator");
        }
        if (std::find(ids.begin(), ids.end(), d.id) != ids.end()) {
            throw ConfigError("duplicate decoder id \"" + d.id + "\"");
        }
        ids.push_back(d.id);
        if (d.kind == DecoderKind::offset_min_sum || d.kind == DecoderKind::layered_nmsa) {
            try {
                d.ms.validate();
            } catch (const std::exception& e) {
                throw ConfigError("decoder \"" + d.id + "\": " + e.what());
            }
        }
    }
}

CampaignConfig parse_campaign_config(std::string_view json_text, const std::string& base_dir)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("campaign is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("campaign must be a JSON object");
    }
    CampaignConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "family_path") {
                cfg.family_path = resolve(value.get<std::string>(), base_dir);
            } else if (key == "rates") {
                for (const auto& r : value) {
                    cfg.rates.push_back(json_rate(r));
                }
            } else if (key == "decoders") {
                for (const auto& d : value) {
                    cfg.decoders.push_back(json_decoder(d));
                }
            } else if (key == "sweep") {
                cfg.sweep.start = value.at("start").get<double>();
                cfg.sweep.stop = value.at("stop").get<double>();
                cfg.sweep.step = value.at("step").get<double>();
            } else if (key == "max_frames") {
                cfg.max_frames = value.get<std::size_t>();
            } else if (key == "min_frame_errors") {
                cfg.min_frame_errors = value.get<std::size_t>();
            } else if (key == "max_iters") {
                cfg.max_iters = value.get<int>();
            } else if (key == "seed") {
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "tables_path") {
                cfg.tables_path = resolve(value.get<std::string>(), base_dir);
            } else if (key == "threads") {
                cfg.threads = value.get<unsigned>();
            } else if (key == "record_wall_time") {
                cfg.record_wall_time = value.get<bool>();
            } else {
                throw ConfigError("unknown campaign key \"" + key + "\"");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad campaign field: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

CampaignConfig load_campaign_config(const std::string& path)
{
    const std::string text = read_file(path);
    return parse_campaign_config(text, std::filesystem::path(path).parent_path().string());
}

WilsonInterval wilson_interval(std::uint64_t k, std::uint64_t n, double z)
{
    if (k > n) {
        throw ParameterError("more successes than trials");
    }
    if (n == 0) {
        return {0.0, 1.0};
    }
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::uint64_t frame_seed(std::uint64_t master, std::size_t rate_index, std::size_t ebn0_index, std::uint64_t frame)
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(rate_index));
    h = splitmix64(h ^ static_cast<std::uint64_t>(ebn0_index));
    return splitmix64(h ^ frame);
}

PointSimulator::PointSimulator(const PbrlFamily& family, double rate, const DecoderSpec& spec,
                               const DecoderTables* tables, int max_iters)
    : spec_(spec), rate_(rate), k_info_(family.k_info), max_iters_(max_iters)
{
    if (max_iters < 1) {
        throw ConfigError("max_iters must be at least 1");
    }
    const RatePoint point = find_rate_point(family, rate);
    rate_ = point.code_rate;
    h_ = lift(family, point);
    punctured_ = build_mask(family, point).prefix(h_.cols());
    if (tables != nullptr) {
        rate_tables_ = &tables->rate(rate_);
    }
    switch (spec_.kind) {
    case DecoderKind::ib:
        if (rate_tables_ == nullptr) {
            throw ConfigError("the ib decoder needs designed tables");
        }
        ib_.emplace(*rate_tables_, h_, punctured_);
        break;
    case DecoderKind::sum_product:
        bp_.emplace(h_);
        break;
    case DecoderKind::offset_min_sum:
        spec_.ms.variant = MinSumVariant::offset_min_sum;
        ms_.emplace(h_, spec_.ms);
        break;
    case DecoderKind::layered_nmsa:
        spec_.ms.variant = MinSumVariant::layered_nmsa;
        ms_.emplace(h_, spec_.ms);
        break;
    }
}

ChannelQuantizer PointSimulator::quantizer_for(double ebn0_db) const
{
    if (rate_tables_ != nullptr) {
        return rate_tables_->quantizer;
    }
    return design_quantizer(ChannelSpec(ebn0_db, rate_), std::size_t{1} << kChannelBits);
}

PointSimulator::Outcome PointSimulator::run_frame(double ebn0_db, std::uint64_t seed) const
{
    if (spec_.kind == DecoderKind::sum_product) {
        return run_frame(ChannelQuantizer{}, ebn0_db, seed);
    }
    return run_frame(quantizer_for(ebn0_db), ebn0_db, seed);
}

PointSimulator::Outcome PointSimulator::run_frame(const ChannelQuantizer& quantizer, double ebn0_db,
                                                  std::uint64_t seed) const
{
    const ChannelSpec channel(ebn0_db, rate_);
    const double sigma = channel.noise_sigma();
    const std::size_t n = h_.cols();

    // all-zero codeword: every transmitted sample is +1 plus noise
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> y(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        if (!punctured_[v]) {
            y[v] = 1.0 + sigma * noise(gen);
        }
    }

    // Fixed-point step: the largest quantizer meaning lands on the top code
    // of a channel word as wide as the quantizer index. Both min-sum kinds
    // share it; NMSA keeps its unquantized LLRs on that grid at accumulator width.
    auto step = [&] {
        if (!spec_.auto_llr_scale) {
            return spec_.ms.llr_scale;
        }
        const double top = std::max(std::abs(quantizer.index_meanings.front()), std::abs(quantizer.index_meanings.back()));
        int bits = 1;
        while ((std::size_t{1} << bits) < quantizer.cardinality()) {
            ++bits;
        }
        return top / static_cast<double>((1 << (bits - 1)) - 1);
    };

    DecodeResult res;
    switch (spec_.kind) {
    case DecoderKind::sum_product: {
        std::vector<double> llr(n, 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            if (!punctured_[v]) {
                llr[v] = channel.llr(y[v]);
            }
        }
        res = bp_->decode(llr, max_iters_);
        break;
    }
    case DecoderKind::ib: {
        std::vector<std::uint8_t> idx(n, kPuncturedSymbol);
        for (std::size_t v = 0; v < n; ++v) {
            if (!punctured_[v]) {
                idx[v] = static_cast<std::uint8_t>(quantize_sample(quantizer, y[v]));
            }
        }
        res = ib_->decode(idx, max_iters_);
        break;
    }
    case DecoderKind::offset_min_sum: {
        const int bits = spec_.ms.message_bits;
        const double scale = step();
        std::vector<int> ch(n, 0);
        for (std::size_t v = 0; v < n; ++v) {
            if (!punctured_[v]) {
                ch[v] = quantize_llr(quantizer.index_meanings[quantize_sample(quantizer, y[v])], scale, bits);
            }
        }
        res = ms_->decode(ch, max_iters_);
        break;
    }
    case DecoderKind::layered_nmsa: {
        const double scale = step();
        std::vector<int> ch(n, 0);
        for (std::size_t v = 0; v < n; ++v) {
            if (!punctured_[v]) {
                ch[v] = quantize_llr(channel.llr(y[v]), scale, spec_.ms.vn_accumulator_bits);
            }
        }
        res = ms_->decode(ch, max_iters_);
        break;
    }
    }

    Outcome out;
    out.iterations = res.iterations_used;
    for (std::size_t v = 0; v < n; ++v) {
        if (res.hard_bits[v] != 0) {
            out.frame_error = true;
            if (v < k_info_) {
                ++out.bit_errors;
            }
        }
    }
    return out;
}

FerRecord PointSimulator::run_point(double ebn0_db, std::uint64_t master_seed, std::size_t rate_index,
                                    std::size_t ebn0_index, std::size_t max_frames, std::size_t min_frame_errors,
                                    unsigned threads) const
{
    if (max_frames < 1 || min_frame_errors < 1) {
        throw ConfigError("max_frames and min_frame_errors must be at least 1");
    }
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    const ChannelQuantizer quantizer =
        spec_.kind == DecoderKind::sum_product ? ChannelQuantizer{} : quantizer_for(ebn0_db);

    FerRecord rec;
    rec.decoder = spec_.id;
    rec.rate = rate_;
    rec.ebn0_db = ebn0_db;
    rec.seed = master_seed;

    // Batches of frames are decoded in parallel, then tallied strictly in
    // frame order so the stopping point never depends on the thread count.
    const std::size_t batch = std::max<std::size_t>(64, 16 * threads);
    std::vector<Outcome> outcomes;
    std::uint64_t iter_sum = 0;
    std::size_t done = 0;
    bool stop = false;
    while (!stop && done < max_frames) {
        const std::size_t count = std::min(batch, max_frames - done);
        outcomes.assign(count, Outcome{});
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto work = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                try {
                    outcomes[i] = run_frame(quantizer, ebn0_db,
                                            frame_seed(master_seed, rate_index, ebn0_index, done + i));
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next = count;
                }
            }
        };
        const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
        if (workers <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < workers; ++t) {
                pool.emplace_back(work);
            }
            for (auto& t : pool) {
                t.join();
            }
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
        for (const Outcome& o : outcomes) {
            ++rec.frames;
            iter_sum += static_cast<std::uint64_t>(o.iterations);
            rec.bit_errors += o.bit_errors;
            if (o.frame_error) {
                ++rec.frame_errors;
            }
            if (rec.frame_errors >= min_frame_errors) {
                stop = true;
                break;
            }
        }
        done += count;
    }
    rec.fer = static_cast<double>(rec.frame_errors) / static_cast<double>(rec.frames);
    rec.avg_iters = static_cast<double>(iter_sum) / static_cast<double>(rec.frames);
    return rec;
}

std::vector<FerRecord> run_campaign(const CampaignConfig& config, const PbrlFamily& family,
                                    const DecoderTables* tables, const RecordCallback& on_record)
{
    config.validate();
    const std::vector<double> points = config.sweep.points();
    std::vector<FerRecord> records;
    for (std::size_t ri = 0; ri < config.rates.size(); ++ri) {
        for (const DecoderSpec& spec : config.decoders) {
            const PointSimulator sim(family, config.rates[ri], spec, tables, config.max_iters);
            for (std::size_t ei = 0; ei < points.size(); ++ei) {
                const auto t0 = std::chrono::steady_clock::now();
                FerRecord rec = sim.run_point(points[ei], config.seed, ri, ei, config.max_frames,
                                              config.min_frame_errors, config.threads);
                if (config.record_wall_time) {
                    rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                }
                if (on_record) {
                    on_record(rec);
                }
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

std::vector<FerRecord> run_campaign(const CampaignConfig& config, const RecordCallback& on_record)
{
    config.validate();
    PbrlFamily family;
    try {
        family = config.family_path.empty() ? stand_in_family() : load_family(config.family_path);
    } catch (const ParseError& e) {
        throw ConfigError(std::string("family file: ") + e.what());
    }
    for (const auto& d : config.decoders) {
        if (d.kind == DecoderKind::ib && config.tables_path.empty()) {
            throw ConfigError("the ib decoder needs tables_path");
        }
    }
    std::optional<DecoderTables> tables;
    if (!config.tables_path.empty()) {
        try {
            tables = load_tables(config.tables_path);
        } catch (const ParseError& e) {
            throw ConfigError(std::string("tables file: ") + e.what());
        }
    }
    return run_campaign(config, family, tables ? &*tables : nullptr, on_record);
}

std::string emit_csv(const std::vector<FerRecord>& records)
{
    std::string out(kCsvHeader);
    out += '\n';
    for (const FerRecord& r : records) {
        out += r.decoder;
        out += ',' + format_double(r.rate);
        out += ',' + format_double(r.ebn0_db);
        out += ',' + std::to_string(r.frames);
        out += ',' + std::to_string(r.frame_errors);
        out += ',' + std::to_string(r.bit_errors);
        out += ',' + format_double(r.fer);
        out += ',' + format_double(r.avg_iters);
        out += ',' + format_double(r.wall_s);
        out += ',' + std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

void emit_csv(const std::vector<FerRecord>& records, const std::string& path)
{
    write_file(path, emit_csv(records));
}

std::vector<FerRecord> parse_csv(std::string_view text)
{
    std::vector<FerRecord> records;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw ParseError("CSV header mismatch");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            f.push_back(cell);
        }
        if (f.size() != 10) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 10 fields");
        }
        try {
            FerRecord r;
            r.decoder = f[0];
            r.rate = std::stod(f[1]);
            r.ebn0_db = std::stod(f[2]);
            r.frames = std::stoull(f[3]);
            r.frame_errors = std::stoull(f[4]);
            r.bit_errors = std::stoull(f[5]);
            r.fer = std::stod(f[6]);
            r.avg_iters = std::stod(f[7]);
            r.wall_s = std::stod(f[8]);
            r.seed = std::stoull(f[9]);
            records.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw ParseError("line " + std::to_string(line_no) + ": bad number");
        }
    }
    return records;
}

std::string emit_plot_data(const std::vector<FerRecord>& records)
{
    // series keyed by (decoder, rate) in first-appearance order
    std::vector<std::pair<std::string, double>> keys;
    std::map<std::pair<std::string, double>, std::vector<const FerRecord*>> groups;
    for (const FerRecord& r : records) {
        const auto key = std::make_pair(r.decoder, r.rate);
        if (!groups.count(key)) {
            keys.push_back(key);
        }
        groups[key].push_back(&r);
    }
    json series = json::array();
    for (const auto& key : keys) {
        auto pts = groups[key];
        std::stable_sort(pts.begin(), pts.end(),
                         [](const FerRecord* a, const FerRecord* b) { return a->ebn0_db < b->ebn0_db; });
        json points = json::array();
        for (const FerRecord* p : pts) {
            const WilsonInterval w = wilson_interval(p->frame_errors, p->frames);
            points.push_back({{"ebn0_db", p->ebn0_db},
                              {"fer", p->fer},
                              {"fer_low", w.low},
                              {"fer_high", w.high},
                              {"frames", p->frames},
                              {"frame_errors", p->frame_errors},
                              {"avg_iters", p->avg_iters}});
        }
        series.push_back({{"decoder", key.first}, {"rate", key.second}, {"points", points}});
    }
    return json{{"series", series}}.dump(2) + "\n";
}

void emit_plot_data(const std::vector<FerRecord>& records, const std::string& path)
{
    write_file(path, emit_plot_data(records));
}

std::optional<double> fer_crossing(const std::vector<FerRecord>& series, double target_fer)
{
    if (!(target_fer > 0.0)) {
        throw ParameterError("target FER must be positive");
    }
    std::vector<const FerRecord*> pts;
    for (const auto& r : series) {
        pts.push_back(&r);
    }
    std::sort(pts.begin(), pts.end(), [](const FerRecord* a, const FerRecord* b) { return a->ebn0_db < b->ebn0_db; });
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double f0 = pts[i]->fer;
        const double f1 = pts[i + 1]->fer;
        if (f0 >= target_fer && f1 < target_fer) {
            const double x0 = pts[i]->ebn0_db;
            const double x1 = pts[i + 1]->ebn0_db;
            if (f1 <= 0.0) {
                // no errors at the upper point: interpolate against one error's worth
                const double floor = 1.0 / static_cast<double>(std::max<std::uint64_t>(pts[i + 1]->frames, 1));
                const double l0 = std::log10(f0), l1 = std::log10(std::min(floor, target_fer));
                return x0 + (std::log10(target_fer) - l0) / (l1 - l0) * (x1 - x0);
            }
            const double l0 = std::log10(f0), l1 = std::log10(f1);
            if (l0 == l1) {
                return x0;
            }
            return x0 + (std::log10(target_fer) - l0) / (l1 - l0) * (x1 - x0);
        }
    }
    return std::nullopt;
}

}  // namespace ibldpc
