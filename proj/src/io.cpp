#include "are/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>
#include <unordered_map>

namespace are {

static_assert(std::endian::native == std::endian::little,
              "binary format is little-endian; big-endian hosts need byte swapping");

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kMagic{'A', 'R', 'E', '1'};
constexpr std::string_view kTabularMagic = "#ARE1";
constexpr std::uint16_t kVersion = 1;

enum class Kind : std::uint16_t { Yet = 1, Elt = 2, Layers = 3, Ylt = 4 };

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Yet: return "yet";
        case Kind::Elt: return "elt";
        case Kind::Layers: return "layers";
        case Kind::Ylt: return "ylt";
    }
    return "?";
}

// ---------------------------------------------------------------- numbers

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

template <typename T>
T parse_number(std::string_view s, const std::string& where) {
    T value{};
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw IoError(IoErrorCode::ParseError, where + ": cannot parse '" + std::string(s) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

void check_field(std::string_view s, const char* what) {
    if (s.find_first_of(",;\n\r=") != std::string_view::npos) {
        throw IoError(IoErrorCode::WriteFailed,
                      std::string(what) + " may not contain ',', ';', '=' or newlines");
    }
}

// ---------------------------------------------------------------- writers

class TabularWriter {
public:
    TabularWriter(const fs::path& path, Kind kind,
                  const std::vector<std::pair<std::string, std::string>>& meta,
                  std::string_view columns)
        : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) {
            throw IoError(IoErrorCode::OpenFailed, "cannot open " + path.string() + " for writing");
        }
        out_ << kTabularMagic << ',' << kind_name(kind) << ',' << kVersion;
        for (const auto& [k, v] : meta) {
            out_ << ',' << k << '=' << v;
        }
        out_ << '\n' << columns << '\n';
    }

    std::ofstream& stream() { return out_; }

    void finish() {
        out_.flush();
        if (!out_) {
            throw IoError(IoErrorCode::WriteFailed, "write to " + path_.string() + " failed");
        }
    }

private:
    fs::path path_;
    std::ofstream out_;
};

class BinaryWriter {
public:
    BinaryWriter(const fs::path& path, Kind kind) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) {
            throw IoError(IoErrorCode::OpenFailed, "cannot open " + path.string() + " for writing");
        }
        out_.write(kMagic.data(), kMagic.size());
        put(kVersion);
        put(static_cast<std::uint16_t>(kind));
    }

    template <typename T>
    void put(const T& v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }

    template <typename T>
    void put_array(std::span<const T> v) {
        out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
    }

    void put_string(const std::string& s) {
        put(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

    void finish() {
        out_.flush();
        if (!out_) {
            throw IoError(IoErrorCode::WriteFailed, "write to " + path_.string() + " failed");
        }
    }

private:
    fs::path path_;
    std::ofstream out_;
};

// ---------------------------------------------------------------- readers

class BinaryReader {
public:
    BinaryReader(std::ifstream in, std::uint64_t size, fs::path path)
        : in_(std::move(in)), remaining_(size), path_(std::move(path)) {}

    template <typename T>
    T get() {
        T v{};
        read(reinterpret_cast<char*>(&v), sizeof(T));
        return v;
    }

    template <typename T>
    std::vector<T> get_array(std::uint64_t count) {
        if (count > remaining_ / sizeof(T)) {
            throw IoError(IoErrorCode::Truncated, path_.string() + ": payload shorter than header count");
        }
        std::vector<T> v(static_cast<std::size_t>(count));
        read(reinterpret_cast<char*>(v.data()), v.size() * sizeof(T));
        return v;
    }

    std::string get_string() {
        const auto n = get<std::uint32_t>();
        auto bytes = get_array<char>(n);
        return std::string(bytes.begin(), bytes.end());
    }

    void expect_end() const {
        if (remaining_ != 0) {
            throw IoError(IoErrorCode::MalformedHeader,
                          path_.string() + ": " + std::to_string(remaining_) + " trailing bytes");
        }
    }

private:
    void read(char* dst, std::uint64_t n) {
        if (n > remaining_) {
            throw IoError(IoErrorCode::Truncated, path_.string() + ": unexpected end of file");
        }
        in_.read(dst, static_cast<std::streamsize>(n));
        if (!in_) {
            throw IoError(IoErrorCode::Truncated, path_.string() + ": read failed");
        }
        remaining_ -= n;
    }

    std::ifstream in_;
    std::uint64_t remaining_;
    fs::path path_;
};

struct TabularFile {
    std::map<std::string, std::string, std::less<>> meta;
    std::vector<std::string> lines;  // records only, header rows stripped
    fs::path path;

    const std::string& get(std::string_view key) const {
        auto it = meta.find(key);
        if (it == meta.end()) {
            throw IoError(IoErrorCode::MalformedHeader,
                          path.string() + ": header lacks '" + std::string(key) + "'");
        }
        return it->second;
    }

    template <typename T>
    T get_number(std::string_view key) const {
        try {
            return parse_number<T>(get(key), path.string());
        } catch (const IoError& e) {
            if (e.code() == IoErrorCode::ParseError) {
                throw IoError(IoErrorCode::MalformedHeader, e.what());
            }
            throw;
        }
    }
};

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(IoErrorCode::OpenFailed, "cannot open " + path.string());
    }
    return in;
}

struct Opened {
    FileFormat format;
    std::ifstream in;
    std::uint64_t size;
};

Opened open_detect(const fs::path& path) {
    auto in = open_input(path);
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0);
    std::array<char, 5> head{};
    in.read(head.data(), head.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    in.clear();
    in.seekg(0);
    if (got >= kMagic.size() && std::equal(kMagic.begin(), kMagic.end(), head.begin())) {
        return {FileFormat::Binary, std::move(in), size};
    }
    if (got == kTabularMagic.size() && std::string_view(head.data(), got) == kTabularMagic) {
        return {FileFormat::Tabular, std::move(in), size};
    }
    throw IoError(IoErrorCode::FormatMismatch, path.string() + ": unrecognised magic");
}

BinaryReader binary_reader(Opened opened, const fs::path& path, Kind expected) {
    BinaryReader r(std::move(opened.in), opened.size, path);
    std::array<char, 4> magic{};
    for (auto& c : magic) {
        c = r.get<char>();
    }
    const auto version = r.get<std::uint16_t>();
    if (version != kVersion) {
        throw IoError(IoErrorCode::VersionMismatch,
                      path.string() + ": version " + std::to_string(version) + ", expected " +
                          std::to_string(kVersion));
    }
    const auto kind = r.get<std::uint16_t>();
    if (kind < 1 || kind > 4) {
        throw IoError(IoErrorCode::MalformedHeader, path.string() + ": unknown record kind");
    }
    if (static_cast<Kind>(kind) != expected) {
        throw IoError(IoErrorCode::KindMismatch,
                      path.string() + ": holds '" + kind_name(static_cast<Kind>(kind)) +
                          "', expected '" + kind_name(expected) + "'");
    }
    return r;
}

TabularFile read_tabular(Opened opened, const fs::path& path, Kind expected,
                         std::string_view columns) {
    TabularFile file;
    file.path = path;
    std::string line;
    if (!std::getline(opened.in, line)) {
        throw IoError(IoErrorCode::MalformedHeader, path.string() + ": missing header line");
    }
    const auto fields = split(line, ',');
    if (fields.size() < 3 || fields[0] != kTabularMagic) {
        throw IoError(IoErrorCode::MalformedHeader, path.string() + ": bad header line");
    }
    if (fields[2] != std::to_string(kVersion)) {
        throw IoError(IoErrorCode::VersionMismatch,
                      path.string() + ": version " + std::string(fields[2]));
    }
    if (fields[1] != kind_name(expected)) {
        const bool known = fields[1] == "yet" || fields[1] == "elt" || fields[1] == "layers" ||
                           fields[1] == "ylt";
        throw IoError(known ? IoErrorCode::KindMismatch : IoErrorCode::MalformedHeader,
                      path.string() + ": holds '" + std::string(fields[1]) + "', expected '" +
                          kind_name(expected) + "'");
    }
    for (std::size_t i = 3; i < fields.size(); ++i) {
        const auto eq = fields[i].find('=');
        if (eq == std::string_view::npos) {
            throw IoError(IoErrorCode::MalformedHeader,
                          path.string() + ": header field '" + std::string(fields[i]) + "'");
        }
        file.meta.emplace(std::string(fields[i].substr(0, eq)), std::string(fields[i].substr(eq + 1)));
    }
    if (!std::getline(opened.in, line) || line != columns) {
        throw IoError(IoErrorCode::MalformedHeader,
                      path.string() + ": expected column header '" + std::string(columns) + "'");
    }
    while (std::getline(opened.in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            file.lines.push_back(std::move(line));
        }
    }
    return file;
}

std::vector<std::string_view> record_fields(const TabularFile& f, std::size_t row, std::size_t n) {
    auto fields = split(f.lines[row], ',');
    if (fields.size() != n) {
        throw IoError(IoErrorCode::ParseError, f.path.string() + ": record " + std::to_string(row + 1) +
                                                   " has " + std::to_string(fields.size()) +
                                                   " fields, expected " + std::to_string(n));
    }
    return fields;
}

std::string where(const TabularFile& f, std::size_t row) {
    return f.path.string() + ": record " + std::to_string(row + 1);
}

void put_terms(BinaryWriter& w, const LayerTerms& t) {
    w.put(t.occ_retention);
    w.put(t.occ_limit);
    w.put(t.agg_retention);
    w.put(t.agg_limit);
}

LayerTerms get_layer_terms(BinaryReader& r) {
    LayerTerms t;
    t.occ_retention = r.get<double>();
    t.occ_limit = r.get<double>();
    t.agg_retention = r.get<double>();
    t.agg_limit = r.get<double>();
    return t;
}

constexpr std::string_view kYetColumns = "trial,event,timestamp";
constexpr std::string_view kEltColumns = "event,loss";
constexpr std::string_view kLayerColumns = "layer_id,occ_retention,occ_limit,agg_retention,agg_limit,elts";
constexpr std::string_view kYltColumns = "trial,loss";

}  // namespace

// ---------------------------------------------------------------- public

FileFormat parse_format(std::string_view name) {
    if (name == "tabular" || name == "csv") {
        return FileFormat::Tabular;
    }
    if (name == "binary" || name == "bin") {
        return FileFormat::Binary;
    }
    throw std::invalid_argument("unknown file format '" + std::string(name) + "'");
}

const char* to_string(FileFormat f) { return f == FileFormat::Tabular ? "tabular" : "binary"; }
const char* extension(FileFormat f) { return f == FileFormat::Tabular ? ".csv" : ".bin"; }

const char* to_string(IoErrorCode code) {
    switch (code) {
        case IoErrorCode::OpenFailed: return "open failed";
        case IoErrorCode::WriteFailed: return "write failed";
        case IoErrorCode::FormatMismatch: return "format mismatch";
        case IoErrorCode::VersionMismatch: return "version mismatch";
        case IoErrorCode::MalformedHeader: return "malformed header";
        case IoErrorCode::Truncated: return "truncated payload";
        case IoErrorCode::KindMismatch: return "kind mismatch";
        case IoErrorCode::ParseError: return "parse error";
    }
    return "io error";
}

void save_yet(const YearEventTable& yet, const fs::path& path, FileFormat format) {
    if (format == FileFormat::Binary) {
        BinaryWriter w(path, Kind::Yet);
        w.put(yet.catalog_size());
        w.put(static_cast<std::uint64_t>(yet.trial_count()));
        w.put(static_cast<std::uint64_t>(yet.occurrence_count()));
        w.put_array(yet.offsets());
        static_assert(sizeof(EventId) == sizeof(std::uint32_t));
        w.put_array(yet.events());
        w.put_array(yet.timestamps());
        w.finish();
        return;
    }
    TabularWriter w(path, Kind::Yet,
                    {{"catalog_size", std::to_string(yet.catalog_size())},
                     {"trials", std::to_string(yet.trial_count())}},
                    kYetColumns);
    auto& out = w.stream();
    for (std::size_t i = 0; i < yet.trial_count(); ++i) {
        const auto t = yet.trial(i);
        for (std::size_t d = 0; d < t.size(); ++d) {
            out << i << ',' << t.events[d].value << ',' << format_double(t.timestamps[d]) << '\n';
        }
    }
    w.finish();
}

YearEventTable load_yet(const fs::path& path) {
    auto opened = open_detect(path);
    if (opened.format == FileFormat::Binary) {
        auto r = binary_reader(std::move(opened), path, Kind::Yet);
        const auto catalog = r.get<std::uint32_t>();
        const auto trials = r.get<std::uint64_t>();
        const auto occurrences = r.get<std::uint64_t>();
        if (trials == UINT64_MAX) {
            throw IoError(IoErrorCode::MalformedHeader, path.string() + ": trial count overflow");
        }
        auto offsets = r.get_array<std::uint64_t>(trials + 1);
        if (offsets.front() != 0 || offsets.back() != occurrences ||
            !std::is_sorted(offsets.begin(), offsets.end())) {
            throw IoError(IoErrorCode::MalformedHeader, path.string() + ": inconsistent trial offsets");
        }
        auto events = r.get_array<EventId>(occurrences);
        auto timestamps = r.get_array<double>(occurrences);
        r.expect_end();
        return YearEventTable::from_columns(catalog, std::move(events), std::move(timestamps),
                                            std::move(offsets));
    }
    const auto f = read_tabular(std::move(opened), path, Kind::Yet, kYetColumns);
    const auto catalog = f.get_number<std::uint32_t>("catalog_size");
    const auto trials = f.get_number<std::uint64_t>("trials");
    std::vector<EventId> events;
    std::vector<double> timestamps;
    std::vector<std::uint64_t> offsets{0};
    events.reserve(f.lines.size());
    timestamps.reserve(f.lines.size());
    for (std::size_t row = 0; row < f.lines.size(); ++row) {
        const auto fields = record_fields(f, row, 3);
        const auto w = where(f, row);
        const auto trial = parse_number<std::uint64_t>(fields[0], w);
        if (trial >= trials || trial + 1 < offsets.size()) {
            throw IoError(IoErrorCode::ParseError, w + ": trial index out of order or range");
        }
        while (offsets.size() < trial + 1) {
            offsets.push_back(events.size());
        }
        events.emplace_back(parse_number<std::uint32_t>(fields[1], w));
        timestamps.push_back(parse_number<double>(fields[2], w));
    }
    while (offsets.size() < trials + 1) {
        offsets.push_back(events.size());
    }
    return YearEventTable::from_columns(catalog, std::move(events), std::move(timestamps),
                                        std::move(offsets));
}

void save_elt(const EventLossTable& elt, const fs::path& path, FileFormat format) {
    if (format == FileFormat::Binary) {
        BinaryWriter w(path, Kind::Elt);
        w.put(elt.catalog_size);
        w.put(static_cast<std::uint64_t>(elt.records.size()));
        w.put(elt.terms.exchange_rate);
        w.put(elt.terms.event_retention);
        w.put(elt.terms.event_limit);
        w.put(elt.terms.share);
        std::vector<std::uint32_t> ids;
        std::vector<double> losses;
        ids.reserve(elt.records.size());
        losses.reserve(elt.records.size());
        for (const auto& rec : elt.records) {
            ids.push_back(rec.event.value);
            losses.push_back(rec.loss);
        }
        w.put_array(std::span<const std::uint32_t>(ids));
        w.put_array(std::span<const double>(losses));
        w.finish();
        return;
    }
    TabularWriter w(path, Kind::Elt,
                    {{"catalog_size", std::to_string(elt.catalog_size)},
                     {"exchange_rate", format_double(elt.terms.exchange_rate)},
                     {"event_retention", format_double(elt.terms.event_retention)},
                     {"event_limit", format_double(elt.terms.event_limit)},
                     {"share", format_double(elt.terms.share)}},
                    kEltColumns);
    auto& out = w.stream();
    for (const auto& rec : elt.records) {
        out << rec.event.value << ',' << format_double(rec.loss) << '\n';
    }
    w.finish();
}

EventLossTable load_elt(const fs::path& path) {
    auto opened = open_detect(path);
    EventLossTable elt;
    if (opened.format == FileFormat::Binary) {
        auto r = binary_reader(std::move(opened), path, Kind::Elt);
        elt.catalog_size = r.get<std::uint32_t>();
        const auto n = r.get<std::uint64_t>();
        elt.terms.exchange_rate = r.get<double>();
        elt.terms.event_retention = r.get<double>();
        elt.terms.event_limit = r.get<double>();
        elt.terms.share = r.get<double>();
        const auto ids = r.get_array<std::uint32_t>(n);
        const auto losses = r.get_array<double>(n);
        r.expect_end();
        elt.records.reserve(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            elt.records.push_back({EventId(ids[i]), losses[i]});
        }
        return elt;
    }
    const auto f = read_tabular(std::move(opened), path, Kind::Elt, kEltColumns);
    elt.catalog_size = f.get_number<std::uint32_t>("catalog_size");
    elt.terms.exchange_rate = f.get_number<double>("exchange_rate");
    elt.terms.event_retention = f.get_number<double>("event_retention");
    elt.terms.event_limit = f.get_number<double>("event_limit");
    elt.terms.share = f.get_number<double>("share");
    elt.records.reserve(f.lines.size());
    for (std::size_t row = 0; row < f.lines.size(); ++row) {
        const auto fields = record_fields(f, row, 2);
        const auto w = where(f, row);
        elt.records.push_back({EventId(parse_number<std::uint32_t>(fields[0], w)),
                               parse_number<double>(fields[1], w)});
    }
    return elt;
}

void save_layers(std::span<const LayerRecord> layers, const fs::path& path, FileFormat format) {
    for (const auto& l : layers) {
        check_field(l.id, "layer id");
    }
    if (format == FileFormat::Binary) {
        BinaryWriter w(path, Kind::Layers);
        w.put(static_cast<std::uint64_t>(layers.size()));
        for (const auto& l : layers) {
            w.put_string(l.id);
            put_terms(w, l.terms);
            w.put(static_cast<std::uint64_t>(l.elts.size()));
            w.put_array(std::span<const std::uint32_t>(l.elts));
        }
        w.finish();
        return;
    }
    TabularWriter w(path, Kind::Layers, {{"count", std::to_string(layers.size())}}, kLayerColumns);
    auto& out = w.stream();
    for (const auto& l : layers) {
        out << l.id << ',' << format_double(l.terms.occ_retention) << ','
            << format_double(l.terms.occ_limit) << ',' << format_double(l.terms.agg_retention) << ','
            << format_double(l.terms.agg_limit) << ',';
        for (std::size_t j = 0; j < l.elts.size(); ++j) {
            out << (j ? ";" : "") << l.elts[j];
        }
        out << '\n';
    }
    w.finish();
}

std::vector<LayerRecord> load_layers(const fs::path& path) {
    auto opened = open_detect(path);
    std::vector<LayerRecord> out;
    if (opened.format == FileFormat::Binary) {
        auto r = binary_reader(std::move(opened), path, Kind::Layers);
        const auto count = r.get<std::uint64_t>();
        for (std::uint64_t i = 0; i < count; ++i) {
            LayerRecord l;
            l.id = r.get_string();
            l.terms = get_layer_terms(r);
            l.elts = r.get_array<std::uint32_t>(r.get<std::uint64_t>());
            out.push_back(std::move(l));
        }
        r.expect_end();
        return out;
    }
    const auto f = read_tabular(std::move(opened), path, Kind::Layers, kLayerColumns);
    const auto count = f.get_number<std::uint64_t>("count");
    if (count != f.lines.size()) {
        throw IoError(IoErrorCode::Truncated, path.string() + ": header promises " +
                                                  std::to_string(count) + " layers, found " +
                                                  std::to_string(f.lines.size()));
    }
    for (std::size_t row = 0; row < f.lines.size(); ++row) {
        const auto fields = record_fields(f, row, 6);
        const auto w = where(f, row);
        LayerRecord l;
        l.id = std::string(fields[0]);
        l.terms.occ_retention = parse_number<double>(fields[1], w);
        l.terms.occ_limit = parse_number<double>(fields[2], w);
        l.terms.agg_retention = parse_number<double>(fields[3], w);
        l.terms.agg_limit = parse_number<double>(fields[4], w);
        if (!fields[5].empty()) {
            for (const auto idx : split(fields[5], ';')) {
                l.elts.push_back(parse_number<std::uint32_t>(idx, w));
            }
        }
        out.push_back(std::move(l));
    }
    return out;
}

void save_ylt(const YearLossTable& ylt, const fs::path& path, FileFormat format) {
    check_field(ylt.layer_id, "layer id");
    if (format == FileFormat::Binary) {
        BinaryWriter w(path, Kind::Ylt);
        w.put_string(ylt.layer_id);
        w.put(static_cast<std::uint64_t>(ylt.losses.size()));
        w.put_array(std::span<const double>(ylt.losses));
        w.finish();
        return;
    }
    TabularWriter w(path, Kind::Ylt,
                    {{"layer_id", ylt.layer_id}, {"trials", std::to_string(ylt.losses.size())}},
                    kYltColumns);
    auto& out = w.stream();
    for (std::size_t i = 0; i < ylt.losses.size(); ++i) {
        out << i << ',' << format_double(ylt.losses[i]) << '\n';
    }
    w.finish();
}

YearLossTable load_ylt(const fs::path& path) {
    auto opened = open_detect(path);
    YearLossTable ylt;
    if (opened.format == FileFormat::Binary) {
        auto r = binary_reader(std::move(opened), path, Kind::Ylt);
        ylt.layer_id = r.get_string();
        ylt.losses = r.get_array<double>(r.get<std::uint64_t>());
        r.expect_end();
        return ylt;
    }
    const auto f = read_tabular(std::move(opened), path, Kind::Ylt, kYltColumns);
    ylt.layer_id = f.get("layer_id");
    const auto trials = f.get_number<std::uint64_t>("trials");
    if (trials != f.lines.size()) {
        throw IoError(IoErrorCode::Truncated, path.string() + ": header promises " +
                                                  std::to_string(trials) + " trials, found " +
                                                  std::to_string(f.lines.size()));
    }
    ylt.losses.reserve(f.lines.size());
    for (std::size_t row = 0; row < f.lines.size(); ++row) {
        const auto fields = record_fields(f, row, 2);
        const auto w = where(f, row);
        if (parse_number<std::uint64_t>(fields[0], w) != row) {
            throw IoError(IoErrorCode::ParseError, w + ": trial index out of sequence");
        }
        ylt.losses.push_back(parse_number<double>(fields[1], w));
    }
    return ylt;
}

std::vector<LayerRecord> to_records(std::span<const Layer> layers, std::span<const EltRef> elts) {
    std::unordered_map<const EventLossTable*, std::uint32_t> index;
    for (std::size_t i = 0; i < elts.size(); ++i) {
        index.emplace(elts[i].get(), static_cast<std::uint32_t>(i));
    }
    std::vector<LayerRecord> out;
    out.reserve(layers.size());
    for (const auto& layer : layers) {
        LayerRecord rec{layer.id, layer.terms, {}};
        for (const auto& elt : layer.elts) {
            auto it = index.find(elt.get());
            if (it == index.end()) {
                throw std::invalid_argument("layer '" + layer.id + "' references an ELT outside the dataset");
            }
            rec.elts.push_back(it->second);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<Layer> from_records(std::span<const LayerRecord> records, std::span<const EltRef> elts) {
    std::vector<Layer> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        Layer layer{rec.id, {}, rec.terms};
        for (const auto idx : rec.elts) {
            if (idx >= elts.size()) {
                throw IoError(IoErrorCode::ParseError, "layer '" + rec.id + "' references ELT " +
                                                           std::to_string(idx) + " of " +
                                                           std::to_string(elts.size()));
            }
            layer.elts.push_back(elts[idx]);
        }
        out.push_back(std::move(layer));
    }
    return out;
}

namespace {

fs::path elt_path(const fs::path& dir, std::size_t i, FileFormat format) {
    std::array<char, 16> name{};
    std::snprintf(name.data(), name.size(), "elt_%05zu", i);
    return dir / "elts" / (std::string(name.data()) + extension(format));
}

}  // namespace

void save_dataset(const Dataset& data, const fs::path& dir, FileFormat format) {
    std::error_code ec;
    fs::create_directories(dir / "elts", ec);
    if (ec) {
        throw IoError(IoErrorCode::OpenFailed, "cannot create " + (dir / "elts").string() + ": " + ec.message());
    }
    save_yet(data.yet, dir / (std::string("yet") + extension(format)), format);
    for (std::size_t i = 0; i < data.elts.size(); ++i) {
        save_elt(*data.elts[i], elt_path(dir, i, format), format);
    }
    const auto records = to_records(data.layers, data.elts);
    save_layers(records, dir / (std::string("layers") + extension(format)), format);
}

Dataset load_dataset(const fs::path& dir) {
    FileFormat format;
    if (fs::exists(dir / "yet.bin")) {
        format = FileFormat::Binary;
    } else if (fs::exists(dir / "yet.csv")) {
        format = FileFormat::Tabular;
    } else {
        throw IoError(IoErrorCode::OpenFailed, dir.string() + " holds no yet.bin or yet.csv");
    }
    Dataset data;
    data.yet = load_yet(dir / (std::string("yet") + extension(format)));
    for (std::size_t i = 0;; ++i) {
        const auto p = elt_path(dir, i, format);
        if (!fs::exists(p)) {
            break;
        }
        data.elts.push_back(std::make_shared<const EventLossTable>(load_elt(p)));
    }
    const auto records = load_layers(dir / (std::string("layers") + extension(format)));
    data.layers = from_records(records, data.elts);
    return data;
}

}  // namespace are
