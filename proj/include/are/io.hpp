#ifndef ARE_IO_HPP
#define ARE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "are/domain.hpp"

namespace are {

enum class FileFormat { Tabular, Binary };

FileFormat parse_format(std::string_view name);
const char* to_string(FileFormat format);
const char* extension(FileFormat format);

enum class IoErrorCode {
    OpenFailed,
    WriteFailed,
    FormatMismatch,   // magic not recognised
    VersionMismatch,  // magic ok, unsupported version
    MalformedHeader,  // header present but unparseable or inconsistent
    Truncated,        // payload shorter than the header promises
    KindMismatch,     // e.g. an ELT file passed to load_yet
    ParseError,       // malformed tabular record
};

const char* to_string(IoErrorCode code);

class IoError : public std::runtime_error {
public:
    IoError(IoErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    IoErrorCode code() const { return code_; }

private:
    IoErrorCode code_;
};

// Layer as stored on disk: ELTs referenced by their index in the dataset.
struct LayerRecord {
    std::string id;
    LayerTerms terms;
    std::vector<std::uint32_t> elts;

    friend bool operator==(const LayerRecord&, const LayerRecord&) = default;
};

// Every loader detects the format from the leading magic bytes.
void save_yet(const YearEventTable& yet, const std::filesystem::path& path, FileFormat format);
YearEventTable load_yet(const std::filesystem::path& path);

void save_elt(const EventLossTable& elt, const std::filesystem::path& path, FileFormat format);
EventLossTable load_elt(const std::filesystem::path& path);

void save_layers(std::span<const LayerRecord> layers, const std::filesystem::path& path,
                 FileFormat format);
std::vector<LayerRecord> load_layers(const std::filesystem::path& path);

void save_ylt(const YearLossTable& ylt, const std::filesystem::path& path, FileFormat format);
YearLossTable load_ylt(const std::filesystem::path& path);

// A YET, its ELTs and the layers over them, stored as
//   <dir>/yet.<ext>, <dir>/elts/elt_NNNNN.<ext>, <dir>/layers.<ext>
struct Dataset {
    YearEventTable yet;
    std::vector<EltRef> elts;
    std::vector<Layer> layers;
};

void save_dataset(const Dataset& data, const std::filesystem::path& dir, FileFormat format);
Dataset load_dataset(const std::filesystem::path& dir);

std::vector<LayerRecord> to_records(std::span<const Layer> layers, std::span<const EltRef> elts);
std::vector<Layer> from_records(std::span<const LayerRecord> records, std::span<const EltRef> elts);

}  // namespace are

#endif  // ARE_IO_HPP
