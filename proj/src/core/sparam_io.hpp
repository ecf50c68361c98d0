#ifndef HEMTFIT_SPARAM_IO_HPP
#define HEMTFIT_SPARAM_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include "datasets.hpp"

namespace hemtfit::sparam {

/// One row of a magnitude/angle S-parameter table. Parameters a table
/// does not list stay empty (datasheets often print S11 only).
struct STableRow {
    double freq_hz = 0.0;
    struct Polar {
        double mag = 0.0;
        double angle_deg = 0.0;
    };
    std::array<std::optional<Polar>, 4> s; // indexed by SIndex
};

/// Parses a delimited magnitude/angle table with a header row.
/// Recognized frequency headers: `f`, `freq`, `frequency`, with an
/// optional `(Hz|kHz|MHz|GHz)` unit suffix. S-parameter headers come
/// either suffixed (`S11M`, `S11A`) or as a bare `S11` followed by
/// `Magn.`/`Angle` columns. Lines above the header are scanned for
/// bias metadata (`Ta=25 deg`, `VDS=...`, `ID=...`).
std::pair<std::vector<STableRow>, BiasMetadata> parse_table(const std::string& text);

/// Scans free text for `Ta=.. deg`, `VDS=..`, `ID=..` bias markers.
BiasMetadata scan_bias_text(const std::string& text);

Complex polar_to_complex(double mag, double angle_deg);

/// Assembles rows into per-frequency 2x2 matrices; absent parameters
/// are masked out and never reach the RF objective.
SParamDataset to_sparam_dataset(const std::vector<STableRow>& rows, const BiasMetadata& bias);

enum class TouchstoneFormat { MA, RI };

/// Two-port Touchstone, MA or RI, `# <unit> S <fmt> R <z0>` option
/// line. DB format and port counts other than 2 are rejected.
SParamDataset read_touchstone(const std::string& text);
std::string write_touchstone(const SParamDataset& ds,
                             TouchstoneFormat fmt = TouchstoneFormat::MA);

/// Canonical interchange CSV:
/// `freq_hz,s11_re,s11_im,s21_re,s21_im,s12_re,s12_im,s22_re,s22_im,mask_bits`
/// (mask bit i set = parameter i present, bit order S11,S21,S12,S22).
/// Bias metadata rides in `# key=value` comment lines.
std::string write_canonical_csv(const SParamDataset& ds);
SParamDataset read_canonical_csv(const std::string& text);

/// Loads S-parameter data from any supported container, picking the
/// parser from the content (Touchstone option line, canonical CSV
/// header, or magnitude/angle table).
SParamDataset load_sparam_file(const std::string& path);

} // namespace hemtfit::sparam

#endif
