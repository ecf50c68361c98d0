#ifndef HEMTFIT_DATASETS_HPP
#define HEMTFIT_DATASETS_HPP

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace hemtfit {

using Complex = std::complex<double>;

struct IVRow {
    double vgs = 0.0;
    double vds = 0.0;
    double id = 0.0;
};

/// DC fitting target: (Vgs, Vds, Id) triples.
struct IVDataset {
    std::vector<IVRow> rows;

    bool empty() const { return rows.empty(); }
    std::size_t size() const { return rows.size(); }
};

/// Bias/context metadata attached to an S-parameter table.
struct BiasMetadata {
    std::optional<double> vds;           // volts
    std::optional<double> id;            // amperes
    std::optional<double> temperature_c; // degrees Celsius
};

/// Index of each S-parameter inside SParamEntry::s and the mask.
/// The order matches Touchstone 2-port data order.
enum SIndex : unsigned { kS11 = 0, kS21 = 1, kS12 = 2, kS22 = 3 };

inline constexpr unsigned kMaskAll = 0xF;

struct SParamEntry {
    double freq_hz = 0.0;
    std::array<Complex, 4> s{};
    unsigned mask = kMaskAll; // bit i set = parameter i present

    bool has(SIndex i) const { return (mask >> i) & 1u; }
};

/// RF fitting target: per-frequency 2x2 S-matrices, possibly partial
/// (datasheet tables often list S11 only).
struct SParamDataset {
    BiasMetadata bias;
    std::vector<SParamEntry> entries;

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
    /// Throws Error unless frequencies are strictly ascending.
    void validate() const;
};

/// `vgs,vds,id` text with full-precision decimals.
std::string iv_to_csv(const IVDataset& ds);
IVDataset iv_from_csv(const std::string& text);
void write_iv_csv(const IVDataset& ds, const std::string& path);
IVDataset read_iv_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace hemtfit

#endif
