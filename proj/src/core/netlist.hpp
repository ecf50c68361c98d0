#ifndef HEMTFIT_NETLIST_HPP
#define HEMTFIT_NETLIST_HPP

#include <optional>
#include <string>

#include "device.hpp"
#include "twoport.hpp"

namespace hemtfit::netlist {

struct FitReport {
    double iv_nrmse_pct = 0.0;
    std::optional<double> s_nrmse_pct; // absent when no S data was fitted
    long iterations = 0;

    void validate() const; // nonnegative fields
};

/// Everything a fitted device amounts to: DC surrogate parameters,
/// the small-signal network, and how well they fit.
struct ModelCard {
    std::string device_name;
    device::DCParams dc;
    device::SmallSignalParams rf;
    FitReport fit;
};

/// Deterministic netlist text: a `.subckt <name> g d s` wrapping the
/// extrinsic parasitic network around an intrinsic instance, plus a
/// `.model` line with the DC parameters. Fixed element order, 9
/// significant digits, scientific notation; the fit report rides in
/// the `*` comment header. With `asm_names`, a commented ASM-HEMT
/// style card for the directly mappable parameters is appended.
/// `full_precision` switches to shortest-round-trip decimals; the
/// external-evaluator scratch netlists use it so parameter vectors
/// survive the text hop bit-exactly.
std::string emit_netlist(const ModelCard& card, bool asm_names = false,
                         bool full_precision = false);

/// Exact inverse of emit_netlist up to numeric printing precision.
/// Throws ParseError with the offending line on any schema violation.
ModelCard parse_netlist(const std::string& text);

void write_netlist(const ModelCard& card, const std::string& path, bool asm_names = false);
ModelCard read_netlist(const std::string& path);

} // namespace hemtfit::netlist

#endif
